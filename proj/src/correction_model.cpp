#include "lsolve/correction_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "lsolve/errors.hpp"
#include "lsolve/grid_io.hpp"

namespace lsolve {

ArchSpec ArchSpec::parse(const std::string& name) {
  std::string base = name;
  int channels = 1;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    base = name.substr(0, colon);
    const std::string ch = name.substr(colon + 1);
    if (ch.size() < 2 || ch[0] != 'c') throw InvalidInput("bad channel suffix in '" + name + "'");
    try {
      channels = std::stoi(ch.substr(1));
    } catch (const std::exception&) {
      throw InvalidInput("bad channel suffix in '" + name + "'");
    }
  }
  ArchSpec spec;
  std::string digits;
  if (base.rfind("conv", 0) == 0) {
    spec.kind = ArchKind::ConvStack;
    digits = base.substr(4);
  } else if (base.rfind("unet", 0) == 0) {
    spec.kind = ArchKind::LinearUNet;
    digits = base.substr(4);
  } else {
    throw InvalidInput("unknown architecture '" + name + "'");
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw InvalidInput("unknown architecture '" + name + "'");
  spec.depth = std::stoi(digits);
  spec.channels = channels;
  if (spec.depth < 1 || spec.depth > 8) throw InvalidInput("architecture depth out of range in '" + name + "'");
  if (spec.channels < 1 || spec.channels > 64) throw InvalidInput("channel count out of range in '" + name + "'");
  return spec;
}

std::string ArchSpec::name() const {
  std::string s = kind_name() + std::to_string(depth);
  if (channels != 1) s += ":c" + std::to_string(channels);
  return s;
}

namespace {

std::vector<ConvLayer> build_graph(const ArchSpec& a) {
  std::vector<ConvLayer> layers;
  auto add = [&](int in, int out, int stride, bool transposed, int level, std::vector<int> inputs) {
    ConvLayer l;
    l.in_ch = in;
    l.out_ch = out;
    l.stride = stride;
    l.transposed = transposed;
    l.level = level;
    l.inputs = std::move(inputs);
    layers.push_back(std::move(l));
    return static_cast<int>(layers.size());  // id of the tensor it writes
  };
  const int c = a.channels;
  if (a.kind == ArchKind::ConvStack) {
    int t = 0;
    for (int d = 0; d < a.depth; ++d) {
      const int in = d == 0 ? 1 : c;
      const int out = d == a.depth - 1 ? 1 : c;
      t = add(in, out, 1, false, 0, {t});
    }
  } else {
    // encoder: enc_0, then (down_l, enc_l) per level; decoder: (up_l, merge_{l-1})
    std::vector<int> enc(a.depth + 1);
    enc[0] = add(1, c, 1, false, 0, {0});
    for (int l = 1; l <= a.depth; ++l) {
      const int down = add(c, c, 2, false, l, {enc[l - 1]});
      enc[l] = add(c, c, 1, false, l, {down});
    }
    int t = enc[a.depth];
    for (int l = a.depth; l >= 1; --l) {
      const int up = add(c, c, 2, true, l, {t});
      t = add(2 * c, l == 1 ? 1 : c, 1, false, l - 1, {up, enc[l - 1]});
    }
  }
  std::size_t off = 0;
  for (auto& l : layers) {
    l.offset = off;
    off += l.weight_count();
  }
  return layers;
}

int level_size(int n, int level) {
  int s = n;
  for (int l = 0; l < level; ++l) s = coarse_size(s);
  return s;
}

Tensor gather_inputs(const std::vector<Tensor>& tensors, const ConvLayer& l) {
  if (l.inputs.size() == 1) return tensors[l.inputs[0]];
  int ch = 0;
  for (int id : l.inputs) ch += tensors[id].channels;
  Tensor cat(ch, tensors[l.inputs[0]].n);
  auto it = cat.data.begin();
  for (int id : l.inputs) it = std::copy(tensors[id].data.begin(), tensors[id].data.end(), it);
  return cat;
}

Tensor forward_layer(const CorrectionModel& m, std::size_t idx, const Tensor& x) {
  const ConvLayer& l = m.layers()[idx];
  int out_n = x.n;
  if (l.stride == 2) out_n = l.transposed ? fine_size(x.n) : coarse_size(x.n);
  Tensor y(l.out_ch, out_n);
  if (l.transposed)
    conv_scatter(x, m.weights(idx), l.stride, false, y);
  else
    conv_gather(x, m.weights(idx), l.stride, false, y);
  return y;
}

const std::vector<std::uint8_t>* mask_for(const std::vector<std::vector<std::uint8_t>>& masks, int n) {
  for (const auto& mk : masks)
    if (mk.size() == static_cast<std::size_t>(n) * n) return &mk;
  return nullptr;
}

void apply_mask(Tensor& t, const std::vector<std::vector<std::uint8_t>>& masks) {
  const auto* mk = mask_for(masks, t.n);
  if (!mk) return;
  for (int c = 0; c < t.channels; ++c) {
    double* p = t.plane(c);
    for (std::size_t k = 0; k < mk->size(); ++k)
      if (!(*mk)[k]) p[k] = 0.0;
  }
}

Field run_forward(const CorrectionModel& m, const Field& w, std::vector<Tensor>& tensors,
                  const std::vector<std::vector<std::uint8_t>>& masks) {
  m.check_grid(w.rows());
  if (w.rows() != w.cols()) throw InvalidInput("correction input must be square");
  tensors.clear();
  tensors.reserve(m.layers().size() + 1);
  tensors.push_back(Tensor::from_field(w));
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const ConvLayer& l = m.layers()[i];
    if (l.inputs.size() == 1) {
      tensors.push_back(forward_layer(m, i, tensors[l.inputs[0]]));
    } else {
      tensors.push_back(forward_layer(m, i, gather_inputs(tensors, l)));
    }
    apply_mask(tensors.back(), masks);
  }
  return tensors.back().to_field();
}

const std::vector<std::vector<std::uint8_t>> kNoMasks;

}  // namespace

std::vector<std::vector<std::uint8_t>> level_masks(const GeometryMask& mask, int levels) {
  std::vector<std::vector<std::uint8_t>> out;
  out.emplace_back(mask.bits().begin(), mask.bits().end());
  int n = mask.n();
  for (int l = 1; l <= levels && n >= 5 && (n - 1) % 2 == 0; ++l) {
    const int m = coarse_size(n);
    std::vector<std::uint8_t> c(static_cast<std::size_t>(m) * m, 0);
    // a coarse cell is interior only when its whole 3x3 fine footprint is
    const auto& f = out.back();
    for (int i = 1; i < m - 1; ++i)
      for (int j = 1; j < m - 1; ++j) {
        std::uint8_t all = 1;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) all &= f[static_cast<std::size_t>(2 * i + a) * n + 2 * j + b];
        c[static_cast<std::size_t>(i) * m + j] = all;
      }
    out.push_back(std::move(c));
    n = m;
  }
  return out;
}

namespace {

}  // namespace

CorrectionModel::CorrectionModel(ArchSpec arch) : arch_(arch), layers_(build_graph(arch)) {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.weight_count();
  params_.assign(total, 0.0);
}

void CorrectionModel::check_grid(int n) const {
  if (n < 3) throw InvalidInput("correction model needs n >= 3");
  if (arch_.kind == ArchKind::LinearUNet && MultigridConfig::max_depth(n) < arch_.depth)
    throw InvalidInput(arch_.name() + " needs n - 1 divisible by 2^" + std::to_string(arch_.depth) +
                       " with a coarsest grid >= 3x3, got n = " + std::to_string(n));
}

Field apply_H(const CorrectionModel& m, const Field& w) {
  std::vector<Tensor> tensors;
  return run_forward(m, w, tensors, kNoMasks);
}

Field apply_H(const CorrectionModel& m, const Field& w, HTape& tape) {
  tape.masks.clear();
  return run_forward(m, w, tape.tensors, kNoMasks);
}

Field apply_H(const CorrectionModel& m, const Field& w, const GeometryMask& mask) {
  if (mask.n() != w.rows()) throw InvalidInput("mask/field dimension mismatch");
  std::vector<Tensor> tensors;
  return run_forward(m, w, tensors, level_masks(mask, m.arch().kind == ArchKind::LinearUNet ? m.arch().depth : 0));
}

Field apply_H(const CorrectionModel& m, const Field& w, const GeometryMask& mask, HTape& tape) {
  if (mask.n() != w.rows()) throw InvalidInput("mask/field dimension mismatch");
  tape.masks = level_masks(mask, m.arch().kind == ArchKind::LinearUNet ? m.arch().depth : 0);
  return run_forward(m, w, tape.tensors, tape.masks);
}

Field apply_H_backward(const CorrectionModel& m, const HTape& tape, const Field& grad_out, std::span<double> grad) {
  const auto& layers = m.layers();
  if (grad.size() != m.params().size()) throw InvalidInput("gradient buffer size mismatch");
  if (tape.tensors.size() != layers.size() + 1) throw InvalidInput("tape does not match model");

  std::vector<Tensor> g(tape.tensors.size());
  for (std::size_t t = 0; t < tape.tensors.size(); ++t) g[t] = Tensor(tape.tensors[t].channels, tape.tensors[t].n);
  g.back() = Tensor::from_field(grad_out);
  if (g.back().n != tape.tensors.back().n) throw InvalidInput("gradient shape mismatch");

  for (std::size_t i = layers.size(); i-- > 0;) {
    const ConvLayer& l = layers[i];
    apply_mask(g[i + 1], tape.masks);
    const Tensor& gy = g[i + 1];
    const Tensor x = gather_inputs(tape.tensors, l);
    auto gw = grad.subspan(l.offset, l.weight_count());
    Tensor gx(x.channels, x.n);
    if (l.transposed) {
      // y(fine) from x(coarse): dW[o][c] = corr(x[c], gy[o]), stored transposed
      std::vector<double> tmp(l.weight_count(), 0.0);
      conv_correlate(x, gy, l.stride, tmp);
      for (int c = 0; c < l.in_ch; ++c)
        for (int o = 0; o < l.out_ch; ++o)
          for (int k = 0; k < 9; ++k)
            gw[9 * (static_cast<std::size_t>(o) * l.in_ch + c) + k] += tmp[9 * (static_cast<std::size_t>(c) * l.out_ch + o) + k];
      conv_gather(gy, m.weights(i), l.stride, true, gx);
    } else {
      conv_correlate(gy, x, l.stride, gw);
      conv_scatter(gy, m.weights(i), l.stride, true, gx);
    }
    // split the concatenated input gradient back onto its sources
    std::size_t pos = 0;
    for (int id : l.inputs) {
      Tensor& dst = g[id];
      for (std::size_t k = 0; k < dst.data.size(); ++k) dst.data[k] += gx.data[pos + k];
      pos += dst.data.size();
    }
  }
  return g[0].to_field();
}

StepCost model_cost(const CorrectionModel& m, int n) {
  m.check_grid(n);
  StepCost c;
  for (const auto& l : m.layers()) {
    const long long s = level_size(n, l.level);
    c.conv_layers += 1;
    c.mul_adds += 9LL * l.in_ch * l.out_ch * s * s;
  }
  return c;
}

CorrectionModel init_model(ArchSpec arch, std::uint64_t seed, Init init) {
  CorrectionModel m(arch);
  if (init == Init::Zeros) return m;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const ConvLayer& l = m.layers()[i];
    std::normal_distribution<double> dist(0.0, 0.1 / std::sqrt(9.0 * l.in_ch));
    for (double& w : m.weights(i)) w = dist(rng);
  }
  return m;
}

CorrectionModel jacobi_cross_model() {
  CorrectionModel m(ArchSpec{ArchKind::ConvStack, 1, 1});
  auto w = m.weights(0);
  w[1] = w[3] = w[5] = w[7] = 0.25;
  return m;
}

void write_model(std::ostream& os, const CorrectionModel& m) {
  const ArchSpec& a = m.arch();
  os << "arch " << a.kind_name() << " depth " << a.depth << " channels " << a.channels << '\n';
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const ConvLayer& l = m.layers()[i];
    os << "layer " << i << " in " << l.in_ch << " out " << l.out_ch << " stride " << l.stride << " transposed "
       << (l.transposed ? 1 : 0) << '\n';
    const auto w = m.weights(i);
    for (std::size_t k = 0; k < w.size(); k += 9) {
      for (std::size_t t = 0; t < 9; ++t) {
        if (t) os << ' ';
        os << format_double(w[k + t]);
      }
      os << '\n';
    }
  }
}

CorrectionModel read_model(std::istream& is) {
  using namespace io_detail;
  LineReader in(is);
  const std::string header = in.next("arch header");
  const auto h = split_ws(header);
  if (h.size() != 6 || h[0] != "arch" || h[2] != "depth" || h[4] != "channels")
    throw ParseError(in.line(), "expected 'arch <name> depth <d> channels <c>'");
  ArchSpec spec;
  if (h[1] == "conv")
    spec.kind = ArchKind::ConvStack;
  else if (h[1] == "unet")
    spec.kind = ArchKind::LinearUNet;
  else
    throw ParseError(in.line(), "unknown architecture '" + std::string(h[1]) + "'");
  spec.depth = static_cast<int>(parse_int(h[3], in.line()));
  spec.channels = static_cast<int>(parse_int(h[5], in.line()));
  if (spec.depth < 1 || spec.depth > 8 || spec.channels < 1 || spec.channels > 64)
    throw ParseError(in.line(), "depth or channel count out of range");

  CorrectionModel m(spec);
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const ConvLayer& l = m.layers()[i];
    const std::string lh = in.next("layer header");
    const auto t = split_ws(lh);
    if (t.size() != 10 || t[0] != "layer" || t[2] != "in" || t[4] != "out" || t[6] != "stride" ||
        t[8] != "transposed")
      throw ParseError(in.line(), "expected 'layer <idx> in <ci> out <co> stride <s> transposed <0|1>'");
    if (parse_int(t[1], in.line()) != static_cast<long>(i) || parse_int(t[3], in.line()) != l.in_ch ||
        parse_int(t[5], in.line()) != l.out_ch || parse_int(t[7], in.line()) != l.stride ||
        parse_int(t[9], in.line()) != (l.transposed ? 1 : 0))
      throw ParseError(in.line(), "layer " + std::to_string(i) + " does not match architecture " + spec.name());
    auto w = m.weights(i);
    for (std::size_t k = 0; k < w.size(); k += 9) {
      const std::string row = in.next("kernel row");
      const auto vals = split_ws(row);
      if (vals.size() != 9) throw ParseError(in.line(), "kernel row needs 9 values");
      for (std::size_t q = 0; q < 9; ++q) w[k + q] = parse_double(vals[q], in.line());
    }
  }
  std::string rest;
  while (in.next_if_any(rest))
    if (!split_ws(rest).empty()) throw ParseError(in.line(), "trailing content after last layer");
  return m;
}

void save_model(const std::string& path, const CorrectionModel& m) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
  write_model(os, m);
}

CorrectionModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return read_model(is);
}

}  // namespace lsolve
