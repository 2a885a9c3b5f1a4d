#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsolve/conv.hpp"
#include "lsolve/grid.hpp"
#include "lsolve/iterators.hpp"

namespace lsolve {

enum class ArchKind { ConvStack, LinearUNet };

struct ArchSpec {
  ArchKind kind = ArchKind::ConvStack;
  int depth = 3;     // conv layers for ConvStack, sub-sampling levels for LinearUNet
  int channels = 1;  // hidden width

  /// "conv1".."convN", "unet2", "unet3", ... with optional ":c<channels>" suffix.
  static ArchSpec parse(const std::string& name);
  std::string name() const;
  /// Identifier written on the model file header line.
  std::string kind_name() const { return kind == ArchKind::ConvStack ? "conv" : "unet"; }

  bool operator==(const ArchSpec&) const = default;
};

/// One bias-free 3x3 layer. Weights live in the owning model's flat parameter
/// vector at [offset, offset + 9 * in_ch * out_ch), laid out [out][in][3][3].
struct ConvLayer {
  int in_ch = 1;
  int out_ch = 1;
  int stride = 1;
  bool transposed = false;
  int level = 0;            // resolution level whose cells the layer's mul-adds run over
  std::vector<int> inputs;  // tensor ids, concatenated along channels
  std::size_t offset = 0;

  std::size_t weight_count() const { return 9ull * in_ch * out_ch; }
};

/// Linear correction operator H: a bias-free, activation-free network.
/// Tensor 0 is the input; layer i writes tensor i + 1; the last tensor is the output.
class CorrectionModel {
 public:
  CorrectionModel() = default;
  /// All-zero weights with the layer graph of `arch`.
  explicit CorrectionModel(ArchSpec arch);

  const ArchSpec& arch() const { return arch_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weights(std::size_t layer) {
    return std::span<double>(params_).subspan(layers_[layer].offset, layers_[layer].weight_count());
  }
  std::span<const double> weights(std::size_t layer) const {
    return std::span<const double>(params_).subspan(layers_[layer].offset, layers_[layer].weight_count());
  }

  /// Throws InvalidInput when the architecture cannot run on an n x n grid.
  void check_grid(int n) const;

  bool operator==(const CorrectionModel& other) const {
    return arch_ == other.arch_ && params_ == other.params_;
  }

 private:
  ArchSpec arch_;
  std::vector<ConvLayer> layers_;
  std::vector<double> params_;
};

/// Activations saved by a forward pass for the reverse pass.
struct HTape {
  std::vector<Tensor> tensors;
  std::vector<std::vector<std::uint8_t>> masks;
};

/// Geometry-free forward pass.
Field apply_H(const CorrectionModel& m, const Field& w);
Field apply_H(const CorrectionModel& m, const Field& w, HTape& tape);

/// Forward pass that zeroes every layer output on the non-interior cells of
/// its resolution. Coarse masks are injections of the fine mask, as in the
/// multigrid hierarchy. Still linear in w for a fixed geometry.
Field apply_H(const CorrectionModel& m, const Field& w, const GeometryMask& mask);
Field apply_H(const CorrectionModel& m, const Field& w, const GeometryMask& mask, HTape& tape);

/// The fine mask followed by up to `levels` injected coarse masks.
std::vector<std::vector<std::uint8_t>> level_masks(const GeometryMask& mask, int levels);

/// Given dL/dH(w), accumulates dL/dweights into grad (same layout as params())
/// and returns dL/dw.
Field apply_H_backward(const CorrectionModel& m, const HTape& tape, const Field& grad_out, std::span<double> grad);

/// Sum over layers of 9 * in * out * (cells at the layer's resolution).
StepCost model_cost(const CorrectionModel& m, int n);

enum class Init { Gaussian, Zeros };

/// Gaussian weights with standard deviation 0.1 / sqrt(fan_in), fan_in = 9 * in_ch.
CorrectionModel init_model(ArchSpec arch, std::uint64_t seed, Init init = Init::Gaussian);

/// Single layer holding the Jacobi cross kernel; G * H then equals the Jacobi
/// linear part, so the wrapped iterator performs two Jacobi sweeps per step.
CorrectionModel jacobi_cross_model();

// Model file: "arch <conv|unet> depth <d> channels <c>", then per layer
// "layer <idx> in <ci> out <co> stride <s> transposed <0|1>" and ci*co lines of
// 9 numbers (row-major 3x3), ordered by output channel then input channel.
void write_model(std::ostream& os, const CorrectionModel& m);
CorrectionModel read_model(std::istream& is);
void save_model(const std::string& path, const CorrectionModel& m);
CorrectionModel load_model(const std::string& path);

}  // namespace lsolve
