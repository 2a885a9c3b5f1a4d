#include "lsolve/grid_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "lsolve/errors.hpp"

namespace lsolve {

namespace io_detail {

std::string LineReader::next(std::string_view expecting) {
  std::string s;
  if (!next_if_any(s)) throw ParseError(line_ + 1, "unexpected end of file, expected " + std::string(expecting));
  return s;
}

bool LineReader::next_if_any(std::string& out) {
  if (!std::getline(is_, out)) return false;
  ++line_;
  if (!out.empty() && out.back() == '\r') out.pop_back();
  return true;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> toks;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
    const std::size_t start = k;
    while (k < s.size() && s[k] != ' ' && s[k] != '\t') ++k;
    if (k > start) toks.push_back(s.substr(start, k - start));
  }
  return toks;
}

double parse_double(std::string_view tok, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "malformed number '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
  return v;
}

long parse_int(std::string_view tok, int line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "malformed integer '" + std::string(tok) + "'");
  return v;
}

}  // namespace io_detail

using io_detail::LineReader;
using io_detail::parse_double;
using io_detail::parse_int;
using io_detail::split_ws;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_rows(std::ostream& os, const Field& u) {
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(u(i, j));
    }
    os << '\n';
  }
}

Field read_rows(LineReader& in, int n, std::string_view what) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const std::string line = in.next(what);
    const auto toks = split_ws(line);
    if (toks.size() != static_cast<std::size_t>(n))
      throw ParseError(in.line(), std::string(what) + " row has " + std::to_string(toks.size()) +
                                      " values, expected " + std::to_string(n));
    for (auto t : toks) vals.push_back(parse_double(t, in.line()));
  }
  return Field(n, n, std::move(vals));
}

void expect_blank(LineReader& in) {
  const std::string line = in.next("blank separator line");
  if (!split_ws(line).empty()) throw ParseError(in.line(), "expected blank separator line");
}

void expect_end(LineReader& in) {
  std::string rest;
  while (in.next_if_any(rest))
    if (!split_ws(rest).empty()) throw ParseError(in.line(), "trailing content after end of data");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open '" + path + "'");
  return is;
}

}  // namespace

void write_field(std::ostream& os, const Field& u) {
  os << u.rows() << ' ' << u.cols() << '\n';
  write_rows(os, u);
}

Field read_field(std::istream& is) {
  LineReader in(is);
  const std::string header = in.next("header 'n n'");
  const auto toks = split_ws(header);
  if (toks.size() != 2) throw ParseError(in.line(), "header must be 'n n'");
  const long rows = parse_int(toks[0], in.line());
  const long cols = parse_int(toks[1], in.line());
  if (rows != cols || rows <= 0) throw ParseError(in.line(), "field must be square with positive n");
  Field u = read_rows(in, static_cast<int>(rows), "field");
  expect_end(in);
  return u;
}

void save_field(const std::string& path, const Field& u) {
  auto os = open_out(path);
  write_field(os, u);
}

Field load_field(const std::string& path) {
  auto is = open_in(path);
  return read_field(is);
}

void write_problem(std::ostream& os, const Problem& p) {
  const int n = p.n();
  os << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) os << ' ';
      os << (p.mask().interior(i, j) ? '1' : '0');
    }
    os << '\n';
  }
  os << '\n';
  write_rows(os, p.b());
  os << '\n';
  write_rows(os, p.f());
  os << "h " << format_double(p.h()) << '\n';
}

Problem read_problem(std::istream& is) {
  LineReader in(is);
  const std::string header = in.next("header 'n'");
  const auto htoks = split_ws(header);
  if (htoks.size() != 1) throw ParseError(in.line(), "header must be 'n'");
  const long n = parse_int(htoks[0], in.line());
  if (n < 3) throw ParseError(in.line(), "n must be at least 3");

  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(n) * n);
  for (long i = 0; i < n; ++i) {
    const std::string line = in.next("mask row");
    const auto toks = split_ws(line);
    if (toks.size() != static_cast<std::size_t>(n))
      throw ParseError(in.line(), "mask row has " + std::to_string(toks.size()) + " entries, expected " +
                                      std::to_string(n));
    for (auto t : toks) {
      if (t != "0" && t != "1") throw ParseError(in.line(), "mask entries must be 0 or 1");
      bits.push_back(t == "1" ? 1 : 0);
    }
  }
  const int mask_end_line = in.line();
  expect_blank(in);
  Field b = read_rows(in, static_cast<int>(n), "b");
  expect_blank(in);
  Field f = read_rows(in, static_cast<int>(n), "f");

  const std::string hline = in.next("'h <value>'");
  const auto ht = split_ws(hline);
  if (ht.size() != 2 || ht[0] != "h") throw ParseError(in.line(), "expected 'h <value>'");
  const double h = parse_double(ht[1], in.line());
  if (h <= 0.0) throw ParseError(in.line(), "h must be positive");
  expect_end(in);

  GeometryMask mask;
  try {
    mask = GeometryMask(static_cast<int>(n), std::move(bits));
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(std::string("mask block ending at line ") + std::to_string(mask_end_line) + ": " +
                             e.what());
  }
  return Problem(std::move(mask), std::move(b), std::move(f), h);
}

void save_problem(const std::string& path, const Problem& p) {
  auto os = open_out(path);
  write_problem(os, p);
}

Problem load_problem(const std::string& path) {
  auto is = open_in(path);
  return read_problem(is);
}

}  // namespace lsolve
