#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lsolve/grid.hpp"

namespace lsolve {

// Field file:   "n n", then n rows of n numbers.
// Problem file: "n", mask rows (0/1), blank, b rows, blank, f rows, "h <value>".
// Numbers are written with 17 significant digits so text survives a round trip.

void write_field(std::ostream& os, const Field& u);
Field read_field(std::istream& is);
void save_field(const std::string& path, const Field& u);
Field load_field(const std::string& path);

void write_problem(std::ostream& os, const Problem& p);
Problem read_problem(std::istream& is);
void save_problem(const std::string& path, const Problem& p);
Problem load_problem(const std::string& path);

std::string format_double(double v);

namespace io_detail {

/// Line reader that tracks 1-based line numbers for ParseError.
class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}
  /// Next line; throws ParseError at end of input.
  std::string next(std::string_view expecting);
  bool next_if_any(std::string& out);
  int line() const { return line_; }

 private:
  std::istream& is_;
  int line_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view s);
double parse_double(std::string_view tok, int line);
long parse_int(std::string_view tok, int line);

}  // namespace io_detail

}  // namespace lsolve
