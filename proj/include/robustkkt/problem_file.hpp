#pragma once

#include <stdexcept>
#include <string>

#include "robustkkt/problem.hpp"

namespace robustkkt {

/// Syntax or validation error in a problem file; line and column are 1-based
/// (column 0 when the error concerns the file as a whole).
class ProblemFileError : public std::runtime_error {
 public:
  ProblemFileError(const std::string& source, std::size_t line, std::size_t column, const std::string& msg);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

/// Parses the sectioned text format:
///
///   [problem]      name = ...
///   [space]        dim = 2
///   [cone]         signs = -, +, +   |  generators = (1, 0); (1, 1)
///   [theta]        value = 0, 0, 3/2
///   [omega]        kind = whole | box | halfspaces; lo/hi = ...; row = a, b <= c
///   [objectives]   f1 = "5*abs(x1) - (2/5)*x2 + 4/5"
///   [constraints]  g1 = "...", v in [-1, -1/4]   (or v in {a, b, c})
///   [options]      norm, mode, fixtures = on|off, feasibility_tol, active_tol, kkt_tol
///   [fixtures]     f3 at (0, 0) = {(-1/2, 1), (1/2, 1)} | {(-1/2, -1), (1/2, -1)}
///
/// Lines starting with '#' are comments; "# note:" comments are kept as notes.
ProblemSpec parse_problem(const std::string& text, const std::string& source = "<input>");
ProblemSpec load_problem(const std::string& path);

/// Reads a whole file; throws ProblemFileError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace robustkkt
