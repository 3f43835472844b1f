#include "robustkkt/problem_file.hpp"

#include <fstream>
#include <sstream>

namespace robustkkt {

ProblemFileError::ProblemFileError(const std::string& source, std::size_t line, std::size_t column,
                                   const std::string& msg)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t leading_spaces(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  return b == std::string_view::npos ? s.size() : b;
}

class Parser {
 public:
  Parser(std::string source) : source_(std::move(source)) {}

  ProblemSpec run(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const std::string t = trim(raw);
      if (t.empty()) continue;
      if (t[0] == '#') {
        const std::string body = trim(std::string_view(t).substr(1));
        if (body.rfind("note:", 0) == 0) spec_.notes.push_back(trim(std::string_view(body).substr(5)));
        continue;
      }
      if (t.front() == '[') {
        if (t.back() != ']') fail(leading_spaces(raw) + 1, "unterminated section header");
        section_ = trim(std::string_view(t).substr(1, t.size() - 2));
        static const char* known[] = {"problem", "space", "cone", "theta", "omega",
                                      "objectives", "constraints", "options", "fixtures"};
        bool ok = false;
        for (const char* k : known) ok = ok || section_ == k;
        if (!ok) fail(leading_spaces(raw) + 2, "unknown section '" + section_ + "'");
        continue;
      }
      const auto eq = raw.find('=');
      if (eq == std::string::npos) fail(leading_spaces(raw) + 1, "expected 'key = value'");
      if (section_.empty()) fail(1, "entry outside of a section");
      const std::string key = trim(std::string_view(raw).substr(0, eq));
      const std::size_t vcol = eq + 1 + leading_spaces(std::string_view(raw).substr(eq + 1)) + 1;
      entry(key, trim(std::string_view(raw).substr(eq + 1)), vcol);
    }
    finish();
    return std::move(spec_);
  }

 private:
  [[noreturn]] void fail(std::size_t col, const std::string& msg) const {
    throw ProblemFileError(source_, line_, col, msg);
  }

  double number(const std::string& s, std::size_t col) const {
    try {
      return parse_constant(s);
    } catch (const std::exception& e) {
      fail(col, "bad number '" + s + "': " + e.what());
    }
  }

  // Splits on `sep` outside parentheses, brackets and braces.
  static std::vector<std::pair<std::string, std::size_t>> split(const std::string& s, char sep) {
    std::vector<std::pair<std::string, std::size_t>> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const char c = i < s.size() ? s[i] : sep;
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') --depth;
      if ((c == sep && depth == 0) || i == s.size()) {
        const std::string piece = s.substr(start, i - start);
        out.push_back({trim(piece), start + leading_spaces(piece)});
        start = i + 1;
      }
    }
    return out;
  }

  Vec numbers(const std::string& s, std::size_t col) const {
    Vec v;
    for (const auto& [p, off] : split(s, ',')) {
      if (p.empty()) fail(col + off, "empty number");
      v.push_back(number(p, col + off));
    }
    return v;
  }

  static std::string strip(const std::string& s, char open, char close) {
    if (s.size() >= 2 && s.front() == open && s.back() == close) return s.substr(1, s.size() - 2);
    return {};
  }

  Vec tuple(const std::string& s, std::size_t col) const {
    const std::string in = strip(s, '(', ')');
    if (in.empty()) fail(col, "expected a parenthesized tuple");
    return numbers(in, col + 1);
  }

  PolytopeSet polytope_set(const std::string& s, std::size_t col) const {
    PolytopeSet set;
    for (const auto& [comp, off] : split(s, '|')) {
      const std::string in = strip(comp, '{', '}');
      if (in.empty()) fail(col + off, "expected a vertex list '{(..), ..}'");
      std::vector<Vec> verts;
      for (const auto& [t, o2] : split(in, ',')) verts.push_back(tuple(t, col + off + 1 + o2));
      set.components.push_back(make_polytope(std::move(verts)));
    }
    return set;
  }

  Expr expression(const std::string& quoted, std::size_t col) const {
    const std::string text = strip(quoted, '"', '"');
    if (text.empty()) fail(col, "expected a quoted expression");
    if (dim_ == 0) fail(col, "[space] dim must precede expressions");
    try {
      return parse_expr(text, dim_);
    } catch (const ParseError& e) {
      fail(col + 1 + e.position(), e.what());
    } catch (const std::exception& e) {
      fail(col, e.what());
    }
  }

  void entry(const std::string& key, const std::string& value, std::size_t col) {
    if (section_ == "problem") {
      if (key != "name") fail(1, "unknown key '" + key + "' in [problem]");
      spec_.name = value;
    } else if (section_ == "space") {
      if (key != "dim") fail(1, "unknown key '" + key + "' in [space]");
      const double d = number(value, col);
      if (d < 1 || d != std::floor(d) || d > 64) fail(col, "dim must be an integer in 1..64");
      dim_ = static_cast<std::size_t>(d);
    } else if (section_ == "cone") {
      if (key == "signs") {
        std::vector<int> signs;
        for (const auto& [p, off] : split(value, ',')) {
          if (p == "+") signs.push_back(1);
          else if (p == "-") signs.push_back(-1);
          else fail(col + off, "cone sign must be '+' or '-'");
        }
        spec_.cone = ConeSpec::orthant(signs);
      } else if (key == "generators") {
        PolyCone c;
        for (const auto& [p, off] : split(value, ';')) {
          c.generators.push_back(tuple(p, col + off));
          c.lineality.push_back(false);
        }
        c.dim = c.generators.front().size();
        spec_.cone = ConeSpec::generated(c);
      } else {
        fail(1, "unknown key '" + key + "' in [cone]");
      }
      have_cone_ = true;
    } else if (section_ == "theta") {
      if (key != "value") fail(1, "unknown key '" + key + "' in [theta]");
      spec_.theta = numbers(value, col);
    } else if (section_ == "omega") {
      if (key == "kind") {
        if (value != "whole" && value != "box" && value != "halfspaces") {
          fail(col, "omega kind must be whole, box or halfspaces");
        }
        omega_kind_ = value;
      } else if (key == "lo") {
        omega_lo_ = numbers(value, col);
      } else if (key == "hi") {
        omega_hi_ = numbers(value, col);
      } else if (key == "row") {
        const auto le = value.find("<=");
        if (le == std::string::npos) fail(col, "halfspace row must read 'a1, ..., ad <= b'");
        omega_rows_.push_back(numbers(trim(value.substr(0, le)), col));
        omega_rhs_.push_back(number(trim(value.substr(le + 2)), col + le + 2));
      } else {
        fail(1, "unknown key '" + key + "' in [omega]");
      }
    } else if (section_ == "objectives") {
      spec_.objectives.push_back({key, expression(value, col)});
    } else if (section_ == "constraints") {
      const auto close = value.find('"', 1);
      if (value.empty() || value[0] != '"' || close == std::string::npos) {
        fail(col, "expected a quoted expression");
      }
      Expr g = expression(value.substr(0, close + 1), col);
      std::string rest = trim(std::string_view(value).substr(close + 1));
      const std::size_t rcol = col + value.size() - rest.size();
      if (rest.empty() || rest[0] != ',') fail(rcol, "expected ', v in [lo, hi]'");
      rest = trim(std::string_view(rest).substr(1));
      if (rest.rfind("v in", 0) != 0) fail(rcol, "expected 'v in [lo, hi]' or 'v in {..}'");
      const std::string set = trim(std::string_view(rest).substr(4));
      UncertaintySet u;
      try {
        if (!strip(set, '[', ']').empty()) {
          const Vec b = numbers(strip(set, '[', ']'), rcol);
          if (b.size() != 2) fail(rcol, "interval needs two bounds");
          u = UncertaintySet::interval(b[0], b[1]);
        } else if (!strip(set, '{', '}').empty()) {
          u = UncertaintySet::finite(numbers(strip(set, '{', '}'), rcol));
        } else {
          fail(rcol, "expected 'v in [lo, hi]' or 'v in {..}'");
        }
      } catch (const std::invalid_argument& e) {
        fail(rcol, e.what());
      }
      spec_.constraints.push_back({key, std::move(g), std::move(u)});
    } else if (section_ == "options") {
      if (key == "norm") {
        try {
          spec_.norm = parse_norm(value);
        } catch (const std::exception& e) {
          fail(col, e.what());
        }
      } else if (key == "mode") {
        try {
          spec_.mode = parse_mode(value);
        } catch (const std::exception& e) {
          fail(col, e.what());
        }
      } else if (key == "fixtures") {
        if (value != "on" && value != "off") fail(col, "fixtures must be on or off");
        spec_.use_fixtures = value == "on";
      } else if (key == "feasibility_tol") {
        spec_.tol.feasibility = number(value, col);
      } else if (key == "active_tol") {
        spec_.tol.active = number(value, col);
      } else if (key == "kkt_tol") {
        spec_.tol.kkt = number(value, col);
      } else {
        fail(1, "unknown key '" + key + "' in [options]");
      }
    } else if (section_ == "fixtures") {
      const auto at = key.find(" at ");
      if (at == std::string::npos) fail(1, "fixture key must read 'name at (x1, ..., xd)'");
      Fixture fx;
      fx.function = trim(std::string_view(key).substr(0, at));
      fx.point = tuple(trim(std::string_view(key).substr(at + 4)), at + 5);
      fx.set = polytope_set(value, col);
      spec_.fixtures.push_back(std::move(fx));
    }
  }

  void finish() {
    line_ = 0;
    if (dim_ == 0) fail(0, "missing [space] dim");
    if (!have_cone_) fail(0, "missing [cone]");
    spec_.dim = dim_;
    if (spec_.theta.empty()) spec_.theta.assign(spec_.objectives.size(), 0.0);
    try {
      if (omega_kind_ == "box") {
        spec_.omega = OmegaSpec::box(omega_lo_, omega_hi_);
      } else if (omega_kind_ == "halfspaces") {
        spec_.omega = OmegaSpec::halfspaces(omega_rows_, omega_rhs_);
      } else {
        spec_.omega = OmegaSpec::whole(dim_);
      }
      spec_.validate();
    } catch (const std::exception& e) {
      fail(0, e.what());
    }
  }

  std::string source_;
  std::size_t line_ = 0;
  std::string section_;
  std::size_t dim_ = 0;
  bool have_cone_ = false;
  std::string omega_kind_ = "whole";
  Vec omega_lo_, omega_hi_, omega_rhs_;
  std::vector<Vec> omega_rows_;
  ProblemSpec spec_;
};

}  // namespace

ProblemSpec parse_problem(const std::string& text, const std::string& source) {
  return Parser(source).run(text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemFileError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemSpec load_problem(const std::string& path) { return parse_problem(read_file(path), path); }

}  // namespace robustkkt
