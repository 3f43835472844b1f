#include "robustkkt/lp.hpp"

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace robustkkt {

void LinearProgram::add_row(Vec coeffs, RowSense s, double b) {
  if (coeffs.size() != num_vars) {
    throw DimensionError("LP row has " + std::to_string(coeffs.size()) + " entries, expected " +
                         std::to_string(num_vars));
  }
  rows.push_back(std::move(coeffs));
  sense.push_back(s);
  rhs.push_back(b);
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

namespace {

double to_double(double x) { return x; }
double to_double(const mpq_class& x) { return x.get_d(); }

template <typename T>
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const LpOptions& opt)
      : m_(lp.rows.size()), n_(lp.num_vars), opt_(opt), tol_(opt.exact ? 0.0 : opt.tol),
        piv_tol_(opt.exact ? 0.0 : opt.pivot_tol) {
    // Columns: original | slack/surplus | artificial | rhs
    std::size_t slacks = 0;
    for (auto s : lp.sense) slacks += s == RowSense::Equal ? 0 : 1;
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + m_;
    width_ = cols_ + 1;
    a_.assign((m_ + 1) * width_, T(0));
    basis_.assign(m_, 0);

    std::size_t slack = n_;
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = lp.rhs[i] < 0.0;
      const T sign = flip ? T(-1) : T(1);
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * T(lp.rows[i][j]);
      at(i, cols_) = sign * T(lp.rhs[i]);
      RowSense s = lp.sense[i];
      if (flip && s != RowSense::Equal) {
        s = s == RowSense::LessEq ? RowSense::GreaterEq : RowSense::LessEq;
      }
      if (s == RowSense::LessEq) {
        at(i, slack) = T(1);
        basis_[i] = slack++;
        artificial_used_.push_back(false);
      } else {
        if (s == RowSense::GreaterEq) at(i, slack++) = T(-1);
        at(i, art_begin_ + i) = T(1);
        basis_[i] = art_begin_ + i;
        artificial_used_.push_back(true);
      }
    }
    objective_.assign(n_, 0.0);
    for (std::size_t j = 0; j < lp.objective.size() && j < n_; ++j) objective_[j] = lp.objective[j];
  }

  LpResult solve() {
    LpResult res;
    // Phase 1: maximize -sum(artificials).
    bool any_art = false;
    for (std::size_t i = 0; i < m_; ++i) any_art = any_art || artificial_used_[i];
    if (any_art) {
      std::vector<T> c(cols_, T(0));
      for (std::size_t i = 0; i < m_; ++i) {
        if (artificial_used_[i]) c[art_begin_ + i] = T(-1);
      }
      load_objective(c);
      const LpStatus st = iterate(cols_);
      res.pivots = pivots_;
      if (st == LpStatus::IterationLimit) {
        res.status = st;
        return res;
      }
      // Phase 1 optimum is -sum(artificials).
      if (to_double(obj(cols_)) > tol_ * std::max<double>(1.0, static_cast<double>(m_))) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      drive_out_artificials();
    }
    std::vector<T> c(cols_, T(0));
    for (std::size_t j = 0; j < n_; ++j) c[j] = T(objective_[j]);
    load_objective(c);
    const LpStatus st = iterate(art_begin_);
    res.pivots = pivots_;
    res.status = st;
    if (st != LpStatus::Optimal) return res;
    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, to_double(at(i, cols_)));
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n_; ++j) z += objective_[j] * res.x[j];
    res.objective = z;
    return res;
  }

 private:
  T& at(std::size_t i, std::size_t j) { return a_[i * width_ + j]; }
  T& obj(std::size_t j) { return a_[m_ * width_ + j]; }

  bool positive(const T& x) const { return to_double(x) > tol_ || (tol_ == 0.0 && x > 0); }

  void load_objective(const std::vector<T>& c) {
    for (std::size_t j = 0; j < cols_; ++j) obj(j) = c[j];
    obj(cols_) = T(0);
    for (std::size_t i = 0; i < m_; ++i) {
      const T f = obj(basis_[i]);
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) obj(j) -= f * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    const T p = at(r, e);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      T& head = a_[i * width_ + e];
      if (head == 0) continue;
      const T f = head;
      for (std::size_t j = 0; j <= cols_; ++j) a_[i * width_ + j] -= f * at(r, j);
      if constexpr (std::is_same_v<T, double>) a_[i * width_ + e] = 0.0;
    }
    basis_[r] = e;
    ++pivots_;
  }

  // Columns >= limit are never entered.
  LpStatus iterate(std::size_t limit) {
    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
      if (pivots_ >= opt_.max_pivots) return LpStatus::IterationLimit;
      std::size_t e = limit;
      double best = 0.0;
      for (std::size_t j = 0; j < limit; ++j) {
        if (!positive(obj(j))) continue;
        if (bland) {
          e = j;
          break;
        }
        const double dj = to_double(obj(j));
        if (dj > best) {
          best = dj;
          e = j;
        }
      }
      if (e == limit) return LpStatus::Optimal;

      std::size_t r = m_;
      T best_ratio(0);
      for (std::size_t i = 0; i < m_; ++i) {
        const T& aie = at(i, e);
        if (!(to_double(aie) > piv_tol_ || (piv_tol_ == 0.0 && aie > 0))) continue;
        const T ratio = at(i, cols_) / aie;
        if (r == m_ || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[r])) {
          r = i;
          best_ratio = ratio;
        }
      }
      if (r == m_) return LpStatus::Unbounded;
      const bool degenerate = to_double(at(r, cols_)) <= tol_ && !(tol_ == 0.0 && at(r, cols_) > 0);
      degenerate_run = degenerate ? degenerate_run + 1 : 0;
      if (degenerate_run > 20) bland = true;
      pivot(r, e);
      if constexpr (std::is_same_v<T, double>) {
        for (std::size_t i = 0; i < m_; ++i) {
          if (at(i, cols_) < 0.0 && at(i, cols_) > -tol_) at(i, cols_) = 0.0;
        }
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      std::size_t best = art_begin_;
      double mag = 0.0;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        const double v = std::abs(to_double(at(i, j)));
        if ((piv_tol_ == 0.0 ? at(i, j) != 0 : v > piv_tol_) && v > mag) {
          mag = v;
          best = j;
        }
      }
      if (best < art_begin_) {
        pivot(i, best);
      } else {
        // Redundant row: zero it so it never constrains phase 2.
        for (std::size_t j = 0; j <= cols_; ++j) at(i, j) = T(0);
        at(i, basis_[i]) = T(1);
      }
    }
  }

  std::size_t m_, n_;
  LpOptions opt_;
  double tol_, piv_tol_;
  std::size_t art_begin_ = 0, cols_ = 0, width_ = 0;
  std::vector<T> a_;
  std::vector<std::size_t> basis_;
  std::vector<bool> artificial_used_;
  Vec objective_;
  std::size_t pivots_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt) {
  if (lp.rows.size() != lp.sense.size() || lp.rows.size() != lp.rhs.size()) {
    throw std::invalid_argument("LP rows, senses and right-hand sides differ in length");
  }
  for (const auto& r : lp.rows) {
    if (r.size() != lp.num_vars) throw DimensionError("LP row length mismatch");
  }
  for (const auto& r : lp.rows) {
    for (double v : r) {
      if (!std::isfinite(v)) throw std::invalid_argument("LP coefficient is not finite");
    }
  }
  if (opt.exact) return Tableau<mpq_class>(lp, opt).solve();
  return Tableau<double>(lp, opt).solve();
}

}  // namespace robustkkt
