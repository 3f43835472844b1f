#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustkkt/linalg.hpp"
#include "robustkkt/lp.hpp"

namespace robustkkt {

inline constexpr double kVertexDedupTol = 1e-12;

/// Convex polytope in vertex representation.
struct Polytope {
  std::vector<Vec> vertices;

  std::size_t dim() const { return vertices.empty() ? 0 : vertices.front().size(); }
  static Polytope point(Vec p) { return Polytope{{std::move(p)}}; }
};

/// Finite union of convex polytopes.
struct PolytopeSet {
  std::vector<Polytope> components;

  std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
  std::size_t vertex_count() const;
  static PolytopeSet single(Polytope p) { return PolytopeSet{{std::move(p)}}; }
  static PolytopeSet point(Vec p) { return single(Polytope::point(std::move(p))); }
};

/// Finitely generated cone; lineality generators contribute both signs. No
/// generators means the trivial cone {0}.
struct PolyCone {
  std::size_t dim = 0;
  std::vector<Vec> generators;
  std::vector<bool> lineality;

  static PolyCone zero(std::size_t d) { return PolyCone{d, {}, {}}; }
  static PolyCone whole(std::size_t d);
  bool is_zero() const { return generators.empty(); }
};

/// Cone K on the objective space.
struct ConeSpec {
  enum class Kind { SignOrthant, Generators };
  Kind kind = Kind::SignOrthant;
  std::vector<int> signs;  ///< +1 for y_j >= 0, -1 for y_j <= 0
  PolyCone cone;           ///< used when kind == Generators

  static ConeSpec orthant(std::vector<int> signs);
  static ConeSpec generated(PolyCone c);
  std::size_t dim() const { return kind == Kind::SignOrthant ? signs.size() : cone.dim; }
  PolyCone to_polycone() const;
  bool contains(std::span<const double> y, double tol = 1e-12) const;
  bool is_pointed() const;
};

/// Ground set Omega.
struct OmegaSpec {
  enum class Kind { Whole, Box, Halfspaces };
  Kind kind = Kind::Whole;
  std::size_t dim = 0;
  Vec lo, hi;             ///< box bounds (may be infinite)
  std::vector<Vec> rows;  ///< halfspaces rows[k] . x <= rhs[k]
  Vec rhs;

  static OmegaSpec whole(std::size_t d);
  static OmegaSpec box(Vec lo, Vec hi);
  static OmegaSpec halfspaces(std::vector<Vec> rows, Vec rhs);
  bool contains(std::span<const double> x, double tol = 1e-9) const;
};

enum class Norm { L1, L2, Linf };
enum class BallMode { Inner, Outer };

Norm parse_norm(const std::string& s);
const char* to_string(Norm n);
double norm_value(Norm n, std::span<const double> x);
/// Norm dual to n, evaluated exactly.
double dual_norm_value(Norm n, std::span<const double> x);

/// Builds a polytope after removing near-duplicate vertices.
Polytope make_polytope(std::vector<Vec> vertices);

PolytopeSet minkowski_sum(const PolytopeSet& a, const PolytopeSet& b);
Polytope minkowski_sum(const Polytope& a, const Polytope& b);
PolytopeSet scale(const PolytopeSet& a, double c);
Polytope scale(const Polytope& a, double c);
PolytopeSet union_of(const PolytopeSet& a, const PolytopeSet& b);

/// Convex hull reduced to extreme points, sorted lexicographically.
Polytope hull(const Polytope& a);
Polytope hull(const PolytopeSet& a);
/// Applies hull() to every component and drops duplicate components.
PolytopeSet reduce(const PolytopeSet& a);

double support(const Polytope& a, std::span<const double> dir);
double support(const PolytopeSet& a, std::span<const double> dir);

/// LP membership with slack tol in each coordinate.
bool contains(const Polytope& a, std::span<const double> p, double tol = 1e-9);
bool contains(const PolytopeSet& a, std::span<const double> p, double tol = 1e-9);
bool contains(const PolyCone& c, std::span<const double> p, double tol = 1e-9);
/// Every vertex of every component of a lies in b (b taken componentwise).
bool is_subset(const PolytopeSet& a, const PolytopeSet& b, double tol = 1e-9);
bool same_vertices(const Polytope& a, const Polytope& b, double tol = kVertexDedupTol);

struct ZeroInSumWitness {
  std::vector<std::size_t> selection;      ///< chosen component per part
  std::vector<std::vector<double>> weights;  ///< convex weights per part
  std::vector<Vec> points;                 ///< resulting element of each part
  std::vector<double> cone_coeffs;         ///< signed for lineality generators
  Vec cone_point;
  double residual = 0.0;                   ///< ||sum points + cone_point||_2
};

struct ZeroInSumResult {
  bool sat = false;
  std::size_t selections_tried = 0;
  std::optional<ZeroInSumWitness> witness;
};

/// Decides 0 in parts[0] + ... + parts[k-1] + cone.
ZeroInSumResult zero_in_sum(const std::vector<PolytopeSet>& parts,
                            const std::optional<PolyCone>& cone, const LpOptions& lp = {});

/// Unit ball of the norm dual to `primal`. Exact for l1/linf; for l2 a polygon
/// with m vertices (d=2, inscribed or circumscribed per mode) or a latitude
/// longitude grid on the sphere (d=3, inscribed only).
Polytope dual_ball(Norm primal, std::size_t d, std::size_t m = 64, BallMode mode = BallMode::Inner);
/// Inscribed polytope for the primal unit ball.
Polytope primal_ball(Norm primal, std::size_t d, std::size_t m = 64);

PolyCone normal_cone(const OmegaSpec& omega, std::span<const double> x, double tol = 1e-9);
PolyCone dual_cone(const PolyCone& c);
ConeSpec dual_cone(const ConeSpec& k);

}  // namespace robustkkt
