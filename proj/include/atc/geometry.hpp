#pragma once

// Nested square domains, lattice index sets and finite-difference stencils.
//
// All domains are integer multiples of the reference square [-1,1]^2, so a
// domain is fully described by its half-width and inscribed radii equal
// half-widths.  Sites are ordered lexicographically, y-major then x.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace atc {

constexpr int kDim = 2;

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct Site {
  int x = 0;
  int y = 0;

  friend Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y}; }
  friend Site operator-(Site a, Site b) { return {a.x - b.x, a.y - b.y}; }
  friend Site operator-(Site a) { return {-a.x, -a.y}; }
  friend bool operator==(Site a, Site b) = default;
  // y-major lexicographic order
  friend std::strong_ordering operator<=>(Site a, Site b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }

  int norm_inf() const { return std::max(std::abs(x), std::abs(y)); }
  double norm() const { return std::hypot(double(x), double(y)); }
  Vec2 vec() const { return {double(x), double(y)}; }
};

std::string to_string(Site s);

// The offsets a site energy may depend on, closed under negation.
class InteractionRange {
 public:
  explicit InteractionRange(std::vector<Site> offsets);

  static InteractionRange nearest_neighbour();
  static InteractionRange nearest_and_next_nearest();

  std::span<const Site> offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  const Site& operator[](std::size_t k) const { return offsets_[k]; }
  double r_cut() const { return r_cut_; }
  // largest |rho|_inf; the width of one application of the interior operator
  int reach() const { return reach_; }
  // position of -rho in offsets()
  std::size_t opposite(std::size_t k) const { return opposite_[k]; }

 private:
  std::vector<Site> offsets_;
  std::vector<std::size_t> opposite_;
  double r_cut_ = 0.0;
  int reach_ = 0;
};

enum class DomainTag { core, a, c, o };

class DomainGeometry {
 public:
  DomainGeometry(int R_core, int psi_a, int kappa, InteractionRange range);

  int R_core() const { return R_core_; }
  int psi_a() const { return psi_a_; }
  int kappa() const { return kappa_; }
  const InteractionRange& range() const { return range_; }

  // inscribed radii, which for squares are the half-widths
  int r_core() const { return R_core_; }
  int r_a() const { return psi_a_ * R_core_; }
  int r_c() const { return r_c_; }
  // half-width of 2 psi_a Omega_core, the outer edge of the extended overlap
  int r_o_ex() const { return 2 * psi_a_ * R_core_; }
  int R_a() const { return r_a(); }
  // half the diameter of Omega_c
  double R_c() const { return std::sqrt(2.0) * r_c_; }

  bool in_core(const Vec2& x) const;        // closed core square
  bool in_atomistic(const Vec2& x) const;   // closed Omega_a
  bool in_domain(const Vec2& x) const;      // closed Omega
  bool in_overlap(const Vec2& x) const;     // Omega_a minus the open core
  bool in_overlap_ex(const Vec2& x) const;  // 2 psi_a Omega_core minus the open core

 private:
  int R_core_;
  int psi_a_;
  int kappa_;
  int r_c_;
  InteractionRange range_;
};

// Throws ConstraintViolation naming the first violated inequality.
DomainGeometry build_domains(int R_core, int psi_a, int kappa, const InteractionRange& range);

// A finite set of lattice sites together with its atomistic interior,
// double interior and boundary layer with respect to an interaction range.
class LatticeIndex {
 public:
  // Sites are given in any order; they are sorted and deduplicated.
  LatticeIndex(std::vector<Site> sites, const InteractionRange& range);

  // [-half, half]^2 with the hole (-hole, hole)^2 removed when hole > 0.
  static LatticeIndex square(int half, const InteractionRange& range, int hole = 0);

  std::size_t size() const { return sites_.size(); }
  const Site& site(std::size_t i) const { return sites_[i]; }
  std::span<const Site> sites() const { return sites_; }

  bool contains(Site s) const { return ordinal(s) >= 0; }
  // -1 when absent
  std::int64_t ordinal(Site s) const;

  bool is_interior(std::size_t i) const { return depth_[i] >= 1; }
  bool is_double_interior(std::size_t i) const { return depth_[i] >= 2; }

  // ordinals, ascending (hence lexicographic)
  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& double_interior() const { return double_interior_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }

  int box_half() const { return half_; }

 private:
  std::vector<Site> sites_;
  int half_ = 0;  // bounding box [-half, half]^2 of the lookup table
  std::vector<std::int32_t> lookup_;
  std::vector<std::uint8_t> depth_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> double_interior_;
  std::vector<std::size_t> boundary_;
};

LatticeIndex lattice_sets(const DomainGeometry& geom, DomainTag which);

enum class Gauge { raw, mean_zero, pinned };

// Displacement values on a lattice index set; values are interleaved (x, y).
class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(std::shared_ptr<const LatticeIndex> index);
  LatticeField(std::shared_ptr<const LatticeIndex> index, Eigen::VectorXd values);

  const LatticeIndex& index() const { return *index_; }
  const std::shared_ptr<const LatticeIndex>& index_ptr() const { return index_; }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  Vec2 at(std::size_t i) const { return values_.segment<2>(2 * i); }
  void set(std::size_t i, const Vec2& v) { values_.segment<2>(2 * i) = v; }
  // value at a site, which must be present
  Vec2 at(Site s) const;

  Gauge gauge() const { return gauge_; }
  std::size_t pinned_site() const { return pinned_; }

  Vec2 mean() const;
  void shift(const Vec2& c);
  // subtract the arithmetic mean
  void fix_mean_zero();
  // shift so that site i carries the zero vector
  void pin(std::size_t i);

 private:
  std::shared_ptr<const LatticeIndex> index_;
  Eigen::VectorXd values_;
  Gauge gauge_ = Gauge::raw;
  std::size_t pinned_ = 0;
};

// Values of f on every site of `index`; throws OutOfRange if one is missing.
LatticeField restrict_field(const LatticeField& f, std::shared_ptr<const LatticeIndex> index);

// (D_rho u(xi))_{rho in range}; throws OutOfRange if a neighbour is missing.
std::vector<Vec2> stencil(const LatticeField& u, Site xi, const InteractionRange& range);

}  // namespace atc
