#pragma once

// Morse pair site potentials, a bond-strength point defect and the
// Cauchy-Born strain energy density.

#include "atc/geometry.hpp"

#include <span>
#include <vector>

namespace atc {

// phi(r) = exp(-2a(r-1)) - 2 exp(-a(r-1)), shifted per bond so that every
// bond contributes zero at its reference length |rho|.
struct PairPotentialSpec {
  double a = 1.0;
  double w_nn = 1.0;   // |rho| = 1
  double w_nnn = 1.0;  // |rho| = sqrt(2)

  double weight(Site rho) const;
  double phi(double r) const;
  double dphi(double r) const;
  double ddphi(double r) const;
};

struct BondValue {
  double energy;   // w (phi(r) - phi(|rho|))
  Vec2 force;      // d energy / d(D_rho u)
  Mat2 stiffness;  // d^2 energy / d(D_rho u)^2
};

class SiteModel {
 public:
  SiteModel(InteractionRange range, PairPotentialSpec pair, double defect_alpha = 1.2,
            double defect_radius = 0.0);

  static SiteModel homogeneous(InteractionRange range, PairPotentialSpec pair) {
    return SiteModel(std::move(range), pair, 1.0, 0.0);
  }

  const InteractionRange& range() const { return range_; }
  const PairPotentialSpec& pair() const { return pair_; }
  double defect_alpha() const { return alpha_; }
  double defect_radius() const { return M_; }
  bool is_homogeneous() const { return alpha_ == 1.0; }

  double alpha(Site xi) const { return xi.norm() <= M_ ? alpha_ : 1.0; }

  // bond k of the homogeneous potential evaluated at the difference Du_k
  BondValue bond(std::size_t k, const Vec2& Du_k, int order) const;
  // stiffness of bond k at the reference state
  const Mat2& reference_stiffness(std::size_t k) const { return ref_stiffness_[k]; }

  double site_energy(Site xi, std::span<const Vec2> Du) const;
  // V_{xi,rho} for each rho
  std::vector<Vec2> site_gradient(Site xi, std::span<const Vec2> Du) const;
  // V_{xi,rho tau} as a dense (2n x 2n) matrix; block (rho, tau) at (2 rho, 2 tau)
  Eigen::MatrixXd site_hessian(Site xi, std::span<const Vec2> Du) const;

 private:
  InteractionRange range_;
  PairPotentialSpec pair_;
  double alpha_;
  double M_;
  std::vector<double> weight_;
  std::vector<Mat2> ref_stiffness_;
};

using Mat4 = Eigen::Matrix4d;

// W(G) = V((G rho)_rho) for the homogeneous site potential.  Matrices G are
// flattened row-major, so W''(G)(2i+J, 2k+L) = d^2 W / dG_iJ dG_kL.
class CauchyBornDensity {
 public:
  explicit CauchyBornDensity(const SiteModel& model) : model_(&model) {}

  const SiteModel& model() const { return *model_; }

  double W(const Mat2& G) const;
  Mat2 dW(const Mat2& G) const;
  Mat4 ddW(const Mat2& G) const;

 private:
  const SiteModel* model_;
};

// Smallest eigenvalue of the homogeneous lattice Hessian at u = 0 on an
// N x N periodic cell, restricted to mean-zero fields.
double stability_probe(const SiteModel& model, int N = 16);

}  // namespace atc
