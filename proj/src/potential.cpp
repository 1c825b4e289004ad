#include "atc/potential.hpp"

#include "atc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace atc {

double PairPotentialSpec::weight(Site rho) const {
  const int r2 = rho.x * rho.x + rho.y * rho.y;
  if (r2 == 1) return w_nn;
  if (r2 == 2) return w_nnn;
  return 0.0;
}

double PairPotentialSpec::phi(double r) const {
  const double e = std::exp(-a * (r - 1.0));
  return e * e - 2.0 * e;
}

double PairPotentialSpec::dphi(double r) const {
  const double e = std::exp(-a * (r - 1.0));
  return -2.0 * a * e * e + 2.0 * a * e;
}

double PairPotentialSpec::ddphi(double r) const {
  const double e = std::exp(-a * (r - 1.0));
  return 4.0 * a * a * e * e - 2.0 * a * a * e;
}

SiteModel::SiteModel(InteractionRange range, PairPotentialSpec pair, double defect_alpha,
                     double defect_radius)
    : range_(std::move(range)), pair_(pair), alpha_(defect_alpha), M_(defect_radius) {
  if (!(pair_.a > 0.0)) throw ConstraintViolation("Morse stiffness a > 0 violated");
  if (!(alpha_ > 0.0)) throw ConstraintViolation("defect alpha > 0 violated");
  if (M_ < 0.0) throw ConstraintViolation("defect radius M >= 0 violated");
  for (std::size_t k = 0; k < range_.size(); ++k) {
    const Site rho = range_[k];
    weight_.push_back(pair_.weight(rho));
  }
  for (std::size_t k = 0; k < range_.size(); ++k)
    ref_stiffness_.push_back(bond(k, Vec2::Zero(), 2).stiffness);
}

BondValue SiteModel::bond(std::size_t k, const Vec2& Du_k, int order) const {
  const double w = weight_[k];
  const Vec2 rho = range_[k].vec();
  const Vec2 b = rho + Du_k;
  const double r = b.norm();
  // phi(r) - phi(|rho|) through expm1 keeps far-field bond energies accurate
  const double r0 = rho.norm();
  const double dr = (2.0 * rho.dot(Du_k) + Du_k.squaredNorm()) / (r + r0);
  const double e0 = std::exp(-pair_.a * (r0 - 1.0));
  const double dphi_val =
      e0 * e0 * std::expm1(-2.0 * pair_.a * dr) - 2.0 * e0 * std::expm1(-pair_.a * dr);
  BondValue out{w * dphi_val, Vec2::Zero(), Mat2::Zero()};
  if (order >= 1) {
    const Vec2 n = b / r;
    const double d1 = pair_.dphi(r);
    out.force = w * d1 * n;
    if (order >= 2) {
      const Mat2 nn = n * n.transpose();
      out.stiffness = w * (pair_.ddphi(r) * nn + d1 / r * (Mat2::Identity() - nn));
    }
  }
  return out;
}

double SiteModel::site_energy(Site xi, std::span<const Vec2> Du) const {
  if (Du.size() != range_.size()) throw OutOfRange("stencil length does not match range");
  double e = 0.0;
  for (std::size_t k = 0; k < Du.size(); ++k) e += bond(k, Du[k], 0).energy;
  return alpha(xi) * e;
}

std::vector<Vec2> SiteModel::site_gradient(Site xi, std::span<const Vec2> Du) const {
  if (Du.size() != range_.size()) throw OutOfRange("stencil length does not match range");
  const double al = alpha(xi);
  std::vector<Vec2> g(Du.size());
  for (std::size_t k = 0; k < Du.size(); ++k) g[k] = al * bond(k, Du[k], 1).force;
  return g;
}

Eigen::MatrixXd SiteModel::site_hessian(Site xi, std::span<const Vec2> Du) const {
  if (Du.size() != range_.size()) throw OutOfRange("stencil length does not match range");
  const double al = alpha(xi);
  const auto n = std::ptrdiff_t(Du.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (std::ptrdiff_t k = 0; k < n; ++k)
    H.block<2, 2>(2 * k, 2 * k) = al * bond(std::size_t(k), Du[std::size_t(k)], 2).stiffness;
  return H;
}

double CauchyBornDensity::W(const Mat2& G) const {
  const auto& range = model_->range();
  double e = 0.0;
  for (std::size_t k = 0; k < range.size(); ++k)
    e += model_->bond(k, G * range[k].vec(), 0).energy;
  return e;
}

Mat2 CauchyBornDensity::dW(const Mat2& G) const {
  const auto& range = model_->range();
  Mat2 P = Mat2::Zero();
  for (std::size_t k = 0; k < range.size(); ++k) {
    const Vec2 rho = range[k].vec();
    P += model_->bond(k, G * rho, 1).force * rho.transpose();
  }
  return P;
}

Mat4 CauchyBornDensity::ddW(const Mat2& G) const {
  const auto& range = model_->range();
  Mat4 C = Mat4::Zero();
  for (std::size_t k = 0; k < range.size(); ++k) {
    const Vec2 rho = range[k].vec();
    const Mat2 A = model_->bond(k, G * rho, 2).stiffness;
    for (int i = 0; i < 2; ++i)
      for (int J = 0; J < 2; ++J)
        for (int m = 0; m < 2; ++m)
          for (int L = 0; L < 2; ++L) C(2 * i + J, 2 * m + L) += A(i, m) * rho[J] * rho[L];
  }
  return C;
}

double stability_probe(const SiteModel& model, int N) {
  if (N < 8) throw ConstraintViolation("stability probe needs N >= 8");
  // The periodic Hessian is block circulant; each wave vector k contributes
  // the 2x2 symbol sum_rho (2 - 2 cos(k.rho)) A_rho.
  const auto& range = model.range();
  double lo = std::numeric_limits<double>::infinity();
  for (int p = 0; p < N; ++p) {
    for (int q = 0; q < N; ++q) {
      if (p == 0 && q == 0) continue;
      const double kx = 2.0 * std::numbers::pi * p / N;
      const double ky = 2.0 * std::numbers::pi * q / N;
      Mat2 D = Mat2::Zero();
      for (std::size_t k = 0; k < range.size(); ++k) {
        const Site r = range[k];
        D += (2.0 - 2.0 * std::cos(kx * r.x + ky * r.y)) * model.reference_stiffness(k);
      }
      Eigen::SelfAdjointEigenSolver<Mat2> es(D, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw SolverError("stability probe eigensolve failed");
      lo = std::min(lo, es.eigenvalues()[0]);
    }
  }
  return lo;
}

}  // namespace atc
