#include "atc/atomistic.hpp"

#include "atc/errors.hpp"

#include <cmath>

namespace atc {

AtomisticSystem::AtomisticSystem(const DomainGeometry& geom, const SiteModel& model)
    : geom_(geom),
      model_(&model),
      index_(std::make_shared<const LatticeIndex>(lattice_sets(geom, DomainTag::a))) {
  const auto& range = model.range();
  slot_.assign(index_->size(), 0);
  const auto& fr = free_sites();
  const auto& cs = control_sites();
  for (std::size_t k = 0; k < fr.size(); ++k) slot_[fr[k]] = std::int64_t(k);
  for (std::size_t k = 0; k < cs.size(); ++k) slot_[cs[k]] = -1 - std::int64_t(k);

  energy_sites_ = index_->interior();
  nbr_.reserve(energy_sites_.size() * range.size());
  for (std::size_t s : energy_sites_) {
    const Site xi = index_->site(s);
    for (const Site& r : range.offsets()) nbr_.push_back(std::int32_t(index_->ordinal(xi + r)));
  }
}

LatticeField AtomisticSystem::compose(const Eigen::VectorXd& free,
                                      const Eigen::VectorXd& lambda) const {
  if (free.size() != 2 * std::ptrdiff_t(n_free()))
    throw OutOfRange("free vector has the wrong size");
  if (lambda.size() != 2 * std::ptrdiff_t(n_control()))
    throw OutOfRange("atomistic control vector has the wrong size");
  LatticeField u(index_);
  const auto& fr = free_sites();
  const auto& cs = control_sites();
  for (std::size_t k = 0; k < fr.size(); ++k) u.set(fr[k], free.segment<2>(2 * k));
  for (std::size_t k = 0; k < cs.size(); ++k) u.set(cs[k], lambda.segment<2>(2 * k));
  return u;
}

Eigen::VectorXd AtomisticSystem::free_values(const LatticeField& u) const {
  const auto& fr = free_sites();
  Eigen::VectorXd x(2 * fr.size());
  for (std::size_t k = 0; k < fr.size(); ++k) x.segment<2>(2 * k) = u.at(fr[k]);
  return x;
}

Eigen::VectorXd AtomisticSystem::control_values(const LatticeField& u) const {
  const auto& cs = control_sites();
  Eigen::VectorXd x(2 * cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) x.segment<2>(2 * k) = u.at(cs[k]);
  return x;
}

template <class F>
void AtomisticSystem::for_each_bond(const LatticeField& u, int order, F&& f) const {
  const std::size_t nr = model_->range().size();
  for (std::size_t e = 0; e < energy_sites_.size(); ++e) {
    const std::size_t s = energy_sites_[e];
    const double alpha = model_->alpha(index_->site(s));
    const Vec2 us = u.at(s);
    for (std::size_t k = 0; k < nr; ++k) {
      const std::size_t j = std::size_t(nbr_[e * nr + k]);
      f(s, j, alpha, model_->bond(k, u.at(j) - us, order));
    }
  }
}

double AtomisticSystem::energy(const LatticeField& u) const {
  double E = 0.0;
  for_each_bond(u, 0, [&](std::size_t, std::size_t, double alpha, const BondValue& b) {
    E += alpha * b.energy;
  });
  return E;
}

Eigen::VectorXd AtomisticSystem::gradient_full(const LatticeField& u) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(u.values().size());
  for_each_bond(u, 1, [&](std::size_t s, std::size_t j, double alpha, const BondValue& b) {
    const Vec2 f = alpha * b.force;
    g.segment<2>(2 * j) += f;
    g.segment<2>(2 * s) -= f;
  });
  return g;
}

Eigen::VectorXd AtomisticSystem::residual(const LatticeField& u) const {
  const Eigen::VectorXd g = gradient_full(u);
  const auto& fr = free_sites();
  Eigen::VectorXd r(2 * fr.size());
  for (std::size_t k = 0; k < fr.size(); ++k) r.segment<2>(2 * k) = g.segment<2>(2 * fr[k]);
  return r;
}

namespace {

void add_block(Triplets& t, std::int64_t r, std::int64_t c, const Mat2& K) {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) t.emplace_back(int(2 * r + a), int(2 * c + b), K(a, b));
}

}  // namespace

SpMat AtomisticSystem::hessian_full(const LatticeField& u) const {
  Triplets t;
  t.reserve(energy_sites_.size() * model_->range().size() * 16);
  for_each_bond(u, 2, [&](std::size_t s, std::size_t j, double alpha, const BondValue& b) {
    const Mat2 K = alpha * b.stiffness;
    add_block(t, std::int64_t(s), std::int64_t(s), K);
    add_block(t, std::int64_t(j), std::int64_t(j), K);
    add_block(t, std::int64_t(s), std::int64_t(j), -K);
    add_block(t, std::int64_t(j), std::int64_t(s), -K);
  });
  const auto n = std::ptrdiff_t(2 * index_->size());
  SpMat H(n, n);
  H.setFromTriplets(t.begin(), t.end());
  return H;
}

std::pair<SpMat, SpMat> AtomisticSystem::hessian_blocks(const LatticeField& u) const {
  Triplets tf, tc;
  tf.reserve(energy_sites_.size() * model_->range().size() * 16);
  auto put = [&](std::size_t r, std::size_t c, const Mat2& K) {
    const std::int64_t sr = slot_[r];
    if (sr < 0) return;
    const std::int64_t sc = slot_[c];
    if (sc >= 0)
      add_block(tf, sr, sc, K);
    else
      add_block(tc, sr, -1 - sc, K);
  };
  for_each_bond(u, 2, [&](std::size_t s, std::size_t j, double alpha, const BondValue& b) {
    const Mat2 K = alpha * b.stiffness;
    put(s, s, K);
    put(j, j, K);
    put(s, j, -K);
    put(j, s, -K);
  });
  const auto nf = std::ptrdiff_t(2 * n_free());
  const auto nc = std::ptrdiff_t(2 * n_control());
  SpMat Hff(nf, nf), Hfc(nf, nc);
  Hff.setFromTriplets(tf.begin(), tf.end());
  Hfc.setFromTriplets(tc.begin(), tc.end());
  return {std::move(Hff), std::move(Hfc)};
}

namespace {

struct RestrictedProblem {
  const AtomisticSystem& sys;
  const Eigen::VectorXd& lambda;

  double energy(const Eigen::VectorXd& x) const { return sys.energy(sys.compose(x, lambda)); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return sys.residual(sys.compose(x, lambda));
  }
  Eigen::VectorXd direction(const Eigen::VectorXd& x, const Eigen::VectorXd& g, int) const {
    auto [Hff, Hfc] = sys.hessian_blocks(sys.compose(x, lambda));
    return descent_direction(Hff, g);
  }
};

}  // namespace

AtomisticSolution solve_restricted_atomistic(const AtomisticSystem& sys,
                                             const Eigen::VectorXd& lambda,
                                             const LatticeField& u0, const NewtonOptions& opt) {
  if (lambda.size() != 2 * std::ptrdiff_t(sys.n_control()))
    throw OutOfRange("atomistic control vector has the wrong size");
  NewtonOptions o = opt;
  o.tol_scale = 1.0 + (lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0);
  Eigen::VectorXd x = sys.free_values(u0);
  RestrictedProblem prob{sys, lambda};
  NewtonReport rep = newton_minimize(prob, x, o, "restricted atomistic");
  return {sys.compose(x, lambda), rep};
}

AtomisticLinearization::AtomisticLinearization(const AtomisticSystem& sys,
                                               const LatticeField& base)
    : sys_(&sys) {
  auto [Hff, Hfc] = sys.hessian_blocks(base);
  H_fc_ = std::move(Hfc);
  solver_.factorize(Hff);
}

Eigen::MatrixXd AtomisticLinearization::forward(const Eigen::MatrixXd& mu) const {
  const auto& fr = sys_->free_sites();
  const auto& cs = sys_->control_sites();
  if (mu.rows() != 2 * std::ptrdiff_t(cs.size()))
    throw OutOfRange("atomistic control vector has the wrong size");
  const Eigen::MatrixXd xf = -solver_.solve(Eigen::MatrixXd(H_fc_ * mu));
  Eigen::MatrixXd out(2 * sys_->index().size(), mu.cols());
  for (std::size_t k = 0; k < fr.size(); ++k)
    out.middleRows<2>(2 * std::ptrdiff_t(fr[k])) = xf.middleRows<2>(2 * std::ptrdiff_t(k));
  for (std::size_t k = 0; k < cs.size(); ++k)
    out.middleRows<2>(2 * std::ptrdiff_t(cs[k])) = mu.middleRows<2>(2 * std::ptrdiff_t(k));
  return out;
}

Eigen::VectorXd AtomisticLinearization::forward(const Eigen::VectorXd& mu) const {
  return forward(Eigen::MatrixXd(mu)).col(0);
}

Eigen::MatrixXd AtomisticLinearization::adjoint(const Eigen::MatrixXd& y) const {
  const auto& fr = sys_->free_sites();
  const auto& cs = sys_->control_sites();
  if (y.rows() != 2 * std::ptrdiff_t(sys_->index().size()))
    throw OutOfRange("adjoint input has the wrong size");
  Eigen::MatrixXd yf(2 * fr.size(), y.cols());
  Eigen::MatrixXd out(2 * cs.size(), y.cols());
  for (std::size_t k = 0; k < fr.size(); ++k)
    yf.middleRows<2>(2 * std::ptrdiff_t(k)) = y.middleRows<2>(2 * std::ptrdiff_t(fr[k]));
  for (std::size_t k = 0; k < cs.size(); ++k)
    out.middleRows<2>(2 * std::ptrdiff_t(k)) = y.middleRows<2>(2 * std::ptrdiff_t(cs[k]));
  out -= H_fc_.transpose() * solver_.solve(yf);
  return out;
}

Eigen::VectorXd AtomisticLinearization::adjoint(const Eigen::VectorXd& y) const {
  return adjoint(Eigen::MatrixXd(y)).col(0);
}

LatticeField linearized_atomistic_solve(const AtomisticSystem& sys, const LatticeField& base,
                                        const Eigen::VectorXd& mu) {
  AtomisticLinearization lin(sys, base);
  return LatticeField(sys.index_ptr(), lin.forward(mu));
}

std::vector<DecayPoint> decay_profile(const LatticeField& u, const InteractionRange& range,
                                      int j_min, int j_max) {
  if (j_min < 0 || j_max < j_min) throw OutOfRange("invalid shell range");
  std::vector<DecayPoint> out;
  for (int j = j_min; j <= j_max; ++j) out.push_back({std::ldexp(1.0, j), -1.0});
  const auto& idx = u.index();
  for (std::size_t i : idx.interior()) {
    const Site xi = idx.site(i);
    const double r = xi.norm();
    if (r < 1.0) continue;
    const int j = int(std::floor(std::log2(r)));
    // guard against log2 rounding at exact powers of two
    int jj = j;
    if (std::ldexp(1.0, jj) > r) --jj;
    if (std::ldexp(1.0, jj + 1) <= r) ++jj;
    if (jj < j_min || jj > j_max) continue;
    const Vec2 ui = u.at(i);
    double m = 0.0;
    for (const Site& rho : range.offsets())
      m = std::max(m, (u.at(std::size_t(idx.ordinal(xi + rho))) - ui).norm());
    auto& p = out[std::size_t(jj - j_min)];
    p.value = std::max(p.value, m);
  }
  for (const auto& p : out)
    if (p.value < 0.0)
      throw OutOfRange("empty shell at r = " + std::to_string(p.r));
  return out;
}

}  // namespace atc
