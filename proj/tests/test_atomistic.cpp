#include "atc/atomistic.hpp"
#include "atc/errors.hpp"
#include "atc/reference.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace atc;
using test_support::nnn;

namespace {

const DomainGeometry& geom() {
  static const DomainGeometry g = build_domains(5, 4, 1, nnn());
  return g;
}

LatticeField random_state(const AtomisticSystem& sys, std::mt19937_64& rng, double scale) {
  LatticeField u = sys.zero_field();
  u.values() = test_support::random_vector(rng, u.values().size(), scale);
  return u;
}

Eigen::VectorXd constant_controls(std::size_t n, const Vec2& c) {
  Eigen::VectorXd v(2 * n);
  for (std::size_t k = 0; k < n; ++k) v.segment<2>(2 * k) = c;
  return v;
}

double max_diff_from_constant(const LatticeField& u, const Vec2& c) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.index().size(); ++i) m = std::max(m, (u.at(i) - c).lpNorm<Eigen::Infinity>());
  return m;
}

}  // namespace

TEST_CASE("dof split") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  CHECK(sys.n_free() + sys.n_control() == sys.index().size());
  const auto L = lattice_sets(geom(), DomainTag::a);
  CHECK(sys.control_sites() == L.boundary());
  std::size_t nf = 0, nc = 0;
  for (std::size_t i = 0; i < sys.index().size(); ++i) (sys.slot(i) >= 0 ? nf : nc)++;
  CHECK(nf == sys.n_free());
  CHECK(nc == sys.n_control());
}

TEST_CASE("energy at the reference state") {
  const SiteModel h = test_support::homogeneous_model();
  const AtomisticSystem sys(geom(), h);
  const LatticeField z = sys.zero_field();
  CHECK(sys.energy(z) == 0.0);
  CHECK(sys.residual(z).norm() <= 1e-14);
  // the untouched pre-stress of the boundary layer shows up on control sites only
  const Eigen::VectorXd g = sys.gradient_full(z);
  for (std::size_t i : sys.free_sites()) CHECK(g.segment<2>(2 * i).norm() <= 1e-14);
  CHECK(g.norm() > 0.0);

  // the defect pushes on its neighbours
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sd(geom(), m);
  CHECK(sd.residual(sd.zero_field()).norm() > 1e-3);
}

TEST_CASE("energy derivatives against central differences") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  double worst_g = 0.0, worst_h = 0.0;
  for (int s = 0; s < 20; ++s) {
    const LatticeField u = random_state(sys, rng, 0.05);
    const Eigen::VectorXd d = test_support::random_vector(rng, u.values().size(), 1.0);
    LatticeField up = u, um = u;
    up.values() += h * d;
    um.values() -= h * d;
    const Eigen::VectorXd g = sys.gradient_full(u);
    const double fd = (sys.energy(up) - sys.energy(um)) / (2 * h);
    worst_g = std::max(worst_g, std::abs(fd - g.dot(d)) / std::abs(g.dot(d)));

    const SpMat H = sys.hessian_full(u);
    const Eigen::VectorXd Hd = H * d;
    const Eigen::VectorXd fdH = (sys.gradient_full(up) - sys.gradient_full(um)) / (2 * h);
    worst_h = std::max(worst_h, (fdH - Hd).norm() / Hd.norm());
  }
  CHECK(worst_g <= 1e-6);
  CHECK(worst_h <= 1e-6);
}

TEST_CASE("Hessian structure") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  std::mt19937_64 rng(8);
  const LatticeField u = random_state(sys, rng, 0.05);
  const SpMat H = sys.hessian_full(u);
  const double scale = Eigen::MatrixXd(H).norm();
  CHECK(SpMat(H - SpMat(H.transpose())).norm() <= 1e-12 * scale);

  // constants are in the kernel
  for (const Vec2& c : {Vec2(1, 0), Vec2(0, 1)}) {
    const Eigen::VectorXd one = constant_controls(sys.index().size(), c);
    CHECK((H * one).norm() <= 1e-12 * scale);
  }

  // coupling only within two hops of the range
  for (int k = 0; k < H.outerSize(); ++k)
    for (SpMat::InnerIterator it(H, k); it; ++it) {
      const Site a = sys.index().site(std::size_t(it.row() / 2));
      const Site b = sys.index().site(std::size_t(it.col() / 2));
      CHECK((a - b).norm_inf() <= 2);
    }

  // residual is the free part of the full gradient
  const Eigen::VectorXd g = sys.gradient_full(u);
  const Eigen::VectorXd r = sys.residual(u);
  for (std::size_t k = 0; k < sys.n_free(); ++k)
    CHECK((r.segment<2>(2 * k) - g.segment<2>(2 * sys.free_sites()[k])).norm() == 0.0);

  // energy does not see constants
  LatticeField v = u;
  v.shift({0.7, -3.0});
  CHECK(std::abs(sys.energy(v) - sys.energy(u)) <= 1e-12 * std::abs(sys.energy(u)));
}

TEST_CASE("compose and split") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  std::mt19937_64 rng(9);
  const LatticeField u = random_state(sys, rng, 1.0);
  const LatticeField w = sys.compose(sys.free_values(u), sys.control_values(u));
  CHECK((w.values() - u.values()).norm() == 0.0);
}

TEST_CASE("restricted solves") {
  const SiteModel h = test_support::homogeneous_model();
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sh(geom(), h);
  const AtomisticSystem sys(geom(), m);

  const auto zero = solve_restricted_atomistic(sh, Eigen::VectorXd::Zero(2 * sh.n_control()), sh.zero_field());
  CHECK(zero.report.iterations <= 1);
  CHECK(zero.u.values().norm() == 0.0);

  const Vec2 c(0.3, -0.8);
  const Eigen::VectorXd lc = constant_controls(sys.n_control(), c);
  const auto shifted = solve_restricted_atomistic(sh, lc, sh.zero_field());
  // to Newton tolerance
  CHECK(max_diff_from_constant(shifted.u, c) <= 1e-9);

  std::mt19937_64 rng(10);
  const Eigen::VectorXd lam = test_support::random_vector(rng, 2 * std::ptrdiff_t(sys.n_control()), 0.05);
  NewtonOptions opt;
  const auto sol = solve_restricted_atomistic(sys, lam, sys.zero_field(), opt);
  // Dirichlet data is copied exactly
  CHECK((sys.control_values(sol.u) - lam).norm() == 0.0);
  CHECK(sys.residual(sol.u).norm() <= opt.tol * (1.0 + lam.lpNorm<Eigen::Infinity>()));
  CHECK(sol.report.residual == doctest::Approx(sys.residual(sol.u).norm()));

  CHECK_THROWS_AS(solve_restricted_atomistic(sys, Eigen::VectorXd::Zero(3), sys.zero_field()), OutOfRange);

  NewtonOptions tight;
  tight.max_iter = 0;
  CHECK_THROWS_AS(solve_restricted_atomistic(sys, lam, sys.zero_field(), tight), NonConvergence);
}

TEST_CASE("traces of the reference reproduce it") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  ReferenceOptions ropt;
  ropt.newton.tol = 1e-13;
  const ReferenceSolution ref = solve_reference(m, 32, ropt);
  const LatticeField ua = restrict_field(ref.u, sys.index_ptr());
  NewtonOptions opt;
  const auto sol = solve_restricted_atomistic(sys, sys.control_values(ua), sys.zero_field(), opt);
  const double diff = (sol.u.values() - ua.values()).lpNorm<Eigen::Infinity>();
  MESSAGE("max difference to the reference " << diff);
  CHECK(diff <= 10 * opt.tol);
}

TEST_CASE("linearized solves") {
  const SiteModel m = test_support::defect_model();
  const AtomisticSystem sys(geom(), m);
  std::mt19937_64 rng(11);
  const Eigen::VectorXd lam = test_support::random_vector(rng, 2 * std::ptrdiff_t(sys.n_control()), 0.02);
  NewtonOptions opt;
  opt.tol = 1e-12;
  const LatticeField base = solve_restricted_atomistic(sys, lam, sys.zero_field(), opt).u;
  const AtomisticLinearization lin(sys, base);
  const auto nc = std::ptrdiff_t(sys.n_control());

  CHECK(lin.forward(Eigen::VectorXd(Eigen::VectorXd::Zero(2 * nc))).norm() == 0.0);
  const Vec2 c(1.5, -0.5);
  const Eigen::VectorXd w = lin.forward(constant_controls(sys.n_control(), c));
  CHECK((w - constant_controls(sys.index().size(), c)).lpNorm<Eigen::Infinity>() <= 1e-10);

  const Eigen::VectorXd mu = test_support::random_vector(rng, 2 * nc, 1.0);
  const Eigen::VectorXd nu = test_support::random_vector(rng, 2 * nc, 1.0);
  const Eigen::VectorXd lin_comb = lin.forward(Eigen::VectorXd(2.0 * mu - 3.0 * nu));
  const Eigen::VectorXd comb = 2.0 * lin.forward(mu) - 3.0 * lin.forward(nu);
  CHECK((lin_comb - comb).norm() <= 1e-10 * comb.norm());

  const Eigen::VectorXd y = test_support::random_vector(rng, 2 * std::ptrdiff_t(sys.index().size()), 1.0);
  CHECK(std::abs(lin.forward(mu).dot(y) - mu.dot(lin.adjoint(y))) <= 1e-10 * std::abs(mu.dot(lin.adjoint(y))));

  Eigen::MatrixXd M(2 * nc, 2);
  M << mu, nu;
  const Eigen::MatrixXd F = lin.forward(M);
  CHECK((F.col(0) - lin.forward(mu)).norm() <= 1e-12 * F.col(0).norm());
  Eigen::MatrixXd Y(y.size(), 1);
  Y.col(0) = y;
  CHECK((lin.adjoint(Y).col(0) - lin.adjoint(y)).norm() <= 1e-12 * lin.adjoint(y).norm());

  // nonlinear finite difference
  const double t = 1e-5;
  const LatticeField plus = solve_restricted_atomistic(sys, lam + t * mu, base, opt).u;
  const Eigen::VectorXd fd = (plus.values() - base.values()) / t;
  const LatticeField dU = linearized_atomistic_solve(sys, base, mu);
  CHECK((fd - dU.values()).norm() <= 1e-4 * dU.values().norm());
  CHECK((dU.values() - lin.forward(mu)).norm() <= 1e-12 * dU.values().norm());
}

TEST_CASE("decay profile") {
  auto idx = std::make_shared<const LatticeIndex>(LatticeIndex::square(40, nnn()));
  Mat2 G;
  G << 0.02, -0.01, 0.03, 0.005;
  const LatticeField u = test_support::affine_field(idx, G, {1.0, 2.0});
  double expect = 0.0;
  for (const Site& r : nnn().offsets()) expect = std::max(expect, (G * r.vec()).norm());
  const auto prof = decay_profile(u, nnn(), 1, 4);
  REQUIRE(prof.size() == 4);
  for (std::size_t j = 0; j < prof.size(); ++j) {
    CHECK(prof[j].r == std::ldexp(1.0, int(j) + 1));
    CHECK(prof[j].value == doctest::Approx(expect).epsilon(1e-12));
  }

  const LatticeField z(idx);
  for (const auto& p : decay_profile(z, nnn(), 0, 4)) CHECK(p.value == 0.0);

  // [64, 128) has no interior sites in [-40, 40]^2
  CHECK_THROWS_AS(decay_profile(z, nnn(), 3, 6), OutOfRange);
  CHECK_THROWS_AS(decay_profile(z, nnn(), 3, 2), OutOfRange);
}
