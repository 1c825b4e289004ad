#include "atc/errors.hpp"
#include "atc/linear_solver.hpp"
#include "atc/reference.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace atc;

namespace {

// plain Newton with a direct solve on the assembled Hessian
Eigen::VectorXd direct_newton(const ReferenceProblem& p, double tol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.n_unknowns());
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd g = p.gradient(x);
    if (g.norm() <= tol) return x;
    SparseSpdSolver s;
    s.factorize(p.hessian(x).to_sparse());
    x -= s.solve(g);
  }
  FAIL("direct Newton did not converge");
  return x;
}

// sum over all bonds with both ends inside [-r, r]^2 of |D_rho u|^2
double seminorm_sq(const LatticeField& u, int r) {
  double s = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x)
      for (const Site& rho : {Site{1, 0}, Site{0, 1}, Site{1, 1}, Site{-1, 1}}) {
        const Site a{x, y}, b = a + rho;
        if (b.norm_inf() > r) continue;
        s += (u.at(b) - u.at(a)).squaredNorm();
      }
  return s;
}

LatticeField difference_on(const LatticeField& fine, const LatticeField& coarse) {
  LatticeField d = restrict_field(fine, coarse.index_ptr());
  d.values() -= coarse.values();
  return d;
}

}  // namespace

TEST_CASE("reference energy derivatives") {
  const SiteModel m = test_support::defect_model();
  const ReferenceProblem p(m, 8);
  CHECK(p.n_unknowns() == 2 * 15 * 15);
  std::mt19937_64 rng(1);
  const double h = 1e-6;
  for (int s = 0; s < 5; ++s) {
    const Eigen::VectorXd x = test_support::random_vector(rng, p.n_unknowns(), 0.05);
    const Eigen::VectorXd d = test_support::random_vector(rng, p.n_unknowns(), 1.0);
    const Eigen::VectorXd g = p.gradient(x);
    const double fd = (p.energy(x + h * d) - p.energy(x - h * d)) / (2 * h);
    CHECK(std::abs(fd - g.dot(d)) <= 1e-6 * std::abs(g.dot(d)));
    Eigen::VectorXd Hd;
    p.hessian(x).apply(d, Hd);
    const Eigen::VectorXd fdH = (p.gradient(x + h * d) - p.gradient(x - h * d)) / (2 * h);
    CHECK((fdH - Hd).norm() <= 1e-6 * Hd.norm());
  }

  // zero ring: the field carries zeros on |xi|_inf = N
  const Eigen::VectorXd x = test_support::random_vector(rng, p.n_unknowns(), 1.0);
  const LatticeField u = p.to_field(x);
  CHECK(u.index().size() == 17u * 17u);
  CHECK(u.at(Site{8, 3}).norm() == 0.0);
  CHECK(u.at(Site{-2, -8}).norm() == 0.0);
  CHECK(u.at(Site{7, -7}) == x.segment<2>(0 + 2 * (0 * 15 + 14)));
}

TEST_CASE("reference solve agrees with a direct Newton") {
  const SiteModel m = test_support::defect_model();
  ReferenceOptions opt;
  opt.newton.tol = 1e-12;
  const ReferenceSolution sol = solve_reference(m, 32, opt);
  const ReferenceProblem p(m, 32);
  const Eigen::VectorXd x = direct_newton(p, 1e-12);
  const LatticeField ud = p.to_field(x);
  CHECK((sol.u.values() - ud.values()).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(sol.report.residual <= 1e-12);
  // the defect lowers the energy; recorded sign
  CHECK(sol.report.energy < 0.0);
  CHECK(sol.cg_iterations > 0);
}

TEST_CASE("homogeneous reference is zero") {
  const SiteModel h = test_support::homogeneous_model();
  const ReferenceSolution sol = solve_reference(h, 32);
  CHECK(sol.u.values().norm() == 0.0);
  CHECK(sol.report.iterations == 0);
}

TEST_CASE("reference truncation error decreases with N") {
  const SiteModel m = test_support::defect_model();
  ReferenceOptions opt;
  opt.newton.tol = 1e-12;
  const LatticeField u32 = solve_reference(m, 32, opt).u;
  const LatticeField u64 = solve_reference(m, 64, opt).u;
  const LatticeField u128 = solve_reference(m, 128, opt).u;
  const double d1 = std::sqrt(seminorm_sq(difference_on(u64, u32), 32));
  const double d2 = std::sqrt(seminorm_sq(difference_on(u128, u64), 64));
  MESSAGE("seminorm changes " << d1 << " " << d2 << " ratio " << d1 / d2);
  // N^{-d/2} predicts a factor 2 per doubling
  CHECK(d2 < d1);
  CHECK(d1 / d2 >= 1.5);
}

TEST_CASE("reference input validation") {
  const SiteModel m = test_support::defect_model();
  CHECK_THROWS_AS(ReferenceProblem(m, 1), OutOfRange);
  const InteractionRange wide({{2, 0}, {-2, 0}, {0, 1}, {0, -1}});
  const SiteModel w(wide, PairPotentialSpec{});
  CHECK_THROWS_AS(ReferenceProblem(w, 8), ConstraintViolation);
}
