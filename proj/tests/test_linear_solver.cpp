#include "atc/errors.hpp"
#include "atc/linear_solver.hpp"
#include "atc/multigrid.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace atc;

namespace {

SpMat random_spd(std::mt19937_64& rng, int n, double shift) {
  const Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(n, n, [&] {
    return std::uniform_real_distribution<double>(-1, 1)(rng);
  });
  Eigen::MatrixXd A = B * B.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
  // sparsify symmetrically, keeping positive definiteness via diagonal dominance
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) > 3) A(i, j) = 0.0;
  for (int i = 0; i < n; ++i) A(i, i) += A.row(i).cwiseAbs().sum();
  return A.sparseView();
}

// random symmetric block stencil with positive definite sum
StencilOperator random_stencil_operator(std::mt19937_64& rng, int n) {
  StencilOperator A(n);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  for (std::size_t p = 0; p < A.nodes(); ++p) {
    for (int k = 0; k < 4; ++k) {
      Mat2 B;
      B << d(rng) - 0.25, d(rng) * 0.1, d(rng) * 0.1, d(rng) - 0.25;
      A.upper(k, p) = B;
    }
  }
  for (std::size_t p = 0; p < A.nodes(); ++p) A.center(p) = 4.0 * Mat2::Identity();
  return A;
}

// bilinear prolongation from the half-size grid, Dirichlet zero outside
Eigen::MatrixXd prolongation(int n) {
  const int nc = n / 2, sf = 2 * n - 1, sc = 2 * nc - 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * sf * sf, 2 * sc * sc);
  for (int J = -nc + 1; J <= nc - 1; ++J)
    for (int I = -nc + 1; I <= nc - 1; ++I) {
      const int q = (J + nc - 1) * sc + (I + nc - 1);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = 2 * I + dx, y = 2 * J + dy;
          if (std::abs(x) > n - 1 || std::abs(y) > n - 1) continue;
          const double w = (dx == 0 ? 1.0 : 0.5) * (dy == 0 ? 1.0 : 0.5);
          const int p = (y + n - 1) * sf + (x + n - 1);
          P(2 * p, 2 * q) = w;
          P(2 * p + 1, 2 * q + 1) = w;
        }
    }
  return P;
}

}  // namespace

TEST_CASE("sparse factorization matches a dense solve") {
  std::mt19937_64 rng(1);
  const SpMat A = random_spd(rng, 60, 0.5);
  SparseSpdSolver s;
  CHECK_FALSE(s.ready());
  s.factorize(A);
  CHECK(s.ready());
  CHECK(s.rows() == 60);
  const Eigen::VectorXd b = test_support::random_vector(rng, 60, 1.0);
  const Eigen::VectorXd x = s.solve(b);
  const Eigen::VectorXd ref = Eigen::MatrixXd(A).llt().solve(b);
  CHECK((x - ref).norm() <= 1e-12 * ref.norm());

  const Eigen::MatrixXd B = Eigen::MatrixXd::Random(60, 3);
  const Eigen::MatrixXd X = s.solve(B);
  CHECK((Eigen::MatrixXd(A) * X - B).norm() <= 1e-12 * B.norm());

  SparseSpdSolver moved = std::move(s);
  CHECK((moved.solve(b) - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("indefinite and singular systems are rejected") {
  SpMat A(3, 3);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = -1.0;
  A.insert(2, 2) = 1.0;
  SparseSpdSolver s;
  CHECK_THROWS_AS(s.factorize(A), SingularSystem);

  // graph Laplacian of a path: constants in the kernel
  SpMat L(4, 4);
  for (int i = 0; i < 3; ++i) {
    L.coeffRef(i, i) += 1;
    L.coeffRef(i + 1, i + 1) += 1;
    L.coeffRef(i, i + 1) -= 1;
    L.coeffRef(i + 1, i) -= 1;
  }
  CHECK_THROWS_AS(s.factorize(L), SingularSystem);
}

TEST_CASE("conjugate gradient") {
  std::mt19937_64 rng(2);
  const SpMat A = random_spd(rng, 80, 0.1);
  const Eigen::VectorXd b = test_support::random_vector(rng, 80, 1.0);
  auto op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = A * x; };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(80);
  const CgResult r = pcg(op, {}, b, x, 1e-12, 500);
  CHECK(r.converged);
  CHECK(r.relative_residual <= 1e-12);
  CHECK((A * x - b).norm() <= 1e-11 * b.norm());

  // Jacobi preconditioning does not change the answer
  const Eigen::VectorXd diag = Eigen::MatrixXd(A).diagonal();
  auto jac = [&](const Eigen::VectorXd& r_, Eigen::VectorXd& z) { z = r_.cwiseQuotient(diag); };
  Eigen::VectorXd x2 = Eigen::VectorXd::Zero(80);
  CHECK(pcg(op, jac, b, x2, 1e-12, 500).converged);
  CHECK((x2 - x).norm() <= 1e-10 * x.norm());

  Eigen::VectorXd x3 = Eigen::VectorXd::Zero(80);
  const CgResult capped = pcg(op, {}, b, x3, 1e-14, 2);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 2);

  Eigen::VectorXd z = Eigen::VectorXd::Ones(80);
  CHECK(pcg(op, {}, Eigen::VectorXd::Zero(80), z, 1e-12, 10).converged);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("stencil operator: apply, assembly and Galerkin coarsening") {
  std::mt19937_64 rng(3);
  const StencilOperator A = random_stencil_operator(rng, 8);
  const SpMat S = A.to_sparse();
  CHECK((Eigen::MatrixXd(S) - Eigen::MatrixXd(S).transpose()).norm() == 0.0);
  const Eigen::VectorXd x = test_support::random_vector(rng, S.cols(), 1.0);
  Eigen::VectorXd y;
  A.apply(x, y);
  CHECK((y - S * x).norm() <= 1e-13 * y.norm());

  const Eigen::MatrixXd P = prolongation(8);
  const Eigen::MatrixXd ref = P.transpose() * Eigen::MatrixXd(S) * P;
  const Eigen::MatrixXd got = Eigen::MatrixXd(A.galerkin_coarse().to_sparse());
  CHECK((got - ref).norm() <= 1e-13 * ref.norm());

  CHECK_THROWS_AS(StencilOperator(5).galerkin_coarse(), OutOfRange);
}

TEST_CASE("multigrid-preconditioned CG") {
  std::mt19937_64 rng(4);
  const StencilOperator A = random_stencil_operator(rng, 32);
  const SpMat S = A.to_sparse();
  const Multigrid mg(A);
  CHECK(mg.depth() >= 3);
  auto op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { A.apply(x, y); };
  auto pre = [&](const Eigen::VectorXd& r, Eigen::VectorXd& z) { mg.vcycle(r, z); };
  const Eigen::VectorXd b = test_support::random_vector(rng, S.cols(), 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(S.cols());
  const CgResult r = pcg(op, pre, b, x, 1e-10, 100);
  CHECK(r.converged);
  CHECK(r.iterations <= 30);

  SparseSpdSolver direct;
  direct.factorize(S);
  const Eigen::VectorXd ref = direct.solve(b);
  CHECK((x - ref).norm() <= 1e-8 * ref.norm());
}

TEST_CASE("descent direction on an indefinite Hessian") {
  std::mt19937_64 rng(5);
  SpMat H = random_spd(rng, 30, 0.5);
  const Eigen::VectorXd g = test_support::random_vector(rng, 30, 1.0);
  const Eigen::VectorXd d = descent_direction(H, g);
  CHECK((H * d + g).norm() <= 1e-12 * g.norm());

  H.coeffRef(4, 4) = -3.0 * H.coeff(4, 4);
  const Eigen::VectorXd s = descent_direction(H, g);
  CHECK(s.dot(g) < 0.0);

  SpMat Z(3, 3);
  CHECK_THROWS_AS(descent_direction(Z, Eigen::VectorXd::Ones(3)), SingularSystem);
}
