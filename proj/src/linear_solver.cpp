#include "atc/linear_solver.hpp"

#include "atc/errors.hpp"

#include <Eigen/CholmodSupport>

#include <algorithm>
#include <cmath>

namespace atc {

struct SparseSpdSolver::Impl {
  SpMat A;
  Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower> llt;
};

SparseSpdSolver::SparseSpdSolver() = default;
SparseSpdSolver::~SparseSpdSolver() = default;
SparseSpdSolver::SparseSpdSolver(SparseSpdSolver&&) noexcept = default;
SparseSpdSolver& SparseSpdSolver::operator=(SparseSpdSolver&&) noexcept = default;

void SparseSpdSolver::factorize(const SpMat& A) {
  if (A.rows() != A.cols()) throw SingularSystem("matrix is not square");
  auto impl = std::make_unique<Impl>();
  impl->A = A;
  if (A.rows() == 0) {
    impl_ = std::move(impl);
    return;
  }
  if (A.nonZeros() == 0) throw SingularSystem("matrix has no entries");
  impl->llt.cholmod().print = 0;
  impl->llt.compute(impl->A);
  if (impl->llt.info() != Eigen::Success)
    throw SingularSystem("Cholesky factorization failed: matrix not positive definite");
  impl_ = std::move(impl);
}

Eigen::Index SparseSpdSolver::rows() const { return impl_ ? impl_->A.rows() : 0; }

Eigen::VectorXd SparseSpdSolver::solve(const Eigen::VectorXd& b) const {
  if (!impl_) throw SolverError("solve before factorize");
  if (b.size() == 0) return b;
  Eigen::VectorXd x = impl_->llt.solve(b);
  const Eigen::VectorXd r = b - impl_->A.selfadjointView<Eigen::Lower>() * x;
  x += impl_->llt.solve(r);
  if (!x.allFinite()) throw SingularSystem("linear solve produced non-finite values");
  return x;
}

Eigen::MatrixXd SparseSpdSolver::solve(const Eigen::MatrixXd& B) const {
  if (!impl_) throw SolverError("solve before factorize");
  if (B.size() == 0) return B;
  Eigen::MatrixXd X = impl_->llt.solve(B);
  const Eigen::MatrixXd R = B - impl_->A.selfadjointView<Eigen::Lower>() * X;
  X += impl_->llt.solve(R);
  if (!X.allFinite()) throw SingularSystem("linear solve produced non-finite values");
  return X;
}

Eigen::VectorXd descent_direction(const SpMat& H, const Eigen::VectorXd& g) {
  SparseSpdSolver solver;
  try {
    solver.factorize(H);
    return -solver.solve(g);
  } catch (const SingularSystem&) {
  }
  double scale = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i) scale = std::max(scale, std::abs(H.coeff(i, i)));
  if (!(scale > 0.0)) throw SingularSystem("Hessian has a zero diagonal");
  SpMat I(H.rows(), H.cols());
  I.setIdentity();
  for (double tau = 1e-4; tau <= 1e3; tau *= 10.0) {
    try {
      solver.factorize(SpMat(H + tau * scale * I));
      return -solver.solve(g);
    } catch (const SingularSystem&) {
    }
  }
  throw SingularSystem("Hessian shift did not restore positive definiteness");
}

CgResult pcg(const LinearOp& A, const LinearOp& precond, const Eigen::VectorXd& b,
             Eigen::VectorXd& x, double rtol, int max_iter) {
  CgResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r(b.size()), z(b.size()), p(b.size()), Ap(b.size());
  A(x, Ap);
  r = b - Ap;
  double rn = r.norm();
  if (rn <= rtol * bnorm) {
    res.relative_residual = rn / bnorm;
    res.converged = true;
    return res;
  }
  if (precond)
    precond(r, z);
  else
    z = r;
  p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    A(p, Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw SingularSystem("conjugate gradient met a non-positive curvature");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    rn = r.norm();
    res.iterations = it;
    res.relative_residual = rn / bnorm;
    if (rn <= rtol * bnorm) {
      res.converged = true;
      return res;
    }
    if (precond)
      precond(r, z);
    else
      z = r;
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

}  // namespace atc
