#pragma once

// Sparse SPD factorization (CHOLMOD supernodal) and a matrix-free
// preconditioned conjugate gradient.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>

namespace atc {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

class SparseSpdSolver {
 public:
  SparseSpdSolver();
  ~SparseSpdSolver();
  SparseSpdSolver(SparseSpdSolver&&) noexcept;
  SparseSpdSolver& operator=(SparseSpdSolver&&) noexcept;

  // Throws SingularSystem if A is not numerically positive definite.
  void factorize(const SpMat& A);
  bool ready() const { return impl_ != nullptr; }
  Eigen::Index rows() const;

  // One step of iterative refinement is applied to every solve.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// -H^{-1} g, or -(H + tau I)^{-1} g with the smallest tried tau that makes
// the shifted matrix positive definite.
Eigen::VectorXd descent_direction(const SpMat& H, const Eigen::VectorXd& g);

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Solves A x = b from the initial x; `precond` may be empty.
CgResult pcg(const LinearOp& A, const LinearOp& precond, const Eigen::VectorXd& b,
             Eigen::VectorXd& x, double rtol, int max_iter);

}  // namespace atc
