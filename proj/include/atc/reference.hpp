#pragma once

// Truncated full-lattice defect problem on [-N, N]^2 with the outer ring
// clamped to zero, solved by Newton with multigrid-preconditioned CG.

#include "atc/atomistic.hpp"
#include "atc/multigrid.hpp"

namespace atc {

struct ReferenceOptions {
  NewtonOptions newton{};
  int max_cg = 400;
  int smoothing_sweeps = 2;
};

struct ReferenceSolution {
  LatticeField u;  // on [-N, N]^2, zero on the outer ring
  NewtonReport report;
  int cg_iterations = 0;
};

// Sum over all bonds of the truncated lattice; grid vectors hold the free
// sites |xi|_inf <= N-1 in lexicographic order.
class ReferenceProblem {
 public:
  ReferenceProblem(const SiteModel& model, int N);

  int N() const { return N_; }
  std::ptrdiff_t n_unknowns() const { return 2 * std::ptrdiff_t(m_) * m_; }

  double energy(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  StencilOperator hessian(const Eigen::VectorXd& x) const;

  LatticeField to_field(const Eigen::VectorXd& x) const;

 private:
  template <class F>
  void for_each_bond(const Eigen::VectorXd& x, int order, F&& f) const;

  const SiteModel* model_;
  int N_;
  int m_;  // free sites per side, 2N - 1
  // (1,0), (-1,1), (0,1), (1,1) in the range, with their bond weights
  std::size_t upper_k_[4];
  double upper_w_[4];
};

ReferenceSolution solve_reference(const SiteModel& model, int N, const ReferenceOptions& opt = {});

}  // namespace atc
