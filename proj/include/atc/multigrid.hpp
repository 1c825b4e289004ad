#pragma once

// Symmetric 9-point block stencils on the square grid [-n+1, n-1]^2 (zero
// Dirichlet values at |i|_inf = n) and a Galerkin geometric multigrid
// V-cycle built on them.

#include "atc/geometry.hpp"
#include "atc/linear_solver.hpp"

#include <array>
#include <vector>

namespace atc {

class StencilOperator {
 public:
  // offsets of the neighbours that follow a node in lexicographic order
  static constexpr std::array<Site, 4> kUpper{{{1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

  explicit StencilOperator(int n);

  int n() const { return n_; }
  int side() const { return 2 * n_ - 1; }
  std::size_t nodes() const { return center_.size(); }
  std::size_t node(int i, int j) const {
    return std::size_t(j + n_ - 1) * std::size_t(side()) + std::size_t(i + n_ - 1);
  }

  Mat2& center(std::size_t p) { return center_[p]; }
  const Mat2& center(std::size_t p) const { return center_[p]; }
  // block A(p, p + kUpper[k]); A(p + kUpper[k], p) is its transpose
  Mat2& upper(int k, std::size_t p) { return upper_[std::size_t(k)][p]; }
  const Mat2& upper(int k, std::size_t p) const { return upper_[std::size_t(k)][p]; }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  SpMat to_sparse() const;
  // P^T A P for bilinear interpolation P from the grid of half size n/2
  StencilOperator galerkin_coarse() const;

 private:
  int n_;
  std::vector<Mat2> center_;
  std::array<std::vector<Mat2>, 4> upper_;
};

class Multigrid {
 public:
  Multigrid(StencilOperator fine, int sweeps = 2);

  const StencilOperator& fine() const { return levels_.front().A; }
  int depth() const { return int(levels_.size()); }

  // x = B b for the symmetric V-cycle B
  void vcycle(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

 private:
  struct Level {
    StencilOperator A;
    std::vector<Mat2> inv_center;
  };

  void cycle(std::size_t l, const Eigen::VectorXd& b, Eigen::VectorXd& x) const;
  void smooth(const Level& L, const Eigen::VectorXd& b, Eigen::VectorXd& x, bool forward) const;
  static void restrict_to(int n_fine, const Eigen::VectorXd& rf, Eigen::VectorXd& rc);
  static void prolong_add(int n_fine, const Eigen::VectorXd& xc, Eigen::VectorXd& xf);

  std::vector<Level> levels_;
  int sweeps_;
  SparseSpdSolver coarse_;
};

}  // namespace atc
