#pragma once

// Restricted Cauchy-Born P1 finite-element problem on Omega_c: Dirichlet
// virtual controls on Gamma_core, one shared constant K on Gamma_c.

#include "atc/linear_solver.hpp"
#include "atc/mesh.hpp"
#include "atc/newton.hpp"
#include "atc/potential.hpp"

#include <utility>
#include <vector>

namespace atc {

// Coefficients on every node; all Gamma_c nodes carry the same value K.
class FEField {
 public:
  FEField() = default;
  FEField(const FEMesh& mesh, Eigen::VectorXd values);
  static FEField zero(const FEMesh& mesh);

  const FEMesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  Vec2 at(std::size_t node) const { return values_.segment<2>(2 * std::ptrdiff_t(node)); }
  Vec2 K() const;
  // gradient on triangle t, rows are displacement components
  Mat2 gradient(std::size_t t) const;
  void shift(const Vec2& c);

 private:
  const FEMesh* mesh_ = nullptr;
  Eigen::VectorXd values_;
};

class ContinuumSystem {
 public:
  ContinuumSystem(const FEMesh& mesh, const CauchyBornDensity& cb);

  const FEMesh& mesh() const { return *mesh_; }
  const CauchyBornDensity& density() const { return *cb_; }

  // Gamma_core node ids in lexicographic order
  const std::vector<std::size_t>& control_nodes() const { return control_; }
  std::size_t n_control() const { return control_.size(); }
  // interior nodes plus one shared slot for K
  std::size_t n_unknown_nodes() const { return n_interior_ + 1; }
  // >= 0: unknown slot (Gamma_c nodes share the last); < 0: control slot -1-k
  std::int64_t slot(std::size_t node) const { return slot_[node]; }

  // gradients of the three barycentric functions of triangle t
  const std::array<Vec2, 3>& shape_gradients(std::size_t t) const { return grad_[t]; }

  FEField compose(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda) const;
  Eigen::VectorXd unknown_values(const FEField& u) const;
  Eigen::VectorXd control_values(const FEField& u) const;

  double energy(const FEField& u) const;
  Eigen::VectorXd gradient_nodes(const FEField& u) const;
  Eigen::VectorXd residual(const FEField& u) const;
  SpMat hessian_nodes(const FEField& u) const;
  std::pair<SpMat, SpMat> hessian_blocks(const FEField& u) const;

 private:
  const FEMesh* mesh_;
  const CauchyBornDensity* cb_;
  std::vector<std::size_t> control_;
  std::size_t n_interior_ = 0;
  std::vector<std::int64_t> slot_;
  std::vector<std::array<Vec2, 3>> grad_;
  std::vector<double> area_;
};

struct ContinuumSolution {
  FEField u;
  NewtonReport report;
};

// lambda holds two values per Gamma_core node, in control_nodes() order.
ContinuumSolution solve_restricted_continuum(const ContinuumSystem& sys,
                                             const Eigen::VectorXd& lambda, const FEField& u0,
                                             const NewtonOptions& opt = {});

class ContinuumLinearization {
 public:
  ContinuumLinearization(const ContinuumSystem& sys, const FEField& base);

  const ContinuumSystem& system() const { return *sys_; }

  // node values (2 per node) for Gamma_core controls mu
  Eigen::VectorXd forward(const Eigen::VectorXd& mu) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& mu) const;
  // transpose of forward
  Eigen::VectorXd adjoint(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& y) const;

 private:
  const ContinuumSystem* sys_;
  SpMat H_fc_;
  SparseSpdSolver solver_;
};

FEField linearized_continuum_solve(const ContinuumSystem& sys, const FEField& base,
                                   const Eigen::VectorXd& mu);

}  // namespace atc
