#pragma once

// Restricted atomistic problem on L_a with Dirichlet virtual controls on the
// boundary layer, its linearization, and the decay profile of lattice fields.

#include "atc/geometry.hpp"
#include "atc/linear_solver.hpp"
#include "atc/newton.hpp"
#include "atc/potential.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace atc {

class AtomisticSystem {
 public:
  AtomisticSystem(const DomainGeometry& geom, const SiteModel& model);

  const DomainGeometry& geometry() const { return geom_; }
  const SiteModel& model() const { return *model_; }
  const LatticeIndex& index() const { return *index_; }
  const std::shared_ptr<const LatticeIndex>& index_ptr() const { return index_; }

  // site ordinals; free = double interior, control = boundary layer
  const std::vector<std::size_t>& free_sites() const { return index_->double_interior(); }
  const std::vector<std::size_t>& control_sites() const { return index_->boundary(); }
  std::size_t n_free() const { return free_sites().size(); }
  std::size_t n_control() const { return control_sites().size(); }
  // >= 0: free slot; < 0: control slot -1-k
  std::int64_t slot(std::size_t site) const { return slot_[site]; }

  LatticeField zero_field() const { return LatticeField(index_); }
  LatticeField compose(const Eigen::VectorXd& free, const Eigen::VectorXd& lambda) const;
  Eigen::VectorXd free_values(const LatticeField& u) const;
  Eigen::VectorXd control_values(const LatticeField& u) const;

  // Sum of V_xi over every site whose stencil lies in L_a.
  double energy(const LatticeField& u) const;
  // derivative with respect to every site value
  Eigen::VectorXd gradient_full(const LatticeField& u) const;
  // derivative with respect to the free values only
  Eigen::VectorXd residual(const LatticeField& u) const;
  // full symmetric Hessian over all site values
  SpMat hessian_full(const LatticeField& u) const;
  // free-free and free-control blocks
  std::pair<SpMat, SpMat> hessian_blocks(const LatticeField& u) const;

 private:
  template <class F>
  void for_each_bond(const LatticeField& u, int order, F&& f) const;

  DomainGeometry geom_;
  const SiteModel* model_;
  std::shared_ptr<const LatticeIndex> index_;
  std::vector<std::int64_t> slot_;
  // neighbours of every energy site, range().size() per site
  std::vector<std::size_t> energy_sites_;
  std::vector<std::int32_t> nbr_;
};

struct AtomisticSolution {
  LatticeField u;
  NewtonReport report;
};

// lambda holds two values per control site, in control_sites() order.
AtomisticSolution solve_restricted_atomistic(const AtomisticSystem& sys,
                                             const Eigen::VectorXd& lambda,
                                             const LatticeField& u0,
                                             const NewtonOptions& opt = {});

// Hessian of the restricted energy at a base state, factorized once.
class AtomisticLinearization {
 public:
  AtomisticLinearization(const AtomisticSystem& sys, const LatticeField& base);

  const AtomisticSystem& system() const { return *sys_; }

  // field values on all sites (2 per site) for controls mu
  Eigen::VectorXd forward(const Eigen::VectorXd& mu) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& mu) const;
  // transpose of forward applied to y (2 per site)
  Eigen::VectorXd adjoint(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& y) const;

 private:
  const AtomisticSystem* sys_;
  SpMat H_fc_;
  SparseSpdSolver solver_;
};

LatticeField linearized_atomistic_solve(const AtomisticSystem& sys, const LatticeField& base,
                                        const Eigen::VectorXd& mu);

struct DecayPoint {
  double r = 0.0;      // shell [r, 2r)
  double value = 0.0;  // max over the shell of max_rho |D_rho u|
};

// Shells [2^j, 2^(j+1)) for j_min <= j <= j_max, Euclidean radius.
std::vector<DecayPoint> decay_profile(const LatticeField& u, const InteractionRange& range,
                                      int j_min, int j_max);

}  // namespace atc
