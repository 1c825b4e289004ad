#pragma once

// Optimization-based coupling: the overlap gradient mismatch J as a function
// of the virtual controls, its reduced gradient, Gauss-Newton on J, the mean
// constraint and the broken H1 error against a reference field.

#include "atc/atomistic.hpp"
#include "atc/continuum.hpp"

#include <array>
#include <functional>
#include <vector>

namespace atc {

// Unit triangles of the lattice cell with lower-left corner `origin`:
// type 0 is (o, o+e1, o+e1+e2), type 1 is (o, o+e1+e2, o+e2).
struct UnitTriangle {
  Site origin;
  int type = 0;

  std::array<Site, 3> vertices() const;
};

// All unit triangles of [-outer, outer]^2 outside the open square (-hole, hole)^2.
std::vector<UnitTriangle> unit_triangles(int outer, int hole = 0);

// Rows 4t + 2i + J hold sqrt(|T|) d_J u_i on triangle t; columns are
// 2 * vertex_id + component.  Throws MeshError if a vertex has no id.
SpMat unit_gradient_operator(const std::vector<UnitTriangle>& tris,
                             const std::function<std::int64_t(Site)>& vertex_id,
                             std::size_t n_vertices);

struct VirtualControls {
  Eigen::VectorXd lambda_a;  // 2 per atomistic control site
  Eigen::VectorXd lambda_c;  // 2 per Gamma_core node
  Gauge gauge = Gauge::raw;

  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& v);
  void shift(const Vec2& c);
  double norm() const;
};

// Gradients of both fields on the overlap unit triangles.
class OverlapOperator {
 public:
  // Throws MeshError if the mesh is not resolved on Omega_o.
  OverlapOperator(const AtomisticSystem& atoms, const ContinuumSystem& cont);

  const AtomisticSystem& atomistic() const { return *atoms_; }
  const ContinuumSystem& continuum() const { return *cont_; }
  const std::vector<UnitTriangle>& triangles() const { return tris_; }
  double area() const { return 0.5 * double(tris_.size()); }

  const SpMat& Ga() const { return Ga_; }
  const SpMat& Gc() const { return Gc_; }

  // Ga u^a - Gc u^c, so J = |r|^2 / 2
  Eigen::VectorXd residual(const LatticeField& ua, const FEField& uc) const;
  // mean over Omega_o of I u^a - u^c
  Vec2 mean_difference(const LatticeField& ua, const FEField& uc) const;

 private:
  const AtomisticSystem* atoms_;
  const ContinuumSystem* cont_;
  std::vector<UnitTriangle> tris_;
  SpMat Ga_, Gc_;
  // integration weights over Omega_o, one per atom / mesh node
  Eigen::VectorXd wa_, wc_;
};

// 1/2 ||grad I u^a - grad u^c||^2 over Omega_o
double overlap_mismatch(const OverlapOperator& op, const LatticeField& ua, const FEField& uc);

struct AtcOptions {
  NewtonOptions newton{};
  double tol_outer = 1e-8;
  double tol_J = 1e-20;
  int max_outer = 30;
  double cg_rtol = 1e-10;
  int max_cg = 5000;
  int max_halvings = 30;
};

struct AtcIterate {
  int iteration = 0;
  double J = 0.0;
  double gradient_norm = 0.0;
  int cg_iterations = 0;
  double step = 0.0;
};

struct AtcState {
  VirtualControls controls;
  LatticeField ua;
  FEField uc;
  double J = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::vector<AtcIterate> log;
};

class AtcProblem {
 public:
  AtcProblem(const AtomisticSystem& atoms, const ContinuumSystem& cont);

  const OverlapOperator& overlap() const { return op_; }
  const AtomisticSystem& atomistic() const { return op_.atomistic(); }
  const ContinuumSystem& continuum() const { return op_.continuum(); }

  VirtualControls zero_controls() const;
  // Throws OutOfRange on size mismatch.
  void check(const VirtualControls& c) const;

  // Solves both subproblems from the given initial fields; throws
  // SubproblemFailure.
  AtcState evaluate(const VirtualControls& c, const LatticeField& ua0, const FEField& uc0,
                    const NewtonOptions& opt = {}) const;
  AtcState evaluate(const VirtualControls& c, const NewtonOptions& opt = {}) const;

  // dJ in the layout of VirtualControls, one adjoint solve per subproblem
  VirtualControls reduced_gradient(const AtcState& s) const;

 private:
  OverlapOperator op_;
};

// Gauss-Newton on J; throws NonConvergence after max_outer iterations.
AtcState solve_atc(const AtcProblem& prob, const VirtualControls& init, const AtcOptions& opt = {});

// Shifts u^c and lambda_c so that the overlap mean of I u^a - u^c vanishes;
// returns the shift.
Vec2 apply_mean_constraint(const OverlapOperator& op, AtcState& s);
Vec2 apply_mean_constraint(const OverlapOperator& op, const LatticeField& ua, FEField& uc);

struct BrokenError {
  double atomistic = 0.0;  // squared, over Omega_a
  double continuum = 0.0;  // squared, over Omega_c
  double total() const { return std::sqrt(atomistic + continuum); }
};

// ||grad(u^c - I ref)||^2 over Omega_c, exact: every mesh triangle is
// intersected with the unit triangles it covers.  Throws OutOfRange if the
// reference does not cover Omega_c.
double continuum_error_sq(const FEField& uc, const LatticeField& ref);
// ||grad(I u - I ref)||^2 over [-r, r]^2
double lattice_error_sq(const LatticeField& u, const LatticeField& ref, int r);
BrokenError broken_error(const DomainGeometry& geom, const LatticeField& ua, const FEField& uc,
                         const LatticeField& ref);

// ||grad(I ref - u^c)|| over Omega_o only
double overlap_error(const OverlapOperator& op, const LatticeField& ref, const FEField& uc);

// Values of a reference field on the control sites / Gamma_core nodes.
VirtualControls reference_traces(const AtcProblem& prob, const LatticeField& ref);

}  // namespace atc
