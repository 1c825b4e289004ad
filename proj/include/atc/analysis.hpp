#pragma once

// Discrete-harmonic control subspaces and the constants of the norm
// equivalence: the sup-cosine between the two subspaces on the overlap and
// the full-domain to overlap gradient ratio.

#include "atc/coupling.hpp"

namespace atc {

// 2n x (2n - 2): per component, columns e_i - e_0 for i = 1..n-1.  Spans
// the controls orthogonal to the constants.
Eigen::MatrixXd helmert_basis(std::size_t n_points);

enum class BasisKind { atomistic, continuum };

struct HarmonicBasis {
  BasisKind which = BasisKind::atomistic;
  // linearized field values (2 per site / node), one column per control direction
  Eigen::MatrixXd values;
  // overlap gradient Gram matrix of the columns
  Eigen::MatrixXd gram;
};

// Columns are the linearized solutions for the Helmert controls, at `base`.
HarmonicBasis build_atomistic_basis(const OverlapOperator& op, const LatticeField& base);
HarmonicBasis build_continuum_basis(const OverlapOperator& op, const FEField& base);

// (grad I w^a, grad w^c) over Omega_o for every column pair
Eigen::MatrixXd cross_gram(const OverlapOperator& op, const HarmonicBasis& a,
                           const HarmonicBasis& c);

// Gradient Gram matrix over the whole subdomain: Omega_a for atomistic
// columns, Omega_c for continuum columns.
Eigen::MatrixXd full_gram(const OverlapOperator& op, const HarmonicBasis& b);

// Largest principal-angle cosine from self Grams Gaa, Gcc and cross Gram Gac.
// Eigenvalues below drop * max are discarded; throws SolverError if nothing
// is left.
double sup_cosine(const Eigen::MatrixXd& Gaa, const Eigen::MatrixXd& Gcc,
                  const Eigen::MatrixXd& Gac, double drop = 1e-10);
double sup_cosine(const OverlapOperator& op, const HarmonicBasis& a, const HarmonicBasis& c);

// sqrt of the largest eigenvalue of `full` relative to `overlap`, over the
// numerical range of `overlap`.
double overlap_control_constant(const Eigen::MatrixXd& full, const Eigen::MatrixXd& overlap,
                                double drop = 1e-10);

// Q with Q^T G Q = I spanning the numerical range of the PSD matrix G.
Eigen::MatrixXd range_whitening(const Eigen::MatrixXd& G, double drop = 1e-10);

}  // namespace atc
