#include "atc/analysis.hpp"

#include "atc/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace atc {

Eigen::MatrixXd helmert_basis(std::size_t n_points) {
  if (n_points < 2) throw OutOfRange("helmert basis needs at least two points");
  const auto n = std::ptrdiff_t(n_points);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * (n - 1));
  for (std::ptrdiff_t i = 1; i < n; ++i)
    for (int c = 0; c < 2; ++c) {
      const std::ptrdiff_t col = 2 * (i - 1) + c;
      H(2 * i + c, col) = 1.0;
      H(c, col) = -1.0;
    }
  return H;
}

namespace {

Eigen::MatrixXd gram_of(const SpMat& G, const Eigen::MatrixXd& W) {
  const SpMat GtG = SpMat(G.transpose()) * G;
  Eigen::MatrixXd Z = GtG * W;
  Eigen::MatrixXd K = W.transpose() * Z;
  return 0.5 * (K + K.transpose());
}

}  // namespace

HarmonicBasis build_atomistic_basis(const OverlapOperator& op, const LatticeField& base) {
  const auto& sys = op.atomistic();
  AtomisticLinearization lin(sys, base);
  HarmonicBasis b;
  b.which = BasisKind::atomistic;
  b.values = lin.forward(helmert_basis(sys.n_control()));
  b.gram = gram_of(op.Ga(), b.values);
  return b;
}

HarmonicBasis build_continuum_basis(const OverlapOperator& op, const FEField& base) {
  const auto& sys = op.continuum();
  ContinuumLinearization lin(sys, base);
  HarmonicBasis b;
  b.which = BasisKind::continuum;
  b.values = lin.forward(helmert_basis(sys.n_control()));
  b.gram = gram_of(op.Gc(), b.values);
  return b;
}

Eigen::MatrixXd cross_gram(const OverlapOperator& op, const HarmonicBasis& a,
                           const HarmonicBasis& c) {
  if (a.which != BasisKind::atomistic || c.which != BasisKind::continuum)
    throw OutOfRange("cross_gram expects an atomistic and a continuum basis");
  const Eigen::MatrixXd Yc = op.Gc() * c.values;
  const Eigen::MatrixXd Z = op.Ga().transpose() * Yc;
  return a.values.transpose() * Z;
}

Eigen::MatrixXd full_gram(const OverlapOperator& op, const HarmonicBasis& b) {
  if (b.which == BasisKind::atomistic) {
    const auto& idx = op.atomistic().index();
    const SpMat G = unit_gradient_operator(
        unit_triangles(op.atomistic().geometry().r_a()), [&](Site s) { return idx.ordinal(s); },
        idx.size());
    return gram_of(G, b.values);
  }
  const auto& sys = op.continuum();
  const FEMesh& mesh = sys.mesh();
  Triplets tr;
  tr.reserve(mesh.n_triangles() * 12);
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const double w = std::sqrt(mesh.area(t));
    const auto& g = sys.shape_gradients(t);
    for (int a = 0; a < 3; ++a) {
      const int node = mesh.triangles[t][std::size_t(a)];
      for (int i = 0; i < 2; ++i)
        for (int J = 0; J < 2; ++J)
          tr.emplace_back(int(4 * t) + 2 * i + J, 2 * node + i, w * g[std::size_t(a)][J]);
    }
  }
  SpMat G(std::ptrdiff_t(4 * mesh.n_triangles()), std::ptrdiff_t(2 * mesh.n_nodes()));
  G.setFromTriplets(tr.begin(), tr.end());
  return gram_of(G, b.values);
}

Eigen::MatrixXd range_whitening(const Eigen::MatrixXd& G, double drop) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  if (es.info() != Eigen::Success) throw SolverError("Gram eigensolver failed");
  const Eigen::VectorXd& s = es.eigenvalues();
  const double smax = s.size() ? s.maxCoeff() : 0.0;
  if (!(smax > 0.0)) throw SolverError("subspace has rank zero");
  std::vector<std::ptrdiff_t> keep;
  for (std::ptrdiff_t i = 0; i < s.size(); ++i)
    if (s[i] > drop * smax) keep.push_back(i);
  Eigen::MatrixXd Q(G.rows(), std::ptrdiff_t(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    Q.col(std::ptrdiff_t(k)) = es.eigenvectors().col(keep[k]) / std::sqrt(s[keep[k]]);
  return Q;
}

double sup_cosine(const Eigen::MatrixXd& Gaa, const Eigen::MatrixXd& Gcc,
                  const Eigen::MatrixXd& Gac, double drop) {
  const Eigen::MatrixXd Qa = range_whitening(Gaa, drop);
  const Eigen::MatrixXd Qc = range_whitening(Gcc, drop);
  const Eigen::MatrixXd X = Qa.transpose() * Gac * Qc;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  return std::min(1.0, svd.singularValues()(0));
}

double sup_cosine(const OverlapOperator& op, const HarmonicBasis& a, const HarmonicBasis& c) {
  return sup_cosine(a.gram, c.gram, cross_gram(op, a, c));
}

double overlap_control_constant(const Eigen::MatrixXd& full, const Eigen::MatrixXd& overlap,
                                double drop) {
  const Eigen::MatrixXd Q = range_whitening(overlap, drop);
  const Eigen::MatrixXd M = Q.transpose() * full * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("ratio eigensolver failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace atc
