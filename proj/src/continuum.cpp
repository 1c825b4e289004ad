#include "atc/continuum.hpp"

#include "atc/errors.hpp"

namespace atc {

namespace {

std::array<Vec2, 3> barycentric_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const double A2 = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
  return {perp(p2 - p1) / A2, perp(p0 - p2) / A2, perp(p1 - p0) / A2};
}

}  // namespace

FEField::FEField(const FEMesh& mesh, Eigen::VectorXd values)
    : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != 2 * std::ptrdiff_t(mesh.n_nodes()))
    throw OutOfRange("finite-element field size does not match its mesh");
}

FEField FEField::zero(const FEMesh& mesh) {
  return FEField(mesh, Eigen::VectorXd::Zero(2 * std::ptrdiff_t(mesh.n_nodes())));
}

Vec2 FEField::K() const {
  for (std::size_t i = 0; i < mesh_->n_nodes(); ++i)
    if (mesh_->tags[i] == NodeTag::gamma_c) return at(i);
  throw MeshError("mesh has no Gamma_c nodes");
}

Mat2 FEField::gradient(std::size_t t) const {
  const auto& T = mesh_->triangles[t];
  const auto g = barycentric_gradients(mesh_->pos(std::size_t(T[0])), mesh_->pos(std::size_t(T[1])),
                                       mesh_->pos(std::size_t(T[2])));
  Mat2 F = Mat2::Zero();
  for (int a = 0; a < 3; ++a) F += at(std::size_t(T[std::size_t(a)])) * g[std::size_t(a)].transpose();
  return F;
}

void FEField::shift(const Vec2& c) {
  for (std::ptrdiff_t i = 0; i < values_.size(); i += 2) values_.segment<2>(i) += c;
}

ContinuumSystem::ContinuumSystem(const FEMesh& mesh, const CauchyBornDensity& cb)
    : mesh_(&mesh), cb_(&cb) {
  slot_.assign(mesh.n_nodes(), 0);
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    if (mesh.tags[i] == NodeTag::interior) slot_[i] = std::int64_t(n_interior_++);
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    if (mesh.tags[i] == NodeTag::gamma_c) slot_[i] = std::int64_t(n_interior_);
    if (mesh.tags[i] == NodeTag::gamma_core) {
      slot_[i] = -1 - std::int64_t(control_.size());
      control_.push_back(i);
    }
  }
  grad_.reserve(mesh.n_triangles());
  area_.reserve(mesh.n_triangles());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    grad_.push_back(barycentric_gradients(mesh.pos(std::size_t(T[0])), mesh.pos(std::size_t(T[1])),
                                          mesh.pos(std::size_t(T[2]))));
    area_.push_back(mesh.area(t));
  }
}

FEField ContinuumSystem::compose(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda) const {
  if (z.size() != 2 * std::ptrdiff_t(n_unknown_nodes()))
    throw OutOfRange("continuum unknown vector has the wrong size");
  if (lambda.size() != 2 * std::ptrdiff_t(n_control()))
    throw OutOfRange("continuum control vector has the wrong size");
  Eigen::VectorXd v(2 * mesh_->n_nodes());
  for (std::size_t i = 0; i < mesh_->n_nodes(); ++i) {
    const std::int64_t s = slot_[i];
    v.segment<2>(2 * std::ptrdiff_t(i)) =
        s >= 0 ? z.segment<2>(2 * s) : lambda.segment<2>(2 * (-1 - s));
  }
  return FEField(*mesh_, std::move(v));
}

Eigen::VectorXd ContinuumSystem::unknown_values(const FEField& u) const {
  Eigen::VectorXd z(2 * n_unknown_nodes());
  for (std::size_t i = 0; i < mesh_->n_nodes(); ++i)
    if (slot_[i] >= 0) z.segment<2>(2 * slot_[i]) = u.at(i);
  return z;
}

Eigen::VectorXd ContinuumSystem::control_values(const FEField& u) const {
  Eigen::VectorXd c(2 * control_.size());
  for (std::size_t k = 0; k < control_.size(); ++k) c.segment<2>(2 * std::ptrdiff_t(k)) = u.at(control_[k]);
  return c;
}

double ContinuumSystem::energy(const FEField& u) const {
  double E = 0.0;
  for (std::size_t t = 0; t < mesh_->n_triangles(); ++t) E += area_[t] * cb_->W(u.gradient(t));
  return E;
}

Eigen::VectorXd ContinuumSystem::gradient_nodes(const FEField& u) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * std::ptrdiff_t(mesh_->n_nodes()));
  for (std::size_t t = 0; t < mesh_->n_triangles(); ++t) {
    const auto& T = mesh_->triangles[t];
    const Mat2 P = area_[t] * cb_->dW(u.gradient(t));
    for (int a = 0; a < 3; ++a)
      g.segment<2>(2 * T[std::size_t(a)]) += P * grad_[t][std::size_t(a)];
  }
  return g;
}

Eigen::VectorXd ContinuumSystem::residual(const FEField& u) const {
  const Eigen::VectorXd g = gradient_nodes(u);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * std::ptrdiff_t(n_unknown_nodes()));
  for (std::size_t i = 0; i < mesh_->n_nodes(); ++i)
    if (slot_[i] >= 0) r.segment<2>(2 * slot_[i]) += g.segment<2>(2 * std::ptrdiff_t(i));
  return r;
}

namespace {

// block (a, b) of |T| W''(F) contracted with the shape gradients
Mat2 element_block(const Mat4& C, const Vec2& ga, const Vec2& gb) {
  Mat2 K;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int J = 0; J < 2; ++J)
        for (int L = 0; L < 2; ++L) s += C(2 * i + J, 2 * k + L) * ga[J] * gb[L];
      K(i, k) = s;
    }
  return K;
}

void add_block(Triplets& t, std::int64_t r, std::int64_t c, const Mat2& K) {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) t.emplace_back(int(2 * r + a), int(2 * c + b), K(a, b));
}

}  // namespace

SpMat ContinuumSystem::hessian_nodes(const FEField& u) const {
  Triplets tr;
  tr.reserve(mesh_->n_triangles() * 36);
  for (std::size_t t = 0; t < mesh_->n_triangles(); ++t) {
    const auto& T = mesh_->triangles[t];
    const Mat4 C = area_[t] * cb_->ddW(u.gradient(t));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        add_block(tr, T[std::size_t(a)], T[std::size_t(b)],
                  element_block(C, grad_[t][std::size_t(a)], grad_[t][std::size_t(b)]));
  }
  const auto n = std::ptrdiff_t(2 * mesh_->n_nodes());
  SpMat H(n, n);
  H.setFromTriplets(tr.begin(), tr.end());
  return H;
}

std::pair<SpMat, SpMat> ContinuumSystem::hessian_blocks(const FEField& u) const {
  Triplets tf, tc;
  tf.reserve(mesh_->n_triangles() * 36);
  for (std::size_t t = 0; t < mesh_->n_triangles(); ++t) {
    const auto& T = mesh_->triangles[t];
    const Mat4 C = area_[t] * cb_->ddW(u.gradient(t));
    for (int a = 0; a < 3; ++a) {
      const std::int64_t sa = slot_[std::size_t(T[std::size_t(a)])];
      if (sa < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const std::int64_t sb = slot_[std::size_t(T[std::size_t(b)])];
        const Mat2 K = element_block(C, grad_[t][std::size_t(a)], grad_[t][std::size_t(b)]);
        if (sb >= 0)
          add_block(tf, sa, sb, K);
        else
          add_block(tc, sa, -1 - sb, K);
      }
    }
  }
  const auto nf = std::ptrdiff_t(2 * n_unknown_nodes());
  const auto nc = std::ptrdiff_t(2 * n_control());
  SpMat Hff(nf, nf), Hfc(nf, nc);
  Hff.setFromTriplets(tf.begin(), tf.end());
  Hfc.setFromTriplets(tc.begin(), tc.end());
  return {std::move(Hff), std::move(Hfc)};
}

namespace {

struct ContinuumProblem {
  const ContinuumSystem& sys;
  const Eigen::VectorXd& lambda;

  double energy(const Eigen::VectorXd& z) const { return sys.energy(sys.compose(z, lambda)); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    return sys.residual(sys.compose(z, lambda));
  }
  Eigen::VectorXd direction(const Eigen::VectorXd& z, const Eigen::VectorXd& g, int) const {
    auto [Hff, Hfc] = sys.hessian_blocks(sys.compose(z, lambda));
    return descent_direction(Hff, g);
  }
};

}  // namespace

ContinuumSolution solve_restricted_continuum(const ContinuumSystem& sys,
                                             const Eigen::VectorXd& lambda, const FEField& u0,
                                             const NewtonOptions& opt) {
  if (lambda.size() != 2 * std::ptrdiff_t(sys.n_control()))
    throw OutOfRange("continuum control vector has the wrong size");
  NewtonOptions o = opt;
  o.tol_scale = 1.0 + (lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0);
  Eigen::VectorXd z = sys.unknown_values(u0);
  ContinuumProblem prob{sys, lambda};
  NewtonReport rep = newton_minimize(prob, z, o, "restricted continuum");
  return {sys.compose(z, lambda), rep};
}

ContinuumLinearization::ContinuumLinearization(const ContinuumSystem& sys, const FEField& base)
    : sys_(&sys) {
  auto [Hff, Hfc] = sys.hessian_blocks(base);
  H_fc_ = std::move(Hfc);
  solver_.factorize(Hff);
}

Eigen::MatrixXd ContinuumLinearization::forward(const Eigen::MatrixXd& mu) const {
  const auto& mesh = sys_->mesh();
  if (mu.rows() != 2 * std::ptrdiff_t(sys_->n_control()))
    throw OutOfRange("continuum control vector has the wrong size");
  const Eigen::MatrixXd z = -solver_.solve(Eigen::MatrixXd(H_fc_ * mu));
  Eigen::MatrixXd out(2 * mesh.n_nodes(), mu.cols());
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    const std::int64_t s = sys_->slot(i);
    out.middleRows<2>(2 * std::ptrdiff_t(i)) =
        s >= 0 ? z.middleRows<2>(2 * s) : mu.middleRows<2>(2 * (-1 - s));
  }
  return out;
}

Eigen::VectorXd ContinuumLinearization::forward(const Eigen::VectorXd& mu) const {
  return forward(Eigen::MatrixXd(mu)).col(0);
}

Eigen::MatrixXd ContinuumLinearization::adjoint(const Eigen::MatrixXd& y) const {
  const auto& mesh = sys_->mesh();
  if (y.rows() != 2 * std::ptrdiff_t(mesh.n_nodes()))
    throw OutOfRange("adjoint input has the wrong size");
  Eigen::MatrixXd yf = Eigen::MatrixXd::Zero(2 * sys_->n_unknown_nodes(), y.cols());
  Eigen::MatrixXd out(2 * sys_->n_control(), y.cols());
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    const std::int64_t s = sys_->slot(i);
    if (s >= 0)
      yf.middleRows<2>(2 * s) += y.middleRows<2>(2 * std::ptrdiff_t(i));
    else
      out.middleRows<2>(2 * (-1 - s)) = y.middleRows<2>(2 * std::ptrdiff_t(i));
  }
  out -= H_fc_.transpose() * solver_.solve(yf);
  return out;
}

Eigen::VectorXd ContinuumLinearization::adjoint(const Eigen::VectorXd& y) const {
  return adjoint(Eigen::MatrixXd(y)).col(0);
}

FEField linearized_continuum_solve(const ContinuumSystem& sys, const FEField& base,
                                   const Eigen::VectorXd& mu) {
  ContinuumLinearization lin(sys, base);
  return FEField(sys.mesh(), lin.forward(mu));
}

}  // namespace atc
