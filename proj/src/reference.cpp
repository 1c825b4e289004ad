#include "atc/reference.hpp"

#include "atc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atc {

ReferenceProblem::ReferenceProblem(const SiteModel& model, int N)
    : model_(&model), N_(N), m_(2 * N - 1) {
  if (N < 2) throw OutOfRange("reference truncation needs N >= 2");
  const auto& range = model.range();
  if (range.reach() > 1)
    throw ConstraintViolation("reference solver supports interaction ranges of reach 1 only");
  for (int k = 0; k < 4; ++k) {
    upper_k_[k] = std::numeric_limits<std::size_t>::max();
    upper_w_[k] = 0.0;
    for (std::size_t r = 0; r < range.size(); ++r)
      if (range[r] == StencilOperator::kUpper[std::size_t(k)]) {
        upper_k_[k] = r;
        upper_w_[k] = 1.0;
      }
  }
}

template <class F>
void ReferenceProblem::for_each_bond(const Eigen::VectorXd& x, int order, F&& f) const {
  const int N = N_;
  auto free_slot = [&](int i, int j) -> std::ptrdiff_t {
    if (std::abs(i) >= N || std::abs(j) >= N) return -1;
    return std::ptrdiff_t(j + N - 1) * m_ + (i + N - 1);
  };
  auto value = [&](std::ptrdiff_t p) -> Vec2 {
    return p < 0 ? Vec2::Zero() : Vec2(x.segment<2>(2 * p));
  };
  for (int j = -N; j <= N; ++j) {
    for (int i = -N; i <= N; ++i) {
      const std::ptrdiff_t a = free_slot(i, j);
      const double alpha_a = model_->alpha({i, j});
      const Vec2 ua = value(a);
      for (int k = 0; k < 4; ++k) {
        if (upper_w_[k] == 0.0) continue;
        const Site o = StencilOperator::kUpper[std::size_t(k)];
        const int i2 = i + o.x, j2 = j + o.y;
        if (std::abs(i2) > N || j2 > N) continue;
        const std::ptrdiff_t b = free_slot(i2, j2);
        if (a < 0 && b < 0) continue;
        // both site energies contain this bond
        const double c = alpha_a + model_->alpha({i2, j2});
        f(a, b, k, c, model_->bond(upper_k_[k], value(b) - ua, order));
      }
    }
  }
}

double ReferenceProblem::energy(const Eigen::VectorXd& x) const {
  double E = 0.0;
  for_each_bond(x, 0, [&](std::ptrdiff_t, std::ptrdiff_t, int, double c, const BondValue& bv) {
    E += c * bv.energy;
  });
  return E;
}

Eigen::VectorXd ReferenceProblem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_unknowns());
  for_each_bond(x, 1, [&](std::ptrdiff_t a, std::ptrdiff_t b, int, double c, const BondValue& bv) {
    const Vec2 f = c * bv.force;
    if (a >= 0) g.segment<2>(2 * a) -= f;
    if (b >= 0) g.segment<2>(2 * b) += f;
  });
  return g;
}

StencilOperator ReferenceProblem::hessian(const Eigen::VectorXd& x) const {
  StencilOperator H(N_);
  for_each_bond(x, 2, [&](std::ptrdiff_t a, std::ptrdiff_t b, int k, double c, const BondValue& bv) {
    const Mat2 K = c * bv.stiffness;
    if (a >= 0) H.center(std::size_t(a)) += K;
    if (b >= 0) H.center(std::size_t(b)) += K;
    if (a >= 0 && b >= 0) H.upper(k, std::size_t(a)) -= K;
  });
  return H;
}

LatticeField ReferenceProblem::to_field(const Eigen::VectorXd& x) const {
  auto index = std::make_shared<const LatticeIndex>(LatticeIndex::square(N_, model_->range()));
  LatticeField u(index);
  for (int j = -N_ + 1; j <= N_ - 1; ++j)
    for (int i = -N_ + 1; i <= N_ - 1; ++i) {
      const std::ptrdiff_t p = std::ptrdiff_t(j + N_ - 1) * m_ + (i + N_ - 1);
      u.set(std::size_t(index->ordinal({i, j})), x.segment<2>(2 * p));
    }
  return u;
}

namespace {

struct MultigridNewton {
  const ReferenceProblem& prob;
  const ReferenceOptions& opt;
  int cg_total = 0;

  double energy(const Eigen::VectorXd& x) const { return prob.energy(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return prob.gradient(x); }
  Eigen::VectorXd direction(const Eigen::VectorXd& x, const Eigen::VectorXd& g, int) {
    Multigrid mg(prob.hessian(x), opt.smoothing_sweeps);
    const LinearOp A = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
      mg.fine().apply(v, out);
    };
    const LinearOp B = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) { mg.vcycle(v, out); };
    const double rtol = std::clamp(g.norm(), 1e-12, 1e-2);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size());
    const CgResult cg = pcg(A, B, -g, d, rtol, opt.max_cg);
    cg_total += cg.iterations;
    if (!cg.converged && cg.relative_residual > 0.1)
      throw NonConvergence("reference: preconditioned CG stalled", cg.iterations,
                           cg.relative_residual);
    return d;
  }
};

}  // namespace

ReferenceSolution solve_reference(const SiteModel& model, int N, const ReferenceOptions& opt) {
  ReferenceProblem prob(model, N);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(prob.n_unknowns());
  MultigridNewton mn{prob, opt};
  NewtonReport rep = newton_minimize(mn, x, opt.newton, "reference");
  return {prob.to_field(x), rep, mn.cg_total};
}

}  // namespace atc
