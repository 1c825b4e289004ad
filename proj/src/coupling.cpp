#include "atc/coupling.hpp"

#include "atc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace atc {

std::array<Site, 3> UnitTriangle::vertices() const {
  if (type == 0) return {origin, origin + Site{1, 0}, origin + Site{1, 1}};
  return {origin, origin + Site{1, 1}, origin + Site{0, 1}};
}

std::vector<UnitTriangle> unit_triangles(int outer, int hole) {
  std::vector<UnitTriangle> out;
  for (int y = -outer; y < outer; ++y)
    for (int x = -outer; x < outer; ++x) {
      if (x >= -hole && x + 1 <= hole && y >= -hole && y + 1 <= hole) continue;
      out.push_back({{x, y}, 0});
      out.push_back({{x, y}, 1});
    }
  return out;
}

namespace {

// d_x, d_y of the P1 interpolant in terms of the three vertex values
constexpr double kDx[2][3] = {{-1, 1, 0}, {0, 1, -1}};
constexpr double kDy[2][3] = {{0, -1, 1}, {-1, 0, 1}};

Mat2 unit_gradient(const UnitTriangle& t, const std::array<Vec2, 3>& v) {
  Mat2 F;
  F.col(0) = kDx[t.type][0] * v[0] + kDx[t.type][1] * v[1] + kDx[t.type][2] * v[2];
  F.col(1) = kDy[t.type][0] * v[0] + kDy[t.type][1] * v[1] + kDy[t.type][2] * v[2];
  return F;
}

Mat2 lattice_gradient(const UnitTriangle& t, const LatticeField& u) {
  const auto s = t.vertices();
  return unit_gradient(t, {u.at(s[0]), u.at(s[1]), u.at(s[2])});
}

void check_covers(const LatticeField& u, int r, const char* what) {
  for (Site c : {Site{-r, -r}, Site{r, -r}, Site{r, r}, Site{-r, r}})
    if (!u.index().contains(c)) throw OutOfRange(std::string(what) + " does not cover the domain");
}

}  // namespace

SpMat unit_gradient_operator(const std::vector<UnitTriangle>& tris,
                             const std::function<std::int64_t(Site)>& vertex_id,
                             std::size_t n_vertices) {
  const double w = std::sqrt(0.5);
  Triplets tr;
  tr.reserve(tris.size() * 16);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto s = tris[t].vertices();
    const int ty = tris[t].type;
    for (int a = 0; a < 3; ++a) {
      const std::int64_t id = vertex_id(s[std::size_t(a)]);
      if (id < 0) throw MeshError("vertex " + to_string(s[std::size_t(a)]) + " has no node");
      for (int i = 0; i < 2; ++i) {
        const int row = int(4 * t) + 2 * i;
        const int col = int(2 * id) + i;
        if (kDx[ty][a] != 0.0) tr.emplace_back(row, col, w * kDx[ty][a]);
        if (kDy[ty][a] != 0.0) tr.emplace_back(row + 1, col, w * kDy[ty][a]);
      }
    }
  }
  SpMat G(std::ptrdiff_t(4 * tris.size()), std::ptrdiff_t(2 * n_vertices));
  G.setFromTriplets(tr.begin(), tr.end());
  return G;
}

Eigen::VectorXd VirtualControls::flat() const {
  Eigen::VectorXd v(lambda_a.size() + lambda_c.size());
  v << lambda_a, lambda_c;
  return v;
}

void VirtualControls::set_flat(const Eigen::VectorXd& v) {
  if (v.size() != lambda_a.size() + lambda_c.size())
    throw OutOfRange("control vector has the wrong size");
  lambda_a = v.head(lambda_a.size());
  lambda_c = v.tail(lambda_c.size());
}

void VirtualControls::shift(const Vec2& c) {
  for (std::ptrdiff_t i = 0; i < lambda_a.size(); i += 2) lambda_a.segment<2>(i) += c;
  for (std::ptrdiff_t i = 0; i < lambda_c.size(); i += 2) lambda_c.segment<2>(i) += c;
  gauge = Gauge::raw;
}

double VirtualControls::norm() const {
  return std::sqrt(lambda_a.squaredNorm() + lambda_c.squaredNorm());
}

OverlapOperator::OverlapOperator(const AtomisticSystem& atoms, const ContinuumSystem& cont)
    : atoms_(&atoms), cont_(&cont) {
  const auto& geom = atoms.geometry();
  const FEMesh& mesh = cont.mesh();
  if (mesh.r_core != geom.r_core() || mesh.r_resolved < geom.r_a())
    throw MeshError("mesh is not fully resolved on the overlap");
  tris_ = unit_triangles(geom.r_a(), geom.r_core());
  const auto& idx = atoms.index();
  Ga_ = unit_gradient_operator(tris_, [&](Site s) { return idx.ordinal(s); }, idx.size());
  Gc_ = unit_gradient_operator(tris_, [&](Site s) { return mesh.node_id(s); }, mesh.n_nodes());

  wa_ = Eigen::VectorXd::Zero(std::ptrdiff_t(idx.size()));
  wc_ = Eigen::VectorXd::Zero(std::ptrdiff_t(mesh.n_nodes()));
  for (const auto& t : tris_)
    for (const Site& s : t.vertices()) {
      wa_[idx.ordinal(s)] += 1.0 / 6.0;
      wc_[mesh.node_id(s)] += 1.0 / 6.0;
    }
}

Eigen::VectorXd OverlapOperator::residual(const LatticeField& ua, const FEField& uc) const {
  return Ga_ * ua.values() - Gc_ * uc.values();
}

Vec2 OverlapOperator::mean_difference(const LatticeField& ua, const FEField& uc) const {
  Vec2 m = Vec2::Zero();
  for (std::ptrdiff_t i = 0; i < wa_.size(); ++i)
    if (wa_[i] != 0.0) m += wa_[i] * ua.at(std::size_t(i));
  for (std::ptrdiff_t i = 0; i < wc_.size(); ++i)
    if (wc_[i] != 0.0) m -= wc_[i] * uc.at(std::size_t(i));
  return m / area();
}

double overlap_mismatch(const OverlapOperator& op, const LatticeField& ua, const FEField& uc) {
  return 0.5 * op.residual(ua, uc).squaredNorm();
}

AtcProblem::AtcProblem(const AtomisticSystem& atoms, const ContinuumSystem& cont)
    : op_(atoms, cont) {}

VirtualControls AtcProblem::zero_controls() const {
  VirtualControls c;
  c.lambda_a = Eigen::VectorXd::Zero(2 * std::ptrdiff_t(atomistic().n_control()));
  c.lambda_c = Eigen::VectorXd::Zero(2 * std::ptrdiff_t(continuum().n_control()));
  return c;
}

void AtcProblem::check(const VirtualControls& c) const {
  if (c.lambda_a.size() != 2 * std::ptrdiff_t(atomistic().n_control()))
    throw OutOfRange("lambda_a does not match the atomistic boundary layer");
  if (c.lambda_c.size() != 2 * std::ptrdiff_t(continuum().n_control()))
    throw OutOfRange("lambda_c does not match Gamma_core");
}

AtcState AtcProblem::evaluate(const VirtualControls& c, const LatticeField& ua0,
                              const FEField& uc0, const NewtonOptions& opt) const {
  check(c);
  AtcState s;
  s.controls = c;
  try {
    s.ua = solve_restricted_atomistic(atomistic(), c.lambda_a, ua0, opt).u;
  } catch (const SolverError& e) {
    throw SubproblemFailure(std::string("atomistic subproblem: ") + e.what());
  }
  try {
    s.uc = solve_restricted_continuum(continuum(), c.lambda_c, uc0, opt).u;
  } catch (const SolverError& e) {
    throw SubproblemFailure(std::string("continuum subproblem: ") + e.what());
  }
  s.J = overlap_mismatch(op_, s.ua, s.uc);
  return s;
}

namespace {

Vec2 control_mean(const Eigen::VectorXd& lambda) {
  Vec2 m = Vec2::Zero();
  const std::ptrdiff_t n = lambda.size() / 2;
  for (std::ptrdiff_t i = 0; i < n; ++i) m += lambda.segment<2>(2 * i);
  return n ? Vec2(m / double(n)) : m;
}

}  // namespace

AtcState AtcProblem::evaluate(const VirtualControls& c, const NewtonOptions& opt) const {
  check(c);
  // start from the mean control value so that joint constants cost nothing
  LatticeField ua0 = atomistic().zero_field();
  ua0.shift(control_mean(c.lambda_a));
  FEField uc0 = FEField::zero(continuum().mesh());
  uc0.shift(control_mean(c.lambda_c));
  return evaluate(c, ua0, uc0, opt);
}

VirtualControls AtcProblem::reduced_gradient(const AtcState& s) const {
  const Eigen::VectorXd r = op_.residual(s.ua, s.uc);
  AtomisticLinearization la(atomistic(), s.ua);
  ContinuumLinearization lc(continuum(), s.uc);
  VirtualControls g;
  g.lambda_a = la.adjoint(Eigen::VectorXd(op_.Ga().transpose() * r));
  g.lambda_c = -lc.adjoint(Eigen::VectorXd(op_.Gc().transpose() * r));
  return g;
}

namespace {

// remove the per-component mean of each control block
void project_constants(Eigen::VectorXd& v, std::ptrdiff_t na) {
  auto remove = [](Eigen::Ref<Eigen::VectorXd> x) {
    const std::ptrdiff_t n = x.size() / 2;
    if (n == 0) return;
    Vec2 m = Vec2::Zero();
    for (std::ptrdiff_t i = 0; i < n; ++i) m += x.segment<2>(2 * i);
    m /= double(n);
    for (std::ptrdiff_t i = 0; i < n; ++i) x.segment<2>(2 * i) -= m;
  };
  remove(v.head(na));
  remove(v.tail(v.size() - na));
}

}  // namespace

AtcState solve_atc(const AtcProblem& prob, const VirtualControls& init, const AtcOptions& opt) {
  const auto& op = prob.overlap();
  const auto& Ga = op.Ga();
  const auto& Gc = op.Gc();
  const std::ptrdiff_t na = init.lambda_a.size();

  AtcState s = prob.evaluate(init, opt.newton);
  AtcIterate pending;
  for (int k = 0;; ++k) {
    AtomisticLinearization la(prob.atomistic(), s.ua);
    ContinuumLinearization lc(prob.continuum(), s.uc);
    const Eigen::VectorXd r = op.residual(s.ua, s.uc);

    Eigen::VectorXd g(na + init.lambda_c.size());
    g << la.adjoint(Eigen::VectorXd(Ga.transpose() * r)),
        -lc.adjoint(Eigen::VectorXd(Gc.transpose() * r));
    s.iterations = k;
    s.gradient_norm = g.norm();
    pending.iteration = k;
    pending.J = s.J;
    pending.gradient_norm = s.gradient_norm;
    s.log.push_back(pending);
    if (s.gradient_norm <= opt.tol_outer || s.J <= opt.tol_J) return s;
    if (k >= opt.max_outer)
      throw NonConvergence("coupling: outer iteration limit reached", k, s.gradient_norm);

    // Gauss-Newton step: M^T M d = -M^T r on the complement of the constants
    const LinearOp normal = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
      Eigen::VectorXd p = v;
      project_constants(p, na);
      const Eigen::VectorXd y = Ga * la.forward(Eigen::VectorXd(p.head(na))) -
                                Gc * lc.forward(Eigen::VectorXd(p.tail(p.size() - na)));
      out.resize(v.size());
      out << la.adjoint(Eigen::VectorXd(Ga.transpose() * y)),
          -lc.adjoint(Eigen::VectorXd(Gc.transpose() * y));
      project_constants(out, na);
    };
    const LinearOp identity = [](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = v; };
    Eigen::VectorXd b = -g;
    project_constants(b, na);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(b.size());
    const CgResult cg = pcg(normal, identity, b, d, opt.cg_rtol, opt.max_cg);
    pending = AtcIterate{};
    pending.cg_iterations = cg.iterations;

    // linear prediction of the new fields as the Newton starting point
    const Eigen::VectorXd fa = la.forward(Eigen::VectorXd(d.head(na)));
    const Eigen::VectorXd fc = lc.forward(Eigen::VectorXd(d.tail(d.size() - na)));
    const Eigen::VectorXd x0 = s.controls.flat();
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      VirtualControls c = s.controls;
      c.set_flat(x0 + t * d);
      LatticeField ua0(s.ua.index_ptr(), s.ua.values() + t * fa);
      FEField uc0(s.uc.mesh(), s.uc.values() + t * fc);
      AtcState trial = prob.evaluate(c, ua0, uc0, opt.newton);
      if (trial.J <= s.J) {
        trial.log = std::move(s.log);
        s = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergence("coupling: line search failed", k, s.gradient_norm);
    pending.step = t;
  }
}

Vec2 apply_mean_constraint(const OverlapOperator& op, const LatticeField& ua, FEField& uc) {
  const Vec2 c = op.mean_difference(ua, uc);
  uc.shift(c);
  return c;
}

Vec2 apply_mean_constraint(const OverlapOperator& op, AtcState& s) {
  const Vec2 c = apply_mean_constraint(op, s.ua, s.uc);
  for (std::ptrdiff_t i = 0; i < s.controls.lambda_c.size(); i += 2)
    s.controls.lambda_c.segment<2>(i) += c;
  return c;
}

namespace {

using Poly = std::vector<Vec2>;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// keep the part of p left of the directed line a -> b
Poly clip(const Poly& p, const Vec2& a, const Vec2& b) {
  Poly out;
  const Vec2 e = b - a;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& P = p[i];
    const Vec2& Q = p[(i + 1) % n];
    const double sp = cross(e, P - a), sq = cross(e, Q - a);
    if (sp >= 0) out.push_back(P);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) out.push_back(P + (sp / (sp - sq)) * (Q - P));
  }
  return out;
}

double poly_area(const Poly& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

std::int64_t side(Site a, Site b, Site q) {
  return std::int64_t(b.x - a.x) * (q.y - a.y) - std::int64_t(b.y - a.y) * (q.x - a.x);
}

}  // namespace

double continuum_error_sq(const FEField& uc, const LatticeField& ref) {
  const FEMesh& mesh = uc.mesh();
  check_covers(ref, mesh.r_c, "reference");
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& T = mesh.triangles[t];
    const Site A = mesh.nodes[std::size_t(T[0])], B = mesh.nodes[std::size_t(T[1])],
               C = mesh.nodes[std::size_t(T[2])];
    const Mat2 G = uc.gradient(t);
    const int x0 = std::min({A.x, B.x, C.x}), x1 = std::max({A.x, B.x, C.x});
    const int y0 = std::min({A.y, B.y, C.y}), y1 = std::max({A.y, B.y, C.y});
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        for (int ty = 0; ty < 2; ++ty) {
          const UnitTriangle ut{{x, y}, ty};
          const auto v = ut.vertices();
          bool inside = true, outside = false;
          for (auto [p, q] : {std::pair{A, B}, std::pair{B, C}, std::pair{C, A}}) {
            const std::int64_t s0 = side(p, q, v[0]), s1 = side(p, q, v[1]), s2 = side(p, q, v[2]);
            inside = inside && s0 >= 0 && s1 >= 0 && s2 >= 0;
            outside = outside || (s0 <= 0 && s1 <= 0 && s2 <= 0);
          }
          double a;
          if (inside) {
            a = 0.5;
          } else if (outside) {
            continue;
          } else {
            Poly p{v[0].vec(), v[1].vec(), v[2].vec()};
            p = clip(p, A.vec(), B.vec());
            p = clip(p, B.vec(), C.vec());
            p = clip(p, C.vec(), A.vec());
            if (p.size() < 3) continue;
            a = poly_area(p);
          }
          sum += a * (G - lattice_gradient(ut, ref)).squaredNorm();
        }
  }
  return sum;
}

double lattice_error_sq(const LatticeField& u, const LatticeField& ref, int r) {
  check_covers(u, r, "field");
  check_covers(ref, r, "reference");
  double sum = 0.0;
  for (const auto& t : unit_triangles(r))
    sum += 0.5 * (lattice_gradient(t, u) - lattice_gradient(t, ref)).squaredNorm();
  return sum;
}

BrokenError broken_error(const DomainGeometry& geom, const LatticeField& ua, const FEField& uc,
                         const LatticeField& ref) {
  BrokenError e;
  e.atomistic = lattice_error_sq(ua, ref, geom.r_a());
  e.continuum = continuum_error_sq(uc, ref);
  return e;
}

double overlap_error(const OverlapOperator& op, const LatticeField& ref, const FEField& uc) {
  check_covers(ref, op.atomistic().geometry().r_a(), "reference");
  const auto& idx = op.atomistic().index();
  Eigen::VectorXd v(2 * std::ptrdiff_t(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) v.segment<2>(2 * std::ptrdiff_t(i)) = ref.at(idx.site(i));
  return (op.Ga() * v - op.Gc() * uc.values()).norm();
}

VirtualControls reference_traces(const AtcProblem& prob, const LatticeField& ref) {
  const auto& atoms = prob.atomistic();
  const auto& cont = prob.continuum();
  check_covers(ref, atoms.geometry().r_a(), "reference");
  VirtualControls c = prob.zero_controls();
  const auto& cs = atoms.control_sites();
  for (std::size_t k = 0; k < cs.size(); ++k)
    c.lambda_a.segment<2>(2 * std::ptrdiff_t(k)) = ref.at(atoms.index().site(cs[k]));
  const auto& cn = cont.control_nodes();
  for (std::size_t k = 0; k < cn.size(); ++k)
    c.lambda_c.segment<2>(2 * std::ptrdiff_t(k)) = ref.at(cont.mesh().nodes[cn[k]]);
  return c;
}

}  // namespace atc
