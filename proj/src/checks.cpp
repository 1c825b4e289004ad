#include "atc/checks.hpp"

#include "atc/analysis.hpp"
#include "atc/errors.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

namespace atc {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  Eigen::VectorXd vec(std::ptrdiff_t n, double amp) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = uniform(-amp, amp);
    return v;
  }
  std::mt19937_64 gen;
};

// a small admissible geometry for the property suites
DomainGeometry small_geometry() {
  return build_domains(5, 4, 1, InteractionRange::nearest_and_next_nearest());
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

CheckResult check_derivatives(std::uint64_t seed, int n_states) {
  const auto t0 = Clock::now();
  CheckResult res{1, "derivative consistency", false, "", 0.0};
  Rng rng(seed);
  const DomainGeometry geom = small_geometry();
  const SiteModel model(geom.range(), PairPotentialSpec{}, 1.2, 0.0);
  const CauchyBornDensity cb(model);
  const FEMesh mesh = build_mesh(geom);
  const AtomisticSystem atoms(geom, model);
  const ContinuumSystem cont(mesh, cb);
  const AtcProblem prob(atoms, cont);
  const double h = 1e-5;

  double ea_g = 0, ea_h = 0, ec_g = 0, ec_h = 0, ej = 0;
  for (int s = 0; s < n_states; ++s) {
    {
      const Eigen::VectorXd x = rng.vec(2 * std::ptrdiff_t(atoms.n_free()), 0.05);
      const Eigen::VectorXd lam = rng.vec(2 * std::ptrdiff_t(atoms.n_control()), 0.05);
      const Eigen::VectorXd d = rng.vec(x.size(), 1.0);
      auto E = [&](const Eigen::VectorXd& y) { return atoms.energy(atoms.compose(y, lam)); };
      auto g = [&](const Eigen::VectorXd& y) { return atoms.residual(atoms.compose(y, lam)); };
      const double fd = (E(x + h * d) - E(x - h * d)) / (2 * h);
      ea_g = std::max(ea_g, rel(fd, g(x).dot(d)));
      const Eigen::VectorXd Hd = atoms.hessian_blocks(atoms.compose(x, lam)).first * d;
      ea_h = std::max(ea_h, ((g(x + h * d) - g(x - h * d)) / (2 * h) - Hd).norm() / Hd.norm());
    }
    {
      const Eigen::VectorXd z = rng.vec(2 * std::ptrdiff_t(cont.n_unknown_nodes()), 0.05);
      const Eigen::VectorXd lam = rng.vec(2 * std::ptrdiff_t(cont.n_control()), 0.05);
      const Eigen::VectorXd d = rng.vec(z.size(), 1.0);
      auto E = [&](const Eigen::VectorXd& y) { return cont.energy(cont.compose(y, lam)); };
      auto g = [&](const Eigen::VectorXd& y) { return cont.residual(cont.compose(y, lam)); };
      const double fd = (E(z + h * d) - E(z - h * d)) / (2 * h);
      ec_g = std::max(ec_g, rel(fd, g(z).dot(d)));
      const Eigen::VectorXd Hd = cont.hessian_blocks(cont.compose(z, lam)).first * d;
      ec_h = std::max(ec_h, ((g(z + h * d) - g(z - h * d)) / (2 * h) - Hd).norm() / Hd.norm());
    }
    {
      NewtonOptions no;
      no.tol = 1e-12;
      VirtualControls c = prob.zero_controls();
      c.set_flat(rng.vec(c.flat().size(), 0.01));
      const Eigen::VectorXd mu = rng.vec(c.flat().size(), 1.0);
      const AtcState st = prob.evaluate(c, no);
      const double an = prob.reduced_gradient(st).flat().dot(mu);
      VirtualControls cp = c, cm = c;
      cp.set_flat(c.flat() + h * mu);
      cm.set_flat(c.flat() - h * mu);
      const double fd = (prob.evaluate(cp, st.ua, st.uc, no).J - prob.evaluate(cm, st.ua, st.uc, no).J) / (2 * h);
      ej = std::max(ej, rel(fd, an));
    }
  }
  res.seconds = since(t0);
  res.passed = ea_g <= 1e-6 && ea_h <= 1e-6 && ec_g <= 1e-6 && ec_h <= 1e-6 && ej <= 1e-4 &&
               res.seconds < 120.0;
  res.detail = std::to_string(n_states) + " states; atomistic grad " + num(ea_g) + " hess " +
               num(ea_h) + "; continuum grad " + num(ec_g) + " hess " + num(ec_h) + "; J " +
               num(ej);
  return res;
}

CheckResult check_cauchy_born(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult res{2, "Cauchy-Born identity and patch test", false, "", 0.0};
  Rng rng(seed);
  const DomainGeometry geom = small_geometry();
  const SiteModel model = SiteModel::homogeneous(geom.range(), PairPotentialSpec{});
  const CauchyBornDensity cb(model);
  const FEMesh mesh = build_mesh(geom);
  const AtomisticSystem atoms(geom, model);
  const ContinuumSystem cont(mesh, cb);
  const auto& idx = atoms.index();
  const double n_energy = double(idx.interior().size());

  double e_site = 0, e_cont = 0, patch_a = 0, patch_c = 0;
  for (int k = 0; k < 10; ++k) {
    Mat2 G;
    G << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    G *= rng.uniform(0.05, 0.1) / G.norm();
    const double W = cb.W(G);

    LatticeField u = atoms.zero_field();
    for (std::size_t i = 0; i < idx.size(); ++i) u.set(i, G * idx.site(i).vec());
    e_site = std::max(e_site, rel(atoms.energy(u) / n_energy, W));
    patch_a = std::max(patch_a, atoms.residual(u).lpNorm<Eigen::Infinity>());

    Eigen::VectorXd v(2 * mesh.n_nodes());
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
      v.segment<2>(2 * std::ptrdiff_t(i)) = G * mesh.pos(i);
    const FEField uc(mesh, v);
    const double area = 4.0 * (double(mesh.r_c) * mesh.r_c - double(mesh.r_core) * mesh.r_core);
    e_cont = std::max(e_cont, rel(cont.energy(uc), area * W));
    const Eigen::VectorXd gn = cont.gradient_nodes(uc);
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
      if (mesh.tags[i] == NodeTag::interior)
        patch_c = std::max(patch_c, gn.segment<2>(2 * std::ptrdiff_t(i)).lpNorm<Eigen::Infinity>());
  }
  res.seconds = since(t0);
  res.passed = e_site <= 1e-12 && e_cont <= 1e-12 && patch_a <= 1e-12 && patch_c <= 1e-12;
  res.detail = "energy per site vs W " + num(e_site) + ", continuum energy vs |Omega_c| W " +
               num(e_cont) + ", atomistic patch residual " + num(patch_a) +
               ", continuum patch residual " + num(patch_c);
  return res;
}

CheckResult check_decay(int N) {
  const auto t0 = Clock::now();
  CheckResult res{3, "defect decay rate", false, "", 0.0};
  const auto range = InteractionRange::nearest_and_next_nearest();
  const SiteModel model(range, PairPotentialSpec{}, 1.2, 0.0);
  const ReferenceSolution ref = solve_reference(model, N);
  const auto prof = decay_profile(ref.u, range, 3, 6);
  std::vector<std::pair<double, double>> pts;
  std::string vals;
  for (const auto& p : prof) {
    pts.emplace_back(p.r, p.value);
    vals += " " + num(p.value);
  }
  const FitResult f = fit_slope(pts);
  res.seconds = since(t0);
  res.passed = std::abs(f.slope + 2.0) <= 0.4 && res.seconds < 300.0;
  res.detail = "N=" + std::to_string(N) + " slope " + num(f.slope) + " over r=8..64, shell max" +
               vals;
  return res;
}

CheckResult check_continuum_rate(const StudyResult& s) {
  CheckResult res{4, "continuum error rate", false, "", 0.0};
  bool all_ok = true;
  std::string vals;
  for (const auto& r : s.rows) {
    all_ok = all_ok && r.ok();
    vals += " " + std::to_string(r.R_core) + ":" + num(r.continuum_error);
  }
  if (!all_ok || !s.continuum_fit) {
    res.detail = "study rows failed or no fit";
    return res;
  }
  res.passed = std::abs(s.continuum_fit->slope + 2.0) <= 0.6;
  res.detail = "slope " + num(s.continuum_fit->slope) + ";" + vals;
  return res;
}

CheckResult check_atc_rate(const StudyResult& s, double seconds) {
  CheckResult res{5, "AtC broken-norm error rate", false, "", 0.0};
  res.seconds = seconds;
  bool ok = true;
  std::string vals;
  for (const auto& r : s.rows) {
    ok = ok && r.ok() && r.J <= 4.0 * r.overlap_mismatch * r.overlap_mismatch;
    vals += " " + std::to_string(r.R_core) + ":" + num(r.broken_error) + " (J " + num(r.J) +
            " vs 4m^2 " + num(4.0 * r.overlap_mismatch * r.overlap_mismatch) + ")";
  }
  if (!s.broken_fit) {
    res.detail = "no fit;" + vals;
    return res;
  }
  res.passed = ok && std::abs(s.broken_fit->slope + 2.0) <= 0.5 && seconds < 1800.0;
  res.detail = "slope " + num(s.broken_fit->slope) + ", study " + num(seconds) + " s;" + vals;
  return res;
}

CheckResult check_norm_equivalence(int reference_N) {
  const auto t0 = Clock::now();
  CheckResult res{6, "norm equivalence constants", false, "", 0.0};
  const auto range = InteractionRange::nearest_and_next_nearest();
  const SiteModel model(range, PairPotentialSpec{}, 1.2, 0.0);
  const CauchyBornDensity cb(model);
  const ReferenceSolution ref = solve_reference(model, reference_N);
  double c[2], ra[2], rc[2];
  for (int k = 0; k < 2; ++k) {
    const DomainGeometry geom = build_domains(4 * (k + 1), 4, 2, range);
    const FEMesh mesh = build_mesh(geom);
    const AtomisticSystem atoms(geom, model);
    const ContinuumSystem cont(mesh, cb);
    const AtcProblem prob(atoms, cont);
    const VirtualControls tr = reference_traces(prob, ref.u);
    const FEField ucon = solve_restricted_continuum(cont, tr.lambda_c, FEField::zero(mesh)).u;
    const HarmonicBasis A = build_atomistic_basis(prob.overlap(), restrict_field(ref.u, atoms.index_ptr()));
    const HarmonicBasis C = build_continuum_basis(prob.overlap(), ucon);
    c[k] = sup_cosine(prob.overlap(), A, C);
    ra[k] = overlap_control_constant(full_gram(prob.overlap(), A), A.gram);
    rc[k] = overlap_control_constant(full_gram(prob.overlap(), C), C.gram);
  }
  const double da = std::abs(ra[1] - ra[0]) / ra[0], dc = std::abs(rc[1] - rc[0]) / rc[0];
  res.seconds = since(t0);
  res.passed = c[0] <= 0.999 && c[1] <= 0.999 && c[1] <= c[0] + 0.05 && std::isfinite(ra[0]) &&
               std::isfinite(ra[1]) && std::isfinite(rc[0]) && std::isfinite(rc[1]) &&
               da <= 0.2 && dc <= 0.2;
  res.detail = "c(4)=" + num(c[0]) + " c(8)=" + num(c[1]) + "; atomistic ratio " + num(ra[0]) +
               " / " + num(ra[1]) + "; continuum ratio " + num(rc[0]) + " / " + num(rc[1]);
  return res;
}

CheckResult check_gauge(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CheckResult res{7, "gauge and constraint properties", false, "", 0.0};
  Rng rng(seed);
  const DomainGeometry geom = small_geometry();
  const SiteModel model(geom.range(), PairPotentialSpec{}, 1.2, 0.0);
  const CauchyBornDensity cb(model);
  const FEMesh mesh = build_mesh(geom);
  const AtomisticSystem atoms(geom, model);
  const ContinuumSystem cont(mesh, cb);
  const AtcProblem prob(atoms, cont);
  const Vec2 shift(rng.uniform(-1, 1), rng.uniform(-1, 1));

  // energies
  LatticeField ua(atoms.index_ptr(), rng.vec(2 * std::ptrdiff_t(atoms.index().size()), 0.05));
  FEField uc(mesh, rng.vec(2 * std::ptrdiff_t(mesh.n_nodes()), 0.05));
  const double Ea = atoms.energy(ua), Ec = cont.energy(uc);
  ua.shift(shift);
  uc.shift(shift);
  const double e_energy = std::max(rel(atoms.energy(ua), Ea), rel(cont.energy(uc), Ec));

  // converged states from shifted initial controls
  const AtcState s0 = solve_atc(prob, prob.zero_controls());
  VirtualControls c1 = prob.zero_controls();
  c1.shift(shift);
  const AtcState s1 = solve_atc(prob, c1);
  const auto& op = prob.overlap();
  const Eigen::VectorXd g0 = op.Ga() * s0.ua.values(), g1 = op.Ga() * s1.ua.values();
  const Eigen::VectorXd h0 = op.Gc() * s0.uc.values(), h1 = op.Gc() * s1.uc.values();
  const double e_grad = std::max((g1 - g0).norm() / g0.norm(), (h1 - h0).norm() / h0.norm());
  double e_const = 0.0;
  for (std::size_t i = 0; i < atoms.index().size(); ++i)
    e_const = std::max(e_const, (s1.ua.at(i) - s0.ua.at(i) - shift).lpNorm<Eigen::Infinity>());
  const Eigen::VectorXd r0 = prob.reduced_gradient(s0).flat();
  const Eigen::VectorXd r1 = prob.reduced_gradient(prob.evaluate([&] {
                                                     VirtualControls c = s0.controls;
                                                     c.shift(shift);
                                                     return c;
                                                   }()))
                                 .flat();
  const double e_rgrad = (r1 - r0).norm() / std::max(r0.norm(), 1e-300);
  const double e_rgrad_abs = (r1 - r0).norm();

  // mean constraint, rechecked by direct quadrature over the overlap triangles
  AtcState s = s0;
  apply_mean_constraint(op, s);
  Vec2 integral = Vec2::Zero();
  for (const auto& t : op.triangles())
    for (const Site& v : t.vertices())
      integral += (0.5 / 3.0) * (s.ua.at(v) - s.uc.at(std::size_t(mesh.node_id(v))));
  const double e_mean = integral.lpNorm<Eigen::Infinity>() / op.area();

  // homogeneous model
  const SiteModel hom = SiteModel::homogeneous(geom.range(), PairPotentialSpec{});
  const CauchyBornDensity hcb(hom);
  const AtomisticSystem hatoms(geom, hom);
  const ContinuumSystem hcont(mesh, hcb);
  const AtcProblem hprob(hatoms, hcont);
  const AtcState hs = solve_atc(hprob, hprob.zero_controls());
  const bool hom_ok = hs.iterations == 0 && hs.J == 0.0 && hs.ua.values().isZero(0.0) &&
                      hs.uc.values().isZero(0.0);

  res.seconds = since(t0);
  res.passed = e_energy <= 1e-12 && e_grad <= 1e-8 && e_const <= 1e-8 &&
               (e_rgrad <= 1e-6 || e_rgrad_abs <= 1e-12) && e_mean <= 1e-12 && hom_ok;
  res.detail = "energy shift " + num(e_energy) + ", converged gradients " + num(e_grad) +
               ", field offset " + num(e_const) + ", reduced gradient " + num(e_rgrad_abs) +
               ", overlap mean " + num(e_mean) + ", homogeneous " +
               (hom_ok ? "zero at iteration 0" : "NOT zero");
  return res;
}

std::string csv_without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  int col = -1;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (col < 0)
      for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] == "wall_time") col = int(i);
    for (std::size_t i = 0; i < f.size(); ++i)
      out << (i ? "," : "") << (int(i) == col ? "" : f[i]);
    out << '\n';
  }
  return out.str();
}

CheckResult check_determinism(const StudyConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res{8, "determinism", false, "", 0.0};
  std::ostringstream a, b;
  run_convergence_study(cfg, &a);
  run_convergence_study(cfg, &b);
  const std::string sa = csv_without_timing(a.str()), sb = csv_without_timing(b.str());
  res.seconds = since(t0);
  res.passed = sa == sb && !sa.empty();
  std::size_t rows = 0;
  for (char ch : sa) rows += ch == '\n';
  res.detail = std::to_string(rows - 1) + " rows, " + (sa == sb ? "identical" : "DIFFERENT");
  return res;
}

std::string format_result(const CheckResult& r) {
  char t[32];
  std::snprintf(t, sizeof t, "%.1f s", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" +
         r.name + "): " + r.detail + " [" + t + "]";
}

}  // namespace atc
