#include "atc/study.hpp"

#include "atc/analysis.hpp"
#include "atc/errors.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace atc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

}  // namespace

StudyRow run_entry(const StudyConfig& cfg, const SiteModel& model, int R_core,
                   const LatticeField& reference) {
  const auto t0 = std::chrono::steady_clock::now();
  StudyRow row;
  row.R_core = R_core;
  const DomainGeometry geom = cfg.geometry(R_core);
  row.r_c = geom.r_c();
  try {
    const FEMesh mesh = build_mesh(geom, cfg.grading, cfg.beta_min);
    const CauchyBornDensity cb(model);
    const AtomisticSystem atoms(geom, model);
    const ContinuumSystem cont(mesh, cb);
    const AtcProblem prob(atoms, cont);
    row.atom_dofs = 2 * long(atoms.index().size());
    row.fe_dofs = 2 * long(mesh.n_nodes());
    const AtcOptions opt = cfg.atc_options();

    const VirtualControls traces = reference_traces(prob, reference);
    FEField ucon;
    try {
      ucon = solve_restricted_continuum(cont, traces.lambda_c, FEField::zero(mesh), opt.newton).u;
    } catch (const SolverError& e) {
      throw SubproblemFailure(std::string("continuum subproblem: ") + e.what());
    }
    row.continuum_error = std::sqrt(continuum_error_sq(ucon, reference));
    row.overlap_mismatch = overlap_error(prob.overlap(), reference, ucon);

    AtcState s = solve_atc(prob, prob.zero_controls(), opt);
    apply_mean_constraint(prob.overlap(), s);
    row.J = s.J;
    row.outer_iterations = s.iterations;
    const BrokenError be = broken_error(geom, s.ua, s.uc, reference);
    row.broken_error = be.total();
    row.atomistic_error = std::sqrt(be.atomistic);

    if (cfg.sup_cosine) {
      const LatticeField ua = restrict_field(reference, atoms.index_ptr());
      const HarmonicBasis A = build_atomistic_basis(prob.overlap(), ua);
      const HarmonicBasis C = build_continuum_basis(prob.overlap(), ucon);
      row.sup_cosine = sup_cosine(prob.overlap(), A, C);
    }
  } catch (const NonConvergence& e) {
    const std::string what = e.what();
    row.status = what.rfind("coupling", 0) == 0 ? status::outer_diverged : status::subproblem_failed;
    row.message = what;
  } catch (const SolverError& e) {
    row.status = status::subproblem_failed;
    row.message = e.what();
  }
  row.wall_time = seconds_since(t0);
  return row;
}

StudyResult run_convergence_study(const StudyConfig& cfg, std::ostream* csv, const StudyLog& log) {
  validate(cfg);
  StudyResult res;
  const SiteModel model = cfg.site_model();

  const auto t0 = std::chrono::steady_clock::now();
  res.reference.N = cfg.reference_N();
  if (log) log("reference solve N=" + std::to_string(res.reference.N));
  ReferenceOptions ropt;
  ropt.newton.tol = cfg.tol_newton;
  const ReferenceSolution ref = solve_reference(model, res.reference.N, ropt);
  res.reference.newton_iterations = ref.report.iterations;
  res.reference.cg_iterations = ref.cg_iterations;
  res.reference.residual = ref.report.residual;
  res.reference.wall_time = seconds_since(t0);

  const std::size_t n = cfg.ladder.size();
  std::vector<std::optional<StudyRow>> done(n);
  std::size_t flushed = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  if (csv) write_csv_header(*csv);

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      StudyRow row = run_entry(cfg, model, cfg.ladder[i], ref.u);
      std::lock_guard lock(mu);
      if (log)
        log("R_core=" + std::to_string(row.R_core) + " " + row.status +
            (row.message.empty() ? "" : ": " + row.message));
      done[i] = std::move(row);
      while (flushed < n && done[flushed]) {
        if (csv) {
          write_csv_row(*csv, *done[flushed]);
          csv->flush();
        }
        ++flushed;
      }
    }
  };
  const int nt = std::max(1, std::min<int>(cfg.threads, int(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::pair<double, double>> be, ce;
  for (auto& r : done) {
    res.rows.push_back(std::move(*r));
    const StudyRow& row = res.rows.back();
    if (!row.ok()) continue;
    be.emplace_back(row.R_core, row.broken_error);
    ce.emplace_back(row.R_core, row.continuum_error);
  }
  try {
    res.broken_fit = fit_slope(be);
    res.continuum_fit = fit_slope(ce);
  } catch (const ConstraintViolation&) {
    // too few usable rows (or exact zeros); fits stay empty
  }
  return res;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "R_core",          "r_c",          "atom_dofs",       "fe_dofs",
      "J",               "broken_error", "atomistic_error", "continuum_error",
      "overlap_mismatch", "sup_cosine",  "outer_iterations", "status",
      "wall_time"};
  return cols;
}

void write_csv_header(std::ostream& os) {
  const auto& c = csv_columns();
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << '\n';
}

void write_csv_row(std::ostream& os, const StudyRow& r) {
  os << r.R_core << ',' << r.r_c << ',' << r.atom_dofs << ',' << r.fe_dofs << ',' << fmt(r.J)
     << ',' << fmt(r.broken_error) << ',' << fmt(r.atomistic_error) << ','
     << fmt(r.continuum_error) << ',' << fmt(r.overlap_mismatch) << ',' << fmt(r.sup_cosine)
     << ',' << r.outer_iterations << ',' << r.status << ',' << fmt(r.wall_time) << '\n';
}

std::vector<StudyRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty study table");
  std::ostringstream hdr;
  write_csv_header(hdr);
  if (line + "\n" != hdr.str()) throw ConfigError("unexpected study table header");
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != csv_columns().size()) throw ConfigError("malformed study row: " + line);
    try {
      StudyRow r;
      r.R_core = std::stoi(f[0]);
      r.r_c = std::stoi(f[1]);
      r.atom_dofs = std::stol(f[2]);
      r.fe_dofs = std::stol(f[3]);
      r.J = std::strtod(f[4].c_str(), nullptr);
      r.broken_error = std::strtod(f[5].c_str(), nullptr);
      r.atomistic_error = std::strtod(f[6].c_str(), nullptr);
      r.continuum_error = std::strtod(f[7].c_str(), nullptr);
      r.overlap_mismatch = std::strtod(f[8].c_str(), nullptr);
      r.sup_cosine = std::strtod(f[9].c_str(), nullptr);
      r.outer_iterations = std::stoi(f[10]);
      r.status = f[11];
      r.wall_time = std::strtod(f[12].c_str(), nullptr);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError("malformed study row: " + line);
    }
  }
  return rows;
}

void write_dat(std::ostream& os, const StudyResult& res) {
  os << "# R_core r_c broken_error continuum_error J sup_cosine\n";
  for (const auto& r : res.rows) {
    if (!r.ok()) continue;
    os << r.R_core << ' ' << r.r_c << ' ' << fmt(r.broken_error) << ' ' << fmt(r.continuum_error)
       << ' ' << fmt(r.J) << ' ' << fmt(r.sup_cosine) << '\n';
  }
  if (res.broken_fit)
    os << "# broken_error slope " << fmt(res.broken_fit->slope) << " intercept "
       << fmt(res.broken_fit->intercept) << '\n';
  if (res.continuum_fit)
    os << "# continuum_error slope " << fmt(res.continuum_fit->slope) << " intercept "
       << fmt(res.continuum_fit->intercept) << '\n';
}

}  // namespace atc
