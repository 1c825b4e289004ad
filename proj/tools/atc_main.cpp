// atc: convergence studies, property checks and mesh dumps.

#include "atc/checks.hpp"
#include "atc/config.hpp"
#include "atc/errors.hpp"
#include "atc/mesh.hpp"
#include "atc/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

int run_study(const std::string& config_path, const std::string& out_dir) {
  const atc::StudyConfig cfg = atc::load_config(config_path);
  std::filesystem::create_directories(out_dir);
  const auto csv_path = std::filesystem::path(out_dir) / cfg.csv;
  std::ofstream csv(csv_path);
  if (!csv) throw atc::ConfigError("cannot write " + csv_path.string());

  const auto t0 = std::chrono::steady_clock::now();
  const atc::StudyResult res =
      atc::run_convergence_study(cfg, &csv, [](const std::string& m) { std::cerr << m << '\n'; });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ofstream dat(std::filesystem::path(out_dir) / cfg.dat);
  atc::write_dat(dat, res);

  std::cout << "reference N=" << res.reference.N << " newton=" << res.reference.newton_iterations
            << " cg=" << res.reference.cg_iterations << " time=" << res.reference.wall_time << " s\n";
  if (res.broken_fit)
    std::cout << "broken error slope " << res.broken_fit->slope << " (R^2 " << res.broken_fit->r2
              << ")\n";
  if (res.continuum_fit)
    std::cout << "continuum error slope " << res.continuum_fit->slope << " (R^2 "
              << res.continuum_fit->r2 << ")\n";
  std::cout << "total " << secs << " s, table " << csv_path.string() << '\n';
  for (const auto& r : res.rows)
    if (!r.ok()) return kSolverFailure;
  return 0;
}

int run_check(const std::string& config_path, std::uint64_t seed) {
  if (!config_path.empty()) seed = atc::load_config(config_path).seed;
  bool ok = true;
  for (auto&& r : {atc::check_derivatives(seed), atc::check_cauchy_born(seed), atc::check_gauge(seed)}) {
    std::cout << atc::format_result(r) << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : kSolverFailure;
}

int run_mesh(const std::string& config_path, const std::string& dump, int R_core) {
  const atc::StudyConfig cfg = atc::load_config(config_path);
  if (R_core <= 0) R_core = cfg.ladder.front();
  const atc::DomainGeometry geom = cfg.geometry(R_core);
  const atc::FEMesh mesh = atc::build_mesh(geom, cfg.grading, cfg.beta_min);
  std::ofstream out(dump);
  if (!out) throw atc::ConfigError("cannot write " + dump);
  atc::write_mesh(mesh, out);
  std::cout << "R_core=" << R_core << " r_c=" << geom.r_c() << " nodes=" << mesh.n_nodes()
            << " triangles=" << mesh.n_triangles() << " min angle=" << mesh.min_angle_deg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimization-based atomistic-to-continuum coupling"};
  app.require_subcommand(1);

  std::string config, out = "out", dump;
  std::uint64_t seed = 1;
  int R_core = 0;

  auto* study = app.add_subcommand("study", "run the convergence study");
  study->add_option("--config", config, "TOML config")->required();
  study->add_option("--out", out, "output directory");

  auto* check = app.add_subcommand("check", "run the derivative, Cauchy-Born and gauge suites");
  check->add_option("--config", config, "TOML config (supplies the seed)");
  check->add_option("--seed", seed, "random seed");

  auto* mesh = app.add_subcommand("mesh", "write the mesh listing");
  mesh->add_option("--config", config, "TOML config")->required();
  mesh->add_option("--dump", dump, "output file")->required();
  mesh->add_option("--R", R_core, "core radius (default: first ladder entry)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*study) return run_study(config, out);
    if (*check) return run_check(config, seed);
    if (*mesh) return run_mesh(config, dump, R_core);
  } catch (const atc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const atc::ConstraintViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const atc::Error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
