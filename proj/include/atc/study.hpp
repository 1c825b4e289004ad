#pragma once

// Convergence study over a ladder of core radii against one shared
// reference solution, with CSV and gnuplot output.

#include "atc/config.hpp"
#include "atc/fit.hpp"
#include "atc/reference.hpp"

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace atc {

namespace status {
inline constexpr const char* ok = "ok";
inline constexpr const char* subproblem_failed = "subproblem-failed";
inline constexpr const char* outer_diverged = "outer-diverged";
}  // namespace status

struct StudyRow {
  int R_core = 0;
  int r_c = 0;
  long atom_dofs = 0;  // 2 per site of L_a
  long fe_dofs = 0;    // 2 per mesh node
  double J = NAN;
  double broken_error = NAN;
  double atomistic_error = NAN;  // Omega_a part of the broken error
  double continuum_error = NAN;  // continuum-only solve driven by reference traces, over Omega_c
  double overlap_mismatch = NAN;  // same solve, over Omega_o
  double sup_cosine = NAN;
  int outer_iterations = -1;
  std::string status = status::ok;
  double wall_time = 0.0;
  std::string message;  // not written to CSV

  bool ok() const { return status == status::ok; }
};

struct ReferenceInfo {
  int N = 0;
  int newton_iterations = 0;
  int cg_iterations = 0;
  double residual = 0.0;
  double wall_time = 0.0;
};

struct StudyResult {
  ReferenceInfo reference;
  std::vector<StudyRow> rows;
  std::optional<FitResult> broken_fit;
  std::optional<FitResult> continuum_fit;
};

// One ladder entry against a reference covering Omega_c.  Solver failures
// are recorded in the row.
StudyRow run_entry(const StudyConfig& cfg, const SiteModel& model, int R_core,
                   const LatticeField& reference);

using StudyLog = std::function<void(const std::string&)>;

// Throws SolverError if the reference solve fails; rows are streamed to
// `csv` in ladder order as they complete.
StudyResult run_convergence_study(const StudyConfig& cfg, std::ostream* csv = nullptr,
                                  const StudyLog& log = {});

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const StudyRow& row);
// Throws ConfigError on a malformed table.
std::vector<StudyRow> read_csv(std::istream& is);
// whitespace-separated columns for gnuplot
void write_dat(std::ostream& os, const StudyResult& res);

}  // namespace atc
