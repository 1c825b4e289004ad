#pragma once

// Acceptance checks, shared by `atc check` and the acceptance test binary.

#include "atc/config.hpp"
#include "atc/study.hpp"

#include <cstdint>
#include <string>

namespace atc {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// 1: analytic first and second derivatives of both energies and the reduced
// gradient of J against central differences.
CheckResult check_derivatives(std::uint64_t seed, int n_states = 20);
// 2: energy per site of affine fields equals W(G); patch test of both models.
CheckResult check_cauchy_born(std::uint64_t seed);
// 3: decay of the reference defect solution.
CheckResult check_decay(int N = 256);
// 4 and 5 read a finished study
CheckResult check_continuum_rate(const StudyResult& res);
CheckResult check_atc_rate(const StudyResult& res, double study_seconds);
// 6: sup-cosine and overlap-control ratios at R_core = 4 and 8.
CheckResult check_norm_equivalence(int reference_N = 256);
// 7: translation invariance, mean constraint and the homogeneous model.
CheckResult check_gauge(std::uint64_t seed);
// 8: two runs of the same study produce the same table, timing aside.
CheckResult check_determinism(const StudyConfig& cfg);

// table with the wall_time column blanked
std::string csv_without_timing(const std::string& csv);

std::string format_result(const CheckResult& r);

}  // namespace atc
