#pragma once

// Study configuration, read from TOML with sections [potential], [geometry],
// [mesh], [solver] and [study].

#include "atc/coupling.hpp"
#include "atc/potential.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace atc {

struct StudyConfig {
  // [potential]
  PairPotentialSpec pair{};
  double defect_alpha = 1.2;
  double defect_radius = 0.0;
  std::string range = "nn+nnn";  // or "nn"

  // [geometry]
  std::vector<int> ladder{6, 8, 12, 16};
  int psi_a = 4;
  int kappa = 1;

  // [mesh]
  double grading = 1.5;
  double beta_min = 20.0;

  // [solver]
  double tol_newton = 1e-10;
  double tol_outer = 1e-8;
  double tol_J = 1e-20;
  int max_outer = 30;
  double cg_rtol = 1e-10;

  // [study]
  int reference_factor = 4;  // N = factor * max r_c
  bool sup_cosine = true;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string csv = "study.csv";
  std::string dat = "study.dat";

  InteractionRange interaction_range() const;
  SiteModel site_model() const;
  AtcOptions atc_options() const;
  DomainGeometry geometry(int R_core) const;
  int reference_N() const;
};

// Throws ConfigError on syntax errors, unknown keys, wrong types and
// ladder entries that violate the domain rules.
StudyConfig parse_config(const std::string& toml_text, const std::string& source = "<string>");
StudyConfig load_config(const std::string& path);
void validate(const StudyConfig& cfg);

}  // namespace atc
