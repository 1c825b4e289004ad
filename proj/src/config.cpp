#include "atc/config.hpp"

#include "atc/errors.hpp"

#include <toml.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace atc {

InteractionRange StudyConfig::interaction_range() const {
  if (range == "nn") return InteractionRange::nearest_neighbour();
  if (range == "nn+nnn") return InteractionRange::nearest_and_next_nearest();
  throw ConfigError("unknown interaction range '" + range + "'");
}

SiteModel StudyConfig::site_model() const {
  return SiteModel(interaction_range(), pair, defect_alpha, defect_radius);
}

AtcOptions StudyConfig::atc_options() const {
  AtcOptions o;
  o.newton.tol = tol_newton;
  o.tol_outer = tol_outer;
  o.tol_J = tol_J;
  o.max_outer = max_outer;
  o.cg_rtol = cg_rtol;
  return o;
}

DomainGeometry StudyConfig::geometry(int R_core) const {
  return build_domains(R_core, psi_a, kappa, interaction_range());
}

int StudyConfig::reference_N() const {
  int rc = 0;
  for (int R : ladder) rc = std::max(rc, geometry(R).r_c());
  return reference_factor * rc;
}

namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {
    for (auto&& [k, v] : root_) {
      const std::string key(k.str());
      if (!kSections.count(key)) fail("unknown section [" + key + "]");
      if (!v.is_table()) fail("[" + key + "] must be a table");
    }
  }

  template <class T>
  void get(const char* section, const char* key, T& out) {
    seen_.insert(std::string(section) + "." + key);
    const toml::node* n = root_.at_path(std::string(section) + "." + key).node();
    if (!n) return;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = n->value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n->value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = n->value_exact<std::int64_t>()) {
        if (*v < 0 && std::is_unsigned_v<T>) fail(std::string(section) + "." + key + " must be >= 0");
        out = T(*v);
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n->value_exact<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      if (const toml::array* a = n->as_array()) {
        std::vector<int> xs;
        for (const auto& e : *a) {
          auto v = e.value_exact<std::int64_t>();
          if (!v) fail(std::string(section) + "." + key + " must be a list of integers");
          xs.push_back(int(*v));
        }
        out = std::move(xs);
        return;
      }
    }
    fail(std::string(section) + "." + key + " has the wrong type");
  }

  void reject_unknown() const {
    for (auto&& [sec, tbl] : root_)
      for (auto&& [k, v] : *tbl.as_table()) {
        const std::string full = std::string(sec.str()) + "." + std::string(k.str());
        if (!seen_.count(full)) fail("unknown key " + full);
      }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source_ + ": " + msg); }

 private:
  inline static const std::set<std::string> kSections{"potential", "geometry", "mesh", "solver",
                                                      "study"};
  const toml::table& root_;
  std::string source_;
  std::set<std::string> seen_;
};

}  // namespace

StudyConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  StudyConfig c;
  Reader r(root, source);
  r.get("potential", "a", c.pair.a);
  r.get("potential", "w_nn", c.pair.w_nn);
  r.get("potential", "w_nnn", c.pair.w_nnn);
  r.get("potential", "defect_alpha", c.defect_alpha);
  r.get("potential", "defect_radius", c.defect_radius);
  r.get("potential", "range", c.range);
  r.get("geometry", "ladder", c.ladder);
  r.get("geometry", "psi_a", c.psi_a);
  r.get("geometry", "kappa", c.kappa);
  r.get("mesh", "grading", c.grading);
  r.get("mesh", "beta_min", c.beta_min);
  r.get("solver", "tol_newton", c.tol_newton);
  r.get("solver", "tol_outer", c.tol_outer);
  r.get("solver", "tol_J", c.tol_J);
  r.get("solver", "max_outer", c.max_outer);
  r.get("solver", "cg_rtol", c.cg_rtol);
  r.get("study", "reference_factor", c.reference_factor);
  r.get("study", "sup_cosine", c.sup_cosine);
  r.get("study", "threads", c.threads);
  r.get("study", "seed", c.seed);
  r.get("study", "csv", c.csv);
  r.get("study", "dat", c.dat);
  r.reject_unknown();
  validate(c);
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const StudyConfig& c) {
  if (c.ladder.empty()) throw ConfigError("geometry.ladder is empty");
  if (!(c.pair.a > 0.0)) throw ConfigError("potential.a must be positive");
  if (!(c.defect_alpha > 0.0)) throw ConfigError("potential.defect_alpha must be positive");
  if (c.reference_factor < 1) throw ConfigError("study.reference_factor must be >= 1");
  if (c.threads < 1) throw ConfigError("study.threads must be >= 1");
  if (c.max_outer < 0) throw ConfigError("solver.max_outer must be >= 0");
  if (!(c.tol_newton > 0.0) || !(c.tol_outer > 0.0) || !(c.cg_rtol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (c.grading < 1.0 || c.grading >= 2.0) throw ConfigError("mesh.grading must lie in [1, 2)");
  try {
    (void)c.interaction_range();
    for (int R : c.ladder) (void)c.geometry(R);
  } catch (const ConstraintViolation& e) {
    throw ConfigError(std::string("geometry.ladder: ") + e.what());
  }
}

}  // namespace atc
