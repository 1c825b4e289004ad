#include "atc/geometry.hpp"

#include "atc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace atc {

std::string to_string(Site s) {
  std::ostringstream os;
  os << '(' << s.x << ',' << s.y << ')';
  return os.str();
}

InteractionRange::InteractionRange(std::vector<Site> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty()) throw ConstraintViolation("interaction range is empty");
  std::sort(offsets_.begin(), offsets_.end());
  if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
    throw ConstraintViolation("interaction range has repeated offsets");
  opposite_.resize(offsets_.size());
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    const Site r = offsets_[k];
    if (r == Site{0, 0}) throw ConstraintViolation("interaction range contains the zero offset");
    auto it = std::lower_bound(offsets_.begin(), offsets_.end(), -r);
    if (it == offsets_.end() || *it != -r)
      throw ConstraintViolation("interaction range is not point symmetric: missing " +
                                to_string(-r));
    opposite_[k] = std::size_t(it - offsets_.begin());
    r_cut_ = std::max(r_cut_, r.norm());
    reach_ = std::max(reach_, r.norm_inf());
  }
}

InteractionRange InteractionRange::nearest_neighbour() {
  return InteractionRange({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
}

InteractionRange InteractionRange::nearest_and_next_nearest() {
  return InteractionRange(
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}});
}

namespace {

bool in_box(const Vec2& x, double half) {
  return std::abs(x[0]) <= half && std::abs(x[1]) <= half;
}

bool in_open_box(const Vec2& x, double half) {
  return std::abs(x[0]) < half && std::abs(x[1]) < half;
}

long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) {
    r *= b;
    if (r > (1LL << 30)) throw ConstraintViolation("r_c = R_core^(kappa+1) overflows");
  }
  return r;
}

}  // namespace

DomainGeometry::DomainGeometry(int R_core, int psi_a, int kappa, InteractionRange range)
    : R_core_(R_core),
      psi_a_(psi_a),
      kappa_(kappa),
      r_c_(int(ipow(R_core, kappa + 1))),
      range_(std::move(range)) {}

bool DomainGeometry::in_core(const Vec2& x) const { return in_box(x, R_core_); }
bool DomainGeometry::in_atomistic(const Vec2& x) const { return in_box(x, r_a()); }
bool DomainGeometry::in_domain(const Vec2& x) const { return in_box(x, r_c_); }
bool DomainGeometry::in_overlap(const Vec2& x) const {
  return in_box(x, r_a()) && !in_open_box(x, R_core_);
}
bool DomainGeometry::in_overlap_ex(const Vec2& x) const {
  return in_box(x, r_o_ex()) && !in_open_box(x, R_core_);
}

DomainGeometry build_domains(int R_core, int psi_a, int kappa, const InteractionRange& range) {
  if (R_core < 1) throw ConstraintViolation("R_core >= 1 violated");
  if (psi_a < 4) throw ConstraintViolation("psi_a >= 4 violated");
  if (kappa < 1) throw ConstraintViolation("kappa >= 1 violated");
  if (double(psi_a - 1) * R_core < 4.0 * range.r_cut())
    throw ConstraintViolation("(psi_a-1)*r_core >= 4*r_cut violated");
  if (ipow(R_core, kappa) <= psi_a) throw ConstraintViolation("r_core^kappa > psi_a violated");
  return DomainGeometry(R_core, psi_a, kappa, range);
}

LatticeIndex::LatticeIndex(std::vector<Site> sites, const InteractionRange& range)
    : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  for (const Site& s : sites_) half_ = std::max(half_, s.norm_inf());
  const std::size_t w = std::size_t(2 * half_ + 1);
  if (sites_.size() >= std::size_t(INT32_MAX)) throw OutOfRange("lattice index too large");
  lookup_.assign(w * w, -1);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const Site s = sites_[i];
    lookup_[std::size_t(s.y + half_) * w + std::size_t(s.x + half_)] = std::int32_t(i);
  }

  // depth 1 = interior, depth 2 = double interior
  depth_.assign(sites_.size(), 0);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    bool ok = true;
    for (const Site& r : range.offsets())
      if (!contains(sites_[i] - r)) { ok = false; break; }
    if (ok) depth_[i] = 1;
  }
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (depth_[i] == 0) continue;
    bool ok = true;
    for (const Site& r : range.offsets()) {
      const auto j = ordinal(sites_[i] - r);
      if (depth_[std::size_t(j)] == 0) { ok = false; break; }
    }
    if (ok) depth_[i] = 2;
  }
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (depth_[i] >= 1) interior_.push_back(i);
    if (depth_[i] >= 2)
      double_interior_.push_back(i);
    else
      boundary_.push_back(i);
  }
}

LatticeIndex LatticeIndex::square(int half, const InteractionRange& range, int hole) {
  std::vector<Site> sites;
  sites.reserve(std::size_t(2 * half + 1) * std::size_t(2 * half + 1));
  for (int y = -half; y <= half; ++y)
    for (int x = -half; x <= half; ++x)
      if (std::max(std::abs(x), std::abs(y)) >= hole) sites.push_back({x, y});
  return LatticeIndex(std::move(sites), range);
}

std::int64_t LatticeIndex::ordinal(Site s) const {
  if (std::abs(s.x) > half_ || std::abs(s.y) > half_) return -1;
  const std::size_t w = std::size_t(2 * half_ + 1);
  return lookup_[std::size_t(s.y + half_) * w + std::size_t(s.x + half_)];
}

LatticeIndex lattice_sets(const DomainGeometry& geom, DomainTag which) {
  const auto& range = geom.range();
  switch (which) {
    case DomainTag::core: return LatticeIndex::square(geom.r_core(), range);
    case DomainTag::a: return LatticeIndex::square(geom.r_a(), range);
    // closed Omega_c keeps the Gamma_core ring
    case DomainTag::c: return LatticeIndex::square(geom.r_c(), range, geom.r_core());
    // L_a minus L_core
    case DomainTag::o: return LatticeIndex::square(geom.r_a(), range, geom.r_core() + 1);
  }
  throw OutOfRange("unknown domain tag");
}

LatticeField::LatticeField(std::shared_ptr<const LatticeIndex> index)
    : index_(std::move(index)), values_(Eigen::VectorXd::Zero(2 * std::ptrdiff_t(index_->size()))) {}

LatticeField::LatticeField(std::shared_ptr<const LatticeIndex> index, Eigen::VectorXd values)
    : index_(std::move(index)), values_(std::move(values)) {
  if (values_.size() != 2 * std::ptrdiff_t(index_->size()))
    throw OutOfRange("lattice field size does not match its index");
}

Vec2 LatticeField::at(Site s) const {
  const auto i = index_->ordinal(s);
  if (i < 0) throw OutOfRange("site " + to_string(s) + " not in lattice field");
  return at(std::size_t(i));
}

Vec2 LatticeField::mean() const {
  Vec2 m = Vec2::Zero();
  const std::size_t n = index_->size();
  if (n == 0) return m;
  for (std::size_t i = 0; i < n; ++i) m += at(i);
  return m / double(n);
}

void LatticeField::shift(const Vec2& c) {
  for (std::ptrdiff_t i = 0; i < values_.size(); i += 2) values_.segment<2>(i) += c;
}

void LatticeField::fix_mean_zero() {
  shift(-mean());
  // second pass removes the rounding left by the first
  shift(-mean());
  gauge_ = Gauge::mean_zero;
}

void LatticeField::pin(std::size_t i) {
  shift(-at(i));
  gauge_ = Gauge::pinned;
  pinned_ = i;
}

LatticeField restrict_field(const LatticeField& f, std::shared_ptr<const LatticeIndex> index) {
  LatticeField out(std::move(index));
  for (std::size_t i = 0; i < out.index().size(); ++i) out.set(i, f.at(out.index().site(i)));
  return out;
}

std::vector<Vec2> stencil(const LatticeField& u, Site xi, const InteractionRange& range) {
  const auto i = u.index().ordinal(xi);
  if (i < 0) throw OutOfRange("site " + to_string(xi) + " not in lattice field");
  const Vec2 ui = u.at(std::size_t(i));
  std::vector<Vec2> out;
  out.reserve(range.size());
  for (const Site& r : range.offsets()) {
    const auto j = u.index().ordinal(xi + r);
    if (j < 0) throw OutOfRange("stencil of " + to_string(xi) + " leaves the lattice set");
    out.push_back(u.at(std::size_t(j)) - ui);
  }
  return out;
}

}  // namespace atc
