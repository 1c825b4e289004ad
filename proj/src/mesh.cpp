#include "atc/mesh.hpp"

#include "atc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace atc {

const char* to_string(NodeTag t) {
  switch (t) {
    case NodeTag::interior: return "interior";
    case NodeTag::gamma_core: return "gamma_core";
    case NodeTag::gamma_c: return "gamma_c";
  }
  return "?";
}

std::int64_t FEMesh::node_id(Site s) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), s);
  if (it == nodes.end() || *it != s) return -1;
  return it - nodes.begin();
}

double FEMesh::area(std::size_t t) const {
  const auto& T = triangles[t];
  const Vec2 a = pos(std::size_t(T[0])), b = pos(std::size_t(T[1])), c = pos(std::size_t(T[2]));
  const Vec2 e1 = b - a, e2 = c - a;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double FEMesh::diameter(std::size_t t) const {
  const auto& T = triangles[t];
  const Vec2 a = pos(std::size_t(T[0])), b = pos(std::size_t(T[1])), c = pos(std::size_t(T[2]));
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

bool FEMesh::is_lattice_triangle(std::size_t t) const {
  std::array<Site, 3> v{nodes[std::size_t(triangles[t][0])], nodes[std::size_t(triangles[t][1])],
                        nodes[std::size_t(triangles[t][2])]};
  std::sort(v.begin(), v.end(), [](Site p, Site q) { return p.x != q.x ? p.x < q.x : p.y < q.y; });
  const Site o = v[0];
  // sorted by x then y: lower (o, o+e1, o+e1+e2) or upper (o, o+e2, o+e1+e2)
  const bool lower = v[1] == o + Site{1, 0} && v[2] == o + Site{1, 1};
  const bool upper = v[1] == o + Site{0, 1} && v[2] == o + Site{1, 1};
  return lower || upper;
}

double min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto angle = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  const double m = std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
  return m * 180.0 / std::numbers::pi;
}

namespace {

// smallest angle of the split side cell of a doubling ring: atan(1/2)
constexpr double kTransitionAngle = 26.565051177077990;

class MeshBuilder {
 public:
  void tri(Site a, Site b, Site c) { tris_.push_back({a, b, c}); }

  // square cell [x, x+s] x [y, y+s] split along its (1,1) diagonal
  void cell(int x, int y, int s) {
    const Site p{x, y};
    tri(p, p + Site{s, 0}, p + Site{s, s});
    tri(p, p + Site{s, s}, p + Site{0, s});
  }

  FEMesh finish(int r_core, int r_c, int r_res) {
    FEMesh m;
    m.r_core = r_core;
    m.r_c = r_c;
    m.r_resolved = r_res;
    for (const auto& t : tris_)
      for (const Site& s : t) m.nodes.push_back(s);
    std::sort(m.nodes.begin(), m.nodes.end());
    m.nodes.erase(std::unique(m.nodes.begin(), m.nodes.end()), m.nodes.end());
    m.tags.resize(m.nodes.size(), NodeTag::interior);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      const int r = m.nodes[i].norm_inf();
      if (r == r_core) m.tags[i] = NodeTag::gamma_core;
      if (r == r_c) m.tags[i] = NodeTag::gamma_c;
    }
    m.triangles.reserve(tris_.size());
    double beta = 180.0;
    for (const auto& t : tris_) {
      m.triangles.push_back({int(m.node_id(t[0])), int(m.node_id(t[1])), int(m.node_id(t[2]))});
      beta = std::min(beta, min_angle_deg(t[0].vec(), t[1].vec(), t[2].vec()));
    }
    m.min_angle_deg = beta;
    return m;
  }

 private:
  std::vector<std::array<Site, 3>> tris_;
};

bool in_open_square(int x0, int y0, int x1, int y1, int a) {
  // cell [x0,x1] x [y0,y1] inside [-a, a]^2
  return x0 >= -a && x1 <= a && y0 >= -a && y1 <= a;
}

void uniform_ring(MeshBuilder& b, int a, int s) {
  for (int y = -a - s; y <= a; y += s)
    for (int x = -a - s; x <= a; x += s)
      if (!in_open_square(x, y, x + s, y + s, a)) b.cell(x, y, s);
}

void transition_ring(MeshBuilder& b, int a, int s) {
  const int S = 2 * s;
  for (int y = -a - S; y <= a; y += S) {
    for (int x = -a - S; x <= a; x += S) {
      if (in_open_square(x, y, x + S, y + S, a)) continue;
      const std::array<Site, 4> q{{{x, y}, {x + S, y}, {x + S, y + S}, {x, y + S}}};
      int k = -1;
      for (int e = 0; e < 4; ++e) {
        const Site p0 = q[std::size_t(e)], p1 = q[std::size_t((e + 1) % 4)];
        const bool on_x = std::abs(p0.x) == a && p0.x == p1.x && std::abs(p0.y) <= a &&
                          std::abs(p1.y) <= a;
        const bool on_y = std::abs(p0.y) == a && p0.y == p1.y && std::abs(p0.x) <= a &&
                          std::abs(p1.x) <= a;
        if (on_x || on_y) k = e;
      }
      if (k < 0) {
        b.cell(x, y, S);
        continue;
      }
      const Site A = q[std::size_t(k)], B = q[std::size_t((k + 1) % 4)];
      const Site C = q[std::size_t((k + 2) % 4)], D = q[std::size_t((k + 3) % 4)];
      const Site M{(A.x + B.x) / 2, (A.y + B.y) / 2};
      b.tri(A, M, D);
      b.tri(M, B, C);
      b.tri(M, C, D);
    }
  }
}

}  // namespace

FEMesh build_mesh(const DomainGeometry& geom, double grading_exponent, double beta_min_deg) {
  if (grading_exponent < 1.0 || grading_exponent >= 2.0)
    throw ConstraintViolation("grading exponent in [1, d) violated");
  if (beta_min_deg > 45.0) throw MeshError("minimum angle above 45 degrees is unattainable");
  const int R = geom.r_core(), rc = geom.r_c();
  if (rc <= R) throw MeshError("geometry too small: r_c <= r_core");
  const int L = std::min(geom.r_o_ex(), rc);

  MeshBuilder b;
  for (int y = -L; y < L; ++y)
    for (int x = -L; x < L; ++x)
      if (!in_open_square(x, y, x + 1, y + 1, R)) b.cell(x, y, 1);

  // doubling rings are skipped when their split cells would violate beta_min
  const bool allow_doubling = beta_min_deg <= kTransitionAngle;
  const double ra = geom.r_a();
  int a = L, s = 1;
  while (a < rc) {
    const double h = std::max(1.0, std::pow(a / ra, grading_exponent));
    const int S = 2 * s;
    if (allow_doubling && S <= h && a % S == 0 && rc % S == 0 && a + S <= rc) {
      transition_ring(b, a, s);
      a += S;
      s = S;
    } else {
      uniform_ring(b, a, s);
      a += s;
    }
  }
  FEMesh mesh = b.finish(R, rc, L);
  check_mesh(mesh, geom, beta_min_deg);
  return mesh;
}

void check_mesh(const FEMesh& mesh, const DomainGeometry& geom, double beta_min_deg) {
  const int R = geom.r_core(), rc = geom.r_c(), rex = geom.r_o_ex();
  double area = 0.0;
  std::map<std::pair<int, int>, int> edges;
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const double A = mesh.area(t);
    if (!(A > 0.0)) throw MeshError("triangle " + std::to_string(t) + " is not positively oriented");
    area += A;
    const auto& T = mesh.triangles[t];
    bool inside_ex = true;
    for (int v : T) inside_ex = inside_ex && mesh.nodes[std::size_t(v)].norm_inf() <= rex;
    if (inside_ex && !mesh.is_lattice_triangle(t))
      throw MeshError("triangle " + std::to_string(t) +
                      " inside the extended overlap is not a lattice triangle");
    const double beta = min_angle_deg(mesh.pos(std::size_t(T[0])), mesh.pos(std::size_t(T[1])),
                                      mesh.pos(std::size_t(T[2])));
    if (beta < beta_min_deg - 1e-12)
      throw MeshError("triangle " + std::to_string(t) + " violates the minimum angle");
    for (int e = 0; e < 3; ++e) {
      int p = T[std::size_t(e)], q = T[std::size_t((e + 1) % 3)];
      if (p > q) std::swap(p, q);
      ++edges[{p, q}];
    }
  }
  const double expect = 4.0 * (double(rc) * rc - double(R) * R);
  if (std::abs(area - expect) > 1e-9 * expect)
    throw MeshError("triangles do not tile Omega_c: area " + std::to_string(area) + " vs " +
                    std::to_string(expect));
  for (const auto& [e, count] : edges) {
    if (count > 2) throw MeshError("edge shared by more than two triangles");
    if (count == 1) {
      const Site p = mesh.nodes[std::size_t(e.first)], q = mesh.nodes[std::size_t(e.second)];
      const bool same_line = (p.x == q.x && std::abs(p.x) == p.norm_inf() &&
                              std::abs(q.x) == q.norm_inf()) ||
                             (p.y == q.y && std::abs(p.y) == p.norm_inf() &&
                              std::abs(q.y) == q.norm_inf());
      const int r = p.norm_inf();
      if (!same_line || r != q.norm_inf() || (r != R && r != rc))
        throw MeshError("hanging or boundary-crossing edge " + to_string(p) + "-" + to_string(q));
    }
  }
}

void write_mesh(const FEMesh& mesh, std::ostream& os) {
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    os << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << ' ' << to_string(mesh.tags[i])
       << '\n';
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t)
    os << t << ' ' << mesh.triangles[t][0] << ' ' << mesh.triangles[t][1] << ' '
       << mesh.triangles[t][2] << '\n';
}

}  // namespace atc
