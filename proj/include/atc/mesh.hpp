#pragma once

// Graded P1 triangulation of Omega_c = [-r_c, r_c]^2 minus the open core,
// fully resolved on the extended overlap and coarsened by square rings.

#include "atc/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace atc {

enum class NodeTag : std::uint8_t { interior = 0, gamma_core = 1, gamma_c = 2 };

const char* to_string(NodeTag t);

struct FEMesh {
  int r_core = 0;
  int r_c = 0;
  int r_resolved = 0;  // half-width of the fully resolved square
  std::vector<Site> nodes;  // lexicographic order
  std::vector<NodeTag> tags;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  double min_angle_deg = 0.0;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_triangles() const { return triangles.size(); }
  // -1 when absent
  std::int64_t node_id(Site s) const;
  Vec2 pos(std::size_t i) const { return nodes[i].vec(); }
  double area(std::size_t t) const;
  double diameter(std::size_t t) const;
  // true if triangle t is one of the two unit triangles of a lattice cell
  bool is_lattice_triangle(std::size_t t) const;
};

// Smallest interior angle of triangle (a, b, c), in degrees.
double min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c);

// Throws MeshError if the grading cannot meet beta_min.
FEMesh build_mesh(const DomainGeometry& geom, double grading_exponent = 1.5,
                  double beta_min_deg = 20.0);

// Verifies orientation, full resolution on the extended overlap, lattice
// nodes, the minimum angle, conformity and the area of Omega_c.
void check_mesh(const FEMesh& mesh, const DomainGeometry& geom, double beta_min_deg = 20.0);

// "id x y tag" per node, then "id n0 n1 n2" per triangle.
void write_mesh(const FEMesh& mesh, std::ostream& os);

}  // namespace atc
