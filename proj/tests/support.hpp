#pragma once

#include "atc/atomistic.hpp"
#include "atc/continuum.hpp"
#include "atc/coupling.hpp"
#include "atc/mesh.hpp"
#include "atc/potential.hpp"

#include <random>

namespace test_support {

inline const atc::InteractionRange& nnn() {
  static const atc::InteractionRange r = atc::InteractionRange::nearest_and_next_nearest();
  return r;
}

inline atc::SiteModel defect_model() { return atc::SiteModel(nnn(), atc::PairPotentialSpec{}); }
inline atc::SiteModel homogeneous_model() {
  return atc::SiteModel::homogeneous(nnn(), atc::PairPotentialSpec{});
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline atc::Mat2 random_matrix(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  atc::Mat2 G;
  G << dist(rng), dist(rng), dist(rng), dist(rng);
  return G;
}

// lattice field x -> G x + c
inline atc::LatticeField affine_field(std::shared_ptr<const atc::LatticeIndex> idx,
                                      const atc::Mat2& G, const atc::Vec2& c = atc::Vec2::Zero()) {
  atc::LatticeField u(idx);
  for (std::size_t i = 0; i < idx->size(); ++i) u.set(i, G * idx->site(i).vec() + c);
  return u;
}

inline atc::FEField affine_fe(const atc::FEMesh& mesh, const atc::Mat2& G,
                              const atc::Vec2& c = atc::Vec2::Zero()) {
  Eigen::VectorXd v(2 * mesh.n_nodes());
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) v.segment<2>(2 * i) = G * mesh.pos(i) + c;
  return atc::FEField(mesh, v);
}

// everything needed for one coupled problem
struct Setup {
  atc::SiteModel model;
  atc::DomainGeometry geom;
  atc::FEMesh mesh;
  atc::CauchyBornDensity cb;
  atc::AtomisticSystem atoms;
  atc::ContinuumSystem cont;
  atc::AtcProblem prob;

  Setup(atc::SiteModel m, int R, int psi = 4, int kappa = 1)
      : model(std::move(m)),
        geom(atc::build_domains(R, psi, kappa, model.range())),
        mesh(atc::build_mesh(geom)),
        cb(model),
        atoms(geom, model),
        cont(mesh, cb),
        prob(atoms, cont) {}
  Setup(const Setup&) = delete;
};

}  // namespace test_support
