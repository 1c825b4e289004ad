#pragma once

// Damped Newton minimization shared by the lattice and finite-element
// subproblems.

#include "atc/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

namespace atc {

struct NewtonOptions {
  double tol = 1e-10;       // absolute l2 residual target, before scaling
  double tol_scale = 1.0;   // the target is tol * tol_scale
  int max_iter = 50;
  double armijo = 1e-4;
  int max_backtracks = 30;
  std::function<void(int iter, double residual, double energy, double step)> log;
};

struct NewtonReport {
  int iterations = 0;
  double residual = 0.0;
  double energy = 0.0;
};

// Problem must provide
//   double energy(const VectorXd&)
//   VectorXd gradient(const VectorXd&)
//   VectorXd direction(const VectorXd& x, const VectorXd& g, int iter)  // solves H d = -g
template <class Problem>
NewtonReport newton_minimize(Problem& prob, Eigen::VectorXd& x, const NewtonOptions& opt,
                             const std::string& label) {
  NewtonReport rep;
  const double target = opt.tol * opt.tol_scale;
  double E = prob.energy(x);
  Eigen::VectorXd g = prob.gradient(x);
  double gn = g.norm();
  for (int it = 0;; ++it) {
    rep.iterations = it;
    rep.residual = gn;
    rep.energy = E;
    if (gn <= target) return rep;
    if (it >= opt.max_iter) throw NonConvergence(label + ": Newton did not converge", it, gn);

    const Eigen::VectorXd d = prob.direction(x, g, it);
    const double slope = g.dot(d);
    if (!(slope < 0.0)) throw NonConvergence(label + ": Newton direction is not descent", it, gn);

    const double noise = 1e-15 * (1.0 + std::abs(E));
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    double Et = 0.0;
    for (int k = 0; k <= opt.max_backtracks; ++k, t *= 0.5) {
      xt = x + t * d;
      Et = prob.energy(xt);
      if (std::isfinite(Et) && Et <= E + opt.armijo * t * slope + noise) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // energy differences are at rounding level: fall back on the full
      // step if it still contracts the residual
      xt = x + d;
      Eigen::VectorXd gt = prob.gradient(xt);
      if (!(gt.norm() <= 0.5 * gn)) throw NonConvergence(label + ": line search failed", it, gn);
      t = 1.0;
      if (opt.log) opt.log(it, gn, prob.energy(xt), t);
      x = std::move(xt);
      E = prob.energy(x);
      g = std::move(gt);
      gn = g.norm();
      continue;
    }
    if (opt.log) opt.log(it, gn, Et, t);
    x = std::move(xt);
    E = Et;
    g = prob.gradient(x);
    gn = g.norm();
  }
}

}  // namespace atc
