#include "atc/errors.hpp"
#include "atc/potential.hpp"

#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace atc;
using test_support::nnn;

namespace {

// bond lengths stay in [0.5, 2] for |Du| <= 0.3
std::vector<Vec2> random_stencil(std::mt19937_64& rng, double scale = 0.3) {
  std::vector<Vec2> Du(nnn().size());
  std::uniform_real_distribution<double> d(-scale, scale);
  for (auto& v : Du) v = {d(rng), d(rng)};
  return Du;
}

// plain Morse sum, written out without the library helpers
double morse_sum(double a, double w_nn, double w_nnn, double alpha, const std::vector<Vec2>& Du) {
  auto phi = [a](double r) { return std::exp(-2 * a * (r - 1)) - 2 * std::exp(-a * (r - 1)); };
  double e = 0.0;
  const auto range = nnn();
  for (std::size_t k = 0; k < range.size(); ++k) {
    const Vec2 rho = range[k].vec();
    const double w = rho.squaredNorm() == 1.0 ? w_nn : w_nnn;
    e += w * (phi((rho + Du[k]).norm()) - phi(rho.norm()));
  }
  return alpha * e;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Eigen::VectorXd flat(const std::vector<Vec2>& v) {
  Eigen::VectorXd x(2 * v.size());
  for (std::size_t k = 0; k < v.size(); ++k) x.segment<2>(2 * k) = v[k];
  return x;
}

std::vector<Vec2> unflat(const Eigen::VectorXd& x) {
  std::vector<Vec2> v(std::size_t(x.size() / 2));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = x.segment<2>(2 * k);
  return v;
}

// smallest nonzero eigenvalue of the assembled periodic Hessian
double dense_probe(const SiteModel& m, int N) {
  const int n = N * N;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto id = [N](int x, int y) { return ((y % N + N) % N) * N + (x % N + N) % N; };
  for (int y = 0; y < N; ++y)
    for (int x = 0; x < N; ++x)
      for (std::size_t k = 0; k < m.range().size(); ++k) {
        const Mat2 A = m.reference_stiffness(k);
        const int i = id(x, y), j = id(x + m.range()[k].x, y + m.range()[k].y);
        H.block<2, 2>(2 * i, 2 * i) += A;
        H.block<2, 2>(2 * j, 2 * j) += A;
        H.block<2, 2>(2 * i, 2 * j) -= A;
        H.block<2, 2>(2 * j, 2 * i) -= A;
      }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  // drop the two constant modes, the eigenvalues closest to zero
  std::vector<double> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  return *std::min_element(ev.begin() + 2, ev.end());
}

}  // namespace

TEST_CASE("site energy values") {
  const SiteModel m = test_support::defect_model();
  const std::vector<Vec2> zero(nnn().size(), Vec2::Zero());
  CHECK(m.site_energy({0, 0}, zero) == 0.0);
  CHECK(m.site_energy({3, 1}, zero) == 0.0);

  std::mt19937_64 rng(1);
  for (int s = 0; s < 50; ++s) {
    const auto Du = random_stencil(rng);
    const double far = m.site_energy({5, 0}, Du);
    const double core = m.site_energy({0, 0}, Du);
    CHECK(rel(core, 1.2 * far) <= 1e-15);
    CHECK(rel(far, morse_sum(1.0, 1.0, 1.0, 1.0, Du)) <= 1e-10);
  }

  PairPotentialSpec p{2.5, 0.7, 0.3};
  const SiteModel other(nnn(), p, 1.7, 1.5);
  for (int s = 0; s < 20; ++s) {
    const auto Du = random_stencil(rng);
    CHECK(rel(other.site_energy({1, 1}, Du), morse_sum(2.5, 0.7, 0.3, 1.7, Du)) <= 1e-10);
    CHECK(rel(other.site_energy({2, 0}, Du), morse_sum(2.5, 0.7, 0.3, 1.0, Du)) <= 1e-10);
  }
  CHECK_THROWS_AS(other.site_energy({0, 0}, std::vector<Vec2>(3)), OutOfRange);
}

TEST_CASE("site derivatives against central differences") {
  const SiteModel m = test_support::defect_model();
  std::mt19937_64 rng(2);
  const double h = 1e-5;
  double worst1 = 0.0, worst2 = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Site xi{s % 3 - 1, 0};
    const Eigen::VectorXd x = flat(random_stencil(rng));
    const Eigen::VectorXd d = test_support::random_vector(rng, x.size(), 1.0);
    const Eigen::VectorXd g = flat(m.site_gradient(xi, unflat(x)));
    const Eigen::MatrixXd H = m.site_hessian(xi, unflat(x));

    const double fd1 =
        (m.site_energy(xi, unflat(x + h * d)) - m.site_energy(xi, unflat(x - h * d))) / (2 * h);
    worst1 = std::max(worst1, rel(fd1, g.dot(d)));

    const Eigen::VectorXd fd2 =
        (flat(m.site_gradient(xi, unflat(x + h * d))) - flat(m.site_gradient(xi, unflat(x - h * d)))) /
        (2 * h);
    worst2 = std::max(worst2, (fd2 - H * d).norm() / (H * d).norm());

    CHECK((H - H.transpose()).norm() == 0.0);
    // pair interactions: no coupling between distinct bonds
    for (std::ptrdiff_t k = 0; k < 8; ++k)
      for (std::ptrdiff_t l = 0; l < 8; ++l)
        if (k != l) CHECK(H.block<2, 2>(2 * k, 2 * l).norm() == 0.0);
  }
  CHECK(worst1 <= 1e-6);
  CHECK(worst2 <= 1e-5);
}

TEST_CASE("reference forces are point symmetric") {
  const SiteModel m = test_support::homogeneous_model();
  const std::vector<Vec2> zero(nnn().size(), Vec2::Zero());
  const auto g = m.site_gradient({0, 0}, zero);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK((g[k] + g[nnn().opposite(k)]).norm() <= 1e-15);
  // nearest-neighbour bonds sit at the Morse minimum
  for (std::size_t k = 0; k < g.size(); ++k)
    if (nnn()[k].vec().squaredNorm() == 1.0) CHECK(g[k].norm() <= 1e-15);
}

TEST_CASE("Cauchy-Born density") {
  const SiteModel m = test_support::defect_model();
  const CauchyBornDensity cb(m);
  CHECK(cb.W(Mat2::Zero()) == 0.0);

  std::mt19937_64 rng(4);
  const double h = 1e-5;
  for (int s = 0; s < 30; ++s) {
    const Mat2 G = test_support::random_matrix(rng, 0.2);
    std::vector<Vec2> Du;
    for (const Site& r : nnn().offsets()) Du.push_back(G * r.vec());
    // W is the homogeneous site energy on the affine stencil, also near the defect
    CHECK(rel(cb.W(G), m.site_energy({7, 7}, Du)) <= 1e-15);

    Mat2 P_fd;
    Mat4 C_fd;
    for (int i = 0; i < 2; ++i)
      for (int J = 0; J < 2; ++J) {
        Mat2 E = Mat2::Zero();
        E(i, J) = h;
        P_fd(i, J) = (cb.W(G + E) - cb.W(G - E)) / (2 * h);
        const Mat2 dP = (cb.dW(G + E) - cb.dW(G - E)) / (2 * h);
        for (int k = 0; k < 2; ++k)
          for (int L = 0; L < 2; ++L) C_fd(2 * k + L, 2 * i + J) = dP(k, L);
      }
    CHECK((P_fd - cb.dW(G)).norm() <= 1e-6 * cb.dW(G).norm());
    CHECK((C_fd - cb.ddW(G)).norm() <= 1e-5 * cb.ddW(G).norm());
    CHECK((cb.ddW(G) - cb.ddW(G).transpose()).norm() <= 1e-14);
  }

  // W'(0) = sum_rho V_rho(0) rho^T; nonzero because the diagonal bonds are stretched
  Mat2 P0 = Mat2::Zero();
  const auto g0 = m.site_gradient({9, 9}, std::vector<Vec2>(nnn().size(), Vec2::Zero()));
  for (std::size_t k = 0; k < g0.size(); ++k) P0 += g0[k] * nnn()[k].vec().transpose();
  CHECK((cb.dW(Mat2::Zero()) - P0).norm() <= 1e-15);

  // C = W''(0) is positive on every F != 0
  Eigen::SelfAdjointEigenSolver<Mat4> es(cb.ddW(Mat2::Zero()));
  CHECK(es.eigenvalues()[0] > 0.0);
  for (int s = 0; s < 20; ++s) {
    const Mat2 F = test_support::random_matrix(rng, 1.0);
    Eigen::Vector4d f(F(0, 0), F(0, 1), F(1, 0), F(1, 1));
    CHECK(f.dot(cb.ddW(Mat2::Zero()) * f) > 0.0);
  }
}

TEST_CASE("stability probe") {
  const SiteModel m = test_support::defect_model();
  const double probe = stability_probe(m, 16);
  CHECK(probe > 0.0);
  CHECK(probe == doctest::Approx(dense_probe(m, 16)).epsilon(1e-10));
  // regression baseline for a = 1, unit weights
  CHECK(probe == doctest::Approx(0.2263).epsilon(1e-3));

  const SiteModel unstable(nnn(), PairPotentialSpec{1.0, 1.0, -2.0}, 1.0);
  CHECK(stability_probe(unstable, 16) < 0.0);
  CHECK(stability_probe(unstable, 8) == doctest::Approx(dense_probe(unstable, 8)).epsilon(1e-10));

  const SiteModel zero(nnn(), PairPotentialSpec{1.0, 0.0, 0.0}, 1.0);
  CHECK(stability_probe(zero, 16) == 0.0);

  CHECK_THROWS_AS(stability_probe(m, 4), ConstraintViolation);
}

TEST_CASE("defect locality") {
  const SiteModel m = test_support::defect_model();
  const SiteModel h = test_support::homogeneous_model();
  const SiteModel wide(nnn(), PairPotentialSpec{}, 0.5, 2.0);
  std::mt19937_64 rng(6);
  const double rc = nnn().r_cut();
  for (int y = -5; y <= 5; ++y)
    for (int x = -5; x <= 5; ++x) {
      const Site xi{x, y};
      const auto Du = random_stencil(rng);
      if (xi.norm() > 0.0 + rc) CHECK(m.site_energy(xi, Du) == h.site_energy(xi, Du));
      if (xi.norm() > 2.0 + rc) CHECK(wide.site_energy(xi, Du) == h.site_energy(xi, Du));
      if (xi.norm() <= 2.0) CHECK(rel(wide.site_energy(xi, Du), 0.5 * h.site_energy(xi, Du)) <= 1e-15);
    }
}

TEST_CASE("model parameter validation") {
  CHECK_THROWS_AS(SiteModel(nnn(), PairPotentialSpec{0.0, 1.0, 1.0}), ConstraintViolation);
  CHECK_THROWS_AS(SiteModel(nnn(), PairPotentialSpec{}, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(SiteModel(nnn(), PairPotentialSpec{}, 1.2, -1.0), ConstraintViolation);
}
