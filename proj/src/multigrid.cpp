#include "atc/multigrid.hpp"

#include "atc/errors.hpp"

namespace atc {

StencilOperator::StencilOperator(int n) : n_(n) {
  if (n < 1) throw OutOfRange("stencil grid needs n >= 1");
  const std::size_t N = std::size_t(side()) * std::size_t(side());
  center_.assign(N, Mat2::Zero());
  for (auto& u : upper_) u.assign(N, Mat2::Zero());
}

void StencilOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(x.size());
  const int lo = -n_ + 1, hi = n_ - 1;
  for (int j = lo; j <= hi; ++j) {
    for (int i = lo; i <= hi; ++i) {
      const std::size_t p = node(i, j);
      const Vec2 xp = x.segment<2>(2 * std::ptrdiff_t(p));
      y.segment<2>(2 * std::ptrdiff_t(p)) += center_[p] * xp;
      for (int k = 0; k < 4; ++k) {
        const int qi = i + kUpper[std::size_t(k)].x, qj = j + kUpper[std::size_t(k)].y;
        if (qi < lo || qi > hi || qj > hi) continue;
        const std::size_t q = node(qi, qj);
        const Mat2& U = upper_[std::size_t(k)][p];
        y.segment<2>(2 * std::ptrdiff_t(p)) += U * x.segment<2>(2 * std::ptrdiff_t(q));
        y.segment<2>(2 * std::ptrdiff_t(q)) += U.transpose() * xp;
      }
    }
  }
}

SpMat StencilOperator::to_sparse() const {
  Triplets t;
  t.reserve(nodes() * 36);
  const int lo = -n_ + 1, hi = n_ - 1;
  auto put = [&](std::size_t r, std::size_t c, const Mat2& K) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) t.emplace_back(int(2 * r + a), int(2 * c + b), K(a, b));
  };
  for (int j = lo; j <= hi; ++j) {
    for (int i = lo; i <= hi; ++i) {
      const std::size_t p = node(i, j);
      put(p, p, center_[p]);
      for (int k = 0; k < 4; ++k) {
        const int qi = i + kUpper[std::size_t(k)].x, qj = j + kUpper[std::size_t(k)].y;
        if (qi < lo || qi > hi || qj > hi) continue;
        const std::size_t q = node(qi, qj);
        put(p, q, upper_[std::size_t(k)][p]);
        put(q, p, upper_[std::size_t(k)][p].transpose());
      }
    }
  }
  const auto n = std::ptrdiff_t(2 * nodes());
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

namespace {

struct Parent {
  int I;
  double w;
};

// coarse parents of fine index i, coarse half size nc
int parents_1d(int i, int nc, Parent out[2]) {
  int c = 0;
  if (i % 2 == 0) {
    out[c++] = {i / 2, 1.0};
  } else {
    const int a = (i - 1) / 2, b = (i + 1) / 2;
    if (std::abs(a) < nc) out[c++] = {a, 0.5};
    if (std::abs(b) < nc) out[c++] = {b, 0.5};
  }
  return c;
}

int upper_index(int dx, int dy) {
  for (int k = 0; k < 4; ++k)
    if (StencilOperator::kUpper[std::size_t(k)].x == dx &&
        StencilOperator::kUpper[std::size_t(k)].y == dy)
      return k;
  return -1;
}

}  // namespace

StencilOperator StencilOperator::galerkin_coarse() const {
  if (n_ % 2 != 0 || n_ < 2) throw OutOfRange("coarsening needs an even grid size");
  const int nc = n_ / 2;
  StencilOperator C(nc);
  const int lo = -n_ + 1, hi = n_ - 1;

  // lookup of the stored offset index for coarse displacement (dx, dy)
  int uidx[3][3];
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) uidx[dy + 1][dx + 1] = upper_index(dx, dy);

  for (int j = lo; j <= hi; ++j) {
    Parent pj[2];
    const int npj = parents_1d(j, nc, pj);
    for (int i = lo; i <= hi; ++i) {
      Parent pi[2];
      const int npi = parents_1d(i, nc, pi);
      const std::size_t p = node(i, j);
      for (int dy = -1; dy <= 1; ++dy) {
        const int qj = j + dy;
        if (qj < lo || qj > hi) continue;
        Parent qjp[2];
        const int nqj = parents_1d(qj, nc, qjp);
        for (int dx = -1; dx <= 1; ++dx) {
          const int qi = i + dx;
          if (qi < lo || qi > hi) continue;
          Mat2 A;
          if (dx == 0 && dy == 0) {
            A = center_[p];
          } else {
            const int k = uidx[dy + 1][dx + 1];
            if (k >= 0) {
              A = upper_[std::size_t(k)][p];
            } else {
              const int kl = uidx[1 - dy][1 - dx];
              A = upper_[std::size_t(kl)][node(qi, qj)].transpose();
            }
          }
          Parent qip[2];
          const int nqi = parents_1d(qi, nc, qip);
          for (int a = 0; a < npj; ++a)
            for (int b = 0; b < npi; ++b) {
              const double wa = pj[a].w * pi[b].w;
              const int I = pi[b].I, J = pj[a].I;
              const std::size_t pc = C.node(I, J);
              for (int c = 0; c < nqj; ++c)
                for (int d = 0; d < nqi; ++d) {
                  const int ddx = qip[d].I - I, ddy = qjp[c].I - J;
                  const double w = wa * qjp[c].w * qip[d].w;
                  if (ddx == 0 && ddy == 0) {
                    C.center_[pc] += w * A;
                  } else {
                    const int k = uidx[ddy + 1][ddx + 1];
                    if (k >= 0) C.upper_[std::size_t(k)][pc] += w * A;
                  }
                }
            }
        }
      }
    }
  }
  return C;
}

Multigrid::Multigrid(StencilOperator fine, int sweeps) : sweeps_(sweeps) {
  levels_.push_back({std::move(fine), {}});
  while (levels_.back().A.n() % 2 == 0 && levels_.back().A.n() > 2)
    levels_.push_back({levels_.back().A.galerkin_coarse(), {}});
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    auto& L = levels_[l];
    L.inv_center.resize(L.A.nodes());
    for (std::size_t p = 0; p < L.A.nodes(); ++p) {
      const Mat2& C = L.A.center(p);
      const double det = C.determinant();
      if (!(det > 0.0) || !(C(0, 0) > 0.0))
        throw SingularSystem("multigrid smoother met a non-positive diagonal block");
      L.inv_center[p] = C.inverse();
    }
  }
  coarse_.factorize(levels_.back().A.to_sparse());
}

void Multigrid::smooth(const Level& L, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                       bool forward) const {
  const StencilOperator& A = L.A;
  const int n = A.n();
  const int lo = -n + 1, hi = n - 1;
  auto visit = [&](int i, int j) {
    const std::size_t p = A.node(i, j);
    Vec2 s = b.segment<2>(2 * std::ptrdiff_t(p));
    for (int k = 0; k < 4; ++k) {
      const Site o = StencilOperator::kUpper[std::size_t(k)];
      const int ui = i + o.x, uj = j + o.y;
      if (ui >= lo && ui <= hi && uj <= hi)
        s -= A.upper(k, p) * x.segment<2>(2 * std::ptrdiff_t(A.node(ui, uj)));
      const int li = i - o.x, lj = j - o.y;
      if (li >= lo && li <= hi && lj >= lo) {
        const std::size_t q = A.node(li, lj);
        s -= A.upper(k, q).transpose() * x.segment<2>(2 * std::ptrdiff_t(q));
      }
    }
    x.segment<2>(2 * std::ptrdiff_t(p)) = L.inv_center[p] * s;
  };
  if (forward) {
    for (int j = lo; j <= hi; ++j)
      for (int i = lo; i <= hi; ++i) visit(i, j);
  } else {
    for (int j = hi; j >= lo; --j)
      for (int i = hi; i >= lo; --i) visit(i, j);
  }
}

void Multigrid::restrict_to(int n_fine, const Eigen::VectorXd& rf, Eigen::VectorXd& rc) {
  const int nc = n_fine / 2;
  const int sc = 2 * nc - 1, sf = 2 * n_fine - 1;
  rc.setZero(2 * std::ptrdiff_t(sc) * sc);
  for (int j = -n_fine + 1; j <= n_fine - 1; ++j) {
    Parent pj[2];
    const int npj = parents_1d(j, nc, pj);
    for (int i = -n_fine + 1; i <= n_fine - 1; ++i) {
      Parent pi[2];
      const int npi = parents_1d(i, nc, pi);
      const std::ptrdiff_t p = std::ptrdiff_t(j + n_fine - 1) * sf + (i + n_fine - 1);
      const Vec2 v = rf.segment<2>(2 * p);
      for (int a = 0; a < npj; ++a)
        for (int b = 0; b < npi; ++b) {
          const std::ptrdiff_t q = std::ptrdiff_t(pj[a].I + nc - 1) * sc + (pi[b].I + nc - 1);
          rc.segment<2>(2 * q) += pj[a].w * pi[b].w * v;
        }
    }
  }
}

void Multigrid::prolong_add(int n_fine, const Eigen::VectorXd& xc, Eigen::VectorXd& xf) {
  const int nc = n_fine / 2;
  const int sc = 2 * nc - 1, sf = 2 * n_fine - 1;
  for (int j = -n_fine + 1; j <= n_fine - 1; ++j) {
    Parent pj[2];
    const int npj = parents_1d(j, nc, pj);
    for (int i = -n_fine + 1; i <= n_fine - 1; ++i) {
      Parent pi[2];
      const int npi = parents_1d(i, nc, pi);
      const std::ptrdiff_t p = std::ptrdiff_t(j + n_fine - 1) * sf + (i + n_fine - 1);
      Vec2 v = Vec2::Zero();
      for (int a = 0; a < npj; ++a)
        for (int b = 0; b < npi; ++b) {
          const std::ptrdiff_t q = std::ptrdiff_t(pj[a].I + nc - 1) * sc + (pi[b].I + nc - 1);
          v += pj[a].w * pi[b].w * xc.segment<2>(2 * q);
        }
      xf.segment<2>(2 * p) += v;
    }
  }
}

void Multigrid::cycle(std::size_t l, const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
  if (l + 1 == levels_.size()) {
    x = coarse_.solve(b);
    return;
  }
  const Level& L = levels_[l];
  x.setZero(b.size());
  for (int s = 0; s < sweeps_; ++s) smooth(L, b, x, true);
  Eigen::VectorXd r;
  L.A.apply(x, r);
  r = b - r;
  Eigen::VectorXd rc, xc;
  restrict_to(L.A.n(), r, rc);
  r.resize(0);
  cycle(l + 1, rc, xc);
  prolong_add(L.A.n(), xc, x);
  for (int s = 0; s < sweeps_; ++s) smooth(L, b, x, false);
}

void Multigrid::vcycle(const Eigen::VectorXd& b, Eigen::VectorXd& x) const { cycle(0, b, x); }

}  // namespace atc
