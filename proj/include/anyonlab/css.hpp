// Chern-Simons-Schrodinger mean-field solver on a square grid:
//   E[u] = int |(-i grad + beta A[|u|^2]) u|^2 + int V |u|^2 + gamma int |u|^4
// with the self-generated gauge field A[rho] = (grad^perp log|.|) * rho.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "anyonlab/grid.hpp"
#include "anyonlab/nll.hpp"

namespace anyonlab::css {

using field::ComplexField2D;
using field::cplx;
using field::GaugeField2D;
using field::RealField2D;

struct CSSParams {
  double beta = 0.0;
  double gamma = 0.0;
  // trapping potential V(x) = vCoeff * |x|^vExponent
  double vCoeff = 0.0;
  double vExponent = 2.0;

  double V(double x, double y) const {
    if (vCoeff == 0.0) return 0.0;
    const double r = std::hypot(x, y);
    return vCoeff * std::pow(r, vExponent);
  }
  void validate() const {
    if (!std::isfinite(beta) || !std::isfinite(gamma))
      throw std::invalid_argument("beta and gamma must be finite");
    if (vCoeff < 0.0) throw std::invalid_argument("potential must be trapping (vCoeff >= 0)");
  }
};

struct EnergyBreakdown {
  double kinetic = 0.0;    // int |(-i grad + beta A) u|^2
  double potential = 0.0;  // int V |u|^2
  double quartic = 0.0;    // gamma int |u|^4
  double total = 0.0;
  bool padding_ok = true;
};

inline EnergyBreakdown css_energy(const ComplexField2D& u, const CSSParams& p) {
  p.validate();
  const int n = u.n;
  const double h2 = u.h() * u.h();
  RealField2D rho = field::density(u);
  GaugeField2D A;
  bool padding_ok = true;
  if (p.beta != 0.0) {
    A = field::vector_potential(rho);
    padding_ok = A.padding_ok;
  }
  ComplexField2D dx, dy;
  field::gradient(u, dx, dy);
  EnergyBreakdown e;
  for (int ix = 0; ix < n; ++ix) {
    const double x = u.coord(ix);
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t id = std::size_t(ix) * n + iy;
      cplx cdx = cplx(0.0, -1.0) * dx.v[id];
      cplx cdy = cplx(0.0, -1.0) * dy.v[id];
      if (p.beta != 0.0) {
        cdx += p.beta * A.ax[id] * u.v[id];
        cdy += p.beta * A.ay[id] * u.v[id];
      }
      e.kinetic += std::norm(cdx) + std::norm(cdy);
      e.potential += p.V(x, u.coord(iy)) * rho.v[id];
      e.quartic += rho.v[id] * rho.v[id];
    }
  }
  e.kinetic *= h2;
  e.potential *= h2;
  e.quartic *= p.gamma * h2;
  e.total = e.kinetic + e.potential + e.quartic;
  e.padding_ok = padding_ok;
  return e;
}

struct ElResult {
  ComplexField2D residual;  // H u - lambda u
  ComplexField2D Hu;        // full gradient direction dE/d(conj u)
  double lambda = 0.0;
  double energy = 0.0;
  bool padding_ok = true;
};

// Euler-Lagrange operator applied to u:
//   H u = -(grad + i beta A)^2 u
//         - 2 beta [grad^perp w_0 . * (beta A |u|^2 + J[u])] u
//         + 2 gamma |u|^2 u + V u,            J[u] = Im(conj(u) grad u)
// lambda = 2E - int [ |grad u|^2 + V|u|^2 - beta^2 |A|^2 |u|^2 ]
inline ElResult el_residual(const ComplexField2D& u, const CSSParams& p) {
  p.validate();
  const int n = u.n;
  const double h2 = u.h() * u.h();
  RealField2D rho = field::density(u);
  ComplexField2D dx, dy;
  field::gradient(u, dx, dy);
  ComplexField2D lap = field::laplacian(u);

  ElResult out;
  out.Hu = ComplexField2D(u.L, n);
  bool padding_ok = true;
  double grad2 = 0.0, pot = 0.0, asq = 0.0, quart = 0.0, kinetic = 0.0;

  GaugeField2D A;
  RealField2D phi;  // (grad^perp w_0) . * (beta A rho + J[u])
  if (p.beta != 0.0) {
    A = field::vector_potential(rho);
    padding_ok = A.padding_ok;
    RealField2D fx(u.L, n), fy(u.L, n);
    for (std::size_t id = 0; id < rho.v.size(); ++id) {
      const double jx = std::imag(std::conj(u.v[id]) * dx.v[id]);
      const double jy = std::imag(std::conj(u.v[id]) * dy.v[id]);
      fx.v[id] = p.beta * A.ax[id] * rho.v[id] + jx;
      fy.v[id] = p.beta * A.ay[id] * rho.v[id] + jy;
    }
    phi = field::perp_dot_convolve(fx, fy);
    // divergence of (A u), needed for the covariant Laplacian cross term
  }
  ComplexField2D au_x, au_y;
  if (p.beta != 0.0) {
    au_x = ComplexField2D(u.L, n);
    au_y = ComplexField2D(u.L, n);
    for (std::size_t id = 0; id < u.v.size(); ++id) {
      au_x.v[id] = A.ax[id] * u.v[id];
      au_y.v[id] = A.ay[id] * u.v[id];
    }
    ComplexField2D tx, ty, sx, sy;
    field::gradient(au_x, tx, ty);
    field::gradient(au_y, sx, sy);
    // div(A u) = d/dx (Ax u) + d/dy (Ay u)
    for (std::size_t id = 0; id < u.v.size(); ++id)
      au_x.v[id] = tx.v[id] + sy.v[id];
  }

  for (int ix = 0; ix < n; ++ix) {
    const double x = u.coord(ix);
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t id = std::size_t(ix) * n + iy;
      const double V = p.V(x, u.coord(iy));
      cplx Hu = -lap.v[id] + (2.0 * p.gamma * rho.v[id] + V) * u.v[id];
      if (p.beta != 0.0) {
        const double a2 = A.ax[id] * A.ax[id] + A.ay[id] * A.ay[id];
        const cplx adotgrad = A.ax[id] * dx.v[id] + A.ay[id] * dy.v[id];
        Hu += cplx(0.0, -p.beta) * (au_x.v[id] + adotgrad);
        Hu += p.beta * p.beta * a2 * u.v[id];
        Hu += -2.0 * p.beta * phi.v[id] * u.v[id];
        asq += a2 * rho.v[id];
        cplx cdx = cplx(0.0, -1.0) * dx.v[id] + p.beta * A.ax[id] * u.v[id];
        cplx cdy = cplx(0.0, -1.0) * dy.v[id] + p.beta * A.ay[id] * u.v[id];
        kinetic += std::norm(cdx) + std::norm(cdy);
      } else {
        kinetic += std::norm(dx.v[id]) + std::norm(dy.v[id]);
      }
      grad2 += std::norm(dx.v[id]) + std::norm(dy.v[id]);
      pot += V * rho.v[id];
      quart += rho.v[id] * rho.v[id];
      out.Hu.v[id] = Hu;
    }
  }
  out.energy = (kinetic + pot) * h2 + p.gamma * quart * h2;
  out.lambda = 2.0 * out.energy - (grad2 + pot - p.beta * p.beta * asq) * h2;
  out.residual = ComplexField2D(u.L, n);
  for (std::size_t id = 0; id < u.v.size(); ++id)
    out.residual.v[id] = out.Hu.v[id] - out.lambda * u.v[id];
  out.padding_ok = padding_ok;
  return out;
}

inline double field_norm(const ComplexField2D& f) {
  double s = 0.0;
  for (const cplx& z : f.v) s += std::norm(z);
  return std::sqrt(s * f.h() * f.h());
}

struct MinimizeResult {
  ComplexField2D u;
  double energy = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  bool diverged = false;  // energy fell below the instability threshold
};

// projected gradient descent on the unit L^2 sphere: Barzilai-Borwein step
// seed, backtracking on the energy, renormalization after every step
inline MinimizeResult minimize_css(const CSSParams& p, const ComplexField2D& init,
                                   double tol = 1e-6, int maxIter = 2000,
                                   double divergence_floor = -1e8) {
  p.validate();
  MinimizeResult res;
  res.u = init;
  res.u.normalize();
  ElResult el = el_residual(res.u, p);
  double energy = el.energy;
  double step = 0.1 / std::max(1.0, std::abs(el.lambda));
  std::vector<cplx> prev_u, prev_g;
  const double h2 = res.u.h() * res.u.h();

  for (int it = 0; it < maxIter; ++it) {
    res.residual_norm = field_norm(el.residual);
    if (res.residual_norm < tol) {
      res.converged = true;
      res.iterations = it;
      res.energy = energy;
      return res;
    }
    if (energy < divergence_floor) {
      res.diverged = true;
      res.iterations = it;
      res.energy = energy;
      return res;
    }
    // BB1 step from the previous accepted move
    if (!prev_u.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t id = 0; id < res.u.v.size(); ++id) {
        const cplx s = res.u.v[id] - prev_u[id];
        const cplx y = el.residual.v[id] - prev_g[id];
        ss += std::norm(s);
        sy += std::real(std::conj(s) * y);
      }
      if (sy > 0.0) step = std::clamp(ss / sy, 1e-8, 1e3);
    }
    prev_u = res.u.v;
    prev_g = el.residual.v;

    const double g2 = res.residual_norm * res.residual_norm;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      ComplexField2D trial = res.u;
      for (std::size_t id = 0; id < trial.v.size(); ++id)
        trial.v[id] -= step * el.residual.v[id];
      trial.normalize();
      ElResult elt = el_residual(trial, p);
      if (elt.energy <= energy - 1e-4 * step * g2) {
        res.u = std::move(trial);
        el = std::move(elt);
        energy = el.energy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {  // stationary to line-search resolution
      res.iterations = it + 1;
      res.energy = energy;
      res.residual_norm = field_norm(el.residual);
      res.converged = res.residual_norm < 10.0 * tol;
      return res;
    }
    (void)h2;
  }
  res.iterations = maxIter;
  res.energy = energy;
  res.residual_norm = field_norm(el.residual);
  return res;
}

struct GammaStarResult {
  double estimate = 0.0;  // best (lowest) ratio found: an upper bound
  double spread = 0.0;    // max - min over restarts
  std::vector<double> restart_values;
};

namespace detail {

// one normalized-gradient-descent run on Q[u] = E_{beta,0,0}[u] / int |u|^4
inline double ratio_descent(const CSSParams& p0, ComplexField2D u, int iters) {
  u.normalize();
  const double h2 = u.h() * u.h();
  auto quartic = [&](const ComplexField2D& w) {
    double s = 0.0;
    for (const cplx& z : w.v) s += std::norm(z) * std::norm(z);
    return s * h2;
  };
  // mass fraction in the fullest cell; the discrete ratio of a one-cell
  // spike is h-independent and can undercut the continuum infimum, so only
  // grid-resolved iterates count as valid upper bounds
  auto cell_mass = [&](const ComplexField2D& w) {
    double m = 0.0;
    for (const cplx& z : w.v) m = std::max(m, std::norm(z));
    return m * h2;
  };
  constexpr double kMaxCellMass = 0.05;
  ElResult el = el_residual(u, p0);
  double q4 = quartic(u);
  double ratio = el.energy / q4;
  double step = 0.1;
  for (int it = 0; it < iters; ++it) {
    // d(E/q)/d(conj u) = (Hu - ratio * 2 |u|^2 u) / q, projected on the sphere
    ComplexField2D g(u.L, u.n);
    double gdot = 0.0;
    for (std::size_t id = 0; id < u.v.size(); ++id) {
      g.v[id] = (el.Hu.v[id] - ratio * 2.0 * std::norm(u.v[id]) * u.v[id]) / q4;
      gdot += std::real(std::conj(u.v[id]) * g.v[id]);
    }
    gdot *= h2;
    for (std::size_t id = 0; id < u.v.size(); ++id) g.v[id] -= gdot * u.v[id];
    const double gn2 = std::pow(field_norm(g), 2);
    if (gn2 < 1e-18) break;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      ComplexField2D trial = u;
      for (std::size_t id = 0; id < trial.v.size(); ++id)
        trial.v[id] -= step * g.v[id];
      trial.normalize();
      if (cell_mass(trial) > kMaxCellMass) {
        step *= 0.5;
        continue;
      }
      ElResult elt = el_residual(trial, p0);
      const double q4t = quartic(trial);
      const double rt = elt.energy / q4t;
      if (rt <= ratio - 1e-4 * step * gn2) {
        u = std::move(trial);
        el = std::move(elt);
        q4 = q4t;
        ratio = rt;
        step *= 1.6;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return ratio;
}

}  // namespace detail

// upper bound on gamma*(beta) = inf E_{beta,0,0}[u] / int |u|^4 by multistart
// normalized gradient descent; NLL-seeded when beta is an even integer
inline GammaStarResult gamma_star_estimate(double beta, double L, int n,
                                           int restarts = 8, std::uint64_t seed = 1,
                                           int iters = 400) {
  if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
  CSSParams p0;
  p0.beta = beta;
  GammaStarResult out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<ComplexField2D> seeds;
  // smooth gaussian bump seed
  {
    ComplexField2D u(L, n);
    const double s = L / 10.0;
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy) {
        const double x = u.coord(ix), y = u.coord(iy);
        u.at(ix, iy) = std::exp(-(x * x + y * y) / (2.0 * s * s));
      }
    seeds.push_back(std::move(u));
  }
  // exact soliton seed when the flux quantization allows one
  const int d = int(std::lround(beta / 2.0));
  if (d >= 1 && std::abs(beta - 2.0 * d) < 1e-12) {
    nll::PolynomialPair pq;
    pq.P.assign(std::size_t(d) + 1, cplx(0.0));
    pq.P[d] = 1.0;
    pq.Q = {cplx(1.0)};
    auto st = nll::nll_state(nll::dilate(pq, L / 18.0), L, n, 0.5);
    seeds.push_back(std::move(st.u));
  }
  while (int(seeds.size()) < restarts) {
    // random smooth field: gaussian envelope times a low-order random phase
    ComplexField2D u(L, n);
    const double s = L * (0.06 + 0.05 * std::abs(gauss(rng)));
    const double a1 = gauss(rng), a2 = gauss(rng), b1 = gauss(rng), b2 = gauss(rng);
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy) {
        const double x = u.coord(ix), y = u.coord(iy);
        const double env = std::exp(-(x * x + y * y) / (2.0 * s * s));
        const cplx mod(1.0 + 0.3 * a1 * std::sin(2.0 * M_PI * x / L) +
                           0.3 * a2 * std::cos(2.0 * M_PI * y / L),
                       0.3 * b1 * std::sin(2.0 * M_PI * y / L) +
                           0.3 * b2 * std::sin(2.0 * M_PI * (x + y) / L));
        u.at(ix, iy) = env * mod;
      }
    seeds.push_back(std::move(u));
  }
  for (auto& s : seeds)
    out.restart_values.push_back(detail::ratio_descent(p0, std::move(s), iters));
  out.estimate = *std::min_element(out.restart_values.begin(), out.restart_values.end());
  out.spread = *std::max_element(out.restart_values.begin(), out.restart_values.end()) -
               out.estimate;
  return out;
}

struct HardyCheckResult {
  double lhs = 0.0;  // int |A^R[|u|^2]|^2 |u|^2
  double rhs = 0.0;  // (3/2) ||u||_2^4 int |grad |u||^2
  bool ok = false;
};

inline HardyCheckResult hardy_check(const ComplexField2D& u, double R) {
  RealField2D rho = field::density(u);
  GaugeField2D A = field::vector_potential(rho, R);
  const double h2 = u.h() * u.h();
  HardyCheckResult out;
  double mass = 0.0;
  for (std::size_t id = 0; id < rho.v.size(); ++id) {
    out.lhs += (A.ax[id] * A.ax[id] + A.ay[id] * A.ay[id]) * rho.v[id];
    mass += rho.v[id];
  }
  out.lhs *= h2;
  mass *= h2;
  ComplexField2D mod(u.L, u.n);
  for (std::size_t id = 0; id < u.v.size(); ++id) mod.v[id] = std::abs(u.v[id]);
  ComplexField2D gx, gy;
  field::gradient(mod, gx, gy);
  double grad2 = 0.0;
  for (std::size_t id = 0; id < u.v.size(); ++id)
    grad2 += std::norm(gx.v[id]) + std::norm(gy.v[id]);
  grad2 *= h2;
  out.rhs = 1.5 * mass * mass * grad2;
  out.ok = out.lhs <= out.rhs * (1.0 + 1e-8);
  return out;
}

}  // namespace anyonlab::css
