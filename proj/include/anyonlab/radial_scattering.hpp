#pragma once

// Piecewise-linear finite-element minimization of the radial two-body
// functional
//   E[f] = 2 pi int_0^b ( f'^2 + p(r) f^2 ) r dr,  f(b) = 1, natural at 0,
// with p = a^2/r^2 on the annulus (R,b) and p = a^2 r^2/R^4 + g a / R^2
// inside B(0,R).  The mesh is log-spaced in the annulus (the minimizer
// behaves like r^{+-a}) and geometric inside the disk; the 1/r^2 potential
// is integrated exactly per element.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "anyonlab/twobody.hpp"

namespace anyonlab::twobody {

struct RadialProfile {
  std::vector<double> nodes;   // ascending radii
  std::vector<double> values;  // profile samples
};

struct ScatteringNumericResult {
  double energy = 0.0;       // Richardson-refined minimum of the functional
  double mesh_error = 0.0;   // discretization error estimate
  double closed = 0.0;       // closed-form main term for the same params
  bool bracket_ok = false;   // energy inside [closed - 2 pi a^2 g^2, closed + pi a^2 / 2]
                             // widened by mesh_error
  RadialProfile profile;     // minimizer on the finer mesh
};

namespace detail {

// Tridiagonal SPD solve (Thomas algorithm), in place on copies.
inline std::vector<double> solve_tridiag(std::vector<double> diag,
                                         std::vector<double> off,
                                         std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  return x;
}

struct Tridiag {
  std::vector<double> diag, off;  // off[i] couples node i and i+1
  void add(std::size_t e, const double m[2][2]) {
    diag[e] += m[0][0];
    diag[e + 1] += m[1][1];
    off[e] += m[0][1];
  }
};

// Exact element integrals of phi_i phi_j / r on [a,c] (hat functions).
inline void element_inv_r(double a, double c, double coef, double m[2][2]) {
  const double h = c - a, lg = std::log(c / a);
  const double Iaa = c * c * lg - 2.0 * c * h + 0.5 * (c * c - a * a);
  const double Icc = 0.5 * (c * c - a * a) - 2.0 * a * h + a * a * lg;
  const double Iac = -0.5 * (c * c - a * a) + (a + c) * h - a * c * lg;
  const double s = coef / (h * h);
  m[0][0] = s * Iaa;
  m[0][1] = s * Iac;
  m[1][0] = s * Iac;
  m[1][1] = s * Icc;
}

// Gauss-4 element integrals of p(r) phi_i phi_j r on [a,c].
template <class P>
inline void element_smooth(double a, double c, P&& p, double m[2][2]) {
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                               0.6521451548625461, 0.3478548451374538};
  const double h = c - a, mid = 0.5 * (a + c), half = 0.5 * h;
  m[0][0] = m[0][1] = m[1][0] = m[1][1] = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double r = mid + half * gx[q];
    const double w = gw[q] * half * p(r) * r;
    const double pa = (c - r) / h, pc = (r - a) / h;
    m[0][0] += w * pa * pa;
    m[0][1] += w * pa * pc;
    m[1][1] += w * pc * pc;
  }
  m[1][0] = m[0][1];
}

inline std::vector<double> log_mesh(double a, double c, int n) {
  std::vector<double> r(n + 1);
  const double la = std::log(a), lc = std::log(c);
  for (int i = 0; i <= n; ++i) r[i] = std::exp(la + (lc - la) * i / double(n));
  r.front() = a;
  r.back() = c;
  return r;
}

struct RadialSolve {
  double energy;
  RadialProfile profile;
};

inline RadialSolve solve_once(const AnyonPairParams& p, int n_annulus) {
  const double a2 = p.alpha * p.alpha;
  std::vector<double> mesh;
  std::size_t iR = 0;  // node index of r = R
  if (p.R > 0.0) {
    const int n_in = std::max(8, n_annulus / 4);
    auto inner = log_mesh(p.R * 1e-3, p.R, n_in);
    auto outer = log_mesh(p.R, p.b, n_annulus);
    mesh = inner;
    iR = mesh.size() - 1;
    mesh.insert(mesh.end(), outer.begin() + 1, outer.end());
  } else {
    // r^alpha boundary layer spans ~1/alpha decades in log r; reach far enough
    // down that the neglected disk carries a fraction << alpha of the energy
    const double lr0 = std::max(-680.0, std::log(p.alpha / 100.0) / (2.0 * p.alpha) - 5.0);
    mesh = detail::log_mesh(p.b * std::exp(std::min(-40.0, lr0)), p.b, n_annulus);
  }
  const std::size_t nn = mesh.size();
  Tridiag A;
  A.diag.assign(nn, 0.0);
  A.off.assign(nn - 1, 0.0);
  double m[2][2];
  for (std::size_t e = 0; e + 1 < nn; ++e) {
    const double ra = mesh[e], rc = mesh[e + 1], h = rc - ra;
    // stiffness: int f'^2 r dr
    const double ks = 0.5 * (rc * rc - ra * ra) / (h * h);
    m[0][0] = ks; m[0][1] = -ks; m[1][0] = -ks; m[1][1] = ks;
    A.add(e, m);
    const bool interior = p.R > 0.0 && e < iR;
    if (interior) {
      element_smooth(ra, rc,
                     [&](double r) {
                       return a2 * r * r / (p.R * p.R * p.R * p.R) +
                              p.g * p.alpha / (p.R * p.R);
                     },
                     m);
      A.add(e, m);
    } else if (a2 > 0.0) {
      element_inv_r(ra, rc, a2, m);
      A.add(e, m);
    }
  }
  // potential over the uncovered disk r < mesh[0], with f frozen at node 0
  if (p.R > 0.0) {
    const double r0 = mesh[0];
    A.diag[0] += a2 * std::pow(r0, 4) / (4.0 * std::pow(p.R, 4)) +
                 p.g * p.alpha * r0 * r0 / (2.0 * p.R * p.R);
  } else {
    // exact Dirichlet-to-Neumann closure: below r0 the minimizer is
    // f0 (r/r0)^alpha, contributing alpha f0^2 to the quadratic form
    A.diag[0] += p.alpha;
  }
  // Dirichlet f(b) = 1: eliminate the last node
  std::vector<double> rhs(nn - 1, 0.0);
  rhs[nn - 2] = -A.off[nn - 2];
  std::vector<double> diag(A.diag.begin(), A.diag.end() - 1);
  std::vector<double> off(A.off.begin(), A.off.end() - 1);
  std::vector<double> f = solve_tridiag(diag, off, rhs);
  f.push_back(1.0);
  // energy = 2 pi f^T A f
  double quad = 0.0;
  for (std::size_t i = 0; i < nn; ++i) quad += A.diag[i] * f[i] * f[i];
  for (std::size_t i = 0; i + 1 < nn; ++i) quad += 2.0 * A.off[i] * f[i] * f[i + 1];
  RadialSolve out;
  out.energy = 2.0 * M_PI * quad;
  out.profile.nodes = std::move(mesh);
  out.profile.values = std::move(f);
  return out;
}

}  // namespace detail

inline ScatteringNumericResult scattering_energy_numeric(const AnyonPairParams& p,
                                                         int mesh_points = 400) {
  p.validate();
  ScatteringNumericResult res;
  res.closed = scattering_energy_closed(p);
  if (p.alpha == 0.0) {
    // all potential terms carry alpha: minimizer is f = 1 with zero energy
    res.energy = 0.0;
    res.mesh_error = 0.0;
    res.bracket_ok = true;
    res.profile.nodes = {0.0, p.b};
    res.profile.values = {1.0, 1.0};
    return res;
  }
  const auto coarse = detail::solve_once(p, mesh_points);
  auto fine = detail::solve_once(p, 2 * mesh_points);
  // linear elements converge O(h^2): Richardson-extrapolate
  res.energy = (4.0 * fine.energy - coarse.energy) / 3.0;
  res.mesh_error = std::abs(fine.energy - coarse.energy);
  res.profile = std::move(fine.profile);
  const double lo = res.closed - 2.0 * M_PI * p.alpha * p.alpha * p.g * p.g;
  const double hi = res.closed + 0.5 * M_PI * p.alpha * p.alpha;
  const double margin = res.mesh_error + 1e-12 * std::abs(res.closed);
  res.bracket_ok = res.energy >= lo - margin && res.energy <= hi + margin;
  return res;
}

}  // namespace anyonlab::twobody
