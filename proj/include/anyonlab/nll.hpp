// closed-form self-dual solitons u_{P,Q} built from a pair of coprime,
// linearly independent complex polynomials; flux beta = 2 max(deg P, deg Q)
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "anyonlab/grid.hpp"

namespace anyonlab::nll {

using field::ComplexField2D;
using field::cplx;

struct PolynomialPair {
  // ascending coefficients: P[k] multiplies z^k
  std::vector<cplx> P, Q;
};

namespace detail {

inline int degree(const std::vector<cplx>& c) {
  for (int k = int(c.size()) - 1; k >= 0; --k)
    if (std::abs(c[k]) > 0.0) return k;
  return -1;  // zero polynomial
}

inline cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx acc(0.0);
  for (int k = int(c.size()) - 1; k >= 0; --k) acc = acc * z + c[k];
  return acc;
}

inline std::vector<cplx> derivative(const std::vector<cplx>& c) {
  std::vector<cplx> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(double(k) * c[k]);
  if (d.empty()) d.push_back(cplx(0.0));
  return d;
}

// resultant via the Sylvester matrix; zero iff the pair shares a root
inline cplx resultant(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  const int dp = degree(p), dq = degree(q);
  if (dp < 0 || dq < 0) return cplx(0.0);
  if (dp == 0 || dq == 0) return cplx(1.0);  // a nonzero constant shares no root
  const int m = dp + dq;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m, m);
  for (int r = 0; r < dq; ++r)
    for (int k = 0; k <= dp; ++k) S(r, r + dp - k) = p[k];
  for (int r = 0; r < dp; ++r)
    for (int k = 0; k <= dq; ++k) S(dq + r, r + dq - k) = q[k];
  return S.determinant();
}

// Wronskian P'Q - PQ' as a coefficient list
inline std::vector<cplx> wronskian(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  auto dp = derivative(p), dq = derivative(q);
  auto mul = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> r(a.size() + b.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
  };
  auto w1 = mul(dp, q), w2 = mul(p, dq);
  std::vector<cplx> w(std::max(w1.size(), w2.size()), cplx(0.0));
  for (std::size_t i = 0; i < w1.size(); ++i) w[i] += w1[i];
  for (std::size_t i = 0; i < w2.size(); ++i) w[i] -= w2[i];
  return w;
}

}  // namespace detail

inline int pair_degree(const PolynomialPair& pq) {
  return std::max(detail::degree(pq.P), detail::degree(pq.Q));
}

// throws if the pair is linearly dependent or shares a root
inline void validate_pair(const PolynomialPair& pq) {
  const int d = pair_degree(pq);
  if (d < 1) throw std::invalid_argument("polynomial pair must have degree >= 1");
  auto w = detail::wronskian(pq.P, pq.Q);
  double wmax = 0.0, cmax = 0.0;
  for (const cplx& c : w) wmax = std::max(wmax, std::abs(c));
  for (const cplx& c : pq.P) cmax = std::max(cmax, std::abs(c));
  for (const cplx& c : pq.Q) cmax = std::max(cmax, std::abs(c));
  if (wmax <= 1e-12 * cmax * cmax)
    throw std::invalid_argument("polynomials are linearly dependent");
  const cplx res = detail::resultant(pq.P, pq.Q);
  if (std::abs(res) <= 1e-10 * std::pow(cmax, detail::degree(pq.P) + detail::degree(pq.Q)))
    throw std::invalid_argument("polynomials are not coprime");
}

struct NllState {
  ComplexField2D u;
  double beta = 0.0;
  double mass_defect = 0.0;  // |integral of |u|^2 - 1| on the grid
};

// u = sqrt(2 / (pi beta)) conj(P'Q - PQ') / (|P|^2 + |Q|^2), beta = 2 d;
// the state is exactly L^2-normalized in free space, so the on-grid mass
// deficit measures tail + quadrature error against norm_tol
inline NllState nll_state(const PolynomialPair& pq, double L, int n,
                          double norm_tol = 1e-3) {
  validate_pair(pq);
  const int d = pair_degree(pq);
  NllState s;
  s.beta = 2.0 * d;
  s.u = ComplexField2D(L, n);
  const double amp = std::sqrt(2.0 / (M_PI * s.beta));
  const auto w = detail::wronskian(pq.P, pq.Q);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const cplx z(s.u.coord(ix), s.u.coord(iy));
      const double den = std::norm(detail::horner(pq.P, z)) +
                         std::norm(detail::horner(pq.Q, z));
      s.u.at(ix, iy) = amp * std::conj(detail::horner(w, z)) / den;
    }
  s.mass_defect = std::abs(s.u.mass() - 1.0);
  if (s.mass_defect > norm_tol)
    throw std::runtime_error("grid too small for the requested soliton: mass defect " +
                             std::to_string(s.mass_defect));
  return s;
}

// dilated pair P(z/s), Q(z/s): shrinks the state by s < 1, spreads it for s > 1
inline PolynomialPair dilate(const PolynomialPair& pq, double s) {
  PolynomialPair out = pq;
  double f = 1.0;
  for (std::size_t k = 0; k < out.P.size(); ++k) {
    if (k > 0) f /= s;
    out.P[k] *= f;
  }
  f = 1.0;
  for (std::size_t k = 0; k < out.Q.size(); ++k) {
    if (k > 0) f /= s;
    out.Q[k] *= f;
  }
  return out;
}

}  // namespace anyonlab::nll
