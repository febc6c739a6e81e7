#pragma once

// Two-body objects of the extended-anyon pair problem: the piecewise Jastrow
// profile f, its branch coefficients, closed-form scattering energies and the
// coupling functions G and G-tilde.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace anyonlab::twobody {

struct AnyonPairParams {
  double alpha = 0.0;  // statistics parameter, 0 <= alpha < 1/4
  double R = 0.0;      // magnetic-disk radius
  double b = 1.0;      // Jastrow cutoff radius, b > R
  double g = 0.0;      // spin-orbit coupling, g >= 0

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 0.25))
      throw std::domain_error("AnyonPairParams: require 0 <= alpha < 1/4, got alpha=" +
                              std::to_string(alpha));
    if (!(R >= 0.0 && R < b))
      throw std::domain_error("AnyonPairParams: require 0 <= R < b");
    if (!(g >= 0.0)) throw std::domain_error("AnyonPairParams: require g >= 0");
    if (R == 0.0 && g != 0.0)
      throw std::domain_error("AnyonPairParams: R = 0 only supported for g = 0");
  }
};

// q = (R/b)^(2 alpha), evaluated as exp(2 alpha log(R/b)) so that
// exponentially small R (R = e^{-N omega}) does not underflow prematurely.
// When the log itself is -inf (R == 0 or subnormal underflow) q is exactly 0
// and *underflow is set.
inline double q_ratio(const AnyonPairParams& p, bool* underflow = nullptr) {
  if (underflow) *underflow = false;
  if (p.alpha == 0.0) return 1.0;
  if (p.R <= 0.0) {
    if (underflow) *underflow = true;
    return 0.0;
  }
  const double lq = 2.0 * p.alpha * (std::log(p.R) - std::log(p.b));
  if (lq < std::log(std::numeric_limits<double>::min())) {
    if (underflow) *underflow = true;
    return 0.0;
  }
  return std::exp(lq);
}

struct JastrowCoefficients {
  double lambda1 = 0.0;  // coefficient of the r^alpha branch
  double lambda2 = 0.0;  // coefficient of the r^{-alpha} branch
};

// lambda1 = (2+g) b^{-a} / D, lambda2 = (2-g) b^{-a} R^{2a} / D,
// D = 2(1+q) + g(1-q), q = (R/b)^{2a}.
inline JastrowCoefficients jastrow_coefficients(const AnyonPairParams& p) {
  p.validate();
  if (!(p.R > 0.0)) throw std::domain_error("jastrow_coefficients: require R > 0");
  const double q = q_ratio(p);
  const double D = 2.0 * (1.0 + q) + p.g * (1.0 - q);
  const double bma = std::exp(-p.alpha * std::log(p.b));  // b^{-alpha}
  JastrowCoefficients c;
  c.lambda1 = (2.0 + p.g) * bma / D;
  // R^{2a} b^{-a} written as q * b^{a} to stay finite for tiny R
  c.lambda2 = (2.0 - p.g) * q / (bma * D);
  return c;
}

// Piecewise Jastrow pair profile: constant inside B(0,R), lambda1 r^a +
// lambda2 r^{-a} in the annulus, 1 outside B(0,b).
inline double jastrow_f(double r, const AnyonPairParams& p) {
  p.validate();
  if (r < 0.0) throw std::domain_error("jastrow_f: r < 0");
  if (p.alpha == 0.0) return 1.0;
  if (r >= p.b) return 1.0;
  if (p.R == 0.0) {  // g == 0 enforced by validate(); pure (r/b)^alpha profile
    if (r == 0.0) return 0.0;
    return std::exp(p.alpha * std::log(r / p.b));
  }
  const JastrowCoefficients c = jastrow_coefficients(p);
  const double rr = std::max(r, p.R);  // constant branch below R
  const double ra = std::exp(p.alpha * std::log(rr));
  return c.lambda1 * ra + c.lambda2 / ra;
}

// Closed-form minimum of the reduced two-body functional:
// 2 pi a (1 + g/2 - (1 - g/2) q) / (1 + g/2 + (1 - g/2) q).
inline double scattering_energy_closed(const AnyonPairParams& p,
                                       bool* q_underflow = nullptr) {
  p.validate();
  const double q = q_ratio(p, q_underflow);
  const double num = 1.0 + 0.5 * p.g - (1.0 - 0.5 * p.g) * q;
  const double den = 1.0 + 0.5 * p.g + (1.0 - 0.5 * p.g) * q;
  return 2.0 * M_PI * p.alpha * num / den;
}

// G(s,g) = (1 + g/2 - (1 - g/2) e^{-s}) / (1 + g/2 + (1 - g/2) e^{-s}).
inline double coupling_G(double s, double g) {
  if (!(g > -2.0)) throw std::domain_error("coupling_G: require g > -2");
  if (!(s >= 0.0)) throw std::domain_error("coupling_G: require s >= 0");
  const double e = std::exp(-s);
  return (1.0 + 0.5 * g - (1.0 - 0.5 * g) * e) /
         (1.0 + 0.5 * g + (1.0 - 0.5 * g) * e);
}

// G~(theta, s, g) = theta + (1 - e^{-s theta})/theta + g e^{-s theta}.
inline double coupling_G_tilde(double theta, double s, double g) {
  if (!(theta > 0.0)) throw std::domain_error("coupling_G_tilde: require theta > 0");
  const double e = std::exp(-s * theta);
  return theta + (1.0 - e) / theta + g * e;
}

struct ThetaOptimum {
  double theta = 0.0;
  double value = 0.0;
};

// Bracketed golden-section minimization of G~ over theta in (0, theta_max].
// The infimum at s = 0 sits at theta -> 0+, handled by the tiny left edge.
inline ThetaOptimum optimize_theta(double s, double g, double theta_max = 10.0) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-9, b = theta_max;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = coupling_G_tilde(c, s, g), fd = coupling_G_tilde(d, s, g);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * theta_max; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = coupling_G_tilde(c, s, g);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = coupling_G_tilde(d, s, g);
    }
  }
  ThetaOptimum opt;
  opt.theta = 0.5 * (a + b);
  opt.value = coupling_G_tilde(opt.theta, s, g);
  // the unbracketed edge: at s = 0 the infimum is the theta -> 0 limit g
  const double edge = coupling_G_tilde(1e-12, s, g);
  if (edge < opt.value) {
    opt.theta = 1e-12;
    opt.value = edge;
  }
  return opt;
}

struct ScalingSchedule {
  long N = 2;
  double beta = 1.0;
  double omega = 0.0;      // R_N = exp(-N omega)
  double bExponent = 2.5;  // b_N = N^{-bExponent}, > 2 so N^2 b_N -> 0
  double g = 0.0;
};

struct ScheduleResult {
  AnyonPairParams params;
  bool regime_warning = false;  // R >= b: outside the dilute scaling regime
  bool R_underflow = false;     // exp(-N omega) underflowed to 0
};

inline ScheduleResult schedule_params(const ScalingSchedule& s) {
  if (s.N < 2) throw std::domain_error("schedule_params: require N >= 2");
  if (!(s.bExponent > 2.0))
    throw std::domain_error("schedule_params: require bExponent > 2");
  ScheduleResult out;
  out.params.alpha = s.beta / double(s.N - 1);
  out.params.R = std::exp(-double(s.N) * s.omega);
  out.params.b = std::exp(-s.bExponent * std::log(double(s.N)));
  out.params.g = s.g;
  out.R_underflow = (s.omega > 0.0 && out.params.R == 0.0);
  if (out.params.R >= out.params.b) {
    out.regime_warning = true;
    out.params.b = out.params.R * 2.0;  // keep params well formed, flagged
  }
  out.params.validate();
  return out;
}

}  // namespace anyonlab::twobody
