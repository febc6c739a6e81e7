// condensate profiles for the trial state Phi = prod_i u(x_i): a smooth
// compactly supported truncated gaussian with analytic gradients, and a
// grid-backed profile with bicubic log-interpolation
#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "anyonlab/grid.hpp"

namespace anyonlab::vmc {

struct Vec2 {
  double x = 0.0, y = 0.0;
  double norm2() const { return x * x + y * y; }
};

class Condensate {
 public:
  virtual ~Condensate() = default;
  virtual double support_radius() const = 0;
  // |u(p)| (profiles are real non-negative here; the trial state only needs
  // the modulus and the logarithmic gradient)
  virtual double value(const Vec2& p) const = 0;
  // grad u / u at p; only called where value > 0
  virtual Vec2 grad_log(const Vec2& p) const = 0;
  // radial quadrature moments of the normalized profile
  virtual double norm_sq() const = 0;       // int |u|^2 (should be 1)
  virtual double quartic_norm() const = 0;  // int |u|^4
  virtual double dirichlet() const = 0;     // int |grad u|^2
  // draw one point from |u|^2
  virtual Vec2 sample(std::mt19937_64& rng) const = 0;
};

// u(r) = C exp(-r^2 / 2 sigma^2) (1 - (r/R1)^2)^3 inside B(0, R1), 0 outside;
// the cutoff is C^2 at the boundary and sigma defaults to R1/3
class TruncatedGaussian final : public Condensate {
 public:
  explicit TruncatedGaussian(double R1, double sigma = 0.0)
      : R1_(R1), sigma_(sigma > 0.0 ? sigma : R1 / 3.0) {
    if (!(R1 > 0.0)) throw std::invalid_argument("support radius must be positive");
    build_tables();
  }

  double support_radius() const override { return R1_; }

  double value(const Vec2& p) const override {
    const double r2 = p.norm2();
    if (r2 >= R1_ * R1_) return 0.0;
    const double t = 1.0 - r2 / (R1_ * R1_);
    return C_ * std::exp(-r2 / (2.0 * sigma_ * sigma_)) * t * t * t;
  }

  Vec2 grad_log(const Vec2& p) const override {
    const double r2 = p.norm2();
    const double c = -(1.0 / (sigma_ * sigma_) + 6.0 / (R1_ * R1_ - r2));
    return {c * p.x, c * p.y};
  }

  double norm_sq() const override { return norm_sq_; }
  double quartic_norm() const override { return quartic_; }
  double dirichlet() const override { return dirichlet_; }
  double potential_moment(double coeff, double expnt) const {
    return radial_integral([&](double r) {
      const Vec2 p{r, 0.0};
      const double v = value(p);
      return coeff * std::pow(r, expnt) * v * v;
    });
  }

  Vec2 sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> un(0.0, 1.0);
    // inverse-CDF lookup in r, uniform angle
    const double c = un(rng);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), c);
    const std::size_t hi = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
    const std::size_t lo = hi > 0 ? hi - 1 : 0;
    const double frac = (cdf_[hi] > cdf_[lo])
                            ? (c - cdf_[lo]) / (cdf_[hi] - cdf_[lo])
                            : 0.0;
    const double r = (lo + frac) * R1_ / double(cdf_.size() - 1);
    const double th = 2.0 * M_PI * un(rng);
    return {r * std::cos(th), r * std::sin(th)};
  }

 private:
  template <class F>
  double radial_integral(F f) const {
    // 512-point Gauss-Legendre-by-parts: composite 4-pt Gauss on 128 panels
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    const int panels = 128;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double a = R1_ * p / panels, b = R1_ * (p + 1) / panels;
      for (int k = 0; k < 4; ++k) {
        const double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
        acc += 0.5 * (b - a) * gw[k] * f(r) * r;
      }
    }
    return 2.0 * M_PI * acc;
  }

  void build_tables() {
    C_ = 1.0;
    const double m = radial_integral([&](double r) {
      const double v = value({r, 0.0});
      return v * v;
    });
    C_ = 1.0 / std::sqrt(m);
    norm_sq_ = radial_integral([&](double r) {
      const double v = value({r, 0.0});
      return v * v;
    });
    quartic_ = radial_integral([&](double r) {
      const double v = value({r, 0.0});
      return v * v * v * v;
    });
    dirichlet_ = radial_integral([&](double r) {
      const Vec2 p{r, 0.0};
      const double v = value(p);
      const Vec2 gl = grad_log(p);
      return v * v * gl.norm2();
    });
    // radial CDF of |u|^2 for i.i.d. sampling
    const int nTab = 4096;
    cdf_.assign(nTab + 1, 0.0);
    double acc = 0.0;
    for (int i = 1; i <= nTab; ++i) {
      const double r0 = R1_ * (i - 1) / nTab, r1 = R1_ * i / nTab;
      const double rm = 0.5 * (r0 + r1);
      const double v = value({rm, 0.0});
      acc += 2.0 * M_PI * rm * v * v * (r1 - r0);
      cdf_[i] = acc;
    }
    for (double& c : cdf_) c /= acc;
  }

  double R1_, sigma_, C_ = 1.0;
  double norm_sq_ = 0.0, quartic_ = 0.0, dirichlet_ = 0.0;
  std::vector<double> cdf_;
};

// profile backed by grid samples of |u|: bicubic (Catmull-Rom) interpolation
// of log|u| with a hard floor; points in the floor region evaluate to 0
class GridCondensate final : public Condensate {
 public:
  GridCondensate(const field::RealField2D& modulus, double supportRadius)
      : L_(modulus.L), n_(modulus.n), R1_(supportRadius) {
    logmod_.resize(std::size_t(n_) * n_);
    for (std::size_t i = 0; i < logmod_.size(); ++i)
      logmod_[i] = std::log(std::max(std::abs(modulus.v[i]), 1e-300));
    // renormalize so the grid mass of |u|^2 is 1
    double mass = 0.0;
    const double h = L_ / n_;
    for (double lm : logmod_) mass += std::exp(2.0 * lm) * h * h;
    const double shift = -0.5 * std::log(mass);
    for (double& lm : logmod_) lm += shift;
    build_cdf();
  }

  double support_radius() const override { return R1_; }

  double value(const Vec2& p) const override {
    const double lm = interp(p);
    return lm <= kFloor ? 0.0 : std::exp(lm);
  }

  Vec2 grad_log(const Vec2& p) const override {
    Vec2 g;
    interp(p, &g);
    return g;
  }

  double norm_sq() const override { return grid_moment(2); }
  double quartic_norm() const override { return grid_moment(4); }
  double dirichlet() const override {
    const double h = L_ / n_;
    double acc = 0.0;
    for (int ix = 1; ix + 1 < n_; ++ix)
      for (int iy = 1; iy + 1 < n_; ++iy) {
        const double v = std::exp(logmod_[id(ix, iy)]);
        if (v < 1e-140) continue;
        const double dx = (std::exp(logmod_[id(ix + 1, iy)]) -
                           std::exp(logmod_[id(ix - 1, iy)])) / (2.0 * h);
        const double dy = (std::exp(logmod_[id(ix, iy + 1)]) -
                           std::exp(logmod_[id(ix, iy - 1)])) / (2.0 * h);
        acc += (dx * dx + dy * dy) * h * h;
      }
    return acc;
  }

  Vec2 sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> un(0.0, 1.0);
    const double c = un(rng);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), c);
    std::size_t cell = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
    const int ix = int(cell / n_), iy = int(cell % n_);
    const double h = L_ / n_;
    return {-0.5 * L_ + (ix + un(rng)) * h, -0.5 * L_ + (iy + un(rng)) * h};
  }

 private:
  static constexpr double kFloor = -345.0;  // log(1e-150): |u|^2 floor 1e-300

  std::size_t id(int ix, int iy) const { return std::size_t(ix) * n_ + iy; }

  double grid_moment(int pw) const {
    const double h = L_ / n_;
    double acc = 0.0;
    for (double lm : logmod_) acc += std::exp(pw * lm) * h * h;
    return acc;
  }

  // Catmull-Rom bicubic on log|u|; optional gradient of the interpolant
  double interp(const Vec2& p, Vec2* grad = nullptr) const {
    const double h = L_ / n_;
    const double fx = (p.x + 0.5 * L_) / h, fy = (p.y + 0.5 * L_) / h;
    const int ix = int(std::floor(fx)), iy = int(std::floor(fy));
    if (ix < 1 || ix + 2 >= n_ || iy < 1 || iy + 2 >= n_) {
      if (grad) *grad = {0.0, 0.0};
      return 2.0 * kFloor;
    }
    const double tx = fx - ix, ty = fy - iy;
    auto w = [](double t, double* dw) {
      // Catmull-Rom basis for samples at -1, 0, 1, 2
      std::array<double, 4> c{
          0.5 * (-t * t * t + 2.0 * t * t - t),
          0.5 * (3.0 * t * t * t - 5.0 * t * t + 2.0),
          0.5 * (-3.0 * t * t * t + 4.0 * t * t + t),
          0.5 * (t * t * t - t * t)};
      if (dw) {
        dw[0] = 0.5 * (-3.0 * t * t + 4.0 * t - 1.0);
        dw[1] = 0.5 * (9.0 * t * t - 10.0 * t);
        dw[2] = 0.5 * (-9.0 * t * t + 8.0 * t + 1.0);
        dw[3] = 0.5 * (3.0 * t * t - 2.0 * t);
      }
      return c;
    };
    double dwx[4], dwy[4];
    auto wx = w(tx, grad ? dwx : nullptr);
    auto wy = w(ty, grad ? dwy : nullptr);
    double val = 0.0, gx = 0.0, gy = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double s = logmod_[id(ix - 1 + a, iy - 1 + b)];
        val += wx[a] * wy[b] * s;
        if (grad) {
          gx += dwx[a] * wy[b] * s;
          gy += wx[a] * dwy[b] * s;
        }
      }
    if (grad) *grad = {gx / h, gy / h};
    return val;
  }

  void build_cdf() {
    cdf_.resize(logmod_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < logmod_.size(); ++i) {
      acc += std::exp(2.0 * logmod_[i]);
      cdf_[i] = acc;
    }
    for (double& c : cdf_) c /= acc;
  }

  double L_;
  int n_;
  double R1_;
  std::vector<double> logmod_;
  std::vector<double> cdf_;
};

}  // namespace anyonlab::vmc
