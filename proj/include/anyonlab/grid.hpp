// 2-D spectral grid machinery: complex fields on [-L/2, L/2)^2, FFT plan
// cache, periodic spectral derivatives, and free-space convolutions with the
// logarithmic kernel evaluated through its truncated Fourier transform.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace anyonlab::field {

using cplx = std::complex<double>;

// row-major: index (ix, iy) -> ix * n + iy, coordinate x = -L/2 + ix * h
struct ComplexField2D {
  double L = 1.0;
  int n = 0;
  std::vector<cplx> v;

  ComplexField2D() = default;
  ComplexField2D(double L_, int n_) : L(L_), n(n_), v(std::size_t(n_) * n_) {
    if (n_ <= 0 || (n_ & (n_ - 1)) != 0)
      throw std::invalid_argument("grid size must be a positive power of two");
    if (!(L_ > 0.0)) throw std::invalid_argument("box size must be positive");
  }
  double h() const { return L / n; }
  double coord(int i) const { return -0.5 * L + i * h(); }
  cplx& at(int ix, int iy) { return v[std::size_t(ix) * n + iy]; }
  const cplx& at(int ix, int iy) const { return v[std::size_t(ix) * n + iy]; }

  double mass() const {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return s * h() * h();
  }
  void normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw std::runtime_error("cannot normalize a zero field");
    const double c = 1.0 / std::sqrt(m);
    for (cplx& z : v) z *= c;
  }
};

struct RealField2D {
  double L = 1.0;
  int n = 0;
  std::vector<double> v;

  RealField2D() = default;
  RealField2D(double L_, int n_) : L(L_), n(n_), v(std::size_t(n_) * n_) {}
  double h() const { return L / n; }
  double coord(int i) const { return -0.5 * L + i * h(); }
  double& at(int ix, int iy) { return v[std::size_t(ix) * n + iy]; }
  const double& at(int ix, int iy) const { return v[std::size_t(ix) * n + iy]; }
  double integral() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s * h() * h();
  }
};

struct GaugeField2D {
  double L = 1.0;
  int n = 0;
  std::vector<double> ax, ay;
  bool padding_ok = true;  // false if the source support reached the margin
};

namespace detail {

// cached in-place c2c plans; FFTW planning is not thread-safe, execution on
// distinct buffers is
class FftPlan {
 public:
  static void run(int n, cplx* data, int sign) {
    static std::mutex mtx;
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lk(mtx);
      static std::map<std::pair<int, int>, fftw_plan> cache;
      auto key = std::make_pair(n, sign);
      auto it = cache.find(key);
      if (it == cache.end()) {
        std::vector<cplx> probe(std::size_t(n) * n);
        plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(probe.data()),
                                reinterpret_cast<fftw_complex*>(probe.data()),
                                sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
};

inline void fft2(int n, cplx* data) { FftPlan::run(n, data, FFTW_FORWARD); }
inline void ifft2(int n, cplx* data) {
  FftPlan::run(n, data, FFTW_BACKWARD);
  const double c = 1.0 / (double(n) * n);
  const std::size_t m = std::size_t(n) * n;
  for (std::size_t i = 0; i < m; ++i) data[i] *= c;
}

// signed frequency for index i on an n-point axis of length P
inline double kfreq(int i, int n, double P) {
  const int s = (i <= n / 2) ? i : i - n;
  return 2.0 * M_PI * s / P;
}

// frequency for first-derivative multipliers: the unpaired Nyquist mode is
// zeroed so that i*k stays Hermitian and div(grad) matches |grad|^2 exactly
inline double kderiv(int i, int n, double P) {
  return (i == n / 2) ? 0.0 : kfreq(i, n, P);
}

}  // namespace detail

// spectral partial derivatives (periodic); Nyquist mode zeroed for odd d/dx
inline void gradient(const ComplexField2D& u, ComplexField2D& dx, ComplexField2D& dy) {
  const int n = u.n;
  std::vector<cplx> hat = u.v;
  detail::fft2(n, hat.data());
  dx = ComplexField2D(u.L, n);
  dy = ComplexField2D(u.L, n);
  for (int ix = 0; ix < n; ++ix) {
    const double kx = detail::kderiv(ix, n, u.L);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = detail::kderiv(iy, n, u.L);
      const cplx z = hat[std::size_t(ix) * n + iy];
      dx.v[std::size_t(ix) * n + iy] = cplx(0.0, kx) * z;
      dy.v[std::size_t(ix) * n + iy] = cplx(0.0, ky) * z;
    }
  }
  detail::ifft2(n, dx.v.data());
  detail::ifft2(n, dy.v.data());
}

inline ComplexField2D laplacian(const ComplexField2D& u) {
  const int n = u.n;
  ComplexField2D out(u.L, n);
  out.v = u.v;
  detail::fft2(n, out.v.data());
  for (int ix = 0; ix < n; ++ix) {
    const double kx = detail::kderiv(ix, n, u.L);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = detail::kderiv(iy, n, u.L);
      out.v[std::size_t(ix) * n + iy] *= -(kx * kx + ky * ky);
    }
  }
  detail::ifft2(n, out.v.data());
  return out;
}

namespace detail {

// Fourier transform of log|x| truncated to |x| < T: for k > 0
//   2 pi [ T log(T) J1(kT)/k + (J0(kT) - 1)/k^2 ],   at k = 0:  2 pi T^2 (2 log T - 1)/4
inline double log_kernel_hat(double k, double T) {
  if (k <= 0.0) return 2.0 * M_PI * T * T * (2.0 * std::log(T) - 1.0) / 4.0;
  const double kT = k * T;
  return 2.0 * M_PI * (T * std::log(T) * std::cyl_bessel_j(1, kT) / k +
                       (std::cyl_bessel_j(0, kT) - 1.0) / (k * k));
}

// truncated FT of the smeared kernel w_R: disk-average multiplier for k > 0,
// exact integral offset int_{|x|<R} (w_R - log) = pi R^2 / 4 at k = 0
inline double smeared_log_hat(double k, double T, double R) {
  double Khat = log_kernel_hat(k, T);
  if (R > 0.0) {
    if (k > 0.0) {
      const double kR = k * R;
      Khat *= 2.0 * std::cyl_bessel_j(1, kR) / kR;
    } else {
      Khat += M_PI * R * R / 4.0;
    }
  }
  return Khat;
}

// cached multiplier table for an N x N padded grid of period P: entry
// (ix * N + iy) holds smeared_log_hat(|k|, T, R); Bessel evaluations dominate
// the convolution cost otherwise
inline const std::vector<double>& kernel_multiplier(int N, double P, double T, double R) {
  static std::mutex mtx;
  std::lock_guard<std::mutex> lk(mtx);
  static std::map<std::tuple<int, double, double, double>, std::vector<double>> cache;
  auto key = std::make_tuple(N, P, T, R);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<double> mult(std::size_t(N) * N);
  for (int ix = 0; ix < N; ++ix) {
    const double kx = kfreq(ix, N, P);
    for (int iy = 0; iy < N; ++iy) {
      const double ky = kfreq(iy, N, P);
      mult[std::size_t(ix) * N + iy] = smeared_log_hat(std::hypot(kx, ky), T, R);
    }
  }
  return cache.emplace(key, std::move(mult)).first->second;
}

// support check: true if |src| > tol * max beyond the central box of side frac*L
inline bool support_reaches_margin(const RealField2D& rho, double frac, double tol) {
  double mx = 0.0;
  for (double x : rho.v) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return false;
  const double lim = 0.5 * frac * rho.L;
  for (int ix = 0; ix < rho.n; ++ix)
    for (int iy = 0; iy < rho.n; ++iy)
      if (std::abs(rho.coord(ix)) > lim || std::abs(rho.coord(iy)) > lim)
        if (std::abs(rho.at(ix, iy)) > tol * mx) return true;
  return false;
}

// shared padded-spectral pipeline: returns the 2n-grid Fourier coefficients
// (h^2 / P^2 included) of rho embedded centrally in the doubled box
inline std::vector<cplx> padded_density_hat(const RealField2D& rho) {
  const int n = rho.n, N = 2 * n;
  std::vector<cplx> pad(std::size_t(N) * N, cplx(0.0));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      pad[std::size_t(ix + n / 2) * N + (iy + n / 2)] = rho.at(ix, iy);
  fft2(N, pad.data());
  const double P = 2.0 * rho.L, h = rho.h();
  const double scale = h * h / (P * P);
  for (cplx& z : pad) z *= scale;
  return pad;
}

}  // namespace detail

// A[rho] = (grad^perp log|.|) * rho, free space, computed spectrally on a
// doubled box with the kernel truncated at T = L.  Optional smearing radius
// replaces log|.| by w_R (multiplier factor 2 J1(kR)/(kR)).
inline GaugeField2D vector_potential(const RealField2D& rho, double smearR = 0.0) {
  const int n = rho.n, N = 2 * n;
  if (n <= 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("grid size must be a positive power of two");
  GaugeField2D A;
  A.L = rho.L;
  A.n = n;
  // kernel reach T = L vs nearest periodic image at 2L - L*sqrt(2)/... :
  // supports confined to the central 0.65 L box keep the circular convolution
  // exactly equal to the free-space one
  A.padding_ok = !detail::support_reaches_margin(rho, 0.65, 1e-12);
  auto hat = detail::padded_density_hat(rho);
  const double P = 2.0 * rho.L, T = rho.L;
  const auto& mult = detail::kernel_multiplier(N, P, T, smearR);
  std::vector<cplx> axh(hat.size()), ayh(hat.size());
  for (int ix = 0; ix < N; ++ix) {
    const double kx = detail::kderiv(ix, N, P);
    for (int iy = 0; iy < N; ++iy) {
      const double ky = detail::kderiv(iy, N, P);
      const std::size_t id = std::size_t(ix) * N + iy;
      const cplx rh = mult[id] * hat[id];
      // grad^perp = (-d/dy, d/dx)
      axh[id] = cplx(0.0, -ky) * rh;
      ayh[id] = cplx(0.0, kx) * rh;
    }
  }
  // unnormalized inverse DFT reconstructs sum_k (.) e^{i k x} directly
  detail::FftPlan::run(N, axh.data(), FFTW_BACKWARD);
  detail::FftPlan::run(N, ayh.data(), FFTW_BACKWARD);
  A.ax.resize(std::size_t(n) * n);
  A.ay.resize(std::size_t(n) * n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      A.ax[std::size_t(ix) * n + iy] = axh[std::size_t(ix + n / 2) * N + (iy + n / 2)].real();
      A.ay[std::size_t(ix) * n + iy] = ayh[std::size_t(ix + n / 2) * N + (iy + n / 2)].real();
    }
  return A;
}

// scalar free-space convolution w_R * f for real f (R = 0 gives log|.| * f)
inline RealField2D log_convolve(const RealField2D& f, double smearR = 0.0) {
  const int n = f.n, N = 2 * n;
  auto hat = detail::padded_density_hat(f);
  const auto& mult = detail::kernel_multiplier(N, 2.0 * f.L, f.L, smearR);
  for (std::size_t id = 0; id < hat.size(); ++id) hat[id] *= mult[id];
  detail::FftPlan::run(N, hat.data(), FFTW_BACKWARD);
  RealField2D out(f.L, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      out.at(ix, iy) = hat[std::size_t(ix + n / 2) * N + (iy + n / 2)].real();
  return out;
}

// dot-type convolution (grad^perp w_R) . F for a real vector field F;
// appears in the Euler-Lagrange self-interaction term
inline RealField2D perp_dot_convolve(const RealField2D& fx, const RealField2D& fy,
                                     double smearR = 0.0) {
  const int n = fx.n, N = 2 * n;
  auto hx = detail::padded_density_hat(fx);
  auto hy = detail::padded_density_hat(fy);
  const double P = 2.0 * fx.L;
  const auto& mult = detail::kernel_multiplier(N, P, fx.L, smearR);
  for (int ix = 0; ix < N; ++ix) {
    const double kx = detail::kderiv(ix, N, P);
    for (int iy = 0; iy < N; ++iy) {
      const double ky = detail::kderiv(iy, N, P);
      const std::size_t id = std::size_t(ix) * N + iy;
      hx[id] = mult[id] * (cplx(0.0, -ky) * hx[id] + cplx(0.0, kx) * hy[id]);
    }
  }
  detail::FftPlan::run(N, hx.data(), FFTW_BACKWARD);
  RealField2D out(fx.L, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      out.at(ix, iy) = hx[std::size_t(ix + n / 2) * N + (iy + n / 2)].real();
  return out;
}

inline RealField2D density(const ComplexField2D& u) {
  RealField2D rho(u.L, u.n);
  for (std::size_t i = 0; i < u.v.size(); ++i) rho.v[i] = std::norm(u.v[i]);
  return rho;
}

// smeared log potential w_R and its gradient x / |x|_R^2
inline double w_R(double r, double R) {
  if (R <= 0.0) return std::log(r);
  if (r > R) return std::log(r);
  return std::log(R) + 0.5 * (r * r / (R * R) - 1.0);
}

inline double clipped_radius(double r, double R) { return std::max(r, R); }

}  // namespace anyonlab::field
