// variational Monte Carlo for the Jastrow trial state Psi = F Phi:
// Metropolis sampling of |Psi|^2 and per-term estimators of the energy
// splitting N^{-1} <Psi| H_N |Psi> = K + V + W + S^diag + S^3body + J
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "anyonlab/condensate.hpp"
#include "anyonlab/stats.hpp"
#include "anyonlab/twobody.hpp"

namespace anyonlab::vmc {

using twobody::AnyonPairParams;

struct PotentialSpec {
  double coeff = 0.0;
  double expnt = 2.0;
  double operator()(const Vec2& p) const {
    return coeff == 0.0 ? 0.0 : coeff * std::pow(std::sqrt(p.norm2()), expnt);
  }
};

struct ChainConfig {
  int chains = 4;
  int sweeps = 20000;       // recorded sweeps per chain after burn-in
  int burnin = 10000;
  std::uint64_t seed = 1;
  bool raoBlackwell = false;
  double errorCeiling = std::numeric_limits<double>::infinity();  // relative
};

struct ChainStats {
  std::size_t samples = 0;
  double acceptance = 0.0;
  int burnin = 0;
  double block_length = 1.0;  // 2 tau of the slowest component
  std::uint64_t seed = 0;
  double step = 0.0;
  bool tuned = false;  // acceptance landed in [0.3, 0.5]
};

struct Term {
  double mean = 0.0;
  double stderror = 0.0;
  double tau = 0.5;
};

struct EnergyBreakdown {
  Term K, V, W, Sdiag, S3body, J;
  double total = 0.0;
  double total_err = 0.0;
  std::vector<ChainStats> chains;
  long product_inequality_violations = 0;  // F^2 >= 1 - sum (1 - f^2) failures
  long negative_weight_violations = 0;     // W or S^diag < 0 with g >= 0
  bool error_ceiling_exceeded = false;
};

// log |Psi|^2 = 2 sum_i log u(x_i) + 2 sum_{i<j} log f(|x_i - x_j|)
inline double log_weight(const std::vector<Vec2>& pos, const Condensate& u,
                         const AnyonPairParams& p) {
  double lw = 0.0;
  for (const Vec2& x : pos) {
    const double v = u.value(x);
    if (v <= 0.0) return -std::numeric_limits<double>::infinity();
    lw += 2.0 * std::log(v);
  }
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      const double r = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
      const double f = twobody::jastrow_f(r, p);
      if (f <= 0.0) return -std::numeric_limits<double>::infinity();
      lw += 2.0 * std::log(f);
    }
  return lw;
}

namespace detail {

// K_{R,b} radial ratio (lambda1 r^a - lambda2 r^-a) / (lambda1 r^a + lambda2 r^-a)
struct PairKernel {
  AnyonPairParams p;
  twobody::JastrowCoefficients c;
  explicit PairKernel(const AnyonPairParams& params)
      : p(params), c{0.0, 0.0} {
    if (p.alpha > 0.0 && p.R > 0.0) c = twobody::jastrow_coefficients(p);
  }
  double ratio(double r) const {
    if (p.alpha == 0.0 || r >= p.b) return 0.0;
    if (p.R == 0.0) return r > 0.0 ? 1.0 : 0.0;  // pure (r/b)^alpha profile
    if (r <= p.R) return 0.0;
    const double ra = std::pow(r, p.alpha);
    const double up = c.lambda1 * ra - c.lambda2 / ra;
    const double dn = c.lambda1 * ra + c.lambda2 / ra;
    return up / dn;
  }
};

struct ChainState {
  std::vector<Vec2> pos;
  std::vector<double> logu;  // log u(x_i)
  std::vector<double> logf;  // upper-triangular log f(r_ij), row-major NxN
  double step = 0.0;
  std::mt19937_64 rng;

  double& lf(std::size_t i, std::size_t j) {
    return i < j ? logf[i * pos.size() + j] : logf[j * pos.size() + i];
  }
};

inline void init_chain(ChainState& st, const Condensate& u, const AnyonPairParams& p,
                       int N, std::uint64_t seed, const std::vector<Vec2>* start) {
  st.rng.seed(seed);
  if (start) {
    if (int(start->size()) != N)
      throw std::invalid_argument("start configuration size mismatch");
    st.pos = *start;
    if (log_weight(st.pos, u, p) == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("start configuration has zero weight");
  } else {
    st.pos.resize(N);
    for (Vec2& x : st.pos) x = u.sample(st.rng);
  }
  st.logu.resize(N);
  st.logf.assign(std::size_t(N) * N, 0.0);
  for (int i = 0; i < N; ++i) st.logu[i] = std::log(u.value(st.pos[i]));
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double r = std::hypot(st.pos[i].x - st.pos[j].x, st.pos[i].y - st.pos[j].y);
      st.lf(i, j) = std::log(twobody::jastrow_f(r, p));
    }
  st.step = u.support_radius() / 4.0;
}

// one sweep of single-particle gaussian moves; returns accepted count
inline int sweep(ChainState& st, const Condensate& u, const AnyonPairParams& p) {
  const int N = int(st.pos.size());
  std::normal_distribution<double> gs(0.0, 1.0);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  int accepted = 0;
  std::vector<double> newf(N);
  for (int i = 0; i < N; ++i) {
    const Vec2 trial{st.pos[i].x + st.step * gs(st.rng),
                     st.pos[i].y + st.step * gs(st.rng)};
    const double uv = u.value(trial);
    if (uv <= 0.0) continue;
    double dlog = 2.0 * (std::log(uv) - st.logu[i]);
    bool dead = false;
    for (int j = 0; j < N && !dead; ++j) {
      if (j == i) continue;
      const double r = std::hypot(trial.x - st.pos[j].x, trial.y - st.pos[j].y);
      const double f = twobody::jastrow_f(r, p);
      if (f <= 0.0) {
        dead = true;
        break;
      }
      newf[j] = std::log(f);
      dlog += 2.0 * (newf[j] - st.lf(i, j));
    }
    if (dead) continue;
    if (dlog >= 0.0 || std::log(un(st.rng)) < dlog) {
      st.pos[i] = trial;
      st.logu[i] = std::log(uv);
      for (int j = 0; j < N; ++j)
        if (j != i) st.lf(i, j) = newf[j];
      ++accepted;
    }
  }
  return accepted;
}

struct SampleWeights {
  double K = 0.0, V = 0.0, W = 0.0, Sdiag = 0.0, S3body = 0.0, J = 0.0;
  bool product_ineq_ok = true;
};

// per-configuration estimator weights of each splitting term
inline SampleWeights weights(const ChainState& st, const Condensate& u,
                             const AnyonPairParams& p, const PairKernel& ker,
                             const PotentialSpec& V) {
  const int N = int(st.pos.size());
  const double a = p.alpha;
  SampleWeights w;
  double sum_log_f = 0.0, sum_one_minus_f2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const Vec2 gl = u.grad_log(st.pos[i]);
    w.K += gl.norm2();
    w.V += V(st.pos[i]);
    Vec2 sa{0.0, 0.0}, sk{0.0, 0.0};
    double diag = 0.0;
    double jcur = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const Vec2 d{st.pos[i].x - st.pos[j].x, st.pos[i].y - st.pos[j].y};
      const double r2 = d.norm2();
      const double r = std::sqrt(r2);
      const double rc = std::max(r, p.R);  // |x|_R
      // (x)_R^{-perp} = x^perp / |x|_R^2 with x^perp = (-y, x)
      const Vec2 av{-d.y / (rc * rc), d.x / (rc * rc)};
      const double rt = ker.ratio(r);
      const Vec2 kv{d.x / r2 * rt, d.y / r2 * rt};
      sa.x += av.x;
      sa.y += av.y;
      sk.x += kv.x;
      sk.y += kv.y;
      diag += av.norm2() + kv.norm2();
      jcur += gl.x * kv.x + gl.y * kv.y;  // real condensate: Im(grad u/u) = 0
      if (r < p.R) w.W += 1.0;
      if (j > i) {
        const double f = twobody::jastrow_f(r, p);
        sum_log_f += std::log(f);
        sum_one_minus_f2 += 1.0 - f * f;
      }
    }
    w.Sdiag += diag;
    w.S3body += sa.norm2() + sk.norm2() - diag;
    w.J += 2.0 * jcur;
  }
  w.K /= N;
  w.V /= N;
  w.W *= (p.R > 0.0 ? p.g * a / (N * p.R * p.R) : 0.0);
  w.Sdiag *= a * a / N;
  w.S3body *= a * a / N;
  w.J *= a / N;
  const double F2 = std::exp(2.0 * sum_log_f);
  w.product_ineq_ok = F2 >= 1.0 - sum_one_minus_f2 - 1e-12;
  return w;
}

// Rao-Blackwellized replacements for the heavy-tailed pair sums in W and
// S^diag: analytic radial quadrature of the pair weight against the local
// density |u|^2 averaged over angles, with the Jastrow pair factor f^2
inline void rao_blackwell_pair_terms(const ChainState& st, const Condensate& u,
                                     const AnyonPairParams& p, const PairKernel& ker,
                                     SampleWeights& w) {
  const int N = int(st.pos.size());
  const double a = p.alpha;
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                               0.6521451548625461, 0.3478548451374538};
  const int nAngle = 8;
  double W = 0.0, S = 0.0;
  for (int i = 0; i < N; ++i) {
    auto ring_density = [&](double r) {
      double acc = 0.0;
      for (int t = 0; t < nAngle; ++t) {
        const double th = 2.0 * M_PI * (t + 0.5) / nAngle;
        const double v = u.value({st.pos[i].x + r * std::cos(th),
                                  st.pos[i].y + r * std::sin(th)});
        acc += v * v;
      }
      return acc / nAngle;
    };
    // panels: [0, R] for the W and smeared-perp part, log-spaced [R, b]
    auto integ = [&](double lo, double hi, auto weight) {
      if (hi <= lo) return 0.0;
      double acc = 0.0;
      const int panels = 6;
      for (int q = 0; q < panels; ++q) {
        const double pa = lo + (hi - lo) * q / panels;
        const double pb = lo + (hi - lo) * (q + 1) / panels;
        for (int k = 0; k < 4; ++k) {
          const double r = 0.5 * (pa + pb) + 0.5 * (pb - pa) * gx[k];
          const double f = twobody::jastrow_f(r, p);
          acc += 0.5 * (pb - pa) * gw[k] * 2.0 * M_PI * r * f * f *
                 ring_density(r) * weight(r);
        }
      }
      return acc;
    };
    if (p.R > 0.0 && p.g > 0.0)
      W += (N - 1) * integ(0.0, p.R, [](double) { return 1.0; });
    // |(x)_R^-perp|^2 = r^2 / max(r, R)^4, |K|^2 = ratio^2 / r^2
    S += (N - 1) * integ(0.0, p.R, [&](double r) {
      return r * r / std::pow(p.R, 4);
    });
    S += (N - 1) * integ(p.R, p.b, [&](double r) {
      const double rt = ker.ratio(r);
      return 1.0 / (r * r) + rt * rt / (r * r);
    });
    // beyond b the perp part continues: 1/r^2 tail out to the support edge
    const double rmax = 2.0 * u.support_radius();
    S += (N - 1) * integ(p.b, rmax, [&](double r) { return 1.0 / (r * r); });
  }
  w.W = (p.R > 0.0 ? p.g * a / (N * p.R * p.R) : 0.0) * W;
  w.Sdiag = a * a / N * S;
}

struct ChainSeries {
  std::vector<double> K, V, W, Sdiag, S3body, J;
  ChainStats stats;
  long product_violations = 0;
  long negative_violations = 0;
};

inline void run_chain(ChainSeries& out, const Condensate& u, const AnyonPairParams& p,
                      int N, const PotentialSpec& V, const ChainConfig& cfg,
                      std::uint64_t seed, const std::vector<Vec2>* start) {
  PairKernel ker(p);
  ChainState st;
  init_chain(st, u, p, N, seed, start);
  out.stats.seed = seed;
  out.stats.burnin = cfg.burnin;
  // burn-in with step tuning toward acceptance in [0.3, 0.5]
  int accWindow = 0, winSweeps = 0;
  const int window = std::max(50, cfg.burnin / 20);
  for (int s = 0; s < cfg.burnin; ++s) {
    accWindow += sweep(st, u, p);
    if (++winSweeps == window) {
      const double acc = double(accWindow) / double(winSweeps * N);
      if (acc < 0.3)
        st.step *= 0.8;
      else if (acc > 0.5)
        st.step *= 1.25;
      accWindow = 0;
      winSweeps = 0;
    }
  }
  long accepted = 0;
  out.K.reserve(cfg.sweeps);
  for (int s = 0; s < cfg.sweeps; ++s) {
    accepted += sweep(st, u, p);
    SampleWeights w = weights(st, u, p, ker, V);
    if (cfg.raoBlackwell) rao_blackwell_pair_terms(st, u, p, ker, w);
    out.K.push_back(w.K);
    out.V.push_back(w.V);
    out.W.push_back(w.W);
    out.Sdiag.push_back(w.Sdiag);
    out.S3body.push_back(w.S3body);
    out.J.push_back(w.J);
    if (!w.product_ineq_ok) ++out.product_violations;
    if (p.g >= 0.0 && (w.W < 0.0 || w.Sdiag < 0.0)) ++out.negative_violations;
  }
  out.stats.samples = std::size_t(cfg.sweeps);
  out.stats.acceptance = double(accepted) / (double(cfg.sweeps) * N);
  out.stats.step = st.step;
  out.stats.tuned = out.stats.acceptance >= 0.3 && out.stats.acceptance <= 0.5;
}

}  // namespace detail

inline EnergyBreakdown estimate_energy(const Condensate& u, const AnyonPairParams& p,
                                       int N, const PotentialSpec& V,
                                       const ChainConfig& cfg,
                                       const std::vector<Vec2>* start = nullptr) {
  p.validate();
  if (N < 2) throw std::invalid_argument("need at least two particles");
  if (start) {
    if (int(start->size()) != N)
      throw std::invalid_argument("start configuration size mismatch");
    if (log_weight(*start, u, p) == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("start configuration has zero weight");
  }
  std::vector<detail::ChainSeries> series(cfg.chains);
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failureMutex;
  for (int c = 0; c < cfg.chains; ++c)
    pool.emplace_back([&, c] {
      try {
        detail::run_chain(series[c], u, p, N, V, cfg, cfg.seed + 7919 * c, start);
      } catch (...) {
        std::lock_guard<std::mutex> lk(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  EnergyBreakdown out;
  auto reduce = [&](auto member) {
    std::vector<stats::SeriesStats> per;
    for (auto& s : series) per.push_back(stats::analyze(s.*member));
    auto c = stats::combine(per);
    return Term{c.mean, c.stderror, c.tau};
  };
  out.K = reduce(&detail::ChainSeries::K);
  out.V = reduce(&detail::ChainSeries::V);
  out.W = reduce(&detail::ChainSeries::W);
  out.Sdiag = reduce(&detail::ChainSeries::Sdiag);
  out.S3body = reduce(&detail::ChainSeries::S3body);
  out.J = reduce(&detail::ChainSeries::J);
  out.total = out.K.mean + out.V.mean + out.W.mean + out.Sdiag.mean +
              out.S3body.mean + out.J.mean;
  double v = 0.0;
  for (const Term* t : {&out.K, &out.V, &out.W, &out.Sdiag, &out.S3body, &out.J}) {
    v += t->stderror * t->stderror;
    if (std::abs(t->mean) > 0.0 && t->stderror > cfg.errorCeiling * std::abs(t->mean))
      out.error_ceiling_exceeded = true;
  }
  out.total_err = std::sqrt(v);
  for (auto& s : series) {
    out.chains.push_back(s.stats);
    out.chains.back().block_length = 1.0;
    out.product_inequality_violations += s.product_violations;
    out.negative_weight_violations += s.negative_violations;
  }
  double maxtau = 0.5;
  for (const Term* t : {&out.K, &out.V, &out.W, &out.Sdiag, &out.S3body, &out.J})
    maxtau = std::max(maxtau, t->tau);
  for (auto& c : out.chains) c.block_length = 2.0 * maxtau;
  return out;
}

struct DensityResult {
  int bins = 0;
  double extent = 0.0;  // histogram covers [-extent, extent]^2
  std::vector<double> histogram;  // normalized: sum * cell^2 = 1
  double l1_distance = 0.0;       // || hist - |u|^2 ||_L1 on the grid
  double l1_stderror = 0.0;       // spread across chains
  double binning_error = 0.0;     // midpoint-vs-average estimate for |u|^2
  bool binning_dominated = false;
};

inline DensityResult estimate_density(const Condensate& u, const AnyonPairParams& p,
                                      int N, const ChainConfig& cfg, int bins = 64) {
  p.validate();
  DensityResult out;
  out.bins = bins;
  out.extent = u.support_radius();
  const double cell = 2.0 * out.extent / bins;
  std::vector<std::vector<double>> hists(cfg.chains);
  std::vector<std::thread> pool;
  PotentialSpec noV;
  for (int c = 0; c < cfg.chains; ++c)
    pool.emplace_back([&, c] {
      detail::PairKernel ker(p);
      detail::ChainState st;
      detail::init_chain(st, u, p, N, cfg.seed + 7919 * c, nullptr);
      for (int s = 0; s < cfg.burnin; ++s) detail::sweep(st, u, p);
      hists[c].assign(std::size_t(bins) * bins, 0.0);
      long count = 0;
      for (int s = 0; s < cfg.sweeps; ++s) {
        detail::sweep(st, u, p);
        for (const Vec2& x : st.pos) {
          const int ix = int((x.x + out.extent) / cell);
          const int iy = int((x.y + out.extent) / cell);
          if (ix >= 0 && ix < bins && iy >= 0 && iy < bins) {
            hists[c][std::size_t(ix) * bins + iy] += 1.0;
            ++count;
          }
        }
      }
      for (double& h : hists[c]) h /= double(cfg.sweeps) * N * cell * cell;
    });
  for (auto& t : pool) t.join();

  out.histogram.assign(std::size_t(bins) * bins, 0.0);
  for (auto& h : hists)
    for (std::size_t i = 0; i < h.size(); ++i) out.histogram[i] += h[i] / cfg.chains;

  // reference |u|^2 cell averages (2x2 subsampling) + binning-error estimate
  std::vector<double> ref(std::size_t(bins) * bins, 0.0);
  double binerr = 0.0;
  for (int ix = 0; ix < bins; ++ix)
    for (int iy = 0; iy < bins; ++iy) {
      const double x0 = -out.extent + ix * cell, y0 = -out.extent + iy * cell;
      double sub = 0.0;
      for (int sx = 0; sx < 2; ++sx)
        for (int sy = 0; sy < 2; ++sy) {
          const double v = u.value({x0 + (sx + 0.5) * cell / 2.0,
                                    y0 + (sy + 0.5) * cell / 2.0});
          sub += v * v;
        }
      sub /= 4.0;
      const double mid = [&] {
        const double v = u.value({x0 + 0.5 * cell, y0 + 0.5 * cell});
        return v * v;
      }();
      ref[std::size_t(ix) * bins + iy] = sub;
      binerr += std::abs(sub - mid) * cell * cell;
    }
  double l1 = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    l1 += std::abs(out.histogram[i] - ref[i]) * cell * cell;
  out.l1_distance = l1;
  // chain spread
  double var = 0.0;
  for (auto& h : hists) {
    double l1c = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      l1c += std::abs(h[i] - ref[i]) * cell * cell;
    var += (l1c - l1) * (l1c - l1);
  }
  out.l1_stderror = cfg.chains > 1 ? std::sqrt(var / (cfg.chains * (cfg.chains - 1.0)))
                                   : 0.0;
  out.binning_error = binerr;
  out.binning_dominated = binerr > l1;
  return out;
}

struct NormRatioResult {
  double ratio = 1.0;
  double stderror = 0.0;
};

// || F Phi ||^2 / || Phi ||^2 by i.i.d. importance sampling from |Phi|^2
inline NormRatioResult estimate_norm_ratio(const Condensate& u, const AnyonPairParams& p,
                                           int N, long samples, std::uint64_t seed = 1) {
  p.validate();
  if (p.alpha == 0.0) return {1.0, 0.0};
  std::mt19937_64 rng(seed);
  double m = 0.0, m2 = 0.0;
  std::vector<Vec2> pos(N);
  for (long s = 0; s < samples; ++s) {
    for (Vec2& x : pos) x = u.sample(rng);
    double lf = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) {
        const double r = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
        lf += std::log(twobody::jastrow_f(r, p));
      }
    const double F2 = std::exp(2.0 * lf);
    m += F2;
    m2 += F2 * F2;
  }
  m /= double(samples);
  m2 /= double(samples);
  NormRatioResult out;
  out.ratio = m;
  out.stderror = std::sqrt(std::max(0.0, m2 - m * m) / double(samples));
  return out;
}

}  // namespace anyonlab::vmc
