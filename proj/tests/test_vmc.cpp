#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "anyonlab/condensate.hpp"
#include "anyonlab/twobody.hpp"
#include "anyonlab/vmc.hpp"
#include "doctest.h"

using anyonlab::twobody::AnyonPairParams;
using anyonlab::vmc::Condensate;
using anyonlab::vmc::TruncatedGaussian;
using anyonlab::vmc::Vec2;
namespace vmc = anyonlab::vmc;
namespace twobody = anyonlab::twobody;

namespace {

std::vector<Vec2> random_config(const Condensate& u, int N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec2> pos(N);
  for (Vec2& x : pos) x = u.sample(rng);
  return pos;
}

// deterministic expectations for N = 2 under |u(x1)|^2 |u(x2)|^2 f(r12)^2:
// outer Gauss in r1 (u radial, x1 on the positive axis), inner polar (r, theta)
// around x1 with panels split at the f kinks r = R and r = b
struct QuadN2 {
  double Z = 0.0;  // normalization = E_{|u|^2 x |u|^2}[f^2] (norm ratio)
  double K = 0.0, V = 0.0, W = 0.0, Sdiag = 0.0, J = 0.0;
};

QuadN2 quadrature_n2(const Condensate& u, const AnyonPairParams& p,
                     const vmc::PotentialSpec& pot) {
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                               0.6521451548625461, 0.3478548451374538};
  const double R1 = u.support_radius();
  const double a = p.alpha;
  vmc::detail::PairKernel ker(p);
  QuadN2 q;
  const int nTheta = 96;
  auto inner_panels = [&](double r1) {
    // panel edges in the pair distance; r spans out to where u(x2) dies
    std::vector<double> edges{0.0};
    if (p.R > 0.0 && p.R < 2.0 * R1) edges.push_back(p.R);
    if (p.b < 2.0 * R1) edges.push_back(p.b);
    edges.push_back(r1 + R1);
    return edges;
  };
  for (int pr = 0; pr < 64; ++pr)
    for (int kr = 0; kr < 4; ++kr) {
      const double r1 = (pr + 0.5 + 0.5 * gx[kr]) * R1 / 64.0;
      const double w1 = 0.5 * gw[kr] * R1 / 64.0 * 2.0 * M_PI * r1;
      const Vec2 x1{r1, 0.0};
      const double u1 = u.value(x1);
      if (u1 <= 0.0) continue;
      const double rho1 = w1 * u1 * u1;
      const Vec2 gl1 = u.grad_log(x1);
      auto edges = inner_panels(r1);
      for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const int panels = 24;
        for (int pp = 0; pp < panels; ++pp) {
          const double lo = edges[e] + (edges[e + 1] - edges[e]) * pp / panels;
          const double hi = edges[e] + (edges[e + 1] - edges[e]) * (pp + 1) / panels;
          for (int k = 0; k < 4; ++k) {
            const double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[k];
            const double f = twobody::jastrow_f(r, p);
            const double wr = 0.5 * (hi - lo) * gw[k] * r * f * f;
            const double rc = std::max(r, p.R);
            const double a2 = r * r / (rc * rc * rc * rc);
            const double rt = ker.ratio(r);
            const double k2 = rt * rt / (r * r);
            for (int t = 0; t < nTheta; ++t) {
              const double th = 2.0 * M_PI * t / nTheta;
              const Vec2 x2{x1.x + r * std::cos(th), x1.y + r * std::sin(th)};
              const double u2 = u.value(x2);
              if (u2 <= 0.0) continue;
              const double wgt = rho1 * wr * (2.0 * M_PI / nTheta) * u2 * u2;
              q.Z += wgt;
              const Vec2 gl2 = u.grad_log(x2);
              q.K += wgt * 0.5 * (gl1.norm2() + gl2.norm2());
              q.V += wgt * 0.5 * (pot(x1) + pot(x2));
              if (p.R > 0.0 && r < p.R) q.W += wgt * p.g * a / (p.R * p.R);
              q.Sdiag += wgt * a * a * (a2 + k2);
              // K_12 = (x1 - x2)/r^2 * ratio, K_21 = -K_12
              const Vec2 k12{(x1.x - x2.x) / (r * r) * rt,
                             (x1.y - x2.y) / (r * r) * rt};
              q.J += wgt * a * ((gl1.x - gl2.x) * k12.x + (gl1.y - gl2.y) * k12.y);
            }
          }
        }
      }
    }
  q.K /= q.Z;
  q.V /= q.Z;
  q.W /= q.Z;
  q.Sdiag /= q.Z;
  q.J /= q.Z;
  return q;
}

// upper 0.99 chi-square quantile (Wilson-Hilferty approximation)
double chi2_q99(int dof) {
  const double z = 2.3263478740408408;
  const double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
  return dof * t * t * t;
}

}  // namespace

TEST_CASE("trial-state log weight") {
  TruncatedGaussian u(3.0);
  AnyonPairParams p{0.2, 0.05, 0.6, 2.0};

  SUBCASE("exchange symmetry under random permutations") {
    auto pos = random_config(u, 6, 11);
    const double lw = vmc::log_weight(pos, u, p);
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 10; ++rep) {
      auto perm = pos;
      std::shuffle(perm.begin(), perm.end(), rng);
      CHECK(vmc::log_weight(perm, u, p) == doctest::Approx(lw).epsilon(1e-12));
    }
  }
  SUBCASE("pairs separated beyond b contribute nothing") {
    std::vector<Vec2> pos{{-2.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}};
    double expect = 0.0;
    for (const Vec2& x : pos) expect += 2.0 * std::log(u.value(x));
    CHECK(vmc::log_weight(pos, u, p) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("alpha = 0 leaves only the condensate part") {
    AnyonPairParams p0{0.0, 0.0, 0.6, 0.0};
    auto pos = random_config(u, 5, 13);
    double expect = 0.0;
    for (const Vec2& x : pos) expect += 2.0 * std::log(u.value(x));
    CHECK(vmc::log_weight(pos, u, p0) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("pair at distance R, g = 0: interior plateau value") {
    AnyonPairParams pg{0.2, 0.05, 0.6, 0.0};
    std::vector<Vec2> pos{{0.1, 0.2}, {0.1 + pg.R, 0.2}};
    const double q = twobody::q_ratio(pg);
    const double expect = 2.0 * std::log(u.value(pos[0])) +
                          2.0 * std::log(u.value(pos[1])) +
                          2.0 * std::log(2.0 * std::sqrt(q) / (1.0 + q));
    CHECK(vmc::log_weight(pos, u, pg) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("zero condensate value gives -inf") {
    std::vector<Vec2> pos{{0.0, 0.0}, {4.0, 0.0}};  // second outside supp u
    CHECK(vmc::log_weight(pos, u, p) ==
          -std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("metropolis chain behavior") {
  TruncatedGaussian u(3.0);

  SUBCASE("zero-weight start is rejected at initialization") {
    AnyonPairParams p{0.1, 0.05, 0.5, 1.0};
    vmc::ChainConfig cfg;
    cfg.chains = 1;
    cfg.sweeps = 10;
    cfg.burnin = 10;
    std::vector<Vec2> bad{{0.0, 0.0}, {5.0, 0.0}};
    vmc::PotentialSpec noV;
    CHECK_THROWS_AS(vmc::estimate_energy(u, p, 2, noV, cfg, &bad),
                    std::invalid_argument);
  }

  SUBCASE("identical seeds give bit-identical results") {
    AnyonPairParams p{0.15, 0.05, 0.5, 2.0};
    vmc::ChainConfig cfg;
    cfg.chains = 2;
    cfg.sweeps = 500;
    cfg.burnin = 300;
    cfg.seed = 42;
    vmc::PotentialSpec pot{1.0, 2.0};
    auto a = vmc::estimate_energy(u, p, 4, pot, cfg);
    auto b = vmc::estimate_energy(u, p, 4, pot, cfg);
    for (auto m : {&vmc::EnergyBreakdown::K, &vmc::EnergyBreakdown::V,
                   &vmc::EnergyBreakdown::W, &vmc::EnergyBreakdown::Sdiag,
                   &vmc::EnergyBreakdown::S3body, &vmc::EnergyBreakdown::J}) {
      CHECK((a.*m).mean == (b.*m).mean);
      CHECK((a.*m).stderror == (b.*m).stderror);
    }
    CHECK(a.total == b.total);
  }

  SUBCASE("stationary marginal at alpha = 0 passes chi-square vs |u|^2") {
    AnyonPairParams p0{0.0, 0.0, 0.5, 0.0};
    vmc::detail::ChainState st;
    vmc::detail::init_chain(st, u, p0, 2, 99, nullptr);
    for (int s = 0; s < 2000; ++s) vmc::detail::sweep(st, u, p0);
    // radial and angular bins of x1, thinned to decorrelate
    const int nrb = 12, nab = 8;
    std::vector<double> rcount(nrb, 0.0), acount(nab, 0.0);
    long total = 0;
    for (int s = 0; s < 60000; ++s) {
      vmc::detail::sweep(st, u, p0);
      if (s % 25 != 0) continue;
      const Vec2& x = st.pos[0];
      const double r = std::sqrt(x.norm2());
      int rb = int(r / 3.0 * nrb);
      if (rb >= nrb) rb = nrb - 1;
      rcount[rb] += 1.0;
      const double th = std::atan2(x.y, x.x) + M_PI;
      int ab = int(th / (2.0 * M_PI) * nab);
      if (ab >= nab) ab = nab - 1;
      acount[ab] += 1.0;
      ++total;
    }
    // bin probabilities of |u|^2 by radial quadrature
    std::vector<double> prob(nrb, 0.0);
    const int sub = 200;
    for (int rb = 0; rb < nrb; ++rb)
      for (int k = 0; k < sub; ++k) {
        const double r = (rb + (k + 0.5) / sub) * 3.0 / nrb;
        const double v = u.value({r, 0.0});
        prob[rb] += 2.0 * M_PI * r * v * v * 3.0 / (nrb * sub);
      }
    double chi2r = 0.0;
    for (int rb = 0; rb < nrb; ++rb) {
      const double e = total * prob[rb];
      if (e > 5.0) chi2r += (rcount[rb] - e) * (rcount[rb] - e) / e;
    }
    double chi2a = 0.0;
    for (int ab = 0; ab < nab; ++ab) {
      const double e = total / double(nab);
      chi2a += (acount[ab] - e) * (acount[ab] - e) / e;
    }
    CHECK(chi2r < chi2_q99(nrb - 1));
    CHECK(chi2a < chi2_q99(nab - 1));
  }
}

TEST_CASE("energy estimator vs N = 2 quadrature") {
  TruncatedGaussian u(3.0);
  AnyonPairParams p{0.2, 0.15, 0.9, 2.0};
  vmc::PotentialSpec pot{0.5, 2.0};
  const QuadN2 q = quadrature_n2(u, p, pot);

  vmc::ChainConfig cfg;
  cfg.chains = 4;
  cfg.sweeps = 12000;
  cfg.burnin = 3000;
  cfg.seed = 7;
  auto e = vmc::estimate_energy(u, p, 2, pot, cfg);

  auto within3 = [](const vmc::Term& t, double truth) {
    return std::abs(t.mean - truth) < 3.0 * std::max(t.stderror, 1e-14);
  };
  CHECK(within3(e.K, q.K));
  CHECK(within3(e.V, q.V));
  CHECK(within3(e.W, q.W));
  CHECK(within3(e.Sdiag, q.Sdiag));
  CHECK(within3(e.J, q.J));
  // no triples at N = 2
  CHECK(e.S3body.mean == 0.0);
  CHECK(e.S3body.stderror == 0.0);
  CHECK(e.total == doctest::Approx(e.K.mean + e.V.mean + e.W.mean +
                                   e.Sdiag.mean + e.S3body.mean + e.J.mean));
  for (const auto& c : e.chains) {
    CHECK(c.tuned);
    CHECK(c.acceptance > 0.0);
    CHECK(c.acceptance < 1.0);
    CHECK(c.block_length >= 1.0);
  }
  CHECK(e.product_inequality_violations == 0);
  CHECK(e.negative_weight_violations == 0);
}

TEST_CASE("alpha = 0 reduces to the condensate energy") {
  TruncatedGaussian u(3.0);
  AnyonPairParams p0{0.0, 0.0, 0.5, 0.0};
  vmc::PotentialSpec pot{1.0, 2.0};
  vmc::ChainConfig cfg;
  cfg.chains = 4;
  cfg.sweeps = 10000;
  cfg.burnin = 2000;
  cfg.seed = 3;
  auto e = vmc::estimate_energy(u, p0, 4, pot, cfg);
  CHECK(e.W.mean == 0.0);
  CHECK(e.Sdiag.mean == 0.0);
  CHECK(e.S3body.mean == 0.0);
  CHECK(e.J.mean == 0.0);
  CHECK(std::abs(e.K.mean - u.dirichlet()) < 3.0 * e.K.stderror);
  CHECK(std::abs(e.V.mean - u.potential_moment(1.0, 2.0)) < 3.0 * e.V.stderror);
}

TEST_CASE("three-body kernel positivity on random triples") {
  // sum over cyclic permutations of (x-y)_R^-perp . (x-z)_R^-perp >= 0;
  // perp on both factors cancels, so use the plain vectors
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  const double R = 0.1;
  auto aR = [&](Vec2 d) {
    const double rc = std::max(std::sqrt(d.norm2()), R);
    return Vec2{d.x / (rc * rc), d.y / (rc * rc)};
  };
  long violations = 0;
  for (long t = 0; t < 1000000; ++t) {
    const Vec2 x{un(rng), un(rng)}, y{un(rng), un(rng)}, z{un(rng), un(rng)};
    const Vec2 xy = aR({x.x - y.x, x.y - y.y});
    const Vec2 xz = aR({x.x - z.x, x.y - z.y});
    const Vec2 yz = aR({y.x - z.x, y.y - z.y});
    const double s = (xy.x * xz.x + xy.y * xz.y) +       // at x
                     (-xy.x * yz.x - xy.y * yz.y) +      // at y: (y-x).(y-z)
                     (xz.x * yz.x + xz.y * yz.y);        // at z: (z-x).(z-y)
    if (s < -1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("Rao-Blackwellized pair terms agree with the naive estimator") {
  TruncatedGaussian u(3.0);
  AnyonPairParams p{0.15, 0.1, 0.6, 2.0};
  vmc::PotentialSpec noV;
  vmc::ChainConfig cfg;
  cfg.chains = 4;
  cfg.sweeps = 4000;
  cfg.burnin = 2000;
  cfg.seed = 5;
  auto naive = vmc::estimate_energy(u, p, 8, noV, cfg);
  cfg.raoBlackwell = true;
  auto rb = vmc::estimate_energy(u, p, 8, noV, cfg);
  const double sW = std::hypot(naive.W.stderror, rb.W.stderror);
  const double sS = std::hypot(naive.Sdiag.stderror, rb.Sdiag.stderror);
  CHECK(std::abs(naive.W.mean - rb.W.mean) <
        3.0 * sW + 0.02 * std::abs(naive.W.mean));
  CHECK(std::abs(naive.Sdiag.mean - rb.Sdiag.mean) <
        3.0 * sS + 0.02 * std::abs(naive.Sdiag.mean));
  // variance reduction is the point of the estimator
  CHECK(rb.Sdiag.stderror < naive.Sdiag.stderror);
}

TEST_CASE("density histogram") {
  TruncatedGaussian u(3.0);

  SUBCASE("alpha = 0: product state, distance to |u|^2 at noise level") {
    AnyonPairParams p0{0.0, 0.0, 0.5, 0.0};
    vmc::ChainConfig cfg;
    cfg.chains = 4;
    cfg.sweeps = 20000;
    cfg.burnin = 3000;
    cfg.seed = 21;
    auto d = vmc::estimate_density(u, p0, 4, cfg, 32);
    CHECK(d.l1_distance < 0.06);
    CHECK(d.binning_error < 0.02);
  }
  SUBCASE("N = 2: histogram matches the quadrature marginal") {
    AnyonPairParams p{0.2, 0.15, 0.9, 2.0};
    vmc::ChainConfig cfg;
    cfg.chains = 4;
    cfg.sweeps = 50000;
    cfg.burnin = 3000;
    cfg.seed = 22;
    const int bins = 32;
    auto d = vmc::estimate_density(u, p, 2, cfg, bins);
    // marginal rho(x) = |u(x)|^2 E_y[f(|x-y|)^2] / Z by polar quadrature in y
    const double cell = 2.0 * d.extent / bins;
    double l1 = 0.0, Z = 0.0;
    std::vector<double> marg(std::size_t(bins) * bins, 0.0);
    for (int ix = 0; ix < bins; ++ix)
      for (int iy = 0; iy < bins; ++iy) {
        const Vec2 x{-d.extent + (ix + 0.5) * cell, -d.extent + (iy + 0.5) * cell};
        const double ux = u.value(x);
        if (ux <= 0.0) continue;
        double inner = 0.0;
        const double rmax = std::sqrt(x.norm2()) + 3.0;
        for (int pr = 0; pr < 200; ++pr) {
          const double r = (pr + 0.5) * rmax / 200.0;
          const double f = twobody::jastrow_f(r, p);
          double ring = 0.0;
          for (int t = 0; t < 32; ++t) {
            const double th = 2.0 * M_PI * (t + 0.5) / 32.0;
            const double v =
                u.value({x.x + r * std::cos(th), x.y + r * std::sin(th)});
            ring += v * v;
          }
          inner += 2.0 * M_PI * r * f * f * (ring / 32.0) * rmax / 200.0;
        }
        marg[std::size_t(ix) * bins + iy] = ux * ux * inner;
      }
    for (double m : marg) Z += m * cell * cell;
    for (std::size_t i = 0; i < marg.size(); ++i)
      l1 += std::abs(d.histogram[i] - marg[i] / Z) * cell * cell;
    CHECK(l1 < 0.06);
  }
}

TEST_CASE("norm ratio estimator") {
  TruncatedGaussian u(3.0);

  SUBCASE("alpha = 0 gives exactly 1") {
    AnyonPairParams p0{0.0, 0.0, 0.5, 0.0};
    auto r = vmc::estimate_norm_ratio(u, p0, 8, 100, 1);
    CHECK(r.ratio == 1.0);
    CHECK(r.stderror == 0.0);
  }
  SUBCASE("N = 2 matches the f^2 quadrature") {
    AnyonPairParams p{0.2, 0.15, 0.9, 2.0};
    vmc::PotentialSpec noV;
    const QuadN2 q = quadrature_n2(u, p, noV);
    auto r = vmc::estimate_norm_ratio(u, p, 2, 200000, 2);
    CHECK(std::abs(r.ratio - q.Z) < 3.0 * r.stderror);
    CHECK(r.ratio <= 1.0 + 3.0 * r.stderror);
  }
  SUBCASE("small b: deviation from 1 scales like N b^2 alpha") {
    // || F Phi ||^2 / || Phi ||^2 = 1 - O(N b^2 beta (1+g^2) ||u||_4^4)
    AnyonPairParams p{0.01, 0.0, 0.15, 0.0};
    auto r = vmc::estimate_norm_ratio(u, p, 16, 40000, 3);
    const double beta = p.alpha * 15.0;
    const double scale =
        16.0 * p.b * p.b * beta * (1.0 + p.g * p.g) * u.quartic_norm();
    CHECK(r.ratio <= 1.0);
    CHECK(1.0 - r.ratio < 10.0 * scale + 3.0 * r.stderror);
  }
}
