// blocked error analysis for correlated Monte Carlo series via the
// integrated autocorrelation time with a self-consistent (Sokal) window
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace anyonlab::stats {

struct SeriesStats {
  double mean = 0.0;
  double stderror = 0.0;
  double tau = 0.5;       // integrated autocorrelation time
  std::size_t n = 0;
};

inline SeriesStats analyze(const std::vector<double>& x) {
  SeriesStats s;
  s.n = x.size();
  if (x.empty()) return s;
  double m = 0.0;
  for (double v : x) m += v;
  m /= double(x.size());
  s.mean = m;
  if (x.size() < 8) return s;
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  var /= double(x.size());
  if (var <= 0.0) return s;
  // tau = 1/2 + sum_t rho(t), window M = smallest M with M >= 5 tau(M)
  double tau = 0.5;
  const std::size_t tmax = x.size() / 4;
  for (std::size_t t = 1; t <= tmax; ++t) {
    double c = 0.0;
    for (std::size_t i = 0; i + t < x.size(); ++i) c += (x[i] - m) * (x[i + t] - m);
    c /= double(x.size() - t) * var;
    tau += c;
    if (double(t) >= 5.0 * tau) break;
  }
  if (tau < 0.5) tau = 0.5;
  s.tau = tau;
  s.stderror = std::sqrt(var * 2.0 * tau / double(x.size()));
  return s;
}

// combine independent chain estimates (equal-length chains)
inline SeriesStats combine(const std::vector<SeriesStats>& chains) {
  SeriesStats s;
  if (chains.empty()) return s;
  double m = 0.0, v = 0.0;
  for (const auto& c : chains) {
    m += c.mean;
    v += c.stderror * c.stderror;
    s.n += c.n;
    s.tau = std::max(s.tau, c.tau);
  }
  s.mean = m / double(chains.size());
  s.stderror = std::sqrt(v) / double(chains.size());
  return s;
}

}  // namespace anyonlab::stats
