// experiment drivers: strict JSON configs, field-file persistence, the
// condensation-energy convergence study, and deterministic CSV/JSON reporting
#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "anyonlab/condensate.hpp"
#include "anyonlab/css.hpp"
#include "anyonlab/grid.hpp"
#include "anyonlab/twobody.hpp"
#include "anyonlab/vmc.hpp"
#include "json.hpp"

namespace anyonlab::harness {

using field::ComplexField2D;
using field::cplx;
using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// strict parse: versioned schema, unknown keys are errors
inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& context) {
  if (!j.is_object())
    throw std::runtime_error(context + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error(context + ": unknown key '" + it.key() + "'");
}

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  if (!j.is_object() || !j.contains("schema"))
    throw std::runtime_error(path + ": missing 'schema' version field");
  if (j["schema"].get<int>() != kSchemaVersion)
    throw std::runtime_error(path + ": unsupported schema version");
  return j;
}

// ---- field files: flat little-endian f64 (re, im) pairs, row-major, with a
// JSON sidecar {L, n} -------------------------------------------------------

namespace detail {
inline void put_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}
inline double get_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), 8);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap64(bits);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace detail

inline void write_field(const std::string& stem, const ComplexField2D& u) {
  std::ofstream bin(stem + ".f64", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write field file: " + stem + ".f64");
  for (const cplx& z : u.v) {
    detail::put_le(bin, z.real());
    detail::put_le(bin, z.imag());
  }
  if (!bin) throw std::runtime_error("write failed: " + stem + ".f64");
  json side;
  side["schema"] = kSchemaVersion;
  side["L"] = u.L;
  side["n"] = u.n;
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot write sidecar: " + stem + ".json");
  js << side.dump(2) << "\n";
}

inline ComplexField2D read_field(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot open sidecar: " + stem + ".json");
  json side = json::parse(js);
  check_keys(side, {"schema", "L", "n"}, stem + ".json");
  ComplexField2D u(side["L"].get<double>(), side["n"].get<int>());
  std::ifstream bin(stem + ".f64", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open field file: " + stem + ".f64");
  for (cplx& z : u.v) {
    const double re = detail::get_le(bin);
    const double im = detail::get_le(bin);
    z = cplx(re, im);
  }
  if (!bin) throw std::runtime_error("truncated field file: " + stem + ".f64");
  return u;
}

// ---- deterministic CSV ----------------------------------------------------

inline std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---- convergence study: MC total energy vs the mean-field prediction ------

struct ConvergenceRow {
  long N = 0;
  double alpha = 0.0, R = 0.0, b = 0.0, g = 0.0, beta = 0.0, omega = 0.0;
  double mc_total = 0.0, mc_err = 0.0;
  double predicted_finite = 0.0;  // quartic coupling from the finite-(R,b) ratio
  double predicted_limit = 0.0;   // quartic coupling 2 pi beta G(2 beta omega, g)
  double discrepancy = 0.0;       // mc_total - predicted_finite
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool regime_warning = false;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  bool monotone = false;  // |discrepancy| non-increasing within error bars
  bool complete = false;  // all requested N finished
  std::string error;
};

// mean-field energy of the gridded condensate at a given quartic coupling
inline double mean_field_energy(const vmc::TruncatedGaussian& u, double beta,
                                double gamma, double vCoeff, double vExponent,
                                double L, int n) {
  ComplexField2D ug(L, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      ug.at(ix, iy) = u.value({ug.coord(ix), ug.coord(iy)});
  ug.normalize();
  css::CSSParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.vCoeff = vCoeff;
  p.vExponent = vExponent;
  return css::css_energy(ug, p).total;
}

inline ConvergenceResult run_convergence(const json& cfg) {
  check_keys(cfg, {"schema", "experiment", "Ns", "beta", "omega", "g",
                   "bExponent", "R1", "sigma", "vCoeff", "vExponent", "L", "n",
                   "chains", "sweeps", "burnin", "seed"},
             "convergence config");
  const double beta = cfg.at("beta").get<double>();
  const double omega = cfg.at("omega").get<double>();
  const double g = cfg.value("g", 0.0);
  const double bExp = cfg.value("bExponent", 2.5);
  const double R1 = cfg.value("R1", 3.0);
  const double sigma = cfg.value("sigma", 0.0);
  const double vCoeff = cfg.value("vCoeff", 1.0);
  const double vExponent = cfg.value("vExponent", 2.0);
  const double L = cfg.value("L", 4.0 * R1);
  const int n = cfg.value("n", 256);
  vmc::ChainConfig ccfg;
  ccfg.chains = cfg.value("chains", 4);
  ccfg.sweeps = cfg.value("sweeps", 20000);
  ccfg.burnin = cfg.value("burnin", 10000);
  ccfg.seed = cfg.value("seed", std::uint64_t(1));

  vmc::TruncatedGaussian u(R1, sigma);
  vmc::PotentialSpec pot{vCoeff, vExponent};
  ConvergenceResult out;
  out.complete = true;
  for (const auto& jn : cfg.at("Ns")) {
    const long N = jn.get<long>();
    try {
      const auto t0 = std::chrono::steady_clock::now();
      twobody::ScalingSchedule sch{N, beta, omega, bExp, g};
      auto sr = twobody::schedule_params(sch);
      ConvergenceRow row;
      row.N = N;
      row.alpha = sr.params.alpha;
      row.R = sr.params.R;
      row.b = sr.params.b;
      row.g = g;
      row.beta = beta;
      row.omega = omega;
      row.seed = ccfg.seed;
      row.regime_warning = sr.regime_warning;

      auto e = vmc::estimate_energy(u, sr.params, int(N), pot, ccfg);
      row.mc_total = e.total;
      row.mc_err = e.total_err;

      double gammaFinite = 0.0, gammaLimit = 0.0;
      if (row.alpha > 0.0) {
        // finite-(R,b) ratio: closed two-body energy divided by 2 pi alpha
        gammaFinite = 2.0 * M_PI * beta *
                      (twobody::scattering_energy_closed(sr.params) /
                       (2.0 * M_PI * row.alpha));
        gammaLimit =
            2.0 * M_PI * beta * twobody::coupling_G(2.0 * beta * omega, g);
      }
      row.predicted_finite =
          mean_field_energy(u, beta, gammaFinite, vCoeff, vExponent, L, n);
      row.predicted_limit =
          mean_field_energy(u, beta, gammaLimit, vCoeff, vExponent, L, n);
      row.discrepancy = row.mc_total - row.predicted_finite;
      row.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
      out.rows.push_back(row);
    } catch (const std::exception& ex) {
      // keep partial results; report the first failure
      out.complete = false;
      if (out.error.empty())
        out.error = "N=" + std::to_string(N) + ": " + ex.what();
    }
  }
  out.monotone = true;
  for (std::size_t k = 0; k + 1 < out.rows.size(); ++k) {
    const auto& a = out.rows[k];
    const auto& b = out.rows[k + 1];
    if (std::abs(b.discrepancy) >
        std::abs(a.discrepancy) + 3.0 * (a.mc_err + b.mc_err))
      out.monotone = false;
  }
  if (out.rows.empty()) out.monotone = false;
  return out;
}

inline const char* kConvergenceHeader =
    "N,alpha,R,b,g,beta,omega,mc_total,mc_err,predicted_finite,"
    "predicted_limit,discrepancy,seed,regime_warning";

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << kConvergenceHeader << "\n";
  for (const auto& r : rows)
    os << r.N << ',' << csv_num(r.alpha) << ',' << csv_num(r.R) << ','
       << csv_num(r.b) << ',' << csv_num(r.g) << ',' << csv_num(r.beta) << ','
       << csv_num(r.omega) << ',' << csv_num(r.mc_total) << ','
       << csv_num(r.mc_err) << ',' << csv_num(r.predicted_finite) << ','
       << csv_num(r.predicted_limit) << ',' << csv_num(r.discrepancy) << ','
       << r.seed << ',' << (r.regime_warning ? 1 : 0) << "\n";
  return os.str();
}

inline json row_to_json(const ConvergenceRow& r) {
  json j;
  j["N"] = r.N;
  j["alpha"] = r.alpha;
  j["R"] = r.R;
  j["b"] = r.b;
  j["g"] = r.g;
  j["beta"] = r.beta;
  j["omega"] = r.omega;
  j["mc_total"] = r.mc_total;
  j["mc_err"] = r.mc_err;
  j["predicted_finite"] = r.predicted_finite;
  j["predicted_limit"] = r.predicted_limit;
  j["discrepancy"] = r.discrepancy;
  j["seed"] = r.seed;
  j["regime_warning"] = r.regime_warning;
  return j;
}

inline ConvergenceRow row_from_json(const json& j) {
  check_keys(j, {"N", "alpha", "R", "b", "g", "beta", "omega", "mc_total",
                 "mc_err", "predicted_finite", "predicted_limit",
                 "discrepancy", "seed", "regime_warning"},
             "record");
  ConvergenceRow r;
  r.N = j.at("N").get<long>();
  r.alpha = j.at("alpha").get<double>();
  r.R = j.at("R").get<double>();
  r.b = j.at("b").get<double>();
  r.g = j.at("g").get<double>();
  r.beta = j.at("beta").get<double>();
  r.omega = j.at("omega").get<double>();
  r.mc_total = j.at("mc_total").get<double>();
  r.mc_err = j.at("mc_err").get<double>();
  r.predicted_finite = j.at("predicted_finite").get<double>();
  r.predicted_limit = j.at("predicted_limit").get<double>();
  r.discrepancy = j.at("discrepancy").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.regime_warning = j.at("regime_warning").get<bool>();
  return r;
}

// report: records -> CSV body + JSON summary with a recomputed verdict
struct Report {
  std::string csv;
  json summary;
};

inline Report report(const std::vector<ConvergenceRow>& rows) {
  if (rows.empty()) throw std::runtime_error("report: empty record list");
  Report rep;
  rep.csv = convergence_csv(rows);
  bool monotone = true;
  double maxAbs = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    maxAbs = std::max(maxAbs, std::abs(rows[k].discrepancy));
    if (k + 1 < rows.size() &&
        std::abs(rows[k + 1].discrepancy) >
            std::abs(rows[k].discrepancy) +
                3.0 * (rows[k].mc_err + rows[k + 1].mc_err))
      monotone = false;
  }
  rep.summary["schema"] = kSchemaVersion;
  rep.summary["records"] = rows.size();
  rep.summary["monotone"] = monotone;
  rep.summary["max_abs_discrepancy"] = maxAbs;
  return rep;
}

}  // namespace anyonlab::harness
