// command-line front end: two-body closed forms, VMC runs, CSS minimization,
// NLL soliton construction, gamma* scans, convergence studies, and reporting
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anyonlab/condensate.hpp"
#include "anyonlab/css.hpp"
#include "anyonlab/grid.hpp"
#include "anyonlab/harness.hpp"
#include "anyonlab/nll.hpp"
#include "anyonlab/radial_scattering.hpp"
#include "anyonlab/twobody.hpp"
#include "anyonlab/vmc.hpp"

namespace fs = std::filesystem;
using anyonlab::field::ComplexField2D;
using anyonlab::field::cplx;
using nlohmann::json;
namespace harness = anyonlab::harness;
namespace twobody = anyonlab::twobody;
namespace css = anyonlab::css;
namespace nll = anyonlab::nll;
namespace vmc = anyonlab::vmc;

namespace {

struct Common {
  std::string configPath;
  std::string outDir = ".";
  std::uint64_t seed = 0;
  bool seedSet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.configPath, "JSON config file")->required();
  app->add_option("--out", c.outDir, "output directory");
  app->add_option("--seed", c.seed, "seed override")
      ->each([&c](const std::string&) { c.seedSet = true; });
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

ComplexField2D random_start(double L, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gs(0.0, 1.0);
  ComplexField2D u(L, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const double x = u.coord(ix), y = u.coord(iy);
      const double env = std::exp(-8.0 * (x * x + y * y) / (L * L));
      u.at(ix, iy) = env * cplx(1.0 + 0.3 * gs(rng), 0.3 * gs(rng));
    }
  u.normalize();
  return u;
}

double grid_quartic(const ComplexField2D& u) {
  double q = 0.0;
  for (const cplx& z : u.v) q += std::norm(z) * std::norm(z);
  return q * u.h() * u.h();
}

std::vector<cplx> parse_poly(const json& j) {
  std::vector<cplx> c;
  for (const auto& e : j) c.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return c;
}

int cmd_twobody(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(cfg, {"schema", "alpha", "R", "b", "g", "mesh_points"},
                      "twobody config");
  twobody::AnyonPairParams p;
  p.alpha = cfg.at("alpha").get<double>();
  p.R = cfg.at("R").get<double>();
  p.b = cfg.at("b").get<double>();
  p.g = cfg.at("g").get<double>();
  const int mesh = cfg.value("mesh_points", 400);
  auto num = twobody::scattering_energy_numeric(p, mesh);
  json out;
  if (p.R > 0.0) {
    auto lam = twobody::jastrow_coefficients(p);
    out["lambda1"] = lam.lambda1;
    out["lambda2"] = lam.lambda2;
  }
  out["E2_closed"] = num.closed;
  out["E2_numeric"] = num.energy;
  out["mesh_error"] = num.mesh_error;
  // finite-(R,b) coupling ratio; equals G(s,g) under q = e^{-s}
  out["G"] = p.alpha > 0.0 ? num.closed / (2.0 * M_PI * p.alpha) : 0.0;
  out["bracket_ok"] = num.bracket_ok;
  write_text(fs::path(c.outDir) / "twobody.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return num.bracket_ok ? 0 : 1;
}

int cmd_vmc(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(cfg,
                      {"schema", "N", "beta", "omega", "alpha", "R", "b", "g",
                       "bExponent", "u", "V", "chains", "sweeps", "burnin",
                       "seed", "raoBlackwell"},
                      "vmc config");
  const int N = cfg.at("N").get<int>();
  twobody::AnyonPairParams p;
  p.g = cfg.value("g", 0.0);
  if (cfg.contains("alpha")) {
    p.alpha = cfg.at("alpha").get<double>();
    p.R = cfg.value("R", 0.0);
    p.b = cfg.at("b").get<double>();
  } else {
    twobody::ScalingSchedule sch{N, cfg.at("beta").get<double>(),
                                 cfg.at("omega").get<double>(),
                                 cfg.value("bExponent", 2.5), p.g};
    p = twobody::schedule_params(sch).params;
    if (cfg.contains("b")) p.b = cfg.at("b").get<double>();
  }
  json uspec = cfg.value("u", json::object());
  harness::check_keys(uspec, {"kind", "R1", "sigma"}, "u spec");
  vmc::TruncatedGaussian u(uspec.value("R1", 3.0), uspec.value("sigma", 0.0));
  json vspec = cfg.value("V", json::object());
  harness::check_keys(vspec, {"coeff", "expnt"}, "V spec");
  vmc::PotentialSpec pot{vspec.value("coeff", 0.0), vspec.value("expnt", 2.0)};
  vmc::ChainConfig ccfg;
  ccfg.chains = cfg.value("chains", 4);
  ccfg.sweeps = cfg.value("sweeps", 20000);
  ccfg.burnin = cfg.value("burnin", 10000);
  ccfg.seed = c.seedSet ? c.seed : cfg.value("seed", std::uint64_t(1));
  ccfg.raoBlackwell = cfg.value("raoBlackwell", false);

  auto e = vmc::estimate_energy(u, p, N, pot, ccfg);
  std::ostringstream csv;
  csv << "term,mean,stderr,N,alpha,R,b,g\n";
  auto row = [&](const char* name, const vmc::Term& t) {
    csv << name << ',' << harness::csv_num(t.mean) << ','
        << harness::csv_num(t.stderror) << ',' << N << ','
        << harness::csv_num(p.alpha) << ',' << harness::csv_num(p.R) << ','
        << harness::csv_num(p.b) << ',' << harness::csv_num(p.g) << "\n";
  };
  row("K", e.K);
  row("V", e.V);
  row("W", e.W);
  row("Sdiag", e.Sdiag);
  row("S3body", e.S3body);
  row("J", e.J);
  write_text(fs::path(c.outDir) / "vmc.csv", csv.str());
  json summary;
  summary["schema"] = harness::kSchemaVersion;
  summary["total"] = e.total;
  summary["total_err"] = e.total_err;
  summary["product_inequality_violations"] = e.product_inequality_violations;
  summary["negative_weight_violations"] = e.negative_weight_violations;
  json chains = json::array();
  for (const auto& ch : e.chains) {
    json jc;
    jc["acceptance"] = ch.acceptance;
    jc["tuned"] = ch.tuned;
    jc["block_length"] = ch.block_length;
    jc["seed"] = ch.seed;
    chains.push_back(jc);
  }
  summary["chains"] = chains;
  write_text(fs::path(c.outDir) / "vmc_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  const bool ok = e.product_inequality_violations == 0 &&
                  e.negative_weight_violations == 0;
  return ok ? 0 : 1;
}

int cmd_css(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(
      cfg, {"schema", "beta", "gamma", "V", "L", "n", "tol", "maxIter", "seed"},
      "css config");
  css::CSSParams p;
  p.beta = cfg.value("beta", 0.0);
  p.gamma = cfg.value("gamma", 0.0);
  json vspec = cfg.value("V", json::object());
  harness::check_keys(vspec, {"coeff", "expnt"}, "V spec");
  p.vCoeff = vspec.value("coeff", 0.0);
  p.vExponent = vspec.value("expnt", 2.0);
  const double L = cfg.at("L").get<double>();
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = c.seedSet ? c.seed : cfg.value("seed", std::uint64_t(1));
  auto r = css::minimize_css(p, random_start(L, n, seed),
                             cfg.value("tol", 1e-6), cfg.value("maxIter", 2000));
  harness::write_field((fs::path(c.outDir) / "css_field").string(), r.u);
  json out;
  out["schema"] = harness::kSchemaVersion;
  out["energy"] = r.energy;
  out["residual"] = r.residual_norm;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["diverged"] = r.diverged;
  write_text(fs::path(c.outDir) / "css_summary.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return (r.converged && !r.diverged) ? 0 : 1;
}

int cmd_nll(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(cfg, {"schema", "P", "Q", "L", "n", "normTol", "identityTol"},
                      "nll config");
  nll::PolynomialPair pq;
  pq.P = parse_poly(cfg.at("P"));
  pq.Q = parse_poly(cfg.at("Q"));
  const double L = cfg.value("L", 100.0);
  const int n = cfg.value("n", 512);
  auto st = nll::nll_state(pq, L, n, cfg.value("normTol", 1e-3));
  css::CSSParams p;
  p.beta = st.beta;
  const double energy = css::css_energy(st.u, p).total;
  const double quartic = grid_quartic(st.u);
  const double target = 2.0 * M_PI * st.beta * quartic;
  const double rel = std::abs(energy - target) / std::max(1e-300, energy);
  harness::write_field((fs::path(c.outDir) / "nll_field").string(), st.u);
  json out;
  out["schema"] = harness::kSchemaVersion;
  out["beta"] = st.beta;
  out["mass_defect"] = st.mass_defect;
  out["energy"] = energy;
  out["quartic"] = quartic;
  out["identity_rel_error"] = rel;
  write_text(fs::path(c.outDir) / "nll_report.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return rel < cfg.value("identityTol", 1e-3) ? 0 : 1;
}

int cmd_gammastar(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(cfg, {"schema", "betas", "L", "n", "restarts", "iters", "seed"},
                      "gammastar config");
  const double L = cfg.value("L", 60.0);
  const int n = cfg.value("n", 256);
  const int restarts = cfg.value("restarts", 8);
  const int iters = cfg.value("iters", 400);
  const std::uint64_t seed = c.seedSet ? c.seed : cfg.value("seed", std::uint64_t(1));
  std::ostringstream csv;
  csv << "beta,estimate,spread\n";
  for (const auto& jb : cfg.at("betas")) {
    const double beta = jb.get<double>();
    auto r = css::gamma_star_estimate(beta, L, n, restarts, seed, iters);
    csv << harness::csv_num(beta) << ',' << harness::csv_num(r.estimate) << ','
        << harness::csv_num(r.spread) << "\n";
  }
  write_text(fs::path(c.outDir) / "gammastar.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_convergence(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  if (c.seedSet) cfg["seed"] = c.seed;
  auto res = harness::run_convergence(cfg);
  // persist partial results even on failure
  write_text(fs::path(c.outDir) / "convergence.csv",
             harness::convergence_csv(res.rows));
  json records = json::array();
  for (const auto& r : res.rows) records.push_back(harness::row_to_json(r));
  json out;
  out["schema"] = harness::kSchemaVersion;
  out["records"] = records;
  out["monotone"] = res.monotone;
  out["complete"] = res.complete;
  if (!res.error.empty()) out["error"] = res.error;
  write_text(fs::path(c.outDir) / "records.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return res.complete ? 0 : 1;
}

int cmd_report(const Common& c) {
  json cfg = harness::load_config(c.configPath);
  harness::check_keys(cfg, {"schema", "records_file"}, "report config");
  std::ifstream in(cfg.at("records_file").get<std::string>());
  if (!in)
    throw std::runtime_error("cannot open records file: " +
                             cfg.at("records_file").get<std::string>());
  json recs = json::parse(in);
  std::vector<harness::ConvergenceRow> rows;
  for (const auto& j : recs.at("records")) rows.push_back(harness::row_from_json(j));
  auto rep = harness::report(rows);
  write_text(fs::path(c.outDir) / "report.csv", rep.csv);
  write_text(fs::path(c.outDir) / "report_summary.json", rep.summary.dump(2) + "\n");
  std::cout << rep.summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anyon trial-state and Chern-Simons-Schrodinger laboratory"};
  app.require_subcommand(1);
  Common c;
  int rc = 0;
  auto bind = [&](const char* name, const char* desc, int (*fn)(const Common&)) {
    auto* sub = app.add_subcommand(name, desc);
    add_common(sub, c);
    sub->callback([&rc, fn, &c] {
      fs::create_directories(c.outDir);
      rc = fn(c);
    });
    return sub;
  };
  bind("twobody", "two-body scattering energies and couplings", cmd_twobody);
  bind("vmc", "variational Monte Carlo energy decomposition", cmd_vmc);
  bind("css", "minimize the CSS energy functional", cmd_css);
  bind("nll", "construct a nonlinear-Landau-level soliton", cmd_nll);
  bind("gammastar", "estimate the critical coupling gamma*(beta)", cmd_gammastar);
  bind("convergence", "many-body vs mean-field convergence study", cmd_convergence);
  bind("report", "re-emit CSV and summary from saved records", cmd_report);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
