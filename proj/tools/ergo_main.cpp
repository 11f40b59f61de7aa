// ergo: command-line driver.  Exit codes: 0 ok, 1 a checked bound failed,
// 2 usage or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ergo/acceptance.hpp"
#include "ergo/bounds.hpp"
#include "ergo/config.hpp"
#include "ergo/dynamics.hpp"
#include "ergo/errors.hpp"
#include "ergo/experiments.hpp"
#include "ergo/io.hpp"
#include "ergo/lq_core.hpp"
#include "ergo/martingale_sim.hpp"
#include "ergo/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kUsage = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::string format;
};

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

// Writes to --out (a directory) under `name`, or to stdout.
void emit(const Globals& g, const std::string& name, const std::string& content) {
  if (g.out.empty()) {
    std::cout << content;
    return;
  }
  ergo::write_atomic(fs::path(g.out) / name, content);
  std::cerr << "wrote " << (fs::path(g.out) / name).string() << "\n";
}

void emit_table(const Globals& g, const std::string& stem, const ergo::CsvTable& t) {
  if (g.format == "json")
    emit(g, stem + ".json", t.to_json().dump(2) + "\n");
  else
    emit(g, stem + ".csv", t.str());
}

void emit_json(const Globals& g, const std::string& stem, const json& j) {
  emit(g, stem + ".json", j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ergo::ContractViolation("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ergo::ContractViolation("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

// ---- smoothness -----------------------------------------------------------

struct SmoothnessArgs {
  double p = 2, q = 2;
  int dim = 16, samples = 10000;
};

int run_smoothness(const Globals& g, const SmoothnessArgs& a) {
  const auto report = ergo::check_smoothness(ergo::LqSpace<double>::counting(a.dim, a.q), a.p,
                                             a.samples, seed_or(g, 1));
  emit_json(g, "smoothness", ergo::to_json(report));
  return report.pass() ? kOk : kViolated;
}

// ---- bounds ---------------------------------------------------------------

struct BoundsArgs {
  std::string name;
  std::string config;
  std::optional<double> p, q, b, K, M, c_tilde, sn_moment, x0_moment, rho;
  std::optional<std::size_t> n, q_lag;
  std::vector<double> x, theta, a;
};

void fill_from_config(BoundsArgs& a) {
  if (a.config.empty()) return;
  const json j = read_json_file(a.config);
  if (!j.is_object()) throw ergo::ContractViolation("bounds config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    auto num = [&](std::optional<double>& slot) {
      if (!slot) slot = v.get<double>();
    };
    if (key == "p") num(a.p);
    else if (key == "q") num(a.q);
    else if (key == "b" || key == "b_n") num(a.b);
    else if (key == "K") num(a.K);
    else if (key == "M") num(a.M);
    else if (key == "c_tilde" || key == "c_tilde_2") num(a.c_tilde);
    else if (key == "sn_moment") num(a.sn_moment);
    else if (key == "x0_moment") num(a.x0_moment);
    else if (key == "rho") num(a.rho);
    else if (key == "n") { if (!a.n) a.n = v.get<std::size_t>(); }
    else if (key == "q_lag") { if (!a.q_lag) a.q_lag = v.get<std::size_t>(); }
    else if (key == "x") { if (a.x.empty()) a.x = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()}; }
    else if (key == "theta") { if (a.theta.empty()) a.theta = v.get<std::vector<double>>(); }
    else if (key == "a") { if (a.a.empty()) a.a = v.get<std::vector<double>>(); }
    else throw ergo::ContractViolation("bounds config: unknown key '" + key + "'");
  }
}

template <typename T>
T need(const std::optional<T>& v, const char* flag) {
  if (!v) throw ergo::ContractViolation(std::string("bounds: missing --") + flag);
  return *v;
}

ergo::ThetaSequence theta_of(const BoundsArgs& a, std::size_t n) {
  if (!a.theta.empty()) return ergo::ThetaSequence(a.theta);
  if (a.rho) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = std::pow(*a.rho, static_cast<double>(k));
    return ergo::ThetaSequence(t);
  }
  throw ergo::ContractViolation("bounds: give --theta values or --rho for theta(k) = rho^k");
}

int run_bounds(const Globals& g, BoundsArgs a) {
  fill_from_config(a);
  using ergo::format_double;
  const std::string& e = a.name;
  auto tail_rows = [&](std::vector<std::string> params, std::vector<std::string> values, auto eval) {
    std::vector<std::string> header{"evaluator"};
    header.insert(header.end(), params.begin(), params.end());
    for (auto h : {"x", "value", "raw", "regime"}) header.push_back(h);
    ergo::CsvTable t(header);
    if (a.x.empty()) throw ergo::ContractViolation("bounds: missing --x");
    for (double x : a.x) {
      const ergo::TailBound tb = eval(x);
      std::vector<std::string> row{e};
      row.insert(row.end(), values.begin(), values.end());
      row.push_back(format_double(x));
      row.push_back(format_double(tb.value));
      row.push_back(format_double(tb.raw));
      row.push_back(ergo::to_string(tb.regime));
      t.row(row);
    }
    emit_table(g, "bounds", t);
  };
  auto scalar_row = [&](std::vector<std::string> params, std::vector<std::string> values, double value,
                        double raw) {
    std::vector<std::string> header{"evaluator"};
    header.insert(header.end(), params.begin(), params.end());
    for (auto h : {"x", "value", "raw", "regime"}) header.push_back(h);
    ergo::CsvTable t(header);
    std::vector<std::string> row{e};
    row.insert(row.end(), values.begin(), values.end());
    for (const auto& s : {std::string(), format_double(value), format_double(raw), std::string()})
      row.push_back(s);
    t.row(row);
    emit_table(g, "bounds", t);
  };

  if (e == "hoeffding" || e == "general" || e == "pinelis94") {
    const double q = need(a.q, "q"), b = need(a.b, "b");
    const std::size_t n = need(a.n, "n");
    tail_rows({"q", e == "general" ? "b_n" : "b", "n"},
              {format_double(q), format_double(b), std::to_string(n)}, [&](double x) {
                if (e == "hoeffding") return ergo::hoeffding_tail(q, b, n, x);
                if (e == "general") return ergo::general_tail(q, b, n, x);
                const double v = ergo::pinelis94_tail(q, b, n, x);
                return ergo::TailBound{v, v, ergo::TailRegime::exponential};
              });
  } else if (e == "smoothness_constants") {
    const double p = need(a.p, "p"), q = need(a.q, "q");
    const auto c = ergo::smoothness_constants(p, q);
    ergo::CsvTable t({"evaluator", "p", "q", "c_p", "c_tilde_p", "K"});
    t.row({e, format_double(p), format_double(q), format_double(c.c_p), format_double(c.c_tilde_p),
           format_double(ergo::mz_constant_K(p, c.c_tilde_p))});
    emit_table(g, "bounds", t);
  } else if (e == "mz_constant") {
    const double p = need(a.p, "p");
    const double ct = a.c_tilde ? *a.c_tilde : ergo::smoothness_constants(p, need(a.q, "q")).c_tilde_p;
    const double K = ergo::mz_constant_K(p, ct);
    scalar_row({"p", "c_tilde"}, {format_double(p), format_double(ct)}, K, K);
  } else if (e == "mz_max_constant") {
    const double p = need(a.p, "p"), K = need(a.K, "K");
    const double C = ergo::mz_max_constant(p, K);
    scalar_row({"p", "K"}, {format_double(p), format_double(K)}, C, C);
  } else if (e == "mz_max") {
    const double p = need(a.p, "p"), K = need(a.K, "K"), M = need(a.M, "M");
    const std::size_t n = need(a.n, "n");
    const double v = ergo::mz_max_bound(p, K, M, n, theta_of(a, n));
    scalar_row({"p", "K", "M", "n"}, {format_double(p), format_double(K), format_double(M), std::to_string(n)}, v, v);
  } else if (e == "martingale_mz") {
    const double p = need(a.p, "p"), q = need(a.q, "q"), b = need(a.b, "b");
    const std::size_t n = need(a.n, "n");
    const std::vector<double> norms(n, b);
    const double v = ergo::martingale_mz_bound(p, p * (std::max(p, q) - 1), norms);
    scalar_row({"p", "q", "b", "n"}, {format_double(p), format_double(q), format_double(b), std::to_string(n)}, v, v);
  } else if (e == "rosenthal") {
    const double p = need(a.p, "p"), x0 = need(a.x0_moment, "x0-moment");
    const std::size_t n = a.n ? *a.n : a.a.size();
    const double v = ergo::rosenthal_bound(p, x0, a.a, n);
    scalar_row({"p", "x0_moment", "n", "delta"},
               {format_double(p), format_double(x0), std::to_string(n), format_double(ergo::rosenthal_delta(p))}, v, v);
  } else if (e == "deviation") {
    const double M = need(a.M, "M");
    const std::size_t n = need(a.n, "n");
    const double ct = a.c_tilde ? *a.c_tilde : 2.0;
    const auto theta = theta_of(a, n);
    if (a.x.empty()) throw ergo::ContractViolation("bounds: missing --x");
    ergo::CsvTable t({"evaluator", "M", "n", "c_tilde_2", "q_lag", "x", "value", "raw", "regime"});
    for (double x : a.x) {
      const std::size_t lag = a.q_lag ? *a.q_lag : ergo::deviation_lag(M, x, n);
      const auto v = ergo::deviation_bound(lag, M, x, theta, n, ct);
      t.row({e, format_double(M), std::to_string(n), format_double(ct), std::to_string(lag),
             format_double(x), format_double(v.value), format_double(v.raw), ""});
    }
    emit_table(g, "bounds", t);
  } else if (e == "maximal") {
    const double p = need(a.p, "p"), s = need(a.sn_moment, "sn-moment"), M = need(a.M, "M");
    const std::size_t n = need(a.n, "n");
    const double v = ergo::maximal_bound(p, s, M, theta_of(a, n), n);
    scalar_row({"p", "sn_moment", "M", "n"}, {format_double(p), format_double(s), format_double(M), std::to_string(n)}, v, v);
  } else {
    throw ergo::ContractViolation(
        "bounds: unknown evaluator '" + e +
        "' (hoeffding, pinelis94, general, smoothness_constants, mz_constant, mz_max_constant, mz_max, "
        "martingale_mz, rosenthal, deviation, maximal)");
  }
  return kOk;
}

// ---- tower / ulam ---------------------------------------------------------

int run_tower(const Globals& g, double gamma, std::size_t K) {
  emit_table(g, "tower", ergo::tower_csv(ergo::build_tower(gamma, K)));
  return kOk;
}

int run_ulam(const Globals& g, double gamma, std::size_t m) {
  const auto model = ergo::build_ulam(gamma, m);
  std::cerr << "ulam: m = " << m << ", residual = " << model.residual << "\n";
  emit_table(g, "ulam", ergo::ulam_csv(model));
  return kOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string mode = "paths";
  int dim = 1;
  double q = 2, b = 1, p = 2, stay = 0.9;
  std::size_t n = 16, replicas = 10000;
  std::string law = "rademacher_coords", chain = "sticky";
  std::vector<double> x;
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  ergo::MartingaleConfig c;
  c.dim = a.dim;
  c.q = a.q;
  c.n = a.n;
  c.b = a.b;
  if (a.law == "rademacher_coords")
    c.law = ergo::IncrementLaw::rademacher_coords;
  else if (a.law == "scaled_uniform")
    c.law = ergo::IncrementLaw::scaled_uniform;
  else
    throw ergo::ContractViolation("simulate: --law must be rademacher_coords or scaled_uniform");
  const std::uint64_t seed = seed_or(g, 1);

  if (a.mode == "paths") {
    const auto paths = ergo::simulate_martingale(c, a.replicas, seed, g.threads);
    ergo::CsvTable t({"replica", "path_max", "terminal"});
    for (std::size_t r = 0; r < a.replicas; ++r)
      t.row({std::to_string(r), ergo::format_double(paths.path_max[r]), ergo::format_double(paths.terminal[r])});
    emit_table(g, "paths", t);
    return kOk;
  }
  if (a.mode == "hoeffding") {
    std::vector<double> grid = a.x;
    if (grid.empty()) {
      const double rn = std::sqrt(static_cast<double>(a.n));
      for (int i = 0; i < 50; ++i) grid.push_back(rn * (0.25 + 5.75 * i / 49.0));
    }
    const auto rep = ergo::verify_hoeffding(c, a.replicas, grid, seed, g.threads);
    emit_json(g, "hoeffding", ergo::to_json(rep));
    return rep.pass ? kOk : kViolated;
  }
  if (a.mode == "mz") {
    const auto check = ergo::verify_martingale_mz(c, a.p, a.replicas, seed, g.threads);
    emit_json(g, "martingale_mz", ergo::to_json(check));
    return check.pass() ? kOk : kViolated;
  }
  if (a.mode == "markov") {
    ergo::MarkovInstrument inst = [&] {
      if (a.chain == "sticky") return ergo::sticky_chain(a.stay, a.q);
      if (a.chain == "iid") {
        Eigen::VectorXd half(2);
        half << 0.5, 0.5;
        Eigen::MatrixXd e(2, 1);
        e << 1, -1;
        return ergo::iid_chain(half, e, a.q);
      }
      throw ergo::ContractViolation("simulate: --chain must be sticky or iid");
    }();
    const auto exact = ergo::exact_conditionals(inst, a.p, a.n);
    const auto checks = ergo::verify_mz_markov(inst, a.p, a.n, a.replicas, seed);
    json out = {{"chain", a.chain}, {"p", a.p}, {"q", a.q}, {"n", a.n},
                {"theta", exact.theta.values()}, {"b_by_start", exact.b_by_start},
                {"b_stationary", exact.b_stationary}, {"checks", json::array()}};
    bool ok = true;
    for (const auto& ch : checks) {
      out["checks"].push_back(ergo::to_json(ch));
      ok = ok && ch.pass();
    }
    emit_json(g, "markov", out);
    return ok ? kOk : kViolated;
  }
  throw ergo::ContractViolation("simulate: --mode must be paths, hoeffding, mz or markov");
}

// ---- experiment -----------------------------------------------------------

int run_experiment(const Globals& g, const std::string& config_path) {
  json raw = read_json_file(config_path);
  if (g.seed) {
    if (!raw.is_object()) throw ergo::ContractViolation("config: top level must be a JSON object");
    raw["master_seed"] = *g.seed;
  }
  const auto canonical = ergo::canonicalize_config(raw);
  auto spec = ergo::experiment_spec_from_json(canonical.config);
  spec.config.threads = g.threads;
  for (const auto& key : canonical.defaulted) std::cerr << "config: default filled for '" << key << "'\n";

  const fs::path dir = g.out.empty() ? fs::path("ergo-run-" + canonical.hash) : fs::path(g.out);
  ergo::RunManifest manifest;
  manifest.command = "experiment";
  manifest.config_hash = canonical.hash;
  manifest.master_seed = spec.config.master_seed;
  manifest.tool_version = ergo::tool_version;
  manifest.started = ergo::utc_timestamp();
  manifest.config = canonical.config;
  ergo::write_manifest(dir / "manifest.json", manifest);
  ergo::write_atomic(dir / "config.json", canonical.config.dump(2) + "\n");
  manifest.outputs["config"] = "config.json";

  const auto model = ergo::build_ulam(spec.config.gamma, spec.config.ulam_m);
  double nu_f = 0;
  if (spec.config.statistic == ergo::Statistic::birkhoff_max)
    nu_f = ergo::invariant_expectation(model, ergo::birkhoff_observable);
  const auto table = ergo::simulate_statistics(spec.config, model.cdf, nu_f);
  ergo::write_atomic(dir / "raw.csv", ergo::raw_csv(table).str());
  manifest.outputs["raw"] = "raw.csv";

  json verdict;
  bool pass = false;
  const std::uint64_t boot = spec.config.master_seed ^ 0xB0075B0075ULL;
  switch (spec.kind) {
    case ergo::ExperimentKind::scaling: {
      const auto r = ergo::scaling_from_table(table, spec.config.statistic, spec.config.p,
                                              ergo::scaling_target(spec.config.gamma, spec.config.p),
                                              spec.tolerance, boot);
      ergo::write_atomic(dir / "aggregate.csv", ergo::aggregate_csv(r).str());
      manifest.outputs["aggregate"] = "aggregate.csv";
      verdict = ergo::to_json(r);
      pass = r.pass;
      break;
    }
    case ergo::ExperimentKind::wasserstein: {
      const auto r = ergo::wasserstein_from_table(table, spec.config.p, spec.tolerance, boot);
      ergo::write_atomic(dir / "aggregate.csv", ergo::aggregate_csv(r).str());
      manifest.outputs["aggregate"] = "aggregate.csv";
      verdict = ergo::to_json(r);
      pass = r.pass;
      break;
    }
    case ergo::ExperimentKind::deviation: {
      const auto r = ergo::deviation_from_table(table, spec.config.statistic, spec.x_grid, spec.tolerance);
      ergo::write_atomic(dir / "tail.csv", ergo::tail_csv(r).str());
      manifest.outputs["tail"] = "tail.csv";
      verdict = ergo::to_json(r);
      pass = r.pass;
      break;
    }
    case ergo::ExperimentKind::stable_tail: {
      const auto r = ergo::stable_tail_from_table(table, spec.tolerance);
      verdict = ergo::to_json(r);
      pass = r.pass;
      break;
    }
    case ergo::ExperimentKind::boundary: {
      const auto r = ergo::boundary_from_table(table);
      verdict = ergo::to_json(r);
      pass = r.pass;
      break;
    }
  }
  verdict["config_hash"] = canonical.hash;
  ergo::write_atomic(dir / "verdict.json", verdict.dump(2) + "\n");
  manifest.outputs["verdict"] = "verdict.json";
  manifest.finished = ergo::utc_timestamp();
  manifest.status = pass ? "pass" : "fail";
  ergo::write_manifest(dir / "manifest.json", manifest);
  std::cout << verdict.dump(2) << "\n";
  return pass ? kOk : kViolated;
}

// ---- verify ---------------------------------------------------------------

int run_verify(const Globals& g, const std::vector<int>& only) {
  ergo::AcceptanceOptions o;
  o.threads = g.threads;
  if (g.seed) o.seed = *g.seed;
  o.only = only;
  o.on_result = [](const ergo::CriterionResult& r) { std::cout << ergo::format_line(r) << std::endl; };
  const auto results = ergo::run_acceptance(o);
  bool ok = true;
  json out = json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    out.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  if (!g.out.empty()) ergo::write_atomic(fs::path(g.out) / "verify.json", out.dump(2) + "\n");
  return ok ? kOk : kViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergo: moment, deviation and empirical-process bounds for intermittent maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ergo::tool_version);

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", g.threads, "worker threads (default: ERGO_MOMENTS_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory (default: stdout, or ergo-run-<hash> for experiment)");
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  g.format = "csv";

  SmoothnessArgs sm;
  auto* smoothness = app.add_subcommand("smoothness", "certify the smoothness constants of psi_p on l^q");
  smoothness->add_option("--p", sm.p)->required();
  smoothness->add_option("--q", sm.q)->required();
  smoothness->add_option("--dim", sm.dim);
  smoothness->add_option("--samples", sm.samples);

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "evaluate a closed-form bound");
  bounds->add_option("name", ba.name, "evaluator")->required();
  bounds->add_option("--config", ba.config, "JSON file with parameters");
  bounds->add_option("--p", ba.p);
  bounds->add_option("--q", ba.q);
  bounds->add_option("--b,--b-n", ba.b);
  bounds->add_option("--n", ba.n);
  bounds->add_option("--x", ba.x)->delimiter(',');
  bounds->add_option("--K", ba.K);
  bounds->add_option("--M", ba.M);
  bounds->add_option("--c-tilde", ba.c_tilde);
  bounds->add_option("--sn-moment", ba.sn_moment);
  bounds->add_option("--x0-moment", ba.x0_moment);
  bounds->add_option("--a", ba.a, "conditional second-moment norms a_1..a_n")->delimiter(',');
  bounds->add_option("--theta", ba.theta)->delimiter(',');
  bounds->add_option("--rho", ba.rho, "theta(k) = rho^k");
  bounds->add_option("--q-lag", ba.q_lag);

  double gamma = 0.5;
  std::size_t K = 10000, m = 16384;
  auto* tower = app.add_subcommand("tower", "return-time partition of the LSV map");
  tower->add_option("--gamma", gamma)->required();
  tower->add_option("--k", K);
  auto* ulam = app.add_subcommand("ulam", "Ulam approximation of the invariant CDF");
  ulam->add_option("--gamma", gamma)->required();
  ulam->add_option("--m", m);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "bounded martingales and the Markov instrument");
  simulate->add_option("--mode", sa.mode)->check(CLI::IsMember({"paths", "hoeffding", "mz", "markov"}));
  simulate->add_option("--dim", sa.dim);
  simulate->add_option("--q", sa.q);
  simulate->add_option("--n", sa.n);
  simulate->add_option("--b", sa.b);
  simulate->add_option("--p", sa.p);
  simulate->add_option("--law", sa.law);
  simulate->add_option("--replicas", sa.replicas);
  simulate->add_option("--chain", sa.chain);
  simulate->add_option("--stay", sa.stay);
  simulate->add_option("--x", sa.x)->delimiter(',');

  std::string config_path;
  auto* experiment = app.add_subcommand("experiment", "run a rate experiment from a JSON config");
  experiment->add_option("--config", config_path)->required();

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--only", only, "criterion ids")->delimiter(',');

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*smoothness) return run_smoothness(g, sm);
    if (*bounds) return run_bounds(g, ba);
    if (*tower) return run_tower(g, gamma, K);
    if (*ulam) return run_ulam(g, gamma, m);
    if (*simulate) return run_simulate(g, sa);
    if (*experiment) return run_experiment(g, config_path);
    if (*verify) return run_verify(g, only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
