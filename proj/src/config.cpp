#include "ergo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ergo/errors.hpp"

namespace ergo {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "kind",     "gamma",       "q",      "p",         "n_grid",    "replicas",
    "burn_in",  "master_seed", "statistic", "ulam_m", "tolerance", "x_grid",
};

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ContractViolation("config: '" + key + "' must be a number");
  return j.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0 && std::floor(v) == v && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  throw ContractViolation("config: '" + key + "' must be a nonnegative integer");
}

double default_tolerance(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::scaling: return 0.05;
    case ExperimentKind::wasserstein: return 0.3;
    case ExperimentKind::deviation: return 0.15;
    case ExperimentKind::stable_tail: return 0.3;
    case ExperimentKind::boundary: return 0.0;
  }
  return 0.0;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::wasserstein: return "wasserstein";
    case ExperimentKind::deviation: return "deviation";
    case ExperimentKind::stable_tail: return "stable_tail";
    case ExperimentKind::boundary: return "boundary";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::scaling, ExperimentKind::wasserstein, ExperimentKind::deviation,
                 ExperimentKind::stable_tail, ExperimentKind::boundary})
    if (to_string(k) == name) return k;
  throw ContractViolation("config: unknown kind '" + name +
                          "' (expected scaling, wasserstein, deviation, stable_tail or boundary)");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CanonicalConfig canonicalize_config(const json& raw) {
  if (!raw.is_object()) throw ContractViolation("config: top level must be a JSON object");
  for (const auto& [key, value] : raw.items())
    if (!kKnownKeys.count(key)) throw ContractViolation("config: unknown key '" + key + "'");

  CanonicalConfig out;
  json c = json::object();
  auto take = [&](const std::string& key, auto&& convert, auto&& fallback) {
    if (raw.contains(key)) {
      c[key] = convert(raw.at(key));
    } else {
      c[key] = fallback();
      out.defaulted.push_back(key);
    }
  };

  take("kind", [](const json& j) {
    if (!j.is_string()) throw ContractViolation("config: 'kind' must be a string");
    return to_string(experiment_kind_from_string(j.get<std::string>()));
  }, [] { return std::string("scaling"); });
  const auto kind = experiment_kind_from_string(c["kind"].get<std::string>());

  if (!raw.contains("gamma")) throw ContractViolation("config: 'gamma' is required");
  const double gamma = number(raw.at("gamma"), "gamma");
  if (!(gamma > 0 && gamma < 1))
    throw ContractViolation("config: gamma must lie in the open interval (0,1), got " +
                            raw.at("gamma").dump());
  c["gamma"] = gamma;

  take("q", [](const json& j) { return number(j, "q"); }, [] { return 2.0; });
  take("p", [](const json& j) { return number(j, "p"); },
       [&] { return gamma < 0.5 ? p_gamma(gamma) : 1 / gamma; });
  take("n_grid", [](const json& j) {
    if (!j.is_array()) throw ContractViolation("config: 'n_grid' must be an array");
    std::vector<std::uint64_t> v;
    for (const auto& e : j) v.push_back(unsigned_integer(e, "n_grid"));
    return v;
  }, [] { return std::vector<std::uint64_t>{256, 512, 1024, 2048, 4096, 8192, 16384}; });
  take("replicas", [](const json& j) { return unsigned_integer(j, "replicas"); },
       [] { return std::uint64_t{200}; });
  take("burn_in", [](const json& j) { return unsigned_integer(j, "burn_in"); },
       [] { return std::uint64_t{10000}; });
  take("master_seed", [](const json& j) { return unsigned_integer(j, "master_seed"); },
       [] { return std::uint64_t{1}; });
  take("statistic", [](const json& j) {
    if (!j.is_string()) throw ContractViolation("config: 'statistic' must be a string");
    return to_string(statistic_from_string(j.get<std::string>()));
  }, [] { return std::string("max_d_kq"); });
  take("ulam_m", [](const json& j) { return unsigned_integer(j, "ulam_m"); },
       [] { return std::uint64_t{16384}; });
  take("tolerance", [](const json& j) { return number(j, "tolerance"); },
       [&] { return default_tolerance(kind); });
  take("x_grid", [](const json& j) {
    if (!j.is_array()) throw ContractViolation("config: 'x_grid' must be an array");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(number(e, "x_grid"));
    return v;
  }, [] { return std::vector<double>{}; });

  // Validate through the typed form so the CLI and the library agree.
  const auto spec = experiment_spec_from_json(c);
  validate(spec.config);
  if (kind == ExperimentKind::deviation || kind == ExperimentKind::stable_tail)
    require(gamma > 0.5, "config: " + to_string(kind) + " needs gamma in (1/2,1)");
  if (kind == ExperimentKind::wasserstein) require(gamma < 0.5, "config: wasserstein needs gamma < 1/2");
  if (kind == ExperimentKind::stable_tail || kind == ExperimentKind::boundary)
    require(spec.config.q == 2, "config: " + to_string(kind) + " needs q = 2");
  for (double x : spec.x_grid) require(x > 0, "config: x_grid entries must be positive");

  std::sort(out.defaulted.begin(), out.defaulted.end());
  out.config = c;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(c.dump())));
  out.hash = buf;
  return out;
}

ExperimentSpec experiment_spec_from_json(const json& c) {
  ExperimentSpec s;
  s.kind = experiment_kind_from_string(c.at("kind").get<std::string>());
  auto& e = s.config;
  e.gamma = c.at("gamma").get<double>();
  e.q = c.at("q").get<double>();
  e.p = c.at("p").get<double>();
  e.n_grid.clear();
  for (const auto& n : c.at("n_grid")) e.n_grid.push_back(n.get<std::size_t>());
  e.replicas = c.at("replicas").get<std::size_t>();
  e.burn_in = c.at("burn_in").get<std::size_t>();
  e.master_seed = c.at("master_seed").get<std::uint64_t>();
  e.statistic = statistic_from_string(c.at("statistic").get<std::string>());
  e.ulam_m = c.at("ulam_m").get<std::size_t>();
  s.tolerance = c.at("tolerance").get<double>();
  s.x_grid = c.at("x_grid").get<std::vector<double>>();
  return s;
}

}  // namespace ergo
