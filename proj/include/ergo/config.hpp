#pragma once

// Experiment configuration files: defaults, strict key checking, and a stable
// digest of the normalized form.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ergo/experiments.hpp"

namespace ergo {

enum class ExperimentKind { scaling, wasserstein, deviation, stable_tail, boundary };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct CanonicalConfig {
  nlohmann::json config;              // every key present, keys sorted, numbers typed
  std::string hash;                   // 16 hex digits
  std::vector<std::string> defaulted; // keys filled from defaults
};

// Throws ContractViolation on unknown keys, wrong types or invalid values.
CanonicalConfig canonicalize_config(const nlohmann::json& raw);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::scaling;
  ExperimentConfig config;
  double tolerance = 0.05;
  std::vector<double> x_grid;  // deviation only; empty = automatic
};

// Expects the output of canonicalize_config.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& canonical);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ergo
