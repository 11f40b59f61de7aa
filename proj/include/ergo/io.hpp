#pragma once

// CSV/JSON emission and run manifests.  Files are written to a temporary
// sibling and renamed into place.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ergo/dynamics.hpp"
#include "ergo/experiments.hpp"
#include "ergo/lq_core.hpp"
#include "ergo/martingale_sim.hpp"

namespace ergo {

void write_atomic(const std::filesystem::path& path, std::string_view content);

// 17 significant digits; round-trips every finite double.
std::string format_double(double v);

// RFC 4180 quoting when needed.
std::string csv_field(std::string_view s);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  // Array of objects keyed by header; numeric-looking fields become numbers.
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string utc_timestamp();

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string started;
  std::string finished;  // empty until finalized
  std::string status = "running";
  nlohmann::json config;
  std::map<std::string, std::string> outputs;
};

nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

nlohmann::json to_json(const SmoothnessReport& r);
nlohmann::json to_json(const CheckRecord& c);
nlohmann::json to_json(const HoeffdingReport& r);
nlohmann::json to_json(const ExperimentResult& r);
nlohmann::json to_json(const DeviationResult& r);
nlohmann::json to_json(const StableTailResult& r);
nlohmann::json to_json(const BoundaryResult& r);

// Raw per-replica rows: gamma, q, n, replica, d_nq, max_d_kq, w1 [, max_birkhoff].
CsvTable raw_csv(const ReplicaTable& t);
// n, mean, p_moment, q10, q25, median, q75, q90.
CsvTable aggregate_csv(const ExperimentResult& r);
CsvTable tail_csv(const DeviationResult& r);
CsvTable tower_csv(const TowerPartition& t);
CsvTable ulam_csv(const UlamModel& m);

}  // namespace ergo
