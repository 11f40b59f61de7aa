#include "ergo/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "ergo/errors.hpp"

namespace ergo {

using nlohmann::json;

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> fields) {
  require(fields.size() == header_.size(), "CsvTable: row width does not match header");
  rows_.push_back(std::move(fields));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

json CsvTable::to_json() const {
  json out = json::array();
  for (const auto& r : rows_) {
    json obj = json::object();
    for (std::size_t i = 0; i < header_.size(); ++i) {
      const auto& f = r[i];
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (!f.empty() && end == f.c_str() + f.size())
        obj[header_[i]] = v;
      else
        obj[header_[i]] = f;
    }
    out.push_back(std::move(obj));
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},         {"config_hash", m.config_hash},
          {"master_seed", m.master_seed}, {"tool_version", m.tool_version},
          {"started", m.started},         {"finished", m.finished.empty() ? json() : json(m.finished)},
          {"status", m.status},           {"config", m.config},
          {"outputs", m.outputs}};
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_atomic(path, to_json(m).dump(2) + "\n");
}

namespace {

json vec(const LqVector<double>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json fit_json(const LineFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"slope_se", f.slope_se}};
}

}  // namespace

json to_json(const SmoothnessReport& r) {
  return {{"p", r.p},
          {"q", r.q},
          {"dim", r.dim},
          {"samples", r.samples},
          {"max_ratio", r.max_ratio},
          {"bound_c_tilde", r.bound_c_tilde},
          {"max_diag_ratio", r.max_diag_ratio},
          {"bound_c", r.bound_c},
          {"self_ratio", r.self_ratio},
          {"max_fd_rel_error", r.max_fd_rel_error},
          {"violations", r.violations},
          {"witness", {{"x", vec(r.witness_x)}, {"u", vec(r.witness_u)}, {"v", vec(r.witness_v)}}},
          {"pass", r.pass()}};
}

json to_json(const CheckRecord& c) {
  return {{"name", c.name},     {"lhs", c.lhs},           {"rhs", c.rhs},
          {"margin", c.margin}, {"method", c.method},     {"replicas", c.replicas},
          {"pass", c.pass()}};
}

json to_json(const HoeffdingReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"x", row.x},
                    {"exceedances", row.exceedances},
                    {"empirical", row.empirical},
                    {"wilson_upper", row.wilson_upper},
                    {"bound", row.bound.value},
                    {"regime", to_string(row.bound.regime)},
                    {"pinelis94", row.pinelis94},
                    {"margin", row.margin},
                    {"pass", row.pass}});
  return {{"dim", r.config.dim}, {"q", r.config.q},         {"n", r.config.n},
          {"b", r.config.b},     {"replicas", r.replicas}, {"rows", rows},
          {"pass", r.pass}};
}

json to_json(const ExperimentResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"mean", row.mean}, {"p_moment", row.p_moment}, {"median", row.median}});
  return {{"kind", r.kind},
          {"statistic", to_string(r.statistic)},
          {"gamma", r.gamma},
          {"q", r.q},
          {"p", r.p},
          {"regressor", r.log_n_log_n ? "log(n log n)" : "log n"},
          {"target_slope", r.target_slope},
          {"fitted_slope", r.fit.slope},
          {"fit", fit_json(r.fit)},
          {"ci", {r.ci_low, r.ci_high}},
          {"tolerance", r.tolerance},
          {"rows", rows},
          {"pass", r.pass}};
}

json to_json(const DeviationResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"x", row.x}, {"exceedances", row.exceedances}, {"tail", row.tail}, {"fitted", row.fitted}});
  return {{"kind", "deviation"},
          {"statistic", to_string(r.statistic)},
          {"gamma", r.gamma},
          {"n", r.n},
          {"replicas", r.replicas},
          {"scale_exponent", r.scale_exponent},
          {"target_slope", r.target_slope},
          {"fitted_slope", r.fit.slope},
          {"fit", fit_json(r.fit)},
          {"ci", {r.fit.slope - 1.96 * r.fit.slope_se, r.fit.slope + 1.96 * r.fit.slope_se}},
          {"tolerance", r.tolerance},
          {"rows", rows},
          {"warnings", r.warnings},
          {"pass", r.pass}};
}

json to_json(const StableTailResult& r) {
  return {{"kind", "stable_tail"}, {"gamma", r.gamma},
          {"n", r.n},              {"replicas", r.replicas},
          {"top_fraction", r.top_fraction}, {"hill_index", r.hill_index},
          {"target", r.target},    {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

json to_json(const BoundaryResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"q25", row.q25}, {"q75", row.q75}, {"iqr", row.iqr}});
  return {{"kind", "boundary"}, {"low", r.low}, {"high", r.high}, {"rows", rows}, {"pass", r.pass}};
}

CsvTable raw_csv(const ReplicaTable& t) {
  std::vector<std::string> header{"gamma", "q", "n", "replica", "d_nq", "max_d_kq", "w1"};
  const bool birkhoff = !t.max_birkhoff.empty();
  if (birkhoff) header.push_back("max_birkhoff");
  CsvTable csv(header);
  for (std::size_t r = 0; r < t.replicas; ++r)
    for (std::size_t j = 0; j < t.n_grid.size(); ++j) {
      std::vector<std::string> f{format_double(t.gamma), format_double(t.q), std::to_string(t.n_grid[j]),
                                 std::to_string(r), format_double(t.at(t.d_nq, r, j)),
                                 format_double(t.at(t.max_d_kq, r, j)), format_double(t.at(t.w1, r, j))};
      if (birkhoff) f.push_back(format_double(t.at(t.max_birkhoff, r, j)));
      csv.row(std::move(f));
    }
  return csv;
}

CsvTable aggregate_csv(const ExperimentResult& r) {
  CsvTable csv({"n", "mean", "p_moment", "q10", "q25", "median", "q75", "q90"});
  for (const auto& row : r.rows)
    csv.row({std::to_string(row.n), format_double(row.mean), format_double(row.p_moment),
             format_double(row.q10), format_double(row.q25), format_double(row.median),
             format_double(row.q75), format_double(row.q90)});
  return csv;
}

CsvTable tail_csv(const DeviationResult& r) {
  CsvTable csv({"x", "exceedances", "tail", "fitted"});
  for (const auto& row : r.rows)
    csv.row({format_double(row.x), std::to_string(row.exceedances), format_double(row.tail),
             row.fitted ? "1" : "0"});
  return csv;
}

CsvTable tower_csv(const TowerPartition& t) {
  CsvTable csv({"k", "x_k", "y_k", "mass_k", "tail_k"});
  for (std::size_t k = 0; k <= t.K; ++k)
    csv.row({std::to_string(k), format_double(t.x[k]), format_double(t.y[k]),
             format_double(t.mass[k]), format_double(t.tail[k])});
  return csv;
}

CsvTable ulam_csv(const UlamModel& m) {
  CsvTable csv({"t", "F"});
  const auto& nodes = m.cdf.nodes();
  const auto& values = m.cdf.values();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    csv.row({format_double(nodes[i]), format_double(values[i])});
  return csv;
}

}  // namespace ergo
