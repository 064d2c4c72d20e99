#pragma once

// CSV / JSON serialization, strict config parsing, run manifests and plot
// scripts.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringmodel/continuation.hpp"
#include "ringmodel/equilibria.hpp"
#include "ringmodel/integrate.hpp"
#include "ringmodel/orbit_space.hpp"
#include "ringmodel/ring1.hpp"
#include "ringmodel/scenarios.hpp"

namespace ringmodel {

using json = nlohmann::ordered_json;

/// Raised for malformed or unknown configuration (maps to exit status 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- CSV ----

/// t,v0,re_z1,im_z1,...,peak_angle
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// step,<params>,<state names>,n_unstable,is_fold
void write_branch_csv(std::ostream& os, const Branch& branch);
json branch_sidecar(const Branch& branch);
/// theta,j1_min,eps0 (rows without a boundary inside the grid are skipped)
void write_boundary_csv(std::ostream& os, const std::vector<ThresholdBoundary>& boundaries);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV; throws ConfigError on a header mismatch (when
/// `expected` is non-empty), ragged rows or non-finite values.
CsvTable read_csv_strict(std::istream& is, const std::vector<std::string>& expected = {});

// ---- JSON ----

json to_json(const ModelSpec& spec);
json to_json(const DriveSpec& drive);
json to_json(const ContinuationConfig& cfg);
json to_json(const Scenario& scn);
json to_json(const OrbitInvariants& inv);
json to_json(const OutcomeReport& rep);

/// Strict readers: start from `base`, override the keys present, reject
/// unknown keys and wrong types with ConfigError.
ModelSpec model_from_json(const json& j, ModelSpec base = {});
DriveSpec drive_from_json(const json& j, DriveSpec base = {});
ContinuationConfig continuation_from_json(const json& j, ContinuationConfig base = {});
Scenario scenario_from_json(const json& j, Scenario base);
OrbitInvariants invariants_from_json(const json& j);

struct RunConfig {
  ModelSpec model;
  DriveSpec stimulus;
  ContinuationConfig continuation;
  Scenario scenario = Scenario::rotate_default();
  std::uint64_t seed = 1;

  static RunConfig defaults();
  static RunConfig from_json(const json& j);
  json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

// ---- manifests and plot scripts ----

struct Manifest {
  std::string command;
  json options = json::object();
  json config = json::object();
  std::vector<std::string> outputs;
  std::string status = "ok";
  json diagnostics = json::object();

  json to_json() const;
  static Manifest from_json(const json& j);
};

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// Writes a standalone matplotlib script that plots `csv` (relative to the
/// script's directory). `kind` selects the layout.
void write_plot_script(const std::filesystem::path& path, const std::string& kind,
                       const std::vector<std::string>& csv_files, const std::string& title);

}  // namespace ringmodel
