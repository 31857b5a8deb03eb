#pragma once

// Experiment configuration files: a TOML-compatible subset ([section],
// key = value, numbers, strings, booleans, arrays, # comments), and the
// typed run/table configurations built from it.

#include "svi/oracles.hpp"
#include "svi/schedules.hpp"
#include "svi/solvers.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace svi {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

struct ConfigValue {
  std::variant<double, std::string, bool, ConfigArray> data;
  int line = 0;
  int column = 0;
  bool integral = false;  // number written without fraction or exponent
  std::string text;       // source token for numbers
};

struct ConfigEntry {
  std::string key;
  ConfigValue value;
  int line = 0;
  int column = 0;
};

struct ConfigSection {
  std::string name;  // "" for keys before the first header
  int line = 0;
  std::vector<ConfigEntry> entries;
};

struct ConfigDocument {
  std::string source;
  std::vector<ConfigSection> sections;

  const ConfigSection* find(const std::string& name) const;
};

ConfigDocument parse_config_text(const std::string& text, const std::string& source = "<input>");
ConfigDocument parse_config_file(const std::string& path);

// ---------------------------------------------------------------------------

enum class GapMetric { weak_gap, strong_gap, dist };
enum class GapTarget { x, avg, window };

const char* to_string(GapMetric m);
const char* to_string(GapTarget t);

struct GapSettings {
  std::vector<GapMetric> metrics{GapMetric::weak_gap};
  std::vector<GapTarget> targets{GapTarget::x};
  int restarts = 16;
  double tol = 1e-8;
  std::uint64_t seed = 0x9a9;

  bool operator==(const GapSettings&) const = default;
};

struct RunConfig {
  CournotGame game = CournotGame::standard_5x4();
  Scheme scheme = Scheme::RSSA;
  StepRule schedule = PowerLawTriple{};
  double r = 1.0;
  std::optional<double> window_lambda;
  long horizon = 0;
  int paths = 50;
  std::uint64_t seed = 1;
  std::vector<long> ticks;  // resolved; never empty after loading
  std::optional<Vector> start;  // origin when unset
  GapSettings gap;
  int threads = 0;  // 0: SVI_LAB_THREADS or hardware concurrency
  std::string out = "out";

  /// Solver configuration for the paths (start projected later).
  SolverConfig solver_config() const;
  PowerLawTriple triple() const;  // throws when the rule is not a power law

  bool operator==(const RunConfig& other) const;
};

enum class TableKind { rssa_settings, averaging_r };

struct TableSpec {
  TableKind which = TableKind::averaging_r;
  CournotGame game = CournotGame::standard_5x4();
  std::vector<double> lambdas;
  std::vector<long> horizons;
  std::vector<double> r_values;
  std::vector<int> settings;  // rssa_settings rows
  int paths = 50;
  std::uint64_t seed = 1;
  /// Window-rule constants; defaults come from the set and oracle bounds.
  std::optional<double> M;
  std::optional<double> C;
  double indicator_r = 1.0;
  std::optional<Vector> start;
  GapSettings gap;
  int threads = 0;
  std::string out = "out";

  bool operator==(const TableSpec& other) const;
};

/// Build from a parsed document; unknown sections or keys are errors.
RunConfig load_run_config(const ConfigDocument& doc);
TableSpec load_table_spec(const ConfigDocument& doc);

/// Game and gap settings only, for evaluating a single point. Other known
/// sections are accepted and ignored so a run config can be reused.
struct GapJob {
  CournotGame game;
  GapSettings gap;
};
GapJob load_gap_job(const ConfigDocument& doc);

/// Fully expanded configuration text (presets resolved) that parses back to
/// an equal RunConfig / TableSpec.
std::string effective_config_text(const RunConfig& config);
std::string effective_config_text(const TableSpec& spec);

/// Ticks every N/40 iterations (at least 1), always including 0 and N.
std::vector<long> default_ticks(long horizon);

CournotGame game_preset(const std::string& name);

}  // namespace svi
