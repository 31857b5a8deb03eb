#pragma once

// Seeded parallel sample-path experiments, table replication, schedule
// verdict reports and CSV emission.

#include "svi/config.hpp"
#include "svi/metrics.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace svi {

inline constexpr const char* kCsvHeader = "# svi-lab v1";

/// requested > 0 wins, then SVI_LAB_THREADS, then hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(0..count-1) on up to `threads` workers. Exceptions are rethrown
/// for the lowest failing index after all workers stop.
void parallel_for(long count, int threads, const std::function<void(long)>& fn);

/// Gap and distance metrics for one game, shared read-only across workers.
class GapEvaluator {
 public:
  GapEvaluator(const CournotGame& game, GapSettings settings);

  double evaluate(GapMetric metric, const Vector& x) const;
  GapReport weak(const Vector& x) const;
  GapReport strong(const Vector& x) const;

  const CournotMap& map() const { return map_; }
  const ProductSet& set() const { return *set_; }
  const GapSettings& settings() const { return settings_; }
  const Vector& reference() const { return x_star_; }

 private:
  CournotMap map_;
  std::shared_ptr<ProductSet> set_;
  GapSettings settings_;
  Vector x_star_;
};

struct MetricRow {
  long path_id = 0;
  long k = 0;
  std::string metric;
  double value = 0.0;
};

struct AggregateRow {
  long k = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // across paths, ddof 1; 0 for a single path
  long count = 0;
};

struct RunResult {
  std::vector<PathRecord> records;              // by path index
  std::vector<std::vector<MetricRow>> metrics;  // by path index
  std::vector<AggregateRow> aggregate;
};

/// Path p uses seed = config.seed + p and is independent of thread count.
RunResult run_experiment(const RunConfig& config, int threads = 0);

/// Ordered reduce over paths: rows grouped by (k, metric) in first-seen order.
std::vector<AggregateRow> aggregate_metrics(const std::vector<std::vector<MetricRow>>& paths);

std::string paths_csv(const RunResult& result);
std::string aggregate_csv(const RunResult& result);

struct TableResult {
  TableKind which = TableKind::averaging_r;
  std::vector<std::string> row_labels;
  std::vector<std::string> row_keys;  // lambda or setting
  std::vector<std::string> columns;   // e.g. "N=2000 r=-1"
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std;
  /// values[row][column][path]
  std::vector<std::vector<std::vector<double>>> values;
};

TableResult run_table(const TableSpec& spec, int threads = 0);

std::string table_csv(const TableResult& table, bool std_table);
std::string table_paths_csv(const TableResult& table);

/// One row per requested condition set: set, holds, violated, binding.
struct VerdictRow {
  std::string set;
  bool applicable = true;
  bool holds = false;
  std::vector<Violation> violated;
  std::vector<std::string> binding;
};

std::vector<VerdictRow> schedule_verdicts(const RunConfig& config);
std::string verdicts_csv(const std::vector<VerdictRow>& rows);
std::string verdicts_text(const std::vector<VerdictRow>& rows);

std::string region_csv(const std::vector<RegionCell>& cells);
std::string region_csv(const std::vector<RegionCell>& cells, RegionKind which);

/// Shortest round-trip decimal used in every CSV.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace svi
