// svi_lab: command-line driver for the stochastic VI experiments.
//
// Exit codes: 0 success, 1 a required condition set fails, 2 bad input
// (command line, config or point file), 3 runtime failure.

#include "svi/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using svi::Vector;

Vector read_point_file(const std::string& path, svi::Index n) {
  std::ifstream in(path);
  if (!in) throw svi::ConfigError(path, 0, 0, "cannot open point file");
  std::vector<double> xs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw svi::ConfigError(path, line_no, 1, "malformed number '" + tok + "'");
      }
      xs.push_back(v);
    }
  }
  if (static_cast<svi::Index>(xs.size()) != n) {
    throw svi::ConfigError(path, line_no, 1,
                           "expected " + std::to_string(n) + " values, got " +
                               std::to_string(xs.size()));
  }
  return Eigen::Map<const Vector>(xs.data(), n);
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svi_lab: stochastic approximation experiments for monotone SVIs"};
  app.require_subcommand(1);

  std::string config_path, point_path, out_dir, format = "text";
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  int threads = 0;
  int resolution = 20;
  std::vector<std::string> require;

  auto* validate = app.add_subcommand("validate", "check schedule exponent conditions");
  validate->add_option("--config", config_path, "run config file")->required();
  validate->add_option("--require", require, "condition sets that must hold")
      ->check(CLI::IsMember({"as", "ms", "avg"}));
  validate->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  validate->add_option("--out", out_dir, "also write verdicts.csv here");

  auto* run = app.add_subcommand("run", "run sample paths and emit gap CSVs");
  auto* table = app.add_subcommand("table", "replicate a gap table");
  for (auto* sub : {run, table}) {
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--seed", seed, "base seed (path p uses seed + p)");
    sub->add_option("--paths", paths, "number of sample paths")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (default SVI_LAB_THREADS)")
        ->check(CLI::NonNegativeNumber);
  }

  auto* region = app.add_subcommand("region", "emit the exponent feasibility grids");
  region->add_option("--resolution", resolution, "points per axis")->check(CLI::Range(2, 400));
  region->add_option("--out", out_dir, "output directory")->required();

  auto* gap = app.add_subcommand("gap", "evaluate gap functions at a point");
  gap->add_option("--config", config_path, "config with [game] and optional [gap]")->required();
  gap->add_option("--point", point_path, "file with the point coordinates")->required();
  gap->add_option("--out", out_dir, "write gap.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      const svi::RunConfig cfg = svi::load_run_config(svi::parse_config_file(config_path));
      const auto rows = svi::schedule_verdicts(cfg);
      std::cout << (format == "csv" ? svi::verdicts_csv(rows) : svi::verdicts_text(rows));
      if (!out_dir.empty()) svi::write_text_file(join(out_dir, "verdicts.csv"), svi::verdicts_csv(rows));
      for (const auto& want : require) {
        for (const auto& r : rows) {
          if (r.set == want && !(r.applicable && r.holds)) return 1;
        }
      }
      return 0;
    }

    if (run->parsed()) {
      svi::RunConfig cfg = svi::load_run_config(svi::parse_config_file(config_path));
      if (seed) cfg.seed = *seed;
      if (paths) cfg.paths = *paths;
      if (!out_dir.empty()) cfg.out = out_dir;
      // Thread count is not part of the echoed config; outputs do not depend on it.
      const svi::RunResult result = svi::run_experiment(cfg, threads > 0 ? threads : cfg.threads);
      svi::write_text_file(join(cfg.out, "paths.csv"), svi::paths_csv(result));
      svi::write_text_file(join(cfg.out, "aggregate.csv"), svi::aggregate_csv(result));
      svi::write_text_file(join(cfg.out, "effective_config.toml"), svi::effective_config_text(cfg));
      std::cout << "wrote " << cfg.paths << " paths to " << cfg.out << "\n";
      return 0;
    }

    if (table->parsed()) {
      svi::TableSpec spec = svi::load_table_spec(svi::parse_config_file(config_path));
      if (seed) spec.seed = *seed;
      if (paths) spec.paths = *paths;
      if (!out_dir.empty()) spec.out = out_dir;
      const svi::TableResult t = svi::run_table(spec, threads > 0 ? threads : spec.threads);
      svi::write_text_file(join(spec.out, "table_mean.csv"), svi::table_csv(t, false));
      svi::write_text_file(join(spec.out, "table_std.csv"), svi::table_csv(t, true));
      svi::write_text_file(join(spec.out, "table_paths.csv"), svi::table_paths_csv(t));
      svi::write_text_file(join(spec.out, "effective_config.toml"),
                           svi::effective_config_text(spec));
      std::cout << svi::table_csv(t, false);
      return 0;
    }

    if (region->parsed()) {
      const auto cells = svi::feasible_region_grid(resolution);
      svi::write_text_file(join(out_dir, "region.csv"), svi::region_csv(cells));
      svi::write_text_file(join(out_dir, "region_as.csv"), svi::region_csv(cells, svi::RegionKind::as));
      svi::write_text_file(join(out_dir, "region_ms.csv"), svi::region_csv(cells, svi::RegionKind::ms));
      std::cout << "wrote " << cells.size() << " cells to " << out_dir << "\n";
      return 0;
    }

    if (gap->parsed()) {
      const svi::GapJob job = svi::load_gap_job(svi::parse_config_file(config_path));
      const Vector x = read_point_file(point_path, job.game.dimension());
      const svi::GapEvaluator eval(job.game, job.gap);
      if (!eval.set().contains(x, 1e-9)) {
        std::cerr << "note: point is outside X; gaps are evaluated as given\n";
      }
      const svi::GapReport strong = eval.strong(x);
      const svi::GapReport weak = eval.weak(x);
      std::ostringstream os;
      os << svi::kCsvHeader << "\nmetric,value,restarts,tolerance,converged,fw_gap\n";
      os << "strong_gap," << svi::format_double(strong.value) << ",0,0,1,0\n";
      os << "weak_gap," << svi::format_double(weak.value) << ',' << weak.restarts << ','
         << svi::format_double(weak.tolerance) << ',' << (weak.converged ? 1 : 0) << ','
         << svi::format_double(weak.fw_gap) << '\n';
      if (out_dir.empty()) {
        std::cout << os.str();
      } else {
        svi::write_text_file(join(out_dir, "gap.csv"), os.str());
      }
      return 0;
    }
  } catch (const svi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
