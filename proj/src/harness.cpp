#include "svi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace svi {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SVI_LAB_THREADS")) {
    int v = 0;
    const std::string s = env;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (count <= 0) return;
  const long workers = std::min<long>(std::max(1, threads), count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<long> next{0};
  std::atomic<bool> stop{false};
  auto work = [&] {
    while (!stop.load()) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        stop.store(true);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------

GapEvaluator::GapEvaluator(const CournotGame& game, GapSettings settings)
    : map_(game), set_(game.feasible_set()), settings_(std::move(settings)) {
  const bool need_ref = std::find(settings_.metrics.begin(), settings_.metrics.end(),
                                  GapMetric::dist) != settings_.metrics.end();
  if (need_ref) x_star_ = reference_solution(*set_, map_, 1e-10);
}

GapReport GapEvaluator::weak(const Vector& x) const {
  return weak_gap(map_, *set_, x, settings_.restarts, settings_.tol, settings_.seed);
}

GapReport GapEvaluator::strong(const Vector& x) const { return strong_gap(map_, *set_, x); }

double GapEvaluator::evaluate(GapMetric metric, const Vector& x) const {
  switch (metric) {
    case GapMetric::weak_gap:
      return weak(x).value;
    case GapMetric::strong_gap:
      return strong(x).value;
    case GapMetric::dist:
      if (x_star_.size() == 0) throw std::logic_error("GapEvaluator: no reference solution");
      return dist_to_solution(x, x_star_);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Runs

RunResult run_experiment(const RunConfig& config, int threads) {
  const SolverConfig solver = config.solver_config();
  solver.validate();
  const auto set = config.game.feasible_set();
  double radius = 0.0;
  if (const auto* t = std::get_if<PowerLawTriple>(&config.schedule)) radius = t->eps0;
  const CournotOracle oracle(config.game, radius);
  const GapEvaluator evaluator(config.game, config.gap);

  RunResult result;
  const auto P = static_cast<std::size_t>(config.paths);
  result.records.resize(P);
  result.metrics.resize(P);
  parallel_for(config.paths, resolve_threads(threads), [&](long p) {
    PathRecord rec = run_path(solver, oracle, *set, config.seed + static_cast<std::uint64_t>(p), p);
    std::vector<MetricRow> rows;
    for (const Checkpoint& cp : rec.checkpoints) {
      for (GapTarget t : config.gap.targets) {
        const Vector* point = nullptr;
        if (t == GapTarget::x) point = &cp.x;
        if (t == GapTarget::avg) point = &cp.average;
        if (t == GapTarget::window && cp.window) point = &*cp.window;
        if (!point) continue;
        for (GapMetric m : config.gap.metrics) {
          rows.push_back({p, cp.k, std::string(to_string(m)) + "." + to_string(t),
                          evaluator.evaluate(m, *point)});
        }
      }
    }
    result.records[static_cast<std::size_t>(p)] = std::move(rec);
    result.metrics[static_cast<std::size_t>(p)] = std::move(rows);
  });
  result.aggregate = aggregate_metrics(result.metrics);
  return result;
}

std::vector<AggregateRow> aggregate_metrics(const std::vector<std::vector<MetricRow>>& paths) {
  std::vector<std::pair<long, std::string>> order;
  std::map<std::pair<long, std::string>, std::vector<double>> groups;
  for (const auto& rows : paths) {
    for (const auto& row : rows) {
      auto key = std::make_pair(row.k, row.metric);
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(row.value);
    }
  }
  std::vector<AggregateRow> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& v = groups.at(key);
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.push_back({key.first, key.second, mean, sd, static_cast<long>(v.size())});
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string paths_csv(const RunResult& result) {
  std::ostringstream os;
  os << kCsvHeader << "\npath_id,k,metric_name,value\n";
  for (const auto& rows : result.metrics) {
    for (const auto& r : rows) {
      os << r.path_id << ',' << r.k << ',' << r.metric << ',' << format_double(r.value) << '\n';
    }
  }
  return os.str();
}

std::string aggregate_csv(const RunResult& result) {
  std::ostringstream os;
  os << kCsvHeader << "\nk,metric_name,mean,std,paths\n";
  for (const auto& r : result.aggregate) {
    os << r.k << ',' << r.metric << ',' << format_double(r.mean) << ',' << format_double(r.std)
       << ',' << r.count << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string short_number(double v) {
  std::string s = format_double(v);
  if (v > 0 && s[0] != '+') s = "+" + s;
  return s;
}

void reduce_cells(TableResult& t) {
  const std::size_t R = t.values.size();
  t.mean.assign(R, {});
  t.std.assign(R, {});
  for (std::size_t i = 0; i < R; ++i) {
    for (const auto& v : t.values[i]) {
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= n;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      t.mean[i].push_back(mean);
      t.std[i].push_back(v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
    }
  }
}

TableResult averaging_table(const TableSpec& spec, int threads) {
  const auto set = spec.game.feasible_set();
  const CournotOracle oracle(spec.game, 0.0);
  const GapEvaluator evaluator(spec.game, spec.gap);
  const double M = spec.M ? *spec.M : set->diameter_bound();
  const double C = spec.C ? *spec.C : oracle.bound_C();

  std::vector<long> horizons = spec.horizons;
  const long n_max = *std::max_element(horizons.begin(), horizons.end());
  const std::size_t L = spec.lambdas.size(), H = horizons.size(), Rv = spec.r_values.size();

  TableResult t;
  t.which = TableKind::averaging_r;
  for (double lam : spec.lambdas) {
    t.row_keys.push_back(format_double(lam));
    if (lam == 0.0) {
      t.row_labels.push_back("full averaging");
    } else if (lam == 1.0) {
      t.row_labels.push_back("SA (last iterate)");
    } else {
      t.row_labels.push_back("window");
    }
  }
  for (long n : horizons) {
    for (double r : spec.r_values) {
      t.columns.push_back("N=" + std::to_string(n) + " r=" + short_number(r));
    }
  }
  t.values.assign(L, std::vector<std::vector<double>>(H * Rv,
                                                      std::vector<double>(spec.paths, 0.0)));

  const Vector start = spec.start ? *spec.start : Vector::Zero(spec.game.dimension());
  parallel_for(spec.paths, resolve_threads(threads), [&](long p) {
    IterateState state{0, set->project(start), Rng(spec.seed + static_cast<std::uint64_t>(p))};
    // bank[(h * L + l) * Rv + r]
    std::vector<AveragingState> bank(H * L * Rv);
    std::vector<long> ell(H * L);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t l = 0; l < L; ++l) {
        ell[h * L + l] = window_start_index(spec.lambdas[l], horizons[h]);
      }
    }
    for (long k = 0;; ++k) {
      const double gamma = window_stepsize(M, C, spec.indicator_r, k);
      for (std::size_t h = 0; h < H; ++h) {
        if (k > horizons[h]) continue;
        for (std::size_t l = 0; l < L; ++l) {
          if (k < ell[h * L + l]) continue;
          for (std::size_t r = 0; r < Rv; ++r) {
            bank[(h * L + l) * Rv + r].accumulate(gamma, state.x, spec.r_values[r]);
          }
        }
        if (k == horizons[h]) {
          for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t r = 0; r < Rv; ++r) {
              const Vector avg = bank[(h * L + l) * Rv + r].average();
              t.values[l][h * Rv + r][static_cast<std::size_t>(p)] = evaluator.weak(avg).value;
            }
          }
        }
      }
      if (k == n_max) break;
      rssa_step(state, oracle, *set, gamma, 0.0, 0.0);
    }
  });
  reduce_cells(t);
  return t;
}

TableResult settings_table(const TableSpec& spec, int threads) {
  const auto set = spec.game.feasible_set();
  const GapEvaluator evaluator(spec.game, spec.gap);
  const std::size_t S = spec.settings.size(), H = spec.horizons.size();

  TableResult t;
  t.which = TableKind::rssa_settings;
  for (int s : spec.settings) {
    t.row_keys.push_back(std::to_string(s));
    t.row_labels.push_back("S(" + std::to_string(s) + ")");
  }
  for (long n : spec.horizons) t.columns.push_back("N=" + std::to_string(n));
  t.values.assign(S, std::vector<std::vector<double>>(H, std::vector<double>(spec.paths, 0.0)));

  std::vector<std::unique_ptr<CournotOracle>> oracles;
  for (int s : spec.settings) {
    oracles.push_back(std::make_unique<CournotOracle>(spec.game, rssa_setting(s, 1).eps0));
  }
  const Vector start = spec.start ? *spec.start : Vector::Zero(spec.game.dimension());
  parallel_for(spec.paths, resolve_threads(threads), [&](long p) {
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t h = 0; h < H; ++h) {
        SolverConfig cfg;
        cfg.scheme = Scheme::RSSA;
        cfg.schedule = rssa_setting(spec.settings[i], spec.horizons[h]);
        cfg.horizon = spec.horizons[h];
        cfg.start = start;
        const PathRecord rec = run_path(cfg, *oracles[i], *set,
                                        spec.seed + static_cast<std::uint64_t>(p), p);
        t.values[i][h][static_cast<std::size_t>(p)] =
            evaluator.weak(rec.checkpoints.back().x).value;
      }
    }
  });
  reduce_cells(t);
  return t;
}

}  // namespace

TableResult run_table(const TableSpec& spec, int threads) {
  if (spec.horizons.empty()) throw std::invalid_argument("run_table: empty horizon grid");
  if (spec.which == TableKind::averaging_r) {
    if (spec.lambdas.empty() || spec.r_values.empty()) {
      throw std::invalid_argument("run_table: empty lambda or r grid");
    }
    return averaging_table(spec, threads);
  }
  if (spec.settings.empty()) throw std::invalid_argument("run_table: empty settings grid");
  return settings_table(spec, threads);
}

std::string table_csv(const TableResult& t, bool std_table) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  os << (t.which == TableKind::averaging_r ? "lambda" : "setting") << ",label";
  for (const auto& c : t.columns) os << ',' << c;
  os << '\n';
  const auto& cells = std_table ? t.std : t.mean;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << t.row_keys[i] << ',' << t.row_labels[i];
    for (double v : cells[i]) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

std::string table_paths_csv(const TableResult& t) {
  std::ostringstream os;
  os << kCsvHeader << "\npath_id,row,column,value\n";
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    for (std::size_t j = 0; j < t.values[i].size(); ++j) {
      for (std::size_t p = 0; p < t.values[i][j].size(); ++p) {
        os << p << ',' << t.row_keys[i] << ',' << t.columns[j] << ','
           << format_double(t.values[i][j][p]) << '\n';
      }
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Verdicts and regions

std::vector<VerdictRow> schedule_verdicts(const RunConfig& config) {
  std::vector<VerdictRow> rows;
  const auto* t = std::get_if<PowerLawTriple>(&config.schedule);
  auto add = [&](const char* name, const std::optional<ConditionVerdict>& v) {
    VerdictRow row;
    row.set = name;
    if (!t || !v) {
      row.applicable = false;
    } else {
      row.holds = v->holds;
      row.violated = v->violated;
      row.binding = v->binding;
    }
    rows.push_back(std::move(row));
  };
  if (!t) {
    add("as", std::nullopt);
    add("ms", std::nullopt);
    add("avg", std::nullopt);
    add("least_norm", std::nullopt);
    return rows;
  }
  const ScheduleVerdict as = validate_as(*t);
  const ScheduleVerdict ms = validate_ms(*t);
  const ScheduleVerdict avg = validate_averaging(*t, config.r);
  add("as", as.as_convergence);
  add("ms", ms.ms_convergence);
  add("avg", avg.averaging_abcr);
  add("least_norm", as.least_norm);
  return rows;
}

std::string verdicts_csv(const std::vector<VerdictRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << "\nset,applicable,holds,violated,binding\n";
  for (const auto& r : rows) {
    os << r.set << ',' << (r.applicable ? 1 : 0) << ',' << (r.holds ? 1 : 0) << ',';
    for (std::size_t i = 0; i < r.violated.size(); ++i) os << (i ? ";" : "") << r.violated[i].predicate;
    os << ',';
    for (std::size_t i = 0; i < r.binding.size(); ++i) os << (i ? ";" : "") << r.binding[i];
    os << '\n';
  }
  return os.str();
}

std::string verdicts_text(const std::vector<VerdictRow>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) {
    os << r.set << ": ";
    if (!r.applicable) {
      os << "not applicable (schedule is not a power law)\n";
      continue;
    }
    os << (r.holds ? "holds" : "fails");
    for (const auto& v : r.violated) {
      os << "  [" << v.predicate << ": " << format_double(v.lhs) << " vs " << format_double(v.rhs)
         << "]";
    }
    if (!r.binding.empty()) {
      os << "  binding:";
      for (const auto& b : r.binding) os << ' ' << b;
    }
    os << '\n';
  }
  return os.str();
}

std::string region_csv(const std::vector<RegionCell>& cells) {
  std::ostringstream os;
  os << kCsvHeader << "\na,b,c,as,ms\n";
  for (const auto& c : cells) {
    os << format_double(c.a) << ',' << format_double(c.b) << ',' << format_double(c.c) << ','
       << (c.as_holds ? 1 : 0) << ',' << (c.ms_holds ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string region_csv(const std::vector<RegionCell>& cells, RegionKind which) {
  std::ostringstream os;
  os << kCsvHeader << "\na,b,c,holds\n";
  for (const auto& c : cells) {
    os << format_double(c.a) << ',' << format_double(c.b) << ',' << format_double(c.c) << ','
       << (region_holds(c, which) ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace svi
