#include "svi/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace svi {

ConfigError::ConfigError(const std::string& source, int line, int column,
                         const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

const ConfigSection* ConfigDocument::find(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_bare_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

class Parser {
 public:
  Parser(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  ConfigDocument run() {
    ConfigDocument doc;
    doc.source = source_;
    doc.sections.push_back({"", 1, {}});
    std::set<std::string> seen_sections{""};
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        const int line = line_, col = col_;
        advance();
        skip_spaces();
        std::string name;
        while (!at_end() && (is_bare_char(peek()) || peek() == '.')) name += advance();
        skip_spaces();
        if (name.empty()) fail(line, col + 1, "expected a section name after '['");
        if (at_end() || peek() != ']') fail("expected ']' to close the section header");
        advance();
        end_of_statement();
        if (!seen_sections.insert(name).second) {
          fail(line, col, "duplicate section [" + name + "]");
        }
        doc.sections.push_back({name, line, {}});
        continue;
      }
      ConfigEntry entry;
      entry.line = line_;
      entry.column = col_;
      while (!at_end() && is_bare_char(peek())) entry.key += advance();
      if (entry.key.empty()) fail(std::string("unexpected character '") + peek() + "'");
      skip_spaces();
      if (at_end() || peek() != '=') fail("expected '=' after key '" + entry.key + "'");
      advance();
      skip_spaces();
      entry.value = value();
      end_of_statement();
      auto& section = doc.sections.back();
      for (const auto& e : section.entries) {
        if (e.key == entry.key) fail(entry.line, entry.column, "duplicate key '" + entry.key + "'");
      }
      section.entries.push_back(std::move(entry));
    }
    return doc;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char advance() {
    const char ch = text_[pos_++];
    if (ch == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return ch;
  }

  [[noreturn]] void fail(const std::string& message) const { fail(line_, col_, message); }
  [[noreturn]] void fail(int line, int col, const std::string& message) const {
    throw ConfigError(source_, line, col, message);
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_comment() {
    if (!at_end() && peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }
  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (at_end() || peek() != '\n') return;
      advance();
    }
  }
  // Inside arrays newlines and comments are whitespace.
  void skip_array_ws() { skip_blank_lines(); }

  void end_of_statement() {
    skip_spaces();
    skip_comment();
    if (at_end()) return;
    if (peek() != '\n') fail(std::string("unexpected trailing '") + peek() + "'");
    advance();
  }

  ConfigValue value() {
    ConfigValue v;
    v.line = line_;
    v.column = col_;
    if (at_end() || peek() == '\n') fail("expected a value");
    const char ch = peek();
    if (ch == '"') {
      v.data = string_literal();
    } else if (ch == '[') {
      advance();
      ConfigArray items;
      skip_array_ws();
      while (!at_end() && peek() != ']') {
        items.push_back(value());
        skip_array_ws();
        if (at_end()) break;
        if (peek() == ',') {
          advance();
          skip_array_ws();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      if (at_end()) fail(v.line, v.column, "unterminated array");
      advance();
      v.data = std::move(items);
    } else if (std::isalpha(static_cast<unsigned char>(ch))) {
      std::string word;
      while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) word += advance();
      if (word == "true") {
        v.data = true;
      } else if (word == "false") {
        v.data = false;
      } else {
        fail(v.line, v.column, "unknown bare value '" + word + "' (strings need quotes)");
      }
    } else {
      std::string token;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                           peek() == '+' || peek() == '-' || peek() == '_')) {
        token += advance();
      }
      std::string digits;
      for (char c : token) {
        if (c != '_') digits += c;
      }
      const char* first = digits.data();
      if (!digits.empty() && digits[0] == '+') ++first;
      double d = 0.0;
      auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), d);
      if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
        fail(v.line, v.column, "malformed number '" + token + "'");
      }
      v.data = d;
      v.text = digits;
      v.integral = digits.find_first_of(".eE") == std::string::npos;
    }
    return v;
  }

  std::string string_literal() {
    const int line = line_, col = col_;
    advance();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail(line, col, "unterminated string");
      const char ch = advance();
      if (ch == '"') return out;
      if (ch == '\\') {
        if (at_end()) fail(line, col, "unterminated string");
        const char esc = advance();
        switch (esc) {
          case '"':
            out += '"';
            break;
          case '\\':
            out += '\\';
            break;
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          default:
            fail(std::string("unknown escape '\\") + esc + "'");
        }
      } else {
        out += ch;
      }
    }
  }

  const std::string& text_;
  const std::string& source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

ConfigDocument parse_config_text(const std::string& text, const std::string& source) {
  return Parser(text, source).run();
}

ConfigDocument parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Typed access

namespace {

class SectionReader {
 public:
  SectionReader(const ConfigDocument& doc, const std::string& name)
      : doc_(doc), section_(doc.find(name)), name_(name) {}

  bool present() const { return section_ != nullptr; }
  int line() const { return section_ ? section_->line : 0; }

  const ConfigValue* take(const std::string& key) {
    if (!section_) return nullptr;
    for (const auto& e : section_->entries) {
      if (e.key == key) {
        used_.insert(key);
        return &e.value;
      }
    }
    return nullptr;
  }

  void finish() const {
    if (!section_) return;
    for (const auto& e : section_->entries) {
      if (!used_.count(e.key)) {
        throw ConfigError(doc_.source, e.line, e.column,
                          "unknown key '" + e.key + "' in section [" + name_ + "]");
      }
    }
  }

  [[noreturn]] void fail(const ConfigValue& v, const std::string& message) const {
    throw ConfigError(doc_.source, v.line, v.column, message);
  }
  [[noreturn]] void fail_section(const std::string& message) const {
    throw ConfigError(doc_.source, line(), 1, message);
  }

  double number(const ConfigValue& v, const std::string& key) const {
    if (const auto* d = std::get_if<double>(&v.data)) return *d;
    fail(v, "key '" + key + "' expects a number");
  }
  long integer(const ConfigValue& v, const std::string& key) const {
    const double d = number(v, key);
    if (!v.integral || std::abs(d) > 9.0e15) fail(v, "key '" + key + "' expects an integer");
    return static_cast<long>(d);
  }
  std::uint64_t unsigned64(const ConfigValue& v, const std::string& key) const {
    number(v, key);
    std::uint64_t out = 0;
    const std::string& t = v.text;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (!v.integral || ec != std::errc() || ptr != t.data() + t.size()) {
      fail(v, "key '" + key + "' expects a nonnegative integer");
    }
    return out;
  }
  std::string string(const ConfigValue& v, const std::string& key) const {
    if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
    fail(v, "key '" + key + "' expects a string");
  }
  bool boolean(const ConfigValue& v, const std::string& key) const {
    if (const auto* b = std::get_if<bool>(&v.data)) return *b;
    fail(v, "key '" + key + "' expects true or false");
  }
  const ConfigArray& array(const ConfigValue& v, const std::string& key) const {
    if (const auto* a = std::get_if<ConfigArray>(&v.data)) return *a;
    fail(v, "key '" + key + "' expects an array");
  }

  std::vector<double> numbers(const ConfigValue& v, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : array(v, key)) out.push_back(number(item, key));
    return out;
  }
  std::vector<long> integers(const ConfigValue& v, const std::string& key) const {
    std::vector<long> out;
    for (const auto& item : array(v, key)) out.push_back(integer(item, key));
    return out;
  }
  std::vector<std::string> strings(const ConfigValue& v, const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& item : array(v, key)) out.push_back(string(item, key));
    return out;
  }

  // Scalar broadcast or an array of exactly `length` numbers.
  Vector vector(const ConfigValue& v, const std::string& key, Index length) const {
    if (std::holds_alternative<double>(v.data)) {
      return Vector::Constant(length, number(v, key));
    }
    const std::vector<double> xs = numbers(v, key);
    if (static_cast<Index>(xs.size()) != length) {
      fail(v, "key '" + key + "' expects " + std::to_string(length) + " values, got " +
                  std::to_string(xs.size()));
    }
    return Eigen::Map<const Vector>(xs.data(), length);
  }

  std::optional<double> opt_number(const std::string& key) {
    if (const auto* v = take(key)) return number(*v, key);
    return std::nullopt;
  }
  std::optional<long> opt_integer(const std::string& key) {
    if (const auto* v = take(key)) return integer(*v, key);
    return std::nullopt;
  }

 private:
  const ConfigDocument& doc_;
  const ConfigSection* section_;
  std::string name_;
  std::set<std::string> used_;
};

void check_sections(const ConfigDocument& doc, const std::set<std::string>& allowed) {
  for (const auto& s : doc.sections) {
    if (s.name.empty()) {
      if (!s.entries.empty()) {
        throw ConfigError(doc.source, s.entries.front().line, s.entries.front().column,
                          "key '" + s.entries.front().key + "' outside of any section");
      }
      continue;
    }
    if (!allowed.count(s.name)) {
      throw ConfigError(doc.source, s.line, 1, "unknown section [" + s.name + "]");
    }
  }
}

CournotGame read_game(const ConfigDocument& doc) {
  SectionReader sec(doc, "game");
  CournotGame game;
  std::string preset = "paper5x4";
  if (const auto* v = sec.take("preset")) preset = sec.string(*v, "preset");
  try {
    game = game_preset(preset);
  } catch (const std::invalid_argument& e) {
    sec.fail(*sec.take("preset"), e.what());
  }
  if (auto v = sec.opt_integer("firms")) game.firms = static_cast<int>(*v);
  if (auto v = sec.opt_integer("nodes")) game.nodes = static_cast<int>(*v);
  if (auto v = sec.opt_number("sigma")) game.sigma = *v;
  if (game.firms < 1 || game.nodes < 1) sec.fail_section("[game]: firms and nodes must be >= 1");
  const Index J = game.nodes;
  auto vec = [&](const char* key, Vector& field) {
    if (const auto* v = sec.take(key)) {
      field = sec.vector(*v, key, J);
    } else if (field.size() != J) {
      sec.fail_section(std::string("[game]: key '") + key + "' required when nodes changes");
    }
  };
  vec("a_lb", game.a_lb);
  vec("a_ub", game.a_ub);
  vec("b", game.b);
  vec("c", game.c);
  vec("d", game.d);
  vec("cap", game.cap);
  sec.finish();
  try {
    game.validate();
  } catch (const std::invalid_argument& e) {
    sec.fail_section(std::string("[game]: ") + e.what());
  }
  return game;
}

GapSettings read_gap(const ConfigDocument& doc) {
  SectionReader sec(doc, "gap");
  GapSettings g;
  if (const auto* v = sec.take("metrics")) {
    g.metrics.clear();
    for (const auto& item : sec.array(*v, "metrics")) {
      const std::string s = sec.string(item, "metrics");
      if (s == "weak_gap") {
        g.metrics.push_back(GapMetric::weak_gap);
      } else if (s == "strong_gap") {
        g.metrics.push_back(GapMetric::strong_gap);
      } else if (s == "dist") {
        g.metrics.push_back(GapMetric::dist);
      } else {
        sec.fail(item, "unknown metric '" + s + "' (weak_gap, strong_gap, dist)");
      }
    }
    if (g.metrics.empty()) sec.fail(*v, "metrics must not be empty");
  }
  if (const auto* v = sec.take("targets")) {
    g.targets.clear();
    for (const auto& item : sec.array(*v, "targets")) {
      const std::string s = sec.string(item, "targets");
      if (s == "x") {
        g.targets.push_back(GapTarget::x);
      } else if (s == "avg") {
        g.targets.push_back(GapTarget::avg);
      } else if (s == "window") {
        g.targets.push_back(GapTarget::window);
      } else {
        sec.fail(item, "unknown target '" + s + "' (x, avg, window)");
      }
    }
    if (g.targets.empty()) sec.fail(*v, "targets must not be empty");
  }
  if (const auto* v = sec.take("restarts")) {
    const long n = sec.integer(*v, "restarts");
    if (n < 0) sec.fail(*v, "restarts must be >= 0");
    g.restarts = static_cast<int>(n);
  }
  if (const auto* v = sec.take("tol")) {
    g.tol = sec.number(*v, "tol");
    if (!(g.tol > 0.0)) sec.fail(*v, "tol must be > 0");
  }
  if (const auto* v = sec.take("seed")) g.seed = sec.unsigned64(*v, "seed");
  sec.finish();
  return g;
}

std::optional<Vector> read_start(SectionReader& sec, Index n) {
  const auto* v = sec.take("start");
  if (!v) return std::nullopt;
  if (std::holds_alternative<std::string>(v->data)) {
    if (sec.string(*v, "start") != "origin") sec.fail(*v, "start must be \"origin\" or an array");
    return std::nullopt;
  }
  return sec.vector(*v, "start", n);
}

int read_threads(SectionReader& sec) {
  if (const auto* v = sec.take("threads")) {
    const long t = sec.integer(*v, "threads");
    if (t < 0) sec.fail(*v, "threads must be >= 0");
    return static_cast<int>(t);
  }
  return 0;
}

int read_paths(SectionReader& sec) {
  if (const auto* v = sec.take("paths")) {
    const long p = sec.integer(*v, "paths");
    if (p < 1) sec.fail(*v, "paths must be >= 1");
    return static_cast<int>(p);
  }
  return 50;
}

bool same_vector(const std::optional<Vector>& a, const std::optional<Vector>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() && *a == *b;
}

bool same_game(const CournotGame& a, const CournotGame& b) {
  auto eq = [](const Vector& x, const Vector& y) { return x.size() == y.size() && x == y; };
  return a.firms == b.firms && a.nodes == b.nodes && a.sigma == b.sigma && eq(a.a_lb, b.a_lb) &&
         eq(a.a_ub, b.a_ub) && eq(a.b, b.b) && eq(a.c, b.c) && eq(a.d, b.d) && eq(a.cap, b.cap);
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(GapMetric m) {
  switch (m) {
    case GapMetric::weak_gap:
      return "weak_gap";
    case GapMetric::strong_gap:
      return "strong_gap";
    case GapMetric::dist:
      return "dist";
  }
  return "?";
}

const char* to_string(GapTarget t) {
  switch (t) {
    case GapTarget::x:
      return "x";
    case GapTarget::avg:
      return "avg";
    case GapTarget::window:
      return "window";
  }
  return "?";
}

CournotGame game_preset(const std::string& name) {
  if (name == "paper5x4") return CournotGame::standard_5x4();
  throw std::invalid_argument("unknown game preset '" + name + "' (expected paper5x4)");
}

std::vector<long> default_ticks(long horizon) {
  std::vector<long> ticks;
  const long step = std::max<long>(1, horizon / 40);
  for (long k = 0; k <= horizon; k += step) ticks.push_back(k);
  if (ticks.back() != horizon) ticks.push_back(horizon);
  return ticks;
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig sc;
  sc.scheme = scheme;
  sc.schedule = schedule;
  sc.r = r;
  sc.window_lambda = window_lambda;
  sc.horizon = horizon;
  sc.ticks = ticks;
  sc.start = start ? *start : Vector::Zero(game.dimension());
  return sc;
}

PowerLawTriple RunConfig::triple() const {
  if (const auto* t = std::get_if<PowerLawTriple>(&schedule)) return *t;
  throw std::invalid_argument("run config: schedule is not a power-law triple");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return same_game(game, o.game) && scheme == o.scheme && schedule == o.schedule && r == o.r &&
         window_lambda == o.window_lambda && horizon == o.horizon && paths == o.paths &&
         seed == o.seed && ticks == o.ticks && same_vector(start, o.start) && gap == o.gap &&
         threads == o.threads && out == o.out;
}

bool TableSpec::operator==(const TableSpec& o) const {
  return which == o.which && same_game(game, o.game) && lambdas == o.lambdas &&
         horizons == o.horizons && r_values == o.r_values && settings == o.settings &&
         paths == o.paths && seed == o.seed && M == o.M && C == o.C &&
         indicator_r == o.indicator_r && same_vector(start, o.start) && gap == o.gap &&
         threads == o.threads && out == o.out;
}

RunConfig load_run_config(const ConfigDocument& doc) {
  check_sections(doc, {"game", "schedule", "run", "gap"});
  RunConfig cfg;
  cfg.game = read_game(doc);
  cfg.gap = read_gap(doc);

  SectionReader run(doc, "run");
  if (!run.present()) throw ConfigError(doc.source, 1, 1, "missing section [run]");
  if (const auto* v = run.take("horizon")) {
    cfg.horizon = run.integer(*v, "horizon");
    if (cfg.horizon < 0) run.fail(*v, "horizon must be >= 0");
  } else {
    run.fail_section("[run]: missing key 'horizon'");
  }
  cfg.paths = read_paths(run);
  if (const auto* v = run.take("seed")) cfg.seed = run.unsigned64(*v, "seed");
  const auto* ticks = run.take("ticks");
  const auto* every = run.take("tick_every");
  if (ticks && every) run.fail(*every, "give either 'ticks' or 'tick_every', not both");
  if (ticks) {
    cfg.ticks = run.integers(*ticks, "ticks");
    if (cfg.ticks.empty()) run.fail(*ticks, "ticks must not be empty");
  } else if (every) {
    const long step = run.integer(*every, "tick_every");
    if (step < 1) run.fail(*every, "tick_every must be >= 1");
    for (long k = 0; k <= cfg.horizon; k += step) cfg.ticks.push_back(k);
    if (cfg.ticks.back() != cfg.horizon) cfg.ticks.push_back(cfg.horizon);
  } else {
    cfg.ticks = default_ticks(cfg.horizon);
  }
  cfg.start = read_start(run, cfg.game.dimension());
  cfg.threads = read_threads(run);
  if (const auto* v = run.take("out")) cfg.out = run.string(*v, "out");
  run.finish();

  SectionReader sch(doc, "schedule");
  if (!sch.present()) throw ConfigError(doc.source, 1, 1, "missing section [schedule]");
  if (const auto* v = sch.take("scheme")) {
    try {
      cfg.scheme = parse_scheme(sch.string(*v, "scheme"));
    } catch (const std::invalid_argument& e) {
      sch.fail(*v, e.what());
    }
  }
  std::string rule = "power";
  if (const auto* v = sch.take("rule")) rule = sch.string(*v, "rule");
  if (rule == "power") {
    PowerLawTriple t;
    if (const auto* v = sch.take("preset")) {
      const std::string p = sch.string(*v, "preset");
      int index = 0;
      if (p.size() >= 2 && p[0] == 'S') {
        auto [ptr, ec] = std::from_chars(p.data() + 1, p.data() + p.size(), index);
        if (ec != std::errc() || ptr != p.data() + p.size()) index = 0;
      }
      if (index < 1 || index > 11) sch.fail(*v, "unknown schedule preset '" + p + "' (S1..S11)");
      t = rssa_setting(index, cfg.horizon);
    }
    if (auto x = sch.opt_number("gamma0")) t.gamma0 = *x;
    if (auto x = sch.opt_number("a")) t.a = *x;
    if (auto x = sch.opt_number("eta0")) t.eta0 = *x;
    if (auto x = sch.opt_number("b")) t.b = *x;
    if (auto x = sch.opt_number("eps0")) t.eps0 = *x;
    if (auto x = sch.opt_number("c")) t.c = *x;
    if (auto x = sch.opt_number("offset")) t.offset = *x;
    cfg.schedule = t;
  } else if (rule == "window") {
    WindowStepRule w;
    auto set = cfg.game.feasible_set();
    w.M = set->diameter_bound();
    w.C = bound_C_for_cournot(cfg.game, 0.0).C;
    if (auto x = sch.opt_number("M")) w.M = *x;
    if (auto x = sch.opt_number("C")) w.C = *x;
    if (auto x = sch.opt_number("indicator_r")) w.indicator_r = *x;
    cfg.schedule = w;
  } else {
    sch.fail(*sch.take("rule"), "unknown rule '" + rule + "' (power, window)");
  }
  if (auto x = sch.opt_number("r")) cfg.r = *x;
  if (auto x = sch.opt_number("lambda")) cfg.window_lambda = *x;
  sch.finish();

  try {
    cfg.solver_config().validate();
  } catch (const std::invalid_argument& e) {
    sch.fail_section(e.what());
  }
  for (GapTarget t : cfg.gap.targets) {
    if (t == GapTarget::window && !cfg.window_lambda) {
      throw ConfigError(doc.source, 1, 1, "gap target 'window' needs schedule.lambda");
    }
  }
  return cfg;
}

TableSpec load_table_spec(const ConfigDocument& doc) {
  check_sections(doc, {"game", "table", "gap"});
  TableSpec spec;
  spec.game = read_game(doc);
  spec.gap = read_gap(doc);
  SectionReader sec(doc, "table");
  if (!sec.present()) throw ConfigError(doc.source, 1, 1, "missing section [table]");
  if (const auto* v = sec.take("which")) {
    const std::string w = sec.string(*v, "which");
    if (w == "averaging_r") {
      spec.which = TableKind::averaging_r;
    } else if (w == "rssa_settings") {
      spec.which = TableKind::rssa_settings;
    } else {
      sec.fail(*v, "unknown table '" + w + "' (averaging_r, rssa_settings)");
    }
  }
  if (spec.which == TableKind::averaging_r) {
    for (int i = 0; i <= 10; ++i) spec.lambdas.push_back(i / 10.0);
    spec.horizons = {1000, 2000, 3000, 4000};
    spec.r_values = {-1.0, 1.0};
  } else {
    for (int i = 1; i <= 11; ++i) spec.settings.push_back(i);
    spec.horizons = {4000};
  }
  if (const auto* v = sec.take("lambdas")) {
    spec.lambdas = sec.numbers(*v, "lambdas");
    for (double l : spec.lambdas) {
      if (!(l >= 0.0 && l <= 1.0)) sec.fail(*v, "lambdas must lie in [0, 1]");
    }
  }
  if (const auto* v = sec.take("horizons")) {
    spec.horizons = sec.integers(*v, "horizons");
    for (long n : spec.horizons) {
      if (n < 1) sec.fail(*v, "horizons must be >= 1");
    }
  }
  if (const auto* v = sec.take("r_values")) spec.r_values = sec.numbers(*v, "r_values");
  if (const auto* v = sec.take("settings")) {
    spec.settings.clear();
    for (long s : sec.integers(*v, "settings")) {
      if (s < 1 || s > 11) sec.fail(*v, "settings must lie in 1..11");
      spec.settings.push_back(static_cast<int>(s));
    }
  }
  spec.paths = read_paths(sec);
  if (const auto* v = sec.take("seed")) spec.seed = sec.unsigned64(*v, "seed");
  if (auto x = sec.opt_number("M")) spec.M = *x;
  if (auto x = sec.opt_number("C")) spec.C = *x;
  if (auto x = sec.opt_number("indicator_r")) spec.indicator_r = *x;
  spec.start = read_start(sec, spec.game.dimension());
  spec.threads = read_threads(sec);
  if (const auto* v = sec.take("out")) spec.out = sec.string(*v, "out");
  sec.finish();

  if (spec.horizons.empty()) sec.fail_section("[table]: horizons must not be empty");
  if (spec.which == TableKind::averaging_r) {
    if (spec.lambdas.empty() || spec.r_values.empty()) {
      sec.fail_section("[table]: lambdas and r_values must not be empty");
    }
    if (spec.M && !(*spec.M > 0.0)) sec.fail_section("[table]: M must be > 0");
    if (spec.C && !(*spec.C > 0.0)) sec.fail_section("[table]: C must be > 0");
  } else if (spec.settings.empty()) {
    sec.fail_section("[table]: settings must not be empty");
  }
  return spec;
}

GapJob load_gap_job(const ConfigDocument& doc) {
  check_sections(doc, {"game", "gap", "schedule", "run", "table"});
  return {read_game(doc), read_gap(doc)};
}

// ---------------------------------------------------------------------------
// Echo

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  // Keep a decimal marker so the value reads back as a float.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string num_array(const Vector& v) {
  std::string out = "[";
  for (Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

template <class T>
std::string int_array(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out + "]";
}

std::string dbl_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

void echo_game(std::ostringstream& os, const CournotGame& g) {
  os << "[game]\n";
  os << "preset = \"paper5x4\"\n";
  os << "firms = " << g.firms << "\n";
  os << "nodes = " << g.nodes << "\n";
  os << "sigma = " << num(g.sigma) << "\n";
  os << "a_lb = " << num_array(g.a_lb) << "\n";
  os << "a_ub = " << num_array(g.a_ub) << "\n";
  os << "b = " << num_array(g.b) << "\n";
  os << "c = " << num_array(g.c) << "\n";
  os << "d = " << num_array(g.d) << "\n";
  os << "cap = " << num_array(g.cap) << "\n";
}

void echo_gap(std::ostringstream& os, const GapSettings& g) {
  os << "[gap]\n";
  os << "metrics = [";
  for (std::size_t i = 0; i < g.metrics.size(); ++i) {
    os << (i ? ", " : "") << quoted(to_string(g.metrics[i]));
  }
  os << "]\ntargets = [";
  for (std::size_t i = 0; i < g.targets.size(); ++i) {
    os << (i ? ", " : "") << quoted(to_string(g.targets[i]));
  }
  os << "]\n";
  os << "restarts = " << g.restarts << "\n";
  os << "tol = " << num(g.tol) << "\n";
  os << "seed = " << g.seed << "\n";
}

}  // namespace

std::string effective_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "# effective configuration (presets expanded)\n";
  echo_game(os, cfg.game);
  os << "\n[schedule]\n";
  os << "scheme = " << quoted(to_string(cfg.scheme)) << "\n";
  if (const auto* t = std::get_if<PowerLawTriple>(&cfg.schedule)) {
    os << "rule = \"power\"\n";
    os << "gamma0 = " << num(t->gamma0) << "\n";
    os << "a = " << num(t->a) << "\n";
    os << "eta0 = " << num(t->eta0) << "\n";
    os << "b = " << num(t->b) << "\n";
    os << "eps0 = " << num(t->eps0) << "\n";
    os << "c = " << num(t->c) << "\n";
    os << "offset = " << num(t->offset) << "\n";
  } else {
    const auto& w = std::get<WindowStepRule>(cfg.schedule);
    os << "rule = \"window\"\n";
    os << "M = " << num(w.M) << "\n";
    os << "C = " << num(w.C) << "\n";
    os << "indicator_r = " << num(w.indicator_r) << "\n";
  }
  os << "r = " << num(cfg.r) << "\n";
  if (cfg.window_lambda) os << "lambda = " << num(*cfg.window_lambda) << "\n";
  os << "\n[run]\n";
  os << "horizon = " << cfg.horizon << "\n";
  os << "paths = " << cfg.paths << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "ticks = " << int_array(cfg.ticks) << "\n";
  if (cfg.start) os << "start = " << num_array(*cfg.start) << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "out = " << quoted(cfg.out) << "\n\n";
  echo_gap(os, cfg.gap);
  return os.str();
}

std::string effective_config_text(const TableSpec& spec) {
  std::ostringstream os;
  os << "# effective configuration (presets expanded)\n";
  echo_game(os, spec.game);
  os << "\n[table]\n";
  os << "which = "
     << quoted(spec.which == TableKind::averaging_r ? "averaging_r" : "rssa_settings") << "\n";
  os << "lambdas = " << dbl_array(spec.lambdas) << "\n";
  os << "horizons = " << int_array(spec.horizons) << "\n";
  os << "r_values = " << dbl_array(spec.r_values) << "\n";
  os << "settings = " << int_array(spec.settings) << "\n";
  os << "paths = " << spec.paths << "\n";
  os << "seed = " << spec.seed << "\n";
  if (spec.M) os << "M = " << num(*spec.M) << "\n";
  if (spec.C) os << "C = " << num(*spec.C) << "\n";
  os << "indicator_r = " << num(spec.indicator_r) << "\n";
  if (spec.start) os << "start = " << num_array(*spec.start) << "\n";
  os << "threads = " << spec.threads << "\n";
  os << "out = " << quoted(spec.out) << "\n\n";
  echo_gap(os, spec.gap);
  return os.str();
}

}  // namespace svi
