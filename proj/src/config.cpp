#include "driftlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "driftlab/detail/overloaded.hpp"
#include "driftlab/records.hpp"

namespace driftlab {
namespace {

using detail::overloaded;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Where a value came from, for diagnostics.
struct Origin {
  int line = 0;  // 0: command-line override
  std::string key;

  std::string prefix() const {
    if (line == 0) return "override '" + key + "': ";
    return "line " + std::to_string(line) + ": key '" + key + "': ";
  }
};

[[noreturn]] void fail(const Origin& at, const std::string& msg) { throw ConfigError(at.prefix() + msg); }

double parse_number(const Origin& at, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(at, "expected a number, got '" + s + "'");
  }
  return v;
}

long parse_integer(const Origin& at, const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && res.ec == std::errc{} && res.ptr == s.data() + s.size()) return v;
  // Accept integral values in floating notation, e.g. 1e6.
  const double d = parse_number(at, s);
  if (d != std::floor(d) || std::abs(d) > 9e15) fail(at, "expected an integer, got '" + s + "'");
  return static_cast<long>(d);
}

std::size_t parse_count(const Origin& at, const std::string& s) {
  const long v = parse_integer(at, s);
  if (v < 0) fail(at, "expected a nonnegative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const Origin& at, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(at, "expected true or false, got '" + s + "'");
}

// name{k=v, k=v}
struct FamilySpec {
  std::string name;
  std::map<std::string, std::string> params;
};

FamilySpec parse_family(const Origin& at, const std::string& text) {
  FamilySpec spec;
  const auto brace = text.find('{');
  if (brace == std::string::npos) {
    spec.name = trim(text);
    if (spec.name.find('}') != std::string::npos) fail(at, "unbalanced braces in '" + text + "'");
    return spec;
  }
  if (text.back() != '}') fail(at, "expected 'name{key=value, ...}', got '" + text + "'");
  spec.name = trim(std::string_view(text).substr(0, brace));
  const std::string body = text.substr(brace + 1, text.size() - brace - 2);
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string entry = trim(item);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) fail(at, "parameter '" + entry + "' of '" + spec.name + "' lacks '='");
    const std::string k = trim(std::string_view(entry).substr(0, eq));
    const std::string v = trim(std::string_view(entry).substr(eq + 1));
    if (!spec.params.emplace(k, v).second) fail(at, "duplicate parameter '" + k + "' in '" + spec.name + "'");
  }
  return spec;
}

// Pops and returns a named parameter; rejects leftovers through finish().
class Params {
 public:
  Params(const Origin& at, FamilySpec spec) : at_(at), spec_(std::move(spec)) {}

  double number(const std::string& key) {
    auto v = optional_number(key);
    if (!v) fail(at_, "'" + spec_.name + "' needs parameter '" + key + "'");
    return *v;
  }
  std::optional<double> optional_number(const std::string& key) {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return std::nullopt;
    const double v = parse_number(Origin{at_.line, at_.key + "." + key}, it->second);
    spec_.params.erase(it);
    return v;
  }
  std::string text(const std::string& key) {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) fail(at_, "'" + spec_.name + "' needs parameter '" + key + "'");
    std::string v = it->second;
    spec_.params.erase(it);
    return v;
  }
  void finish() const {
    if (!spec_.params.empty()) {
      fail(at_, "unknown parameter '" + spec_.params.begin()->first + "' for '" + spec_.name + "'");
    }
  }

 private:
  Origin at_;
  FamilySpec spec_;
};

drift::Tabulated load_tabulated(const Origin& at, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot read tabulated field file");
  std::string line;
  std::getline(in, line);
  if (trim(line) != "abs_x,t,phi") fail(at, "'" + path + "' must start with header 'abs_x,t,phi'");
  std::map<std::pair<double, double>, double> samples;
  std::set<double> xs;
  std::set<double> ts;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cells[3];
    for (auto& c : cells) std::getline(ss, c, ',');
    const Origin cell_at{at.line, at.key + " (" + path + " row " + std::to_string(row) + ")"};
    const double x = parse_number(cell_at, trim(cells[0]));
    const double t = parse_number(cell_at, trim(cells[1]));
    samples[{x, t}] = parse_number(cell_at, trim(cells[2]));
    xs.insert(x);
    ts.insert(t);
  }
  drift::Tabulated tab{{xs.begin(), xs.end()}, {ts.begin(), ts.end()}, {}};
  for (double x : tab.abs_x) {
    for (double t : tab.t) {
      auto it = samples.find({x, t});
      if (it == samples.end()) fail(at, "'" + path + "' does not cover a full abs_x by t grid");
      tab.values.push_back(it->second);
    }
  }
  return tab;
}

void set_field(RunConfig& c, const Origin& at, const std::string& value) {
  const FamilySpec spec = parse_family(at, value);
  const std::string& name = spec.name;
  Params p(at, spec);
  DriftFamily family;
  c.tabulated_file.clear();
  if (name == "zero") {
    family = drift::Zero{};
  } else if (name == "critical_lamperti") {
    family = drift::CriticalLamperti{p.number("c")};
  } else if (name == "power_law") {
    const double rho = p.number("rho");
    const double beta = p.number("beta");
    const double alpha = p.optional_number("alpha").value_or(2.0 * beta - 1.0);
    family = drift::PowerLaw{rho, alpha, beta};
  } else if (name == "mean_reverting") {
    family = drift::MeanReverting{p.number("kappa")};
  } else if (name == "tabulated") {
    c.tabulated_file = p.text("file");
    family = load_tabulated(at, c.tabulated_file);
  } else {
    fail(at, "unknown drift family '" + name +
                 "' (expected zero, critical_lamperti, power_law, mean_reverting, tabulated)");
  }
  p.finish();
  try {
    c.field = DriftField(std::move(family), c.field.x_floor());
  } catch (const std::invalid_argument& e) {
    fail(at, e.what());
  }
}

JumpLaw make_jump(const Origin& at, const std::string& value) {
  const FamilySpec spec = parse_family(at, value);
  Params p(at, spec);
  JumpFamily family;
  if (spec.name == "constant") {
    family = jumps::Constant1{};
  } else if (spec.name == "exponential") {
    family = jumps::ExponentialMean1{};
  } else if (spec.name == "gamma") {
    family = jumps::GammaMean1{p.number("k")};
  } else if (spec.name == "uniform") {
    family = jumps::UniformMean1{p.number("d")};
  } else {
    fail(at, "unknown jump law '" + spec.name + "' (expected constant, exponential, gamma, uniform)");
  }
  p.finish();
  try {
    return JumpLaw(std::move(family));
  } catch (const std::invalid_argument& e) {
    fail(at, e.what());
  }
}

std::string field_text(const RunConfig& c) {
  return std::visit(
      overloaded{
          [](const drift::Zero&) { return std::string("zero"); },
          [](const drift::CriticalLamperti& f) { return "critical_lamperti{c=" + format_number(f.c) + "}"; },
          [](const drift::PowerLaw& f) {
            return "power_law{rho=" + format_number(f.rho) + ", alpha=" + format_number(f.alpha) +
                   ", beta=" + format_number(f.beta) + "}";
          },
          [](const drift::MeanReverting& f) { return "mean_reverting{kappa=" + format_number(f.kappa) + "}"; },
          [&](const drift::Tabulated&) { return "tabulated{file=" + c.tabulated_file + "}"; },
      },
      c.field.family());
}

std::string jump_text(const JumpLaw& law) {
  return std::visit(overloaded{
                        [](const jumps::Constant1&) { return std::string("constant"); },
                        [](const jumps::ExponentialMean1&) { return std::string("exponential"); },
                        [](const jumps::GammaMean1& g) { return "gamma{k=" + format_number(g.shape) + "}"; },
                        [](const jumps::UniformMean1& u) { return "uniform{d=" + format_number(u.halfwidth) + "}"; },
                    },
                    law.family());
}

template <class E>
struct Names {
  std::vector<std::pair<E, std::string_view>> entries;

  E parse(const Origin& at, const std::string& s) const {
    for (const auto& [e, name] : entries) {
      if (name == s) return e;
    }
    std::string options;
    for (const auto& [e, name] : entries) options += (options.empty() ? "" : ", ") + std::string(name);
    fail(at, "unknown value '" + s + "' (expected one of: " + options + ")");
  }
  std::string_view name(E e) const {
    for (const auto& [k, name] : entries) {
      if (k == e) return name;
    }
    return "?";
  }
};

const Names<Command> kCommands{{{Command::Simulate, "simulate"},
                                {Command::Classify, "classify"},
                                {Command::BdOracle, "bd-oracle"},
                                {Command::Experiment, "experiment"},
                                {Command::Check, "check"}}};
const Names<OutputFormat> kFormats{{{OutputFormat::Csv, "csv"}, {OutputFormat::Json, "json"}}};
const Names<ExperimentKind> kKinds{
    {{ExperimentKind::Recurrence, "recurrence"}, {ExperimentKind::Occupancy, "occupancy"}}};
const Names<ClassifyMethod> kMethods{
    {{ClassifyMethod::Theorem1, "theorem1"}, {ClassifyMethod::MvCritical, "mv_critical"}}};

struct KeySpec {
  std::string_view name;
  std::function<void(RunConfig&, const Origin&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;  // nullopt: omit
};

template <class T>
KeySpec number_key(std::string_view name, T RunConfig::*member) {
  return {name,
          [member](RunConfig& c, const Origin& at, const std::string& v) {
            if constexpr (std::is_same_v<T, double>) {
              c.*member = parse_number(at, v);
            } else if constexpr (std::is_same_v<T, long>) {
              c.*member = parse_integer(at, v);
            } else if constexpr (std::is_same_v<T, unsigned>) {
              c.*member = static_cast<unsigned>(parse_count(at, v));
            } else {
              c.*member = parse_count(at, v);
            }
          },
          [member](const RunConfig& c) -> std::optional<std::string> {
            if constexpr (std::is_same_v<T, double>) {
              return format_number(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

template <class E>
KeySpec enum_key(std::string_view name, E RunConfig::*member, const Names<E>& names) {
  return {name,
          [member, &names](RunConfig& c, const Origin& at, const std::string& v) { c.*member = names.parse(at, v); },
          [member, &names](const RunConfig& c) -> std::optional<std::string> {
            return std::string(names.name(c.*member));
          }};
}

// Order matters: x_floor is applied before field so the field picks it up.
const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      enum_key("command", &RunConfig::command, kCommands),
      {"x_floor",
       [](RunConfig& c, const Origin& at, const std::string& v) {
         try {
           c.field = DriftField(c.field.family(), parse_number(at, v));
         } catch (const std::invalid_argument& e) {
           fail(at, e.what());
         }
       },
       [](const RunConfig& c) -> std::optional<std::string> { return format_number(c.field.x_floor()); }},
      {"field", set_field, [](const RunConfig& c) -> std::optional<std::string> { return field_text(c); }},
      number_key("limit_time", &RunConfig::limit_time),
      {"up", [](RunConfig& c, const Origin& at, const std::string& v) { c.up = make_jump(at, v); },
       [](const RunConfig& c) -> std::optional<std::string> { return jump_text(c.up); }},
      {"down", [](RunConfig& c, const Origin& at, const std::string& v) { c.down = make_jump(at, v); },
       [](const RunConfig& c) -> std::optional<std::string> { return jump_text(c.down); }},
      enum_key("method", &RunConfig::method, kMethods),
      number_key("x0", &RunConfig::x0),
      number_key("x_max", &RunConfig::x_max),
      number_key("grid", &RunConfig::grid),
      {"chain",
       [](RunConfig& c, const Origin& at, const std::string& v) {
         const FamilySpec spec = parse_family(at, v);
         if (spec.name == "field") {
           Params(at, spec).finish();
           c.chain_c.reset();
           return;
         }
         if (spec.name != "ratio") fail(at, "unknown chain '" + spec.name + "' (expected field, ratio{c=...})");
         Params p(at, spec);
         c.chain_c = p.number("c");
         p.finish();
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         return c.chain_c ? "ratio{c=" + format_number(*c.chain_c) + "}" : std::string("field");
       }},
      number_key("n_min", &RunConfig::n_min),
      number_key("n_max", &RunConfig::n_max),
      number_key("quadrature_points", &RunConfig::quadrature_points),
      number_key("n0", &RunConfig::n0),
      number_key("tail_extension", &RunConfig::tail_extension),
      enum_key("kind", &RunConfig::kind, kKinds),
      number_key("horizon", &RunConfig::horizon),
      number_key("n_paths", &RunConfig::n_paths),
      number_key("L", &RunConfig::level),
      number_key("a", &RunConfig::band),
      number_key("sigma", &RunConfig::sigma),
      number_key("total_time", &RunConfig::total_time),
      number_key("occ_min", &RunConfig::occ_min),
      number_key("occ_max", &RunConfig::occ_max),
      {"seed",
       [](RunConfig& c, const Origin& at, const std::string& v) {
         std::uint64_t s = 0;
         const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
         if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
           fail(at, "expected an unsigned 64-bit integer, got '" + v + "'");
         }
         c.seed = s;
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         if (!c.seed) return std::nullopt;
         return std::to_string(*c.seed);
       }},
      number_key("workers", &RunConfig::workers),
      {"output", [](RunConfig& c, const Origin&, const std::string& v) { c.output = v; },
       [](const RunConfig& c) -> std::optional<std::string> { return c.output; }},
      enum_key("format", &RunConfig::format, kFormats),
      {"strict", [](RunConfig& c, const Origin& at, const std::string& v) { c.strict = parse_bool(at, v); },
       [](const RunConfig& c) -> std::optional<std::string> { return c.strict ? "true" : "false"; }},
  };
  return specs;
}

struct RawEntry {
  std::string value;
  int line;
};

// Splits text into key/value entries at newlines and commas outside braces.
std::map<std::string, RawEntry> tokenize(std::string_view text) {
  std::map<std::string, RawEntry> entries;
  std::string current;
  int line = 1;
  int entry_line = 1;
  int depth = 0;
  auto flush = [&] {
    const std::string entry = trim(current);
    current.clear();
    if (entry.empty()) return;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(entry_line) + ": expected 'key = value', got '" + entry + "'");
    }
    const std::string key = trim(std::string_view(entry).substr(0, eq));
    const std::string value = trim(std::string_view(entry).substr(eq + 1));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
        })) {
      throw ConfigError("line " + std::to_string(entry_line) + ": invalid key '" + key + "'");
    }
    if (!entries.emplace(key, RawEntry{value, entry_line}).second) {
      throw ConfigError("line " + std::to_string(entry_line) + ": key '" + key + "': duplicate key");
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '#') {
      while (i + 1 < text.size() && text[i + 1] != '\n') ++i;
      continue;
    }
    if (current.empty() || trim(current).empty()) entry_line = line;
    if (ch == '{') ++depth;
    if (ch == '}' && --depth < 0) throw ConfigError("line " + std::to_string(line) + ": unbalanced '}'");
    if (depth == 0 && (ch == '\n' || ch == ',')) {
      flush();
    } else if (ch != '\n' || depth > 0) {
      current.push_back(ch == '\n' ? ' ' : ch);
    }
    if (ch == '\n') ++line;
  }
  if (depth != 0) throw ConfigError("line " + std::to_string(entry_line) + ": unbalanced '{'");
  flush();
  return entries;
}

// Cross-key preconditions of the selected command, checked after defaults.
void validate(const RunConfig& c, const std::map<std::string, RawEntry>& entries) {
  auto check = [&](bool ok, const std::string& key, const std::string& msg) {
    if (ok) return;
    auto it = entries.find(key);
    if (it != entries.end()) fail(Origin{it->second.line, key}, msg);
    throw ConfigError("key '" + key + "' (default): " + msg);
  };
  const bool signed_field = !c.field.in_scope();
  check(c.limit_time > 0.0, "limit_time", "must be > 0");
  switch (c.command) {
    case Command::Classify:
      check(!signed_field, "field", "classify needs a nonnegative drift; mean_reverting is signed");
      check(c.x0 > 0.0, "x0", "must be > 0");
      check(c.x_max > c.x0, "x_max", "must exceed x0");
      check(c.grid >= 100, "grid", "must be >= 100");
      if (c.method == ClassifyMethod::MvCritical) {
        const auto* pl = std::get_if<drift::PowerLaw>(&c.field.family());
        check(pl != nullptr, "method", "mv_critical needs field = power_law{rho, beta}");
        check(pl->rho > 0.0, "field", "mv_critical needs rho > 0");
        check(pl->beta > 0.0 && pl->beta < 1.0 && pl->beta != 0.5, "field",
              "mv_critical needs beta in (0, 1/2) or (1/2, 1)");
        check(std::abs(pl->alpha - (2.0 * pl->beta - 1.0)) < 1e-12, "field",
              "mv_critical needs alpha = 2 beta - 1");
      }
      break;
    case Command::BdOracle:
      check(c.chain_c || !signed_field, "field", "bd-oracle needs a nonnegative drift");
      check(c.n_min < c.n_max, "n_max", "must exceed n_min");
      check(c.n0 >= 1 && c.n0 >= c.n_min && c.n0 <= c.n_max, "n0", "must be >= 1 and inside [n_min, n_max]");
      check(c.quadrature_points >= 1, "quadrature_points", "must be >= 1");
      check(c.tail_extension >= 0, "tail_extension", "must be >= 0");
      if (c.chain_c) {
        check(*c.chain_c > -1.0, "chain", "ratio family needs c > -1");
        check(c.n_min >= 1, "n_min", "ratio family is defined for n >= 1");
      }
      break;
    case Command::Simulate:
      check(c.horizon >= 0.0, "horizon", "must be >= 0");
      break;
    case Command::Experiment:
      if (c.kind == ExperimentKind::Recurrence) {
        check(c.n_paths >= 1, "n_paths", "must be >= 1");
        check(c.band > 0.0, "a", "must be > 0");
        check(c.level > c.band, "L", "must exceed a");
        check(c.horizon >= 0.0, "horizon", "must be >= 0");
      } else {
        check(signed_field, "field", "occupancy needs field = mean_reverting{kappa}");
        check(c.total_time >= 0.0, "total_time", "must be >= 0");
        check(c.occ_min < c.occ_max, "occ_max", "must exceed occ_min");
      }
      break;
    case Command::Check:
      check(c.sigma >= 0.0, "sigma", "must be >= 0");
      check(c.n_paths >= 100, "n_paths", "must be >= 100");
      check(c.horizon > 0.0, "horizon", "must be > 0");
      break;
  }
}

}  // namespace

std::string_view to_string(Command c) { return kCommands.name(c); }

RunConfig parse_config(std::string_view text, std::span<const Override> overrides) {
  auto entries = tokenize(text);
  std::set<std::string> from_override;
  for (const auto& [key, value] : overrides) {
    entries[key] = RawEntry{trim(value), 0};
    from_override.insert(key);
  }

  const auto& specs = key_specs();
  for (const auto& [key, entry] : entries) {
    const bool known = std::any_of(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.name == key; });
    if (!known) fail(Origin{entry.line, key}, "unknown key");
  }
  if (!entries.count("command")) throw ConfigError("missing required key 'command'");
  const bool chain_only = entries.count("chain") && entries.at("chain").value.rfind("ratio", 0) == 0;
  if (!entries.count("field") && !chain_only) throw ConfigError("missing required key 'field'");

  RunConfig config;
  for (const auto& spec : specs) {
    auto it = entries.find(std::string(spec.name));
    if (it == entries.end()) continue;
    spec.set(config, Origin{it->second.line, it->first}, it->second.value);
  }
  validate(config, entries);
  return config;
}

std::vector<std::pair<std::string, std::string>> effective_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_specs()) {
    if (auto v = spec.get(config)) out.emplace_back(spec.name, *v);
  }
  return out;
}

std::string to_config_text(const RunConfig& config) {
  std::string text;
  for (const auto& [key, value] : effective_entries(config)) text += key + " = " + value + "\n";
  return text;
}

}  // namespace driftlab
