#include "fracground/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fracground {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::sweep_eps: return "sweep-eps";
    case Experiment::uniqueness: return "uniqueness";
    case Experiment::coercivity: return "coercivity";
    case Experiment::validate_operator: return "validate-operator";
    case Experiment::decay: return "decay";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::solve, Experiment::sweep_eps, Experiment::uniqueness, Experiment::coercivity,
                 Experiment::validate_operator, Experiment::decay})
    if (to_string(e) == name) return e;
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected solve, sweep-eps, uniqueness, coercivity, validate-operator or decay)");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "experiment", "dim", "s", "p", "eps", "x0", "potential", "potential_params", "n", "L",
      "max_iters", "step", "tol_residual", "tol_stall", "init_kind", "rng_seed", "refine", "radial_class",
      "refine_tol", "refine_max_steps", "eps_list", "output_dir", "seed", "k", "n_probe", "power_steps",
      "shift_a", "coercivity_reference", "fit_window", "nu_threshold", "threads"};
  return keys;
}

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_bare(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '/';
  });
}

ConfigScalar parse_scalar(std::string_view tok, int line) {
  tok = trim(tok);
  if (tok.empty()) fail(line, "missing value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') fail(line, "unterminated string");
    return std::string(tok.substr(1, tok.size() - 2));
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec == std::errc() && ptr == tok.data() + tok.size()) {
    if (!std::isfinite(x)) fail(line, "non-finite number");
    return x;
  }
  if (is_bare(tok)) return std::string(tok);
  fail(line, "cannot parse value '" + std::string(tok) + "'");
}

std::vector<ConfigScalar> parse_list(std::string_view body, int line) {
  std::vector<ConfigScalar> out;
  if (trim(body).empty()) return out;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] == '"') quoted = !quoted;
    if (i == body.size() || (!quoted && body[i] == ',')) {
      out.push_back(parse_scalar(body.substr(start, i - start), line));
      start = i + 1;
    }
  }
  if (quoted) fail(line, "unterminated string in list");
  return out;
}

ConfigValue parse_value(std::string_view raw, int line) {
  const std::string_view v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(line, "list must end with ']'");
    return parse_list(v.substr(1, v.size() - 2), line);
  }
  // `family[params]` shorthand, kept as one string and split by the potential key.
  const auto br = v.find('[');
  if (br != std::string_view::npos && v.back() == ']' && is_bare(trim(v.substr(0, br)))) {
    parse_list(v.substr(br + 1, v.size() - br - 2), line);
    return std::string(v);
  }
  return std::visit([](auto&& x) -> ConfigValue { return x; }, parse_scalar(v, line));
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

class Reader {
 public:
  explicit Reader(std::map<std::string, ConfigEntry> table) : table_(std::move(table)) {}

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return fallback;
    if (const double* x = std::get_if<double>(&it->second.value)) return *x;
    fail(it->second.line, "key '" + key + "' expects a number");
  }

  long long integer(const std::string& key, long long fallback) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return fallback;
    const double* x = std::get_if<double>(&it->second.value);
    if (!x || *x != std::floor(*x) || std::abs(*x) > 9.0e15)
      fail(it->second.line, "key '" + key + "' expects an integer");
    return static_cast<long long>(*x);
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return fallback;
    if (const bool* b = std::get_if<bool>(&it->second.value)) return *b;
    fail(it->second.line, "key '" + key + "' expects true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return fallback;
    if (const std::string* s = std::get_if<std::string>(&it->second.value)) return *s;
    fail(it->second.line, "key '" + key + "' expects a string");
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return {};
    std::vector<double> out;
    if (const double* x = std::get_if<double>(&it->second.value)) return {*x};
    const auto* list = std::get_if<std::vector<ConfigScalar>>(&it->second.value);
    if (!list) fail(it->second.line, "key '" + key + "' expects a list of numbers");
    for (const auto& e : *list) {
      const double* x = std::get_if<double>(&e);
      if (!x) fail(it->second.line, "key '" + key + "' expects a list of numbers");
      out.push_back(*x);
    }
    return out;
  }

  int line(const std::string& key) const { return table_.at(key).line; }

 private:
  std::map<std::string, ConfigEntry> table_;
};

}  // namespace

std::map<std::string, ConfigEntry> parse_config_table(std::string_view text) {
  std::map<std::string, ConfigEntry> table;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = strip_comment(raw);
    if (trim(body).empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key(trim(std::string_view(body).substr(0, eq)));
    if (!is_bare(key)) fail(line, "invalid key '" + key + "'");
    if (table.count(key)) fail(line, "duplicate key '" + key + "' (first set on line " +
                                         std::to_string(table[key].line) + ")");
    table[key] = ConfigEntry{parse_value(std::string_view(body).substr(eq + 1), line), line};
  }
  return table;
}

RunConfig config_from_text(std::string_view text, std::optional<Experiment> experiment) {
  auto table = parse_config_table(text);

  std::vector<std::string> unknown;
  const auto& keys = config_keys();
  for (const auto& [k, e] : table)
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      unknown.push_back("'" + k + "' (line " + std::to_string(e.line) + ")");
  if (!unknown.empty()) {
    std::string msg = "unknown config key";
    msg += unknown.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
    throw ConfigError(msg);
  }

  const Reader r(std::move(table));
  RunConfig c;
  if (r.has("experiment")) {
    const Experiment named = parse_experiment(r.string("experiment", ""));
    if (experiment && *experiment != named)
      throw ConfigError("config names experiment '" + std::string(to_string(named)) +
                        "' but '" + std::string(to_string(*experiment)) + "' was requested");
    c.experiment = named;
  } else if (experiment) {
    c.experiment = *experiment;
  }

  c.dim = static_cast<int>(r.integer("dim", c.dim));
  c.s = r.number("s", c.s);
  c.p = r.number("p", c.p);
  c.eps = r.number("eps", c.eps);
  c.x0 = r.has("x0") ? r.numbers("x0") : Point(c.dim > 0 ? c.dim : 0, 0.0);

  std::string pot = r.string("potential", "constant");
  const auto br = pot.find('[');
  if (br != std::string::npos) {
    if (r.has("potential_params"))
      throw ConfigError("potential parameters given twice (inline and potential_params)");
    for (const auto& e : parse_list(std::string_view(pot).substr(br + 1, pot.size() - br - 2), r.line("potential")))
    {
      const double* x = std::get_if<double>(&e);
      if (!x) fail(r.line("potential"), "potential parameters must be numbers");
      c.potential_params.push_back(*x);
    }
    pot = std::string(trim(std::string_view(pot).substr(0, br)));
  } else {
    c.potential_params = r.numbers("potential_params");
  }
  c.potential = parse_potential_family(pot);
  if (c.potential == PotentialFamily::constant && c.potential_params.empty()) c.potential_params = {1.0};

  c.n = static_cast<int>(r.integer("n", c.n));
  c.L = r.number("L", c.L);

  SolverConfig& sv = c.solver;
  sv.max_iters = static_cast<int>(r.integer("max_iters", sv.max_iters));
  sv.step = r.number("step", sv.step);
  sv.tol_residual = r.number("tol_residual", sv.tol_residual);
  sv.tol_stall = r.number("tol_stall", sv.tol_stall);
  sv.init_kind = parse_init_kind(r.string("init_kind", std::string(to_string(sv.init_kind))));
  if (sv.init_kind == InitKind::warm_start)
    throw ConfigError("init_kind warm_start cannot be requested from a config file");
  c.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  sv.rng_seed = static_cast<std::uint64_t>(r.integer("rng_seed", static_cast<long long>(c.seed)));
  sv.refine = r.boolean("refine", true);
  sv.radial_class = r.boolean("radial_class", c.experiment == Experiment::uniqueness);
  sv.refine_tol = r.number("refine_tol", sv.refine_tol);
  sv.refine_max_steps = static_cast<int>(r.integer("refine_max_steps", sv.refine_max_steps));

  c.eps_list = r.numbers("eps_list");
  c.output_dir = r.string("output_dir", c.output_dir);
  c.k = static_cast<int>(r.integer("k", c.k));
  c.n_probe = static_cast<int>(r.integer("n_probe", c.n_probe));
  c.power_steps = static_cast<int>(r.integer("power_steps", c.power_steps));
  c.shift_a = r.has("shift_a") ? r.numbers("shift_a") : Point(c.dim > 0 ? c.dim : 0, 1.0);
  if (r.has("coercivity_reference")) c.coercivity_reference = r.number("coercivity_reference", 0.0);
  c.fit_window = r.numbers("fit_window");
  c.nu_threshold = r.number("nu_threshold", c.nu_threshold);
  c.threads = static_cast<int>(r.integer("threads", c.threads));

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<Experiment> experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return config_from_text(text.str(), experiment);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ProblemParams RunConfig::problem() const {
  Potential pot(potential, potential_params);
  pot.validate(dim);
  return ProblemParams::make(dim, s, p, eps, x0, std::move(pot));
}

Grid RunConfig::grid() const { return make_grid(dim, n, L); }

void RunConfig::validate() const {
  const ProblemParams params = problem();
  const Grid g = grid();
  (void)g;
  solver.validate();
  if (static_cast<int>(shift_a.size()) != dim) throw ConfigError("shift_a must have dim coordinates");
  if (experiment == Experiment::sweep_eps) {
    if (eps_list.empty()) throw ConfigError("sweep-eps needs eps_list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      if (!(eps_list[i] > 0.0)) throw ConfigError("eps_list entries must be positive");
      if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list must be strictly decreasing");
    }
  }
  if (experiment == Experiment::uniqueness && k < 3) throw ConfigError("uniqueness needs k >= 3");
  if (n_probe < 1) throw ConfigError("n_probe must be >= 1");
  if (power_steps < 0) throw ConfigError("power_steps must be >= 0");
  if (!fit_window.empty()) {
    if (fit_window.size() != 2 || !(fit_window[0] > 0.0 && fit_window[0] < fit_window[1]))
      throw ConfigError("fit_window must be [r1, r2] with 0 < r1 < r2");
    if (fit_window[1] > 0.8 * L) throw ConfigError("fit_window: r2 must not exceed 0.8 L");
  }
  if (!(nu_threshold > 0.0)) throw ConfigError("nu_threshold must be positive");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

}  // namespace fracground
