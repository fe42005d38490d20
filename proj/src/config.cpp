#include "choquard/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

/// Drops a trailing comment, ignoring '#' inside strings.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_str) {
      ++i;
      continue;
    }
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::string t = s[0] == '+' ? s.substr(1) : s;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string parse_string(const std::string& s, int line) {
  std::string out;
  std::size_t i = 1;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') break;
    if (c == '\\') {
      if (++i >= s.size()) throw ConfigError("unterminated escape in string", line);
      switch (s[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError(std::string("unknown escape \\") + s[i], line);
      }
    } else {
      out += c;
    }
  }
  if (i >= s.size()) throw ConfigError("unterminated string", line);
  if (!trim(s.substr(i + 1)).empty()) throw ConfigError("unexpected text after string", line);
  return out;
}

ConfigValue parse_value(const std::string& s, int line) {
  ConfigValue v;
  v.line = line;
  if (s.empty()) throw ConfigError("missing value", line);
  if (s[0] == '"') {
    v.v = parse_string(s, line);
  } else if (s == "true" || s == "false") {
    v.v = (s == "true");
  } else if (s[0] == '[') {
    if (s.back() != ']') throw ConfigError("arrays must close on the same line", line);
    const std::string body = trim(s.substr(1, s.size() - 2));
    std::vector<std::string> items;
    if (!body.empty()) {
      bool in_str = false;
      std::string cur;
      for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
          items.push_back(trim(cur));
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!trim(cur).empty()) items.push_back(trim(cur));  // a trailing comma is fine
    }
    if (!items.empty() && items[0].size() > 0 && items[0][0] == '"') {
      std::vector<std::string> strs;
      for (const auto& it : items) {
        if (it.empty() || it[0] != '"') throw ConfigError("mixed types in array", line);
        strs.push_back(parse_string(it, line));
      }
      v.v = std::move(strs);
    } else {
      std::vector<double> nums;
      for (const auto& it : items) {
        const auto x = parse_number(it);
        if (!x) throw ConfigError("array element '" + it + "' is not a number", line);
        nums.push_back(*x);
      }
      v.v = std::move(nums);
    }
  } else {
    const auto x = parse_number(s);
    if (!x) throw ConfigError("cannot parse value '" + s + "'", line);
    v.v = *x;
  }
  return v;
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  ConfigDocument doc;
  doc.tables[""];
  std::string table;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s[0] == '[') {
      if (s.back() != ']') throw ConfigError("malformed table header", line);
      table = trim(s.substr(1, s.size() - 2));
      if (!is_identifier(table)) throw ConfigError("bad table name '" + table + "'", line);
      if (doc.tables.count(table) && !doc.tables[table].empty()) throw ConfigError("table [" + table + "] repeated", line);
      doc.tables[table];
      doc.header_lines[table] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    if (!is_identifier(key)) throw ConfigError("bad key '" + key + "'", line);
    auto& t = doc.tables[table];
    if (t.count(key)) throw ConfigError("key '" + key + "' repeated", line);
    t[key] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return doc;
}

ConfigDocument load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

double as_number(const ConfigValue& v, const std::string& key) {
  if (const double* d = std::get_if<double>(&v.v)) return *d;
  throw ConfigError("'" + key + "' must be a number", v.line);
}

int as_int(const ConfigValue& v, const std::string& key) {
  const double d = as_number(v, key);
  if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError("'" + key + "' must be an integer", v.line);
  return static_cast<int>(d);
}

bool as_bool(const ConfigValue& v, const std::string& key) {
  if (const bool* b = std::get_if<bool>(&v.v)) return *b;
  throw ConfigError("'" + key + "' must be true or false", v.line);
}

std::string as_string(const ConfigValue& v, const std::string& key) {
  if (const std::string* s = std::get_if<std::string>(&v.v)) return *s;
  throw ConfigError("'" + key + "' must be a string", v.line);
}

std::vector<double> as_numbers(const ConfigValue& v, const std::string& key) {
  if (const auto* a = std::get_if<std::vector<double>>(&v.v)) return *a;
  throw ConfigError("'" + key + "' must be an array of numbers", v.line);
}

using Setter = std::function<void(const ConfigValue&, const std::string&)>;

void apply_table(const ConfigTable& t, const std::string& name, const std::map<std::string, Setter>& setters) {
  for (const auto& [key, val] : t) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "' in [" + name + "]", val.line);
    try {
      it->second(val, key);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what(), val.line);
    }
  }
}

}  // namespace

RunConfig apply_config(const ConfigDocument& doc, RunConfig c) {
  for (const auto& [name, t] : doc.tables) {
    if (name.empty()) {
      if (!t.empty()) throw ConfigError("key '" + t.begin()->first + "' outside any table", t.begin()->second.line);
      continue;
    }
    if (name == "problem") {
      apply_table(t, name,
                  {{"N", [&](auto& v, auto& k) { c.params.N = as_int(v, k); }},
                   {"mu", [&](auto& v, auto& k) { c.params.mu = as_number(v, k); }},
                   {"lambda", [&](auto& v, auto& k) { c.params.lambda = as_number(v, k); }},
                   {"beta", [&](auto& v, auto& k) {
                      c.params.beta = as_number(v, k);
                      c.beta_ratio.reset();
                    }},
                   {"beta_ratio", [&](auto& v, auto& k) { c.beta_ratio = as_number(v, k); }},
                   {"indefinite", [&](auto& v, auto& k) { c.params.indefinite_mode = as_bool(v, k); }}});
      if (t.count("beta") && t.count("beta_ratio"))
        throw ConfigError("give either beta or beta_ratio, not both", t.at("beta_ratio").line);
    } else if (name == "potential") {
      if (auto it = t.find("kind"); it != t.end()) {
        WellKind kind;
        try {
          kind = well_kind_from_string(as_string(it->second, "kind"));
        } catch (const ConfigError&) {
          throw;
        } catch (const Error& e) {
          throw ConfigError(e.what(), it->second.line);
        }
        switch (kind) {
          case WellKind::ball: c.potential = Potential::ball_well(); break;
          case WellKind::box: c.potential = Potential::box_well(); break;
          case WellKind::annulus: c.potential = Potential::annulus_well(); break;
          case WellKind::smooth_ramp: c.potential = Potential::smooth_ramp_well(); break;
        }
      }
      Potential& p = c.potential;
      apply_table(t, name,
                  {{"kind", [](auto&, auto&) {}},
                   {"radius", [&](auto& v, auto& k) { p.radius = as_number(v, k); }},
                   {"half_widths", [&](auto& v, auto& k) { p.half_widths = as_numbers(v, k); }},
                   {"inner_radius", [&](auto& v, auto& k) { p.inner_radius = as_number(v, k); }},
                   {"outer_radius", [&](auto& v, auto& k) { p.outer_radius = as_number(v, k); }},
                   {"ramp_width", [&](auto& v, auto& k) { p.ramp_width = as_number(v, k); }},
                   {"M0", [&](auto& v, auto& k) { p.M0 = as_number(v, k); }},
                   {"height_cap",
                    [&](auto& v, auto& k) {
                      if (const auto* s = std::get_if<std::string>(&v.v)) {
                        if (*s != "none") throw ConfigError("height_cap must be a number or \"none\"", v.line);
                        p.height_cap.reset();
                      } else {
                        p.height_cap = as_number(v, k);
                      }
                    }},
                   {"origin_override", [&](auto& v, auto& k) { p.origin_override = as_bool(v, k); }}});
    } else if (name == "grid") {
      apply_table(t, name,
                  {{"n", [&](auto& v, auto& k) { c.n = as_int(v, k); }},
                   {"half_width", [&](auto& v, auto& k) { c.half_width = as_number(v, k); }},
                   {"radial_intervals", [&](auto& v, auto& k) { c.radial_intervals = as_int(v, k); }}});
    } else if (name == "solver") {
      SolverOptions& s = c.solver;
      apply_table(t, name,
                  {{"grad_tol", [&](auto& v, auto& k) { s.grad_tol = as_number(v, k); }},
                   {"max_iter", [&](auto& v, auto& k) { s.max_iter = as_int(v, k); }},
                   {"step_min", [&](auto& v, auto& k) { s.step_min = as_number(v, k); }},
                   {"step_max", [&](auto& v, auto& k) { s.step_max = as_number(v, k); }},
                   {"divergence_window", [&](auto& v, auto& k) { s.divergence_window = as_int(v, k); }},
                   {"memory", [&](auto& v, auto& k) { s.memory = as_int(v, k); }},
                   {"kappa", [&](auto& v, auto& k) { s.kappa = as_number(v, k); }},
                   {"ps_factor", [&](auto& v, auto& k) { s.ps_factor = as_number(v, k); }},
                   {"inner_steps", [&](auto& v, auto& k) { s.inner_steps = as_int(v, k); }}});
    } else if (name == "eigen") {
      EigenOptions& e = c.eig;
      apply_table(t, name,
                  {{"tol", [&](auto& v, auto& k) { e.tol = as_number(v, k); }},
                   {"max_iter", [&](auto& v, auto& k) { e.max_iter = as_int(v, k); }},
                   {"guard", [&](auto& v, auto& k) { e.guard = as_int(v, k); }},
                   {"kappa", [&](auto& v, auto& k) { e.kappa = as_number(v, k); }},
                   {"inner_steps", [&](auto& v, auto& k) { e.inner_steps = as_int(v, k); }},
                   {"count", [&](auto& v, auto& k) { c.eig_count = as_int(v, k); }},
                   {"degeneracy_margin", [&](auto& v, auto& k) { c.degeneracy_margin = as_number(v, k); }}});
    } else if (name == "run") {
      apply_table(t, name,
                  {{"output", [&](auto& v, auto& k) { c.output = as_string(v, k); }},
                   {"seed",
                    [&](auto& v, auto& k) {
                      const double d = as_number(v, k);
                      if (d < 0 || d != std::floor(d) || d > 9e15) throw ConfigError("'seed' must be a non-negative integer", v.line);
                      c.seed = static_cast<std::uint64_t>(d);
                    }},
                   {"init_eps", [&](auto& v, auto& k) { c.init_eps = as_number(v, k); }},
                   {"lambdas", [&](auto& v, auto& k) { c.lambdas = as_numbers(v, k); }},
                   {"beta_ratios", [&](auto& v, auto& k) { c.beta_ratios = as_numbers(v, k); }},
                   {"eps_list", [&](auto& v, auto& k) { c.eps_list = as_numbers(v, k); }},
                   {"delta", [&](auto& v, auto& k) { c.delta = as_number(v, k); }},
                   {"multistart_seeds", [&](auto& v, auto& k) { c.multistart_seeds = as_int(v, k); }},
                   {"snapshots", [&](auto& v, auto& k) { c.snapshots = as_bool(v, k); }}});
    } else {
      const auto h = doc.header_lines.find(name);
      const int line = h != doc.header_lines.end() ? h->second : (t.empty() ? 0 : t.begin()->second.line);
      throw ConfigError("unknown table [" + name + "]", line);
    }
  }
  return c;
}

void RunConfig::validate() const {
  params.validate();
  potential.check();
  if (n < 16 || (n & (n - 1)) != 0) throw ConfigError("grid.n must be a power of two >= 16");
  if (!(half_width > 0.0)) throw ConfigError("grid.half_width must be positive");
  if (!(half_width > potential.extent(params.N)))
    throw ConfigError("grid.half_width must exceed the extent of the potential well");
  if (radial_intervals < 6 || radial_intervals % 2) throw ConfigError("grid.radial_intervals must be even and >= 6");
  if (beta_ratio && !(*beta_ratio > 0.0)) throw ConfigError("problem.beta_ratio must be positive");
  if (init_eps && !(*init_eps > 0.0)) throw ConfigError("run.init_eps must be positive");
  if (!(solver.grad_tol > 0.0) || solver.max_iter < 1) throw ConfigError("solver tolerances must be positive");
  if (!(solver.step_min > 0.0 && solver.step_max >= solver.step_min)) throw ConfigError("need 0 < step_min <= step_max");
  if (solver.inner_steps < 0) throw ConfigError("solver.inner_steps must be >= 0");
  if (!(eig.tol > 0.0) || eig.max_iter < 1 || eig.guard < 0) throw ConfigError("eigen options out of range");
  if (eig_count < 1) throw ConfigError("eigen.count must be >= 1");
  if (!(degeneracy_margin > 0.0)) throw ConfigError("eigen.degeneracy_margin must be positive");
  if (!(delta > 0.0)) throw ConfigError("run.delta must be positive");
  if (multistart_seeds < 1) throw ConfigError("run.multistart_seeds must be >= 1");
  if (output.empty()) throw ConfigError("run.output must not be empty");
}

namespace {

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string nums(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s + "]";
}

}  // namespace

std::string canonical_text(const RunConfig& c) {
  std::ostringstream o;
  const Potential& p = c.potential;
  o << "problem.N=" << c.params.N << "\nproblem.mu=" << num(c.params.mu) << "\nproblem.lambda=" << num(c.params.lambda)
    << "\nproblem.beta=" << num(c.params.beta)
    << "\nproblem.beta_ratio=" << (c.beta_ratio ? num(*c.beta_ratio) : "none")
    << "\nproblem.indefinite=" << c.params.indefinite_mode << "\npotential.kind=" << to_string(p.kind)
    << "\npotential.radius=" << num(p.radius) << "\npotential.half_widths=" << nums(p.half_widths)
    << "\npotential.inner_radius=" << num(p.inner_radius) << "\npotential.outer_radius=" << num(p.outer_radius)
    << "\npotential.ramp_width=" << num(p.ramp_width) << "\npotential.M0=" << num(p.M0)
    << "\npotential.height_cap=" << (p.height_cap ? num(*p.height_cap) : "none")
    << "\npotential.origin_override=" << p.origin_override << "\ngrid.n=" << c.n
    << "\ngrid.half_width=" << num(c.half_width) << "\ngrid.radial_intervals=" << c.radial_intervals
    << "\nsolver.grad_tol=" << num(c.solver.grad_tol) << "\nsolver.max_iter=" << c.solver.max_iter
    << "\nsolver.step_min=" << num(c.solver.step_min) << "\nsolver.step_max=" << num(c.solver.step_max)
    << "\nsolver.divergence_window=" << c.solver.divergence_window << "\nsolver.memory=" << c.solver.memory
    << "\nsolver.kappa=" << num(c.solver.kappa) << "\nsolver.ps_factor=" << num(c.solver.ps_factor)
    << "\nsolver.inner_steps=" << c.solver.inner_steps
    << "\neigen.tol=" << num(c.eig.tol) << "\neigen.max_iter=" << c.eig.max_iter << "\neigen.guard=" << c.eig.guard
    << "\neigen.kappa=" << num(c.eig.kappa) << "\neigen.inner_steps=" << c.eig.inner_steps
    << "\neigen.count=" << c.eig_count << "\neigen.degeneracy_margin=" << num(c.degeneracy_margin)
    << "\nrun.output=" << c.output << "\nrun.seed=" << c.seed
    << "\nrun.init_eps=" << (c.init_eps ? num(*c.init_eps) : "auto") << "\nrun.lambdas=" << nums(c.lambdas)
    << "\nrun.beta_ratios=" << nums(c.beta_ratios) << "\nrun.eps_list=" << nums(c.eps_list)
    << "\nrun.delta=" << num(c.delta) << "\nrun.multistart_seeds=" << c.multistart_seeds
    << "\nrun.snapshots=" << c.snapshots << "\n";
  return o.str();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_text(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace choquard
