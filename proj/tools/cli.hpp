#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polarfermi/functional.hpp"
#include "polarfermi/kappa.hpp"
#include "polarfermi/mlimits.hpp"
#include "polarfermi/spectral.hpp"
#include "polarfermi/toy1d.hpp"

namespace polarfermi::cli {

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { ok = 0, config_error = 2, numerical_failure = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "min:max:count[:lin|log]" or a comma list "a,b,c".
inline std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw ConfigError(what + ": bad number '" + s + "'");
    return v;
  };
  if (spec.empty()) throw ConfigError(what + ": empty grid");
  if (spec.find(':') == std::string::npos) {
    std::vector<double> out;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(number(item));
    return out;
  }
  std::vector<std::string> f;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) f.push_back(item);
  if (f.size() < 3 || f.size() > 4) throw ConfigError(what + ": expected min:max:count[:lin|log], got '" + spec + "'");
  const double lo = number(f[0]), hi = number(f[1]);
  const double cnt = number(f[2]);
  if (cnt != std::floor(cnt) || cnt < 2 || cnt > 1e6) throw ConfigError(what + ": grid count must be an integer >= 2");
  const bool log = f.size() == 4 && f[3] == "log";
  if (f.size() == 4 && !log && f[3] != "lin") throw ConfigError(what + ": spacing must be lin or log");
  if (log && !(lo > 0.0 && hi > 0.0)) throw ConfigError(what + ": log grid needs positive bounds");
  const auto n = static_cast<std::size_t>(cnt);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = double(k) / double(n - 1);
    out[k] = log ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
  }
  out.back() = hi;
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> meta;
};

inline std::string cell_text(const Cell& c) {
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<double>(c)) return fmt(std::get<double>(c));
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return "";
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
  if (std::holds_alternative<double>(c)) return std::get<double>(c);
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return nullptr;
}

inline std::string hash_text(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_csv(std::ostream& os, const std::string& command, std::uint64_t hash, const Table& t) {
  os << "# command: " << command << '\n' << "# version: " << kVersion << '\n' << "# config_hash: " << hash_text(hash) << '\n';
  for (const auto& [k, v] : t.meta) os << "# " << k << ": " << cell_text(v) << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

inline void write_json(std::ostream& os, const std::string& command, std::uint64_t hash, const Table& t) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config_hash"] = hash_text(hash);
  j["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.meta) j["meta"][k] = cell_json(v);
  j["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    j["rows"].push_back(std::move(r));
  }
  os << j.dump(2) << '\n';
}

// fn(i) for i < n on `jobs` threads; results in index order, first failure (by index) rethrown.
template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F fn) {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i].emplace(fn(i));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), std::max<std::size_t>(n, 1)));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(work);
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  std::vector<R> res;
  res.reserve(n);
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

struct RunConfig {
  std::string command;
  double mu_bar = 1.0;
  double coupling = 0.7;
  std::string potential = "gaussian";
  double depth = -1.0;
  double width = 1.0;
  std::string potential_file;
  double lambda = 0.2;
  int ell_max = 40;
  std::string kind = "all";
  std::vector<std::string> t_grid, T_grid, dm_grid;  // comma pieces, rejoined before parsing
  std::string units = "tc";
  double rel_tol = 1e-12;
  double root_tol = 1e-13;
  std::string out = "-";
  std::string curves_out;
  std::string format = "csv";
  unsigned jobs = 1;

  QuadOptions quad() const {
    QuadOptions o;
    o.rel_tol = rel_tol;
    o.root_tol = root_tol;
    return o;
  }
};

inline std::string joined(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
  return s;
}

inline std::vector<double> grid_or(const std::vector<std::string>& parts, const char* fallback, const std::string& what) {
  return parse_grid(parts.empty() ? std::string(fallback) : joined(parts), what);
}

// Everything that determines the numbers, in a fixed order; output path, format and jobs excluded.
inline std::string canonical(const RunConfig& c, const std::vector<std::pair<std::string, std::vector<double>>>& grids) {
  std::string s = "command=" + c.command + "\nmu_bar=" + fmt(c.mu_bar) + "\ncoupling=" + fmt(c.coupling) +
                  "\npotential=" + c.potential + "\ndepth=" + fmt(c.depth) + "\nwidth=" + fmt(c.width) +
                  "\npotential_file=" + c.potential_file + "\nlambda=" + fmt(c.lambda) +
                  "\nell_max=" + std::to_string(c.ell_max) + "\nkind=" + c.kind + "\nunits=" + c.units +
                  "\nrel_tol=" + fmt(c.rel_tol) + "\nroot_tol=" + fmt(c.root_tol) + "\n";
  for (const auto& [name, g] : grids) {
    s += name + "=";
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + fmt(g[i]);
    s += "\n";
  }
  return s;
}

inline RadialPotential load_potential(const RunConfig& c) {
  if (!c.potential_file.empty()) {
    std::ifstream in(c.potential_file);
    if (!in) throw ConfigError("cannot read potential file '" + c.potential_file + "'");
    std::vector<double> r, v;
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double a, b;
      if (!(ls >> a >> b)) {
        if (r.empty()) continue;  // header
        throw ConfigError("potential file: bad line '" + line + "'");
      }
      r.push_back(a);
      v.push_back(b);
    }
    return RadialPotential::sampled(std::move(r), std::move(v));
  }
  if (c.potential == "gaussian") return RadialPotential::gaussian(c.depth, c.width);
  if (c.potential == "exponential") return RadialPotential::exponential(c.depth, c.width);
  throw ConfigError("unknown potential '" + c.potential + "' (gaussian, exponential)");
}

inline std::vector<Kind> curve_kinds(const std::string& k) {
  if (k == "all") return {Kind::i, Kind::g, Kind::o};
  try {
    return {kind_from_string(k)};
  } catch (const std::invalid_argument&) {
    throw ConfigError("unknown curve kind '" + k + "' (i, g, o, all)");
  }
}

struct Output {
  Table main;
  std::optional<Table> curves;  // toy1d boundary file
  bool failed = false;          // numerical failure flag (e.g. anomaly) after writing
  std::string failure;
};

inline Output cmd_kappa(const RunConfig& c, const std::vector<double>& ts) {
  const auto opt = c.quad();
  for (double t : ts)
    if (!(t >= 0.0)) throw ConfigError("t-grid: t must be >= 0");
  struct Row {
    double i, o, g, d;
  };
  const auto rows = parallel_map(ts.size(), c.jobs, [&](std::size_t k) {
    const double t = ts[k];
    const auto kg = kappa_g(t, opt);
    return Row{kappa_i(t, opt), kappa_o(t, opt), kg.value, kg.minimizer_d};
  });
  Output o;
  o.main.columns = {"t", "kappa_i", "kappa_o", "kappa_g", "d_star"};
  for (std::size_t k = 0; k < ts.size(); ++k)
    o.main.rows.push_back({ts[k], rows[k].i, rows[k].o, rows[k].g, rows[k].d});
  return o;
}

inline void add_curve_rows(Table& t, const Curve& c) {
  for (const auto& p : c.points) t.rows.push_back({std::string(to_string(c.kind)), p.t, p.delta_mu_over_Tc, p.T_over_Tc});
}

inline Output cmd_curves(const RunConfig& c, const std::vector<double>& ts) {
  const auto opt = c.quad();
  for (double t : ts)
    if (!(t >= 0.0)) throw ConfigError("t-grid: t must be >= 0");
  const auto V = load_potential(c);
  const auto spec = v_mu_spectrum(V, c.mu_bar, 8);
  detail::require_attractive(V, c.mu_bar, spec);
  const double rho = rho_lambda(V, c.mu_bar, c.lambda, opt);
  if (!(rho < 0.0)) throw ConfigError("rho(lambda) = " + fmt(rho) + " >= 0: no weak-coupling transition");
  const double Tc = balanced_Tc(c.mu_bar, rho);
  const auto kinds = curve_kinds(c.kind);
  const auto curves = parallel_map(kinds.size() * ts.size(), c.jobs, [&](std::size_t k) {
    return universal_curve(kinds[k / ts.size()], {ts[k % ts.size()]}, opt).points.front();
  });
  Output o;
  o.main.columns = {"kind", "t", "delta_mu_over_Tc", "T_over_Tc"};
  o.main.meta = {{"potential", V.name()}, {"lambda", c.lambda}, {"rho", rho}, {"Tc", Tc}};
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& p = curves[k];
    o.main.rows.push_back({std::string(to_string(kinds[k / ts.size()])), p.t, p.delta_mu_over_Tc, p.T_over_Tc});
  }
  return o;
}

inline std::vector<MKind> m_kinds(const std::string& k) {
  if (k == "all") return {MKind::plain, MKind::bar, MKind::tilde};
  for (MKind m : {MKind::plain, MKind::tilde, MKind::bar})
    if (k == to_string(m) || k == to_string(asymptotic_kind(m))) return {m};
  throw ConfigError("unknown m kind '" + k + "' (plain|i, bar|g, tilde|o, all)");
}

inline Output cmd_mcheck(const RunConfig& c, const std::vector<double>& Ts, const std::vector<double>& ts) {
  const auto opt = c.quad();
  for (double T : Ts)
    if (!(T > 0.0)) throw ConfigError("T-grid: T must be > 0");
  for (double t : ts)
    if (!(t >= 0.0)) throw ConfigError("t-grid: t must be >= 0");
  const auto kinds = m_kinds(c.kind);
  const std::size_t per = Ts.size() * ts.size();
  const auto vals = parallel_map(kinds.size() * per, c.jobs, [&](std::size_t k) {
    const MKind m = kinds[k / per];
    const double T = Ts[(k % per) / ts.size()], t = ts[k % ts.size()];
    const PhysParams p{c.mu_bar, t * T, T, 1.0};
    return std::pair{m_by_kind(m, p, opt).value, m_asymptotic(T, t, c.mu_bar, asymptotic_kind(m), opt)};
  });
  Output o;
  o.main.columns = {"kind", "T", "t", "numeric", "asymptotic", "difference"};
  o.main.meta = {{"mu_bar", c.mu_bar}};
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const auto [num, asym] = vals[k];
    o.main.rows.push_back({std::string(to_string(kinds[k / per])), Ts[(k % per) / ts.size()], ts[k % ts.size()], num,
                           asym, num - asym});
  }
  return o;
}

// (delta_mu, T) pairs of the toy1d / phase sweeps in absolute units.
struct Sweep {
  double Tc = 0.0;
  std::vector<double> dms, Ts;
};

inline Sweep sweep_grids(const RunConfig& c, const std::vector<double>& dm_in, const std::vector<double>& T_in) {
  if (!(c.coupling > 0.0)) throw ConfigError("coupling must be > 0");
  if (!(c.mu_bar > 0.0)) throw ConfigError("mu-bar must be > 0");
  if (c.units != "tc" && c.units != "abs") throw ConfigError("units must be tc or abs");
  Sweep s;
  s.Tc = balanced_Tc_1d(c.coupling, c.mu_bar, c.quad());
  const double u = c.units == "tc" ? s.Tc : 1.0;
  for (double d : dm_in) {
    if (!(d >= 0.0)) throw ConfigError("dm-grid: delta_mu must be >= 0");
    s.dms.push_back(d * u);
  }
  for (double T : T_in) {
    if (!(T > 0.0)) throw ConfigError("T-grid: T must be > 0");
    s.Ts.push_back(T * u);
  }
  return s;
}

inline Output cmd_toy1d(const RunConfig& c, const Sweep& s) {
  const auto opt = c.quad();
  const std::size_t n = s.dms.size() * s.Ts.size();
  const auto sols = parallel_map(n, c.jobs, [&](std::size_t k) {
    return solve_gap_1d({c.mu_bar, s.dms[k / s.Ts.size()], s.Ts[k % s.Ts.size()], c.coupling}, opt);
  });
  Output o;
  o.main.columns = {"delta_mu", "T", "count", "root_1", "root_2"};
  o.main.meta = {{"coupling", c.coupling}, {"mu_bar", c.mu_bar}, {"Tc", s.Tc}};
  for (const auto& sol : sols) {
    std::vector<Cell> row{sol.params.delta_mu, sol.params.T, static_cast<long long>(sol.count)};
    for (std::size_t r = 0; r < std::max<std::size_t>(2, sol.roots.size()); ++r)
      row.push_back(r < sol.roots.size() ? Cell{sol.roots[r]} : Cell{});
    if (sol.anomaly && !o.failed) {
      o.failed = true;
      o.failure = "toy1d: " + std::to_string(sol.count) + " gap solutions at " + sol.params.describe();
    }
    o.main.rows.push_back(std::move(row));
  }
  if (o.failed) {
    std::size_t widest = 0;
    for (const auto& r : o.main.rows) widest = std::max(widest, r.size());
    for (std::size_t r = 2; r + 3 < widest; ++r) o.main.columns.push_back("root_" + std::to_string(r + 1));
    for (auto& r : o.main.rows) r.resize(widest);
  }
  // boundaries on the same delta_mu grid
  const std::vector<Kind> kinds{Kind::i, Kind::g, Kind::o};
  const auto curves = parallel_map(kinds.size() * s.dms.size(), c.jobs, [&](std::size_t k) {
    return curve_1d(c.coupling, c.mu_bar, {s.dms[k % s.dms.size()]}, kinds[k / s.dms.size()], {}, opt);
  });
  Table t;
  t.columns = {"kind", "t", "delta_mu_over_Tc", "T_over_Tc"};
  t.meta = {{"coupling", c.coupling}, {"mu_bar", c.mu_bar}, {"Tc", s.Tc}};
  for (const auto& cv : curves) add_curve_rows(t, cv);
  o.curves = std::move(t);
  return o;
}

inline Output cmd_spectrum(const RunConfig& c) {
  const auto opt = c.quad();
  if (c.ell_max < 0 || c.ell_max > 2000) throw ConfigError("ell-max must be in [0, 2000]");
  if (!(c.mu_bar > 0.0)) throw ConfigError("mu-bar must be > 0");
  const auto V = load_potential(c);
  const auto s = analyze_potential(V, c.mu_bar, c.ell_max, c.lambda, opt);
  Output o;
  o.main.columns = {"ell", "e_ell"};
  for (std::size_t l = 0; l < s.e_ell.size(); ++l) o.main.rows.push_back({static_cast<long long>(l), s.e_ell[l]});
  const double tp = s.trace_partial();
  o.main.meta = {{"potential", V.name()},
                 {"mu_bar", c.mu_bar},
                 {"ell_max", static_cast<long long>(c.ell_max)},
                 {"e_mu", s.e_mu},
                 {"ground_ell", static_cast<long long>(s.ground_ell)},
                 {"trace_partial", tp},
                 {"trace_exact", s.trace_exact},
                 {"trace_rel_error", std::abs(tp - s.trace_exact) / std::abs(s.trace_exact)},
                 {"w_form", *s.w_form},
                 {"lambda", c.lambda}};
  if (s.rho) {
    o.main.meta.emplace_back("rho", *s.rho);
    if (*s.rho < 0.0) o.main.meta.emplace_back("Tc", balanced_Tc(c.mu_bar, *s.rho));
  }
  for (std::size_t k = 0; k < s.warnings.size(); ++k) o.main.meta.emplace_back("warning", s.warnings[k]);
  return o;
}

inline Output cmd_phase(const RunConfig& c, const Sweep& s) {
  const auto opt = c.quad();
  const std::size_t n = s.dms.size() * s.Ts.size();
  const auto res = parallel_map(n, c.jobs, [&](std::size_t k) {
    return phase_decision({c.mu_bar, s.dms[k / s.Ts.size()], s.Ts[k % s.Ts.size()], c.coupling}, {}, opt);
  });
  Output o;
  o.main.columns = {"delta_mu", "T", "label", "F_normal", "F_best"};
  o.main.meta = {{"coupling", c.coupling}, {"mu_bar", c.mu_bar}, {"Tc", s.Tc}};
  for (std::size_t k = 0; k < n; ++k)
    o.main.rows.push_back({s.dms[k / s.Ts.size()], s.Ts[k % s.Ts.size()], std::string(to_string(res[k].phase)),
                           res[k].F_normal, res[k].F_best});
  return o;
}

inline std::string derived_path(const std::string& out, const std::string& format) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  const std::string stem = dot != std::string::npos && (slash == std::string::npos || dot > slash) ? out.substr(0, dot) : out;
  return stem + "_curves." + format;
}

inline void emit(const RunConfig& c, const Table& t, std::uint64_t hash, const std::string& path, std::ostream& out) {
  auto write = [&](std::ostream& os) {
    if (c.format == "json")
      write_json(os, c.command, hash, t);
    else
      write_csv(os, c.command, hash, t);
  };
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  write(f);
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

inline unsigned default_jobs() {
  if (const char* env = std::getenv("POLARFERMI_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"BCS phase diagram of a spin-imbalanced Fermi gas", "polarfermi"};
  app.fallthrough();
  app.set_config("--config", "", "flat key=value file; flags override its keys");
  app.allow_config_extras(false);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  RunConfig c;
  c.jobs = 0;
  app.add_option("--mu-bar", c.mu_bar, "shifted chemical potential")->capture_default_str();
  app.add_option("-g,--coupling", c.coupling, "1-D contact coupling g")->capture_default_str();
  app.add_option("--potential", c.potential, "built-in potential: gaussian | exponential")->capture_default_str();
  app.add_option("--depth", c.depth, "potential depth (negative = attractive)")->capture_default_str();
  app.add_option("--width", c.width, "potential length scale")->capture_default_str();
  app.add_option("--potential-file", c.potential_file, "sampled radial profile: two columns r, V(r)");
  app.add_option("--lambda", c.lambda, "coupling strength lambda")->capture_default_str();
  app.add_option("--ell-max", c.ell_max, "highest Legendre channel")->capture_default_str();
  app.add_option("--kind", c.kind, "curve kind i|g|o|all, or m kind plain|bar|tilde|all")->capture_default_str();
  app.add_option("--t-grid", c.t_grid, "t = delta_mu/T grid: min:max:count[:log] or a,b,c")->delimiter(',');
  app.add_option("--T-grid", c.T_grid, "temperature grid")->delimiter(',');
  app.add_option("--dm-grid", c.dm_grid, "delta_mu grid")->delimiter(',');
  app.add_option("--units", c.units, "toy1d/phase grids in units of the balanced Tc (tc) or absolute (abs)")
      ->capture_default_str();
  app.add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance")->capture_default_str();
  app.add_option("--root-tol", c.root_tol, "root-finding tolerance")->capture_default_str();
  app.add_option("-o,--out", c.out, "output file, - for stdout")->capture_default_str();
  app.add_option("--curves-out", c.curves_out, "toy1d boundary file (default: <out>_curves.<format>)");
  app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("-j,--jobs", c.jobs, "worker threads (default: POLARFERMI_JOBS or all cores)");

  app.add_subcommand("kappa", "kappa^i, kappa^o, kappa^g and d* on a t grid");
  app.add_subcommand("curves", "weak-coupling boundaries T/Tc against delta_mu/Tc for a potential");
  app.add_subcommand("m-check", "finite-T m integrals against their asymptotes");
  app.add_subcommand("toy1d", "1-D gap solution counts on a (delta_mu, T) grid, plus boundary curves");
  app.add_subcommand("spectrum", "Fermi-sphere spectrum, W form and rho(lambda)");
  app.add_subcommand("phase", "free-energy phase labels on a (delta_mu, T) grid");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Exit::ok : Exit::config_error;
  }
  c.command = app.get_subcommands().front()->get_name();
  if (c.jobs == 0) c.jobs = default_jobs();

  try {
    if (!(c.rel_tol > 0.0 && c.rel_tol <= 1e-2)) throw ConfigError("rel-tol must be in (0, 1e-2]");
    if (!(c.root_tol > 0.0 && c.root_tol <= 1e-2)) throw ConfigError("root-tol must be in (0, 1e-2]");
    std::vector<std::pair<std::string, std::vector<double>>> grids;
    Output o;
    if (c.command == "kappa") {
      grids.emplace_back("t_grid", grid_or(c.t_grid, "0:5:51", "t-grid"));
      o = cmd_kappa(c, grids[0].second);
    } else if (c.command == "curves") {
      grids.emplace_back("t_grid", grid_or(c.t_grid, "0:5:51", "t-grid"));
      o = cmd_curves(c, grids[0].second);
    } else if (c.command == "m-check") {
      grids.emplace_back("T_grid", grid_or(c.T_grid, "1e-2,1e-3,1e-4", "T-grid"));
      grids.emplace_back("t_grid", grid_or(c.t_grid, "0,1,2.5,3", "t-grid"));
      o = cmd_mcheck(c, grids[0].second, grids[1].second);
    } else if (c.command == "toy1d" || c.command == "phase") {
      const bool tc = c.units == "tc";
      grids.emplace_back("dm_grid", grid_or(c.dm_grid, tc ? "0:1.5:20" : "0:0.075:20", "dm-grid"));
      grids.emplace_back("T_grid", grid_or(c.T_grid, tc ? "0.05:1.3:20" : "0.0025:0.065:20", "T-grid"));
      const auto s = sweep_grids(c, grids[0].second, grids[1].second);
      o = c.command == "toy1d" ? cmd_toy1d(c, s) : cmd_phase(c, s);
    } else {
      o = cmd_spectrum(c);
    }
    const std::uint64_t hash = fnv1a(canonical(c, grids));
    emit(c, o.main, hash, c.out, out);
    if (o.curves && (c.out != "-" || !c.curves_out.empty()))
      emit(c, *o.curves, hash, c.curves_out.empty() ? derived_path(c.out, c.format) : c.curves_out, out);
    if (o.failed) {
      err << "numerical failure: " << o.failure << '\n';
      return Exit::numerical_failure;
    }
    return Exit::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n' << "run with --help for usage\n";
    return Exit::config_error;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return Exit::config_error;
  } catch (const std::exception& e) {  // NumericalError and anything else unexpected
    err << "numerical failure: " << e.what() << '\n';
    return Exit::numerical_failure;
  }
}

}  // namespace polarfermi::cli
