// Command-line front end: curve, figure, asymptotics, verify.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error, 3 numerical failure (no convergence at the requested tolerances).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "decaylab/decaylab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace decaylab;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MddSpec {
  std::string family = "toy";
  double alpha = 0.0;
  double xi0 = 1.0;
  double m0 = 1.0;
  double gamma_bar = 0.1;
  std::string path;  // tabulated family only
};

struct GridSpec {
  std::string kind = "linear";
  double start = 0.0;
  double stop = 20.0;
  int count = 201;
};

struct RunConfig {
  MddSpec mdd;
  std::vector<double> rho = {0.0};
  GridSpec grid;
  QuadratureConfig quad;
  std::string format = "csv";
  std::string out = ".";
  double mass_scale = 1.0;
  int threads = 1;
};

std::string g17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string gshort(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%g", v);
  return b;
}

void write_atomic(const fs::path& p, const std::string& text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw UsageError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
  std::printf("wrote %s\n", p.string().c_str());
}

void expect_keys(const json& j, const std::vector<std::string>& allowed,
                 const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw UsageError("unknown key '" + key + "' in " + where);
  }
}

void load_config_into(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config parse error in " + path + ": " + e.what());
  }
  expect_keys(j, {"mdd", "rho", "grid", "quadrature", "format", "out",
                  "mass_scale", "threads"}, path);
  try {
    if (j.contains("mdd")) {
      const json& m = j["mdd"];
      expect_keys(m, {"family", "alpha", "xi0", "m0", "gamma_bar", "path"},
                  "mdd");
      rc.mdd.family = m.value("family", rc.mdd.family);
      rc.mdd.alpha = m.value("alpha", rc.mdd.alpha);
      rc.mdd.xi0 = m.value("xi0", rc.mdd.xi0);
      rc.mdd.m0 = m.value("m0", rc.mdd.m0);
      rc.mdd.gamma_bar = m.value("gamma_bar", rc.mdd.gamma_bar);
      rc.mdd.path = m.value("path", rc.mdd.path);
    }
    if (j.contains("rho")) {
      rc.rho = j["rho"].get<std::vector<double>>();
    }
    if (j.contains("grid")) {
      const json& g = j["grid"];
      expect_keys(g, {"kind", "start", "stop", "count"}, "grid");
      rc.grid.kind = g.value("kind", rc.grid.kind);
      rc.grid.start = g.value("start", rc.grid.start);
      rc.grid.stop = g.value("stop", rc.grid.stop);
      rc.grid.count = g.value("count", rc.grid.count);
    }
    if (j.contains("quadrature")) {
      const json& q = j["quadrature"];
      expect_keys(q, {"target_abs_error", "max_panels", "truncation_tail_bound",
                      "endpoint_rule", "panel_order"}, "quadrature");
      rc.quad.target_abs_error =
          q.value("target_abs_error", rc.quad.target_abs_error);
      rc.quad.max_panels = q.value("max_panels", rc.quad.max_panels);
      rc.quad.truncation_tail_bound =
          q.value("truncation_tail_bound", rc.quad.truncation_tail_bound);
      rc.quad.panel_order = q.value("panel_order", rc.quad.panel_order);
      if (q.contains("endpoint_rule")) {
        std::string r = q["endpoint_rule"].get<std::string>();
        if (r == "jacobi-weighted")
          rc.quad.endpoint_rule = EndpointRule::jacobi_weighted;
        else if (r == "tanh-sinh")
          rc.quad.endpoint_rule = EndpointRule::tanh_sinh;
        else
          throw UsageError("endpoint_rule must be jacobi-weighted or tanh-sinh");
      }
    }
    rc.format = j.value("format", rc.format);
    rc.out = j.value("out", rc.out);
    rc.mass_scale = j.value("mass_scale", rc.mass_scale);
    rc.threads = j.value("threads", rc.threads);
  } catch (const json::exception& e) {
    throw UsageError("config field error in " + path + ": " + e.what());
  }
}

void validate_config(const RunConfig& rc) {
  if (rc.format != "csv" && rc.format != "json")
    throw UsageError("format must be csv or json, got '" + rc.format + "'");
  if (rc.threads < 1 || rc.threads > 256)
    throw UsageError("threads must be between 1 and 256");
  if (!(rc.mass_scale > 0.0) || !std::isfinite(rc.mass_scale))
    throw UsageError("mass-scale must be a positive finite number");
  if (!(rc.quad.target_abs_error > 0.0))
    throw UsageError("quadrature target_abs_error must be > 0");
  if (rc.quad.panel_order < 7)
    throw UsageError("quadrature panel_order must be at least 7");
  if (rc.quad.max_panels < 1)
    throw UsageError("quadrature max_panels must be at least 1");
  if (!(rc.quad.truncation_tail_bound > 0.0))
    throw UsageError("quadrature truncation_tail_bound must be > 0");
  if (rc.rho.empty()) throw UsageError("rho list must not be empty");
  for (double r : rc.rho)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw UsageError("rho values must be finite and >= 0");
}

MassDistribution build_mdd(const MddSpec& s) {
  if (s.family == "toy") return make_toy_mdd(s.alpha, s.xi0);
  if (s.family == "breit-wigner")
    return make_breit_wigner(s.m0, s.gamma_bar, s.xi0);
  if (s.family == "table") {
    if (s.path.empty())
      throw UsageError("mdd family 'table' requires a 'path' entry");
    return load_tabulated_mdd(s.path);
  }
  throw UsageError("unknown mdd family '" + s.family +
                   "' (expected toy, breit-wigner, or table)");
}

TimeGrid build_grid(const GridSpec& g) {
  if (g.count < 1) throw UsageError("grid count must be at least 1");
  TimeGrid grid;
  if (g.kind == "linear")
    grid = TimeGrid::linear(g.start, g.stop, g.count);
  else if (g.kind == "geometric")
    grid = TimeGrid::geometric(g.start, g.stop, g.count);
  else
    throw UsageError("grid kind must be linear or geometric");
  grid.ensure_valid();
  return grid;
}

// ---------------------------------------------------------------- curve ----

int run_curve(const RunConfig& rc, const MassDistribution& mdd,
              const TimeGrid& grid) {
  bool any_noconv = false;
  for (double rho : rc.rho) {
    auto kin = Kinematics::make(rho, mdd.xi0);
    DecayCurve c = decay_curve(mdd, kin, grid, rc.quad, rc.threads);
    const std::string base = "curve_rho" + gshort(rho);
    if (rc.format == "csv") {
      std::string text = "tau,re_A,im_A,abs_err,P,M,Gamma,flag\n";
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        text += g17(c.grid[i] / rc.mass_scale);
        text += ',';
        text += g17(c.amplitude[i].value.real());
        text += ',';
        text += g17(c.amplitude[i].value.imag());
        text += ',';
        text += g17(c.amplitude[i].abs_error_estimate);
        text += ',';
        text += g17(c.survival[i]);
        text += ',';
        text += g17(c.mass[i] * rc.mass_scale);
        text += ',';
        text += g17(c.rate[i] * rc.mass_scale);
        text += ',';
        text += to_string(c.flags[i]);
        text += '\n';
        if (c.flags[i] == PointFlag::no_convergence) any_noconv = true;
      }
      write_atomic(fs::path(rc.out) / (base + ".csv"), text);
    } else {
      json points = json::array();
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        points.push_back({{"tau", c.grid[i] / rc.mass_scale},
                          {"re_A", c.amplitude[i].value.real()},
                          {"im_A", c.amplitude[i].value.imag()},
                          {"abs_err", c.amplitude[i].abs_error_estimate},
                          {"P", c.survival[i]},
                          {"M", c.mass[i] * rc.mass_scale},
                          {"Gamma", c.rate[i] * rc.mass_scale},
                          {"flag", to_string(c.flags[i])}});
        if (c.flags[i] == PointFlag::no_convergence) any_noconv = true;
      }
      json j = {{"mdd", mdd.name},
                {"rho", rho},
                {"mass_scale", rc.mass_scale},
                {"points", points}};
      write_atomic(fs::path(rc.out) / (base + ".json"), j.dump(2) + "\n");
    }
  }
  if (any_noconv) {
    std::fprintf(stderr,
                 "curve: some points did not converge at the requested "
                 "tolerance; they are flagged in the output\n");
    return 3;
  }
  return 0;
}

// --------------------------------------------------------------- figure ----

enum class FigKind {
  survival,
  abs_log_p,
  momentum_ratio,
  scaled_ratio,
  mass,
  rate,
  mass_dev,
  mass_ratio,
  rate_ratio,
  abs_log_rate,
};

struct FigCurveSpec {
  std::string label;
  double alpha;
  double rho;
};

struct FigureSpec {
  FigKind kind = FigKind::survival;
  double t0 = 0.0, t1 = 1.0;
  bool log_grid = false;
  std::vector<FigCurveSpec> curves;
};

std::vector<FigCurveSpec> rho_family(double alpha, int lo, int hi) {
  std::vector<FigCurveSpec> v;
  for (int r = lo; r <= hi; ++r)
    v.push_back({"rho" + std::to_string(r), alpha, static_cast<double>(r)});
  return v;
}

// All figures use the built-in density family at xi0 = 1; times stay
// dimensionless regardless of --mass-scale.
FigureSpec figure_spec(int n) {
  const double e = std::exp(1.0);
  switch (n) {
    case 1:
      return {FigKind::survival, 0.0, 20.0, false, rho_family(0.0, 0, 4)};
    case 2:
      return {FigKind::survival, 0.0, 15.0, false, rho_family(1.0, 0, 4)};
    case 3:
      return {FigKind::abs_log_p, 1.0 / e, std::exp(5.0), true,
              {{"a", 0, 5}, {"b", 0, 3}, {"c", 0, 0}, {"d", 1, 5}, {"e", 1, 2},
               {"f", 2, 4}, {"g", 2, 2}, {"h", 1, 0}, {"i", 2, 0}}};
    case 4:
      return {FigKind::momentum_ratio, 0.0, 50.0, false, rho_family(0.0, 1, 5)};
    case 5:
      return {FigKind::momentum_ratio, 0.0, 50.0, false,
              {{"a", 1, 2}, {"b", 1, 3}, {"c", 2, 2}, {"d", 1, 4}}};
    case 6:
      return {FigKind::scaled_ratio, 0.0, 50.0, false,
              {{"a", 0, 5}, {"b", 0, 4}, {"c", 0, 3}, {"d", 0, 2}, {"e", 0, 1}}};
    case 7:
      return {FigKind::scaled_ratio, 0.0, 60.0, false,
              {{"a", 2, 4}, {"b", 1, 5}, {"c", 2, 3}, {"d", 1, 2}, {"e", 1, 1}}};
    case 8:
      return {FigKind::mass, 0.0, 15.0, false, rho_family(1.0, 0, 4)};
    case 9:
      return {FigKind::mass, 0.0, 15.0, false, rho_family(2.0, 0, 4)};
    case 10:
      return {FigKind::rate, 0.0, 30.0, false,
              {{"a", 1, 4}, {"b", 1, 3}, {"c", 1, 2}, {"d", 1, 1}, {"e", 1, 0}}};
    case 11:
      return {FigKind::rate, 0.0, 30.0, false,
              {{"a", 2, 4}, {"b", 2, 3}, {"c", 2, 2}, {"d", 2, 1}, {"e", 2, 0}}};
    case 12:
      return {FigKind::mass_dev, e, std::exp(3.3), true,
              {{"a", 2, 4}, {"b", 2, 2}, {"c", 1, 2}, {"d", 2, 1}, {"e", 0, 3},
               {"f", 0, 5}}};
    case 13:
      return {FigKind::mass_ratio, 0.0, 10.0, false,
              {{"a", 1, 1}, {"b", 0, 1}, {"c", 1, 2}, {"d", 0, 2}, {"e", 2, 3},
               {"f", 1, 3}, {"g", 1, 4}, {"h", 0, 4}}};
    case 14:
      return {FigKind::abs_log_rate, std::exp(1.5), std::exp(3.8), true,
              {{"a", 2, 0}, {"b", 2, 2}, {"c", 2, 4}, {"d", 1, 0}, {"e", 1, 2},
               {"f", 1, 5}, {"g", 0, 0}, {"h", 0, 3}, {"i", 0, 5}}};
    case 15:
      return {FigKind::rate_ratio, 0.0, 30.0, false,
              {{"a", 1, 4}, {"b", 2, 3}, {"c", 2, 2}, {"d", 0, 2}, {"e", 0, 1}}};
    default:
      throw UsageError("figure number must be between 1 and 15");
  }
}

PointFlag worse(PointFlag a, PointFlag b) {
  auto rank = [](PointFlag f) {
    switch (f) {
      case PointFlag::ok: return 0;
      case PointFlag::derivative_unavailable: return 1;
      case PointFlag::ill_conditioned: return 2;
      case PointFlag::no_convergence: return 3;
    }
    return 3;
  };
  return rank(a) >= rank(b) ? a : b;
}

int run_figure(const RunConfig& rc, int n) {
  const FigureSpec spec = figure_spec(n);
  const TimeGrid grid = spec.log_grid
                            ? TimeGrid::geometric(spec.t0, spec.t1, 200)
                            : TimeGrid::linear(spec.t0, spec.t1, 400);
  const bool log_axis = spec.log_grid;

  std::map<std::pair<double, double>, DecayCurve> cache;
  auto curve_for = [&](double alpha, double rho) -> const DecayCurve& {
    auto key = std::make_pair(alpha, rho);
    auto it = cache.find(key);
    if (it == cache.end()) {
      auto mdd = make_toy_mdd(alpha, 1.0);
      it = cache
               .emplace(key, decay_curve(mdd, Kinematics::make(rho, 1.0), grid,
                                         rc.quad, rc.threads))
               .first;
    }
    return it->second;
  };

  bool any_noconv = false;
  for (const auto& cs : spec.curves) {
    std::string xname = log_axis ? "log_tau" : "tau";
    std::string yname;
    std::vector<double> ys(grid.points.size());
    std::vector<PointFlag> flags(grid.points.size(), PointFlag::ok);

    switch (spec.kind) {
      case FigKind::survival: {
        yname = "P";
        const auto& c = curve_for(cs.alpha, cs.rho);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = c.survival[i];
          flags[i] = c.flags[i];
        }
        break;
      }
      case FigKind::abs_log_p: {
        yname = "abs_log_P";
        const auto& c = curve_for(cs.alpha, cs.rho);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = std::abs(std::log(c.survival[i]));
          flags[i] = c.flags[i];
        }
        break;
      }
      case FigKind::momentum_ratio: {
        yname = "ratio";
        const auto& num = curve_for(cs.alpha, cs.rho);
        const auto& den = curve_for(cs.alpha, 0.0);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = num.survival[i] / den.survival[i];
          flags[i] = worse(num.flags[i], den.flags[i]);
        }
        break;
      }
      case FigKind::scaled_ratio: {
        yname = "ratio";
        const auto& num = curve_for(cs.alpha, cs.rho);
        auto mdd = make_toy_mdd(cs.alpha, 1.0);
        auto k0 = Kinematics::make(0.0, 1.0);
        const double chi = Kinematics::make(cs.rho, 1.0).dilation();
        for (std::size_t i = 0; i < ys.size(); ++i) {
          double den;
          PointFlag dflag = PointFlag::ok;
          try {
            den = survival_probability(
                amplitude(mdd, k0, grid.points[i] / chi, rc.quad));
          } catch (const ConvergenceFailure& e) {
            den = survival_probability(e.best());
            dflag = PointFlag::no_convergence;
          }
          ys[i] = num.survival[i] / den;
          flags[i] = worse(num.flags[i], dflag);
        }
        break;
      }
      case FigKind::mass: {
        yname = "M";
        const auto& c = curve_for(cs.alpha, cs.rho);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = c.mass[i];
          flags[i] = c.flags[i];
        }
        break;
      }
      case FigKind::rate: {
        yname = "Gamma";
        const auto& c = curve_for(cs.alpha, cs.rho);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = c.rate[i];
          flags[i] = c.flags[i];
        }
        break;
      }
      case FigKind::mass_dev: {
        yname = "abs_log_M_dev";
        const auto& c = curve_for(cs.alpha, cs.rho);
        const double eta0 = Kinematics::make(cs.rho, 1.0).eta0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = std::abs(std::log(std::abs(c.mass[i] / eta0 - 1.0)));
          flags[i] = c.flags[i];
        }
        break;
      }
      case FigKind::mass_ratio: {
        yname = "M_ratio";
        const auto& num = curve_for(cs.alpha, cs.rho);
        const auto& den = curve_for(cs.alpha, 0.0);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = num.mass[i] / den.mass[i];
          flags[i] = worse(num.flags[i], den.flags[i]);
        }
        break;
      }
      case FigKind::rate_ratio: {
        yname = "Gamma_ratio";
        const auto& num = curve_for(cs.alpha, cs.rho);
        const auto& den = curve_for(cs.alpha, 0.0);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = num.rate[i] / den.rate[i];
          flags[i] = worse(num.flags[i], den.flags[i]);
        }
        break;
      }
      case FigKind::abs_log_rate: {
        yname = "abs_log_Gamma";
        const auto& c = curve_for(cs.alpha, cs.rho);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          ys[i] = std::abs(std::log(c.rate[i]));
          flags[i] = c.flags[i];
        }
        break;
      }
    }

    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (!std::isfinite(ys[i]) && flags[i] == PointFlag::ok)
        flags[i] = PointFlag::ill_conditioned;
      if (flags[i] == PointFlag::no_convergence) any_noconv = true;
    }

    const std::string base = "figure" + std::to_string(n) + "_" + cs.label;
    if (rc.format == "csv") {
      std::string text = xname + "," + yname + ",flag\n";
      for (std::size_t i = 0; i < ys.size(); ++i) {
        double x = log_axis ? std::log(grid.points[i]) : grid.points[i];
        text += g17(x);
        text += ',';
        text += g17(ys[i]);
        text += ',';
        text += to_string(flags[i]);
        text += '\n';
      }
      write_atomic(fs::path(rc.out) / (base + ".csv"), text);
    } else {
      json rows = json::array();
      for (std::size_t i = 0; i < ys.size(); ++i) {
        double x = log_axis ? std::log(grid.points[i]) : grid.points[i];
        rows.push_back({x, ys[i], to_string(flags[i])});
      }
      json j = {{"figure", n}, {"label", cs.label},   {"x", xname},
                {"y", yname},  {"alpha", cs.alpha},   {"rho", cs.rho},
                {"rows", rows}};
      write_atomic(fs::path(rc.out) / (base + ".json"), j.dump(2) + "\n");
    }
  }
  return any_noconv ? 3 : 0;
}

// ---------------------------------------------------------- asymptotics ----

int run_asymptotics(const RunConfig& rc, const MassDistribution& mdd,
                    bool force_short) {
  json models = json::array();
  std::vector<std::pair<double, ShortTimeModel>> short_rows;
  std::vector<std::pair<double, LongTimeModel>> long_rows;
  for (double rho : rc.rho) {
    auto kin = Kinematics::make(rho, mdd.xi0);
    auto lt = long_time_model(mdd, kin);
    long_rows.push_back({rho, lt});
    json entry = {{"rho", rho},
                  {"long_time",
                   {{"c0", lt.c0},
                    {"chi_p", lt.chi_p},
                    {"m_p_inf", lt.m_p_inf},
                    {"zeta_p", lt.zeta_p},
                    {"zeta_bar_p", lt.zeta_bar_p},
                    {"zeta_0", lt.zeta_0},
                    {"kappa_p", lt.kappa_p}}}};
    try {
      auto st = short_time_model(mdd, kin, rc.quad);
      short_rows.push_back({rho, st});
      entry["short_time"] = {{"a0", st.a0},   {"a1", st.a1},
                             {"a2", st.a2},   {"pi0", st.pi0},
                             {"pi1", st.pi1}, {"pi2", st.pi2}};
    } catch (const DomainError& e) {
      if (force_short) {
        std::fprintf(stderr, "asymptotics: %s\n", e.what());
        return 3;
      }
      entry["short_time"] = nullptr;
    }
    models.push_back(entry);
  }

  if (rc.format == "json") {
    json j = {{"mdd", mdd.name},
              {"alpha", mdd.alpha},
              {"xi0", mdd.xi0},
              {"models", models}};
    write_atomic(fs::path(rc.out) / "asymptotics.json", j.dump(2) + "\n");
  } else {
    std::string text =
        "rho,chi_p,c0,m_p_inf,zeta_p,zeta_bar_p,zeta_0,kappa_p,"
        "a0,a1,a2,pi0,pi1,pi2\n";
    for (std::size_t i = 0; i < long_rows.size(); ++i) {
      const auto& [rho, lt] = long_rows[i];
      text += g17(rho);
      for (double v : {lt.chi_p, lt.c0, lt.m_p_inf, lt.zeta_p, lt.zeta_bar_p,
                       lt.zeta_0, lt.kappa_p}) {
        text += ',';
        text += g17(v);
      }
      const ShortTimeModel* st = nullptr;
      for (const auto& [r, m] : short_rows)
        if (r == rho) st = &m;
      if (st) {
        for (double v : {st->a0, st->a1, st->a2, st->pi0, st->pi1, st->pi2}) {
          text += ',';
          text += g17(v);
        }
      } else {
        text += ",,,,,,";
      }
      text += '\n';
    }
    write_atomic(fs::path(rc.out) / "asymptotics.csv", text);
  }
  return 0;
}

// --------------------------------------------------------------- verify ----

struct CheckRow {
  std::string name;
  double rho = -1.0;  // negative: not momentum specific
  bool skipped = false;
  bool passed = false;
  std::string detail;
};

int run_verify(const RunConfig& rc) {
  std::vector<CheckRow> rows;
  auto record = [&](const std::string& name, double rho, bool ok,
                    const std::string& detail) {
    rows.push_back({name, rho, false, ok, detail});
  };
  auto skip = [&](const std::string& name, double rho,
                  const std::string& why) {
    rows.push_back({name, rho, true, true, why});
  };
  // each check is isolated: an exception fails that check, not the run
  auto guarded = [&](const std::string& name, double rho, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(name, rho, false, e.what());
    }
  };

  const double vtol = 1e-8;
  MassDistribution mdd;
  bool loaded = false;
  guarded("load+validate", -1.0, [&] {
    mdd = build_mdd(rc.mdd);
    auto rep = validate(mdd, vtol);
    char d[160];
    std::snprintf(d, sizeof d,
                  "norm defect %.3g, min density %.3g, endpoint defect %.3g",
                  rep.normalization_defect, rep.min_density,
                  rep.endpoint_value_defect);
    record("load+validate", -1.0, rep.passed(), d);
    loaded = rep.passed();
  });

  if (loaded) {
    std::vector<double> rate_samples;
    for (double rho : rc.rho) {
      auto kin = Kinematics::make(rho, mdd.xi0);

      guarded("unit-amplitude-at-zero", rho, [&] {
        auto a = amplitude(mdd, kin, 0.0, rc.quad);
        double defect = std::abs(a.value - Complex(1.0, 0.0));
        record("unit-amplitude-at-zero", rho,
               defect <= 1e-9 + 10.0 * a.abs_error_estimate,
               "defect " + g17(defect));
      });

      guarded("form-agreement", rho, [&] {
        double worst = 0.0;
        bool ok = true;
        for (double tau : {1.0, 10.0}) {
          auto a = amplitude(mdd, kin, tau, rc.quad, AmplitudeForm::xi_form);
          auto b = amplitude(mdd, kin, tau, rc.quad, AmplitudeForm::eta_form);
          double diff = std::abs(a.value - b.value);
          worst = std::max(worst, diff);
          ok = ok && diff <= a.abs_error_estimate + b.abs_error_estimate + 1e-13;
        }
        record("form-agreement", rho, ok, "worst diff " + g17(worst));
      });

      guarded("oracle-agreement", rho, [&] {
        double worst = 0.0;
        bool ok = true;
        for (double tau : {5.0, 50.0}) {
          auto base = amplitude(mdd, kin, tau, rc.quad);
          auto ref = oracle_amplitude(mdd, kin, tau);
          double diff = std::abs(base.value - ref.value);
          worst = std::max(worst, diff);
          ok = ok && diff <= std::max(1e-11, base.abs_error_estimate +
                                                 ref.abs_error_estimate);
        }
        record("oracle-agreement", rho, ok, "worst diff " + g17(worst));
      });

      guarded("conjugate-symmetry", rho, [&] {
        auto fwd = amplitude(mdd, kin, 7.0, rc.quad);
        auto bwd = amplitude(mdd, kin, -7.0, rc.quad);
        record("conjugate-symmetry", rho, bwd.value == std::conj(fwd.value),
               "diff " + g17(std::abs(bwd.value - std::conj(fwd.value))));
      });

      guarded("modulus-bound", rho, [&] {
        double worst = 0.0;
        for (double tau : {0.5, 2.0, 20.0}) {
          auto a = amplitude(mdd, kin, tau, rc.quad);
          worst = std::max(worst,
                           std::abs(a.value) - 1.0 - a.abs_error_estimate);
        }
        record("modulus-bound", rho, worst <= 1e-10,
               "max excess " + g17(worst));
      });

      if (mdd.moments_finite_through >= 1) {
        guarded("derivative-fd", rho, [&] {
          const double tau = 2.0, h = 1e-4;
          auto up = amplitude(mdd, kin, tau + h, rc.quad);
          auto dn = amplitude(mdd, kin, tau - h, rc.quad);
          auto da = amplitude_derivative(mdd, kin, tau, rc.quad);
          double rel = std::abs((up.value - dn.value) / (2.0 * h) - da.value) /
                       std::abs(da.value);
          record("derivative-fd", rho, rel <= 1e-5, "rel diff " + g17(rel));
        });
      } else {
        skip("derivative-fd", rho, "first moment diverges");
      }

      guarded("scaling-report", rho, [&] {
        auto rep = verify_scaling(mdd, rho, Window{}, rc.quad);
        char d[200];
        std::snprintf(d, sizeof d,
                      "slope %.6g vs %.6g, correction %.6g vs %.6g",
                      rep.fitted_powerlaw_slope, rep.predicted_slope,
                      rep.fitted_correction_coeff, rep.predicted_kappa_p);
        record("scaling-report", rho, rep.passed(), d);
      });

      guarded("long-time-consistency", rho, [&] {
        auto model = long_time_model(mdd, kin);
        auto a = amplitude(mdd, kin, 100.0, rc.quad);
        double p = survival_probability(a);
        double rel = std::abs(p / long_time_survival(model, 100.0) - 1.0);
        record("long-time-consistency", rho, rel <= 0.05,
               "rel deviation " + g17(rel));
      });

      if (mdd.moments_finite_through >= 3 && mdd.tail_decay_exponent > 5.0) {
        guarded("short-time-consistency", rho, [&] {
          auto st = short_time_model(mdd, kin, rc.quad);
          auto a = amplitude(mdd, kin, 0.01, rc.quad);
          double diff = std::abs(survival_probability(a) -
                                 short_time_survival(st, 0.01));
          record("short-time-consistency", rho, diff <= 1e-6,
                 "abs deviation " + g17(diff));
        });
      } else {
        skip("short-time-consistency", rho,
             "needs three finite moments and a fast tail");
      }

      if (mdd.moments_finite_through >= 1) {
        guarded("rate-sample", rho, [&] {
          auto a = amplitude(mdd, kin, 100.0, rc.quad);
          auto da = amplitude_derivative(mdd, kin, 100.0, rc.quad);
          rate_samples.push_back(instantaneous_rate(a, da));
          double rel =
              std::abs(rate_samples.back() * 100.0 / (2.0 * (1.0 + mdd.alpha)) -
                       1.0);
          record("rate-sample", rho, rel <= 0.05,
                 "rel deviation from asymptote " + g17(rel));
        });
      }
    }

    if (rate_samples.size() >= 2) {
      double lo = *std::min_element(rate_samples.begin(), rate_samples.end());
      double hi = *std::max_element(rate_samples.begin(), rate_samples.end());
      double mean = 0.0;
      for (double v : rate_samples) mean += v;
      mean /= static_cast<double>(rate_samples.size());
      record("rate-invariance", -1.0, (hi - lo) / mean <= 0.05,
             "relative spread " + g17((hi - lo) / mean));
    }
  }

  bool all_ok = true;
  json checks = json::array();
  for (const auto& r : rows) {
    if (!r.skipped && !r.passed) all_ok = false;
    json c = {{"name", r.name},
              {"passed", r.passed},
              {"skipped", r.skipped},
              {"detail", r.detail}};
    if (r.rho >= 0.0) c["rho"] = r.rho;
    checks.push_back(c);
    const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    if (r.rho >= 0.0)
      std::printf("[%s] %s (rho=%s): %s\n", tag, r.name.c_str(),
                  gshort(r.rho).c_str(), r.detail.c_str());
    else
      std::printf("[%s] %s: %s\n", tag, r.name.c_str(), r.detail.c_str());
  }
  json j = {{"mdd", loaded ? mdd.name : rc.mdd.family},
            {"passed", all_ok},
            {"checks", checks}};
  write_atomic(fs::path(rc.out) / "verify.json", j.dump(2) + "\n");
  std::printf("verify: %s\n", all_ok ? "all checks passed" : "FAILED");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for relativistic quantum decay laws"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string out_v, format_v;
  int threads_v = 1, fig_n = 0;
  double mass_scale_v = 1.0, tol_v = 1e-11;
  bool force_short = false;

  auto* o_config =
      app.add_option("--config", config_path, "JSON run configuration file");
  auto* o_out = app.add_option("--out", out_v, "output directory (default .)");
  auto* o_format = app.add_option("--format", format_v, "csv or json");
  auto* o_threads = app.add_option("--threads", threads_v, "worker threads");
  auto* o_scale = app.add_option("--mass-scale", mass_scale_v,
                                 "physical mass unit: M and Gamma columns are "
                                 "multiplied by it, tau divided");
  auto* o_tol =
      app.add_option("--tol", tol_v, "quadrature absolute error target");

  auto* c_curve = app.add_subcommand(
      "curve", "amplitude and observables over a time grid, one file per rho");
  auto* c_fig =
      app.add_subcommand("figure", "write the data behind a built-in survey figure");
  c_fig->add_option("n", fig_n, "figure number (1..15)")->required();
  auto* c_asy = app.add_subcommand(
      "asymptotics", "short- and long-time model constants per rho");
  c_asy->add_flag("--short-time", force_short,
                  "fail (exit 3) if the short-time model is unavailable");
  auto* c_ver =
      app.add_subcommand("verify", "run the self-consistency check suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig rc;
  MassDistribution mdd;
  TimeGrid grid;
  const bool need_mdd = c_curve->parsed() || c_asy->parsed();
  try {
    if (o_config->count()) load_config_into(rc, config_path);
    if (o_out->count()) rc.out = out_v;
    if (o_format->count()) rc.format = format_v;
    if (o_threads->count()) rc.threads = threads_v;
    if (o_scale->count()) rc.mass_scale = mass_scale_v;
    if (o_tol->count()) rc.quad.target_abs_error = tol_v;
    validate_config(rc);
    if (c_fig->parsed() && (fig_n < 1 || fig_n > 15))
      throw UsageError("figure number must be between 1 and 15");
    if (need_mdd) mdd = build_mdd(rc.mdd);
    if (c_curve->parsed()) grid = build_grid(rc.grid);
    fs::create_directories(rc.out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "decaylab: %s\n", e.what());
    return 2;
  }

  try {
    if (c_curve->parsed()) return run_curve(rc, mdd, grid);
    if (c_fig->parsed()) return run_figure(rc, fig_n);
    if (c_asy->parsed()) return run_asymptotics(rc, mdd, force_short);
    if (c_ver->parsed()) return run_verify(rc);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "decaylab: %s\n", e.what());
    return 3;
  }
  return 2;
}
