#include "semisep/job.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "semisep/kernel.hpp"
#include "semisep/reduction.hpp"

namespace semisep::cli {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::det2: return "det2";
    case Command::det1: return "det1";
    case Command::tb2: return "tb2";
    case Command::tb3: return "tb3";
    case Command::bound_states: return "bound_states";
    case Command::bargmann: return "bargmann";
    case Command::converge: return "converge";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (Command c : {Command::det2, Command::det1, Command::tb2, Command::tb3,
                    Command::bound_states, Command::bargmann, Command::converge})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown command '" + s +
                    "' (expected det2, det1, tb2, tb3, bound_states, bargmann, converge)");
}

double& Tolerances::at(const std::string& name) {
  if (name == "consistency") return consistency;
  if (name == "trace") return trace;
  if (name == "jost") return jost;
  if (name == "tb2") return tb2;
  if (name == "tb3") return tb3;
  if (name == "converge_floor") return converge_floor;
  throw ConfigError("unknown tolerance '" + name + "'");
}

std::vector<std::string> Tolerances::names() {
  return {"consistency", "trace", "jost", "tb2", "tb3", "converge_floor"};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

Complex square_well_jost(double depth, double width, double center, Complex k) {
  const double x0 = center - 0.5 * width, x1 = center + 0.5 * width;
  const Complex q = std::sqrt(k * k + depth);
  const Complex e1 = std::exp(I_unit * k * x1);
  // f = e1 (cos q(x-x1) + ik sin q(x-x1)/q) inside the well
  const Complex qw = q * width;
  const Complex c = std::cos(qw);
  const Complex sinc = std::abs(qw) < 1e-8 ? Complex(width) : std::sin(qw) / q;
  const Complex f0 = e1 * (c - I_unit * k * sinc);
  const Complex df0 = e1 * (q * q * sinc + I_unit * k * c);
  return std::exp(-I_unit * k * x0) * 0.5 * (f0 + df0 / (I_unit * k));
}

namespace {

// ------------------------------------------------------------ json helpers

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
  return v;
}

double num_or(const json& j, const char* key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  return num(j.at(key), where + "." + key);
}

int int_or(const json& j, const char* key, int dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

// number, [re, im] or {"re": .., "im": ..}
Complex cnum(const json& j, const std::string& where) {
  if (j.is_number()) return {num(j, where), 0.0};
  if (j.is_array() && j.size() == 2) return {num(j[0], where + "[0]"), num(j[1], where + "[1]")};
  if (j.is_object() && j.contains("re"))
    return {num(j.at("re"), where + ".re"), num_or(j, "im", 0.0, where)};
  throw ConfigError(where + ": expected a complex number (x, [re, im] or {re, im})");
}

std::vector<Complex> param_list(const json& j, const std::string& where) {
  std::vector<Complex> out;
  auto add_range = [&](const json& r, bool log) {
    const std::string w = where + (log ? ".logspace" : ".linspace");
    const int n = int_or(r, "num", -1, w);
    if (n < 1) throw ConfigError(w + ": 'num' must be a positive integer");
    if (!log) {
      const Complex s = cnum(need(r, "start", w), w + ".start");
      const Complex e = cnum(need(r, "stop", w), w + ".stop");
      for (int i = 0; i < n; ++i) out.push_back(n == 1 ? s : s + (e - s) * (double(i) / (n - 1)));
    } else {
      // scale * 10^t for t evenly spaced in [start, stop]
      const double s = num(need(r, "start", w), w + ".start");
      const double e = num(need(r, "stop", w), w + ".stop");
      const Complex scale = r.contains("scale") ? cnum(r.at("scale"), w + ".scale") : Complex(1);
      for (int i = 0; i < n; ++i)
        out.push_back(scale * std::pow(10.0, n == 1 ? s : s + (e - s) * (double(i) / (n - 1))));
    }
  };
  if (j.is_object()) {
    if (j.contains("linspace")) add_range(j.at("linspace"), false);
    else if (j.contains("logspace")) add_range(j.at("logspace"), true);
    else throw ConfigError(where + ": expected a list, linspace or logspace");
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& e = j[i];
      if (e.is_object() && (e.contains("linspace") || e.contains("logspace")))
        for (Complex c : param_list(e, where + "[" + std::to_string(i) + "]")) out.push_back(c);
      else
        out.push_back(cnum(e, where + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(cnum(j, where));
  }
  if (out.empty()) throw ConfigError(where + ": empty parameter list");
  return out;
}

Interval interval_of(const json& j, const std::string& where, Interval dflt) {
  if (!j.contains("interval")) return dflt;
  const json& v = j.at("interval");
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + ".interval: expected [a, b]");
  const Interval iv{num(v[0], where + ".interval[0]"), num(v[1], where + ".interval[1]")};
  if (!(iv.a < iv.b)) throw ConfigError(where + ".interval: need a < b");
  return iv;
}

LineDomain domain_of(const json& j, const std::string& where, LineDomain dflt) {
  if (!j.contains("domain")) return dflt;
  const std::string s = j.at("domain").is_string() ? j.at("domain").get<std::string>() : "";
  if (s == "full" || s == "full_line") return LineDomain::FullLine;
  if (s == "half" || s == "half_line") return LineDomain::HalfLine;
  throw ConfigError(where + ".domain: expected 'full' or 'half'");
}

std::string family_of(const json& j, const std::string& where) {
  const json& f = need(j, "family", where);
  if (!f.is_string()) throw ConfigError(where + ".family: expected a string");
  return f.get<std::string>();
}

CMatrix cmatrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(where + ": expected a matrix (list of rows)");
  const Index r = static_cast<Index>(j.size()), c = static_cast<Index>(j[0].size());
  CMatrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != c)
      throw ConfigError(where + ": ragged matrix");
    for (Index k = 0; k < c; ++k)
      m(i, k) = cnum(j[i][k], where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return m;
}

// Wraps library construction errors as config errors.
template <class F>
auto guarded(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

// ---------------------------------------------------------------- rows

using Row = std::vector<std::string>;

struct RowOut {
  Row cells;
  std::vector<CheckResult> checks;  // failures and passes local to the row
};

std::string cplx_detail(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

void push_c(Row& r, Complex z) {
  r.push_back(format_number(z.real()));
  r.push_back(format_number(z.imag()));
}

double elapsed_ms(std::chrono::steady_clock::time_point t0, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::min<std::size_t>(std::max(1, threads), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

Quadrature kernel_grid(const SemiSeparableKernel& k, const GridSpec& g) {
  return build_grid(k.interval(), g.nodes_per_panel, g.panels, g.scheme);
}

const std::vector<std::string> kDetRoutes = {"ReducedH1", "PropagatorA", "ReducedH2",
                                             "PropagatorB"};

std::vector<std::string> c_cols(const std::string& base) { return {base + "_re", base + "_im"}; }

}  // namespace

// ---------------------------------------------------------------- kernels

SemiSeparableKernel make_kernel(const json& spec) {
  const std::string where = "kernel";
  const std::string fam = family_of(spec, where);
  DiagonalConvention conv = DiagonalConvention::Average;
  if (spec.contains("diagonal_convention")) {
    const std::string c = spec.at("diagonal_convention").is_string()
                              ? spec.at("diagonal_convention").get<std::string>()
                              : "";
    if (c == "average") conv = DiagonalConvention::Average;
    else if (c == "lower") conv = DiagonalConvention::LowerBranch;
    else if (c == "upper") conv = DiagonalConvention::UpperBranch;
    else throw ConfigError(where + ".diagonal_convention: expected average, lower or upper");
  }
  return guarded(where, [&] {
    SemiSeparableKernel k;
    if (fam == "rank_one") {
      k = families::rank_one(interval_of(spec, where, {0, 1}));
    } else if (fam == "exponential_green") {
      k = families::exponential_green(num(need(spec, "mu", where), where + ".mu"),
                                      interval_of(spec, where, {0, 1}));
    } else if (fam == "random_smooth") {
      families::RandomSmoothSpec s;
      s.d = int_or(spec, "d", 2, where);
      s.n1 = int_or(spec, "n1", 1, where);
      s.n2 = int_or(spec, "n2", 1, where);
      if (spec.contains("seed")) {
        if (!spec.at("seed").is_number_unsigned())
          throw ConfigError(where + ".seed: expected a non-negative integer");
        s.seed = spec.at("seed").get<std::uint64_t>();
      }
      s.iv = interval_of(spec, where, {0, 1});
      s.scale = num_or(spec, "scale", 1.0, where);
      if (spec.contains("trace_consistent")) {
        if (!spec.at("trace_consistent").is_boolean())
          throw ConfigError(where + ".trace_consistent: expected a boolean");
        s.trace_consistent = spec.at("trace_consistent").get<bool>();
      }
      if (s.d < 1 || s.n1 < 1 || s.n2 < 1) throw ConfigError(where + ": d, n1, n2 must be >= 1");
      k = families::random_smooth(s);
    } else if (fam == "csv") {
      const int degree = int_or(spec, "degree", 3, where);
      std::vector<OperatorFunction> f;
      for (const char* name : {"F1", "G1", "F2", "G2"}) {
        const std::string w = where + "." + name;
        const json& e = need(spec, name, where);
        const json& p = need(e, "path", w);
        if (!p.is_string()) throw ConfigError(w + ".path: expected a string");
        const int rows = int_or(e, "rows", -1, w), cols = int_or(e, "cols", -1, w);
        if (rows < 1 || cols < 1) throw ConfigError(w + ": rows and cols must be >= 1");
        f.push_back(load_operator_function_csv(p.get<std::string>(), rows, cols, degree));
      }
      k = SemiSeparableKernel(f[0], f[1], f[2], f[3]);
    } else {
      throw ConfigError(where + ".family: unknown kernel family '" + fam +
                        "' (rank_one, random_smooth, exponential_green, csv)");
    }
    return k.with_convention(conv);
  });
}

// ---------------------------------------------------------------- potentials

Potential make_potential(const json& spec) {
  const std::string where = "potential";
  const std::string fam = family_of(spec, where);
  const LineDomain dom = domain_of(spec, where, LineDomain::FullLine);
  return guarded(where, [&]() -> Potential {
    Potential p;
    if (fam == "zero") {
      p = potentials::zero(int_or(spec, "d", 1, where), dom);
    } else if (fam == "square_well") {
      p = potentials::square_well(num(need(spec, "depth", where), where + ".depth"),
                                  num(need(spec, "width", where), where + ".width"),
                                  num_or(spec, "center", 0.0, where), dom);
    } else if (fam == "gaussian") {
      p = potentials::gaussian(num(need(spec, "amplitude", where), where + ".amplitude"),
                               num(need(spec, "sigma", where), where + ".sigma"),
                               num_or(spec, "center", 0.0, where), dom);
    } else if (fam == "exponential") {
      if (spec.contains("domain") && dom != LineDomain::HalfLine)
        throw ConfigError(where + ": exponential is a half-line family");
      p = potentials::exponential(num(need(spec, "amplitude", where), where + ".amplitude"),
                                  num_or(spec, "rate", 1.0, where));
    } else if (fam == "matrix_diag") {
      const json& ch = need(spec, "channels", where);
      if (!ch.is_array() || ch.empty()) throw ConfigError(where + ".channels: expected a list");
      std::vector<Potential> cs;
      for (const auto& c : ch) {
        json cc = c;
        if (spec.contains("domain") && !cc.contains("domain")) cc["domain"] = spec.at("domain");
        cs.push_back(make_potential(cc));
      }
      p = potentials::matrix_diag(cs);
    } else if (fam == "matrix_coupled") {
      const CMatrix m = cmatrix(need(spec, "amplitude", where), where + ".amplitude");
      if (spec.contains("d") && int_or(spec, "d", 0, where) != m.rows())
        throw ConfigError(where + ".d does not match the amplitude matrix");
      json prof = need(spec, "profile", where);
      if (spec.contains("domain") && !prof.contains("domain")) prof["domain"] = spec.at("domain");
      p = potentials::matrix_coupled(m, make_potential(prof));
    } else if (fam == "csv") {
      const json& path = need(spec, "path", where);
      if (!path.is_string()) throw ConfigError(where + ".path: expected a string");
      const int d = int_or(spec, "d", 1, where);
      const OperatorFunction f =
          load_operator_function_csv(path.get<std::string>(), d, d, int_or(spec, "degree", 3, where));
      const Interval sup = f.interval();
      p.d = d;
      p.domain = dom;
      if (dom == LineDomain::HalfLine && sup.a < 0)
        throw ConfigError(where + ": tabulated half-line potential starts below 0");
      p.V = [f, sup, d](double x) {
        return sup.contains(x) ? f(x) : CMatrix(CMatrix::Zero(d, d));
      };
      p.envelope = [f, sup](double x) {
        if (!sup.contains(x)) return 0.0;
        Eigen::JacobiSVD<CMatrix> svd(f(x));
        return svd.singularValues().sum();
      };
      p.support = sup;
      p.breakpoints = {sup.a, sup.b};
      p.hermitian = !spec.contains("hermitian") || spec.at("hermitian").get<bool>();
      p.weight_class = dom == LineDomain::HalfLine ? WeightClass::L1_weighted : WeightClass::L1;
      p.name = "csv";
    } else {
      throw ConfigError(where + ".family: unknown potential family '" + fam +
                        "' (zero, square_well, gaussian, exponential, matrix_diag, "
                        "matrix_coupled, csv)");
    }
    validate_potential(p);
    return p;
  });
}

// ---------------------------------------------------------------- config

void apply_env_overrides(Tolerances& tol) {
  for (const auto& name : Tolerances::names()) {
    std::string var = "SEMISEP_TOL_";
    for (char c : name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const char* v = std::getenv(var.c_str());
    if (!v) continue;
    char* end = nullptr;
    const double x = std::strtod(v, &end);
    if (end == v || *end != '\0' || !std::isfinite(x) || x < 0)
      throw ConfigError(var + ": expected a non-negative number, got '" + v + "'");
    tol.at(name) = x;
  }
}

JobConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  JobConfig cfg;
  if (!j.contains("command") || !j.at("command").is_string())
    throw ConfigError("config: missing string key 'command'");
  cfg.command = parse_command(j.at("command").get<std::string>());
  const bool kernel_job = cfg.command == Command::det2 || cfg.command == Command::det1;

  const bool has_k = j.contains("kernel"), has_v = j.contains("potential");
  if (has_k && has_v) throw ConfigError("config: give either 'kernel' or 'potential', not both");
  if (kernel_job && !has_k)
    throw ConfigError(std::string("config: command ") + to_string(cfg.command) +
                      " needs a 'kernel' spec");
  if (!kernel_job && !has_v)
    throw ConfigError(std::string("config: command ") + to_string(cfg.command) +
                      " needs a 'potential' spec");
  if (has_k) cfg.kernel = j.at("kernel");
  if (has_v) cfg.potential = j.at("potential");

  // Grid: the converge job starts coarse so that the refinement is visible.
  if (cfg.command == Command::converge) {
    cfg.grid.panels = 1;
    cfg.grid.nodes_per_panel = 2;
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (!g.is_object()) throw ConfigError("grid: expected an object");
    cfg.grid.panels = int_or(g, "panels", cfg.grid.panels, "grid");
    cfg.grid.nodes_per_panel = int_or(g, "nodes_per_panel", cfg.grid.nodes_per_panel, "grid");
    cfg.grid.truncation_tol = num_or(g, "truncation_tol", cfg.grid.truncation_tol, "grid");
    if (g.contains("scheme")) {
      const std::string s = g.at("scheme").is_string() ? g.at("scheme").get<std::string>() : "";
      if (s == "gauss_legendre") cfg.grid.scheme = Scheme::GaussLegendre;
      else if (s == "trapezoid" || s == "midpoint") cfg.grid.scheme = Scheme::Trapezoid;
      else throw ConfigError("grid.scheme: expected gauss_legendre or trapezoid");
    }
    if (cfg.grid.panels < 1 || cfg.grid.nodes_per_panel < 1)
      throw ConfigError("grid: panels and nodes_per_panel must be >= 1");
    if (!(cfg.grid.truncation_tol > 0)) throw ConfigError("grid.truncation_tol must be positive");
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances: expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const double v = num(it.value(), "tolerances." + it.key());
      if (v < 0) throw ConfigError("tolerances." + it.key() + ": must be non-negative");
      cfg.tol.at(it.key()) = v;
    }
  }

  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output: expected a string");
    cfg.output = j.at("output").get<std::string>();
  }
  if (j.contains("timing")) {
    if (!j.at("timing").is_boolean()) throw ConfigError("timing: expected a boolean");
    cfg.timing = j.at("timing").get<bool>();
  }
  if (j.contains("nystrom")) {
    if (!j.at("nystrom").is_boolean()) throw ConfigError("nystrom: expected a boolean");
    cfg.nystrom = j.at("nystrom").get<bool>();
  }
  cfg.converge_levels = int_or(j, "levels", cfg.converge_levels, "config");
  if (cfg.converge_levels < 3 || cfg.converge_levels > 16)
    throw ConfigError("levels: expected an integer in [3, 16]");

  if (j.contains("count")) {
    const json& c = j.at("count");
    auto& o = cfg.count;
    o.kappa_min = num_or(c, "kappa_min", o.kappa_min, "count");
    o.points_per_decade = int_or(c, "points_per_decade", o.points_per_decade, "count");
    o.fd_h = num_or(c, "fd_h", o.fd_h, "count");
    o.fd_pad = num_or(c, "fd_pad", o.fd_pad, "count");
    o.bs_lambda = num_or(c, "bs_lambda", o.bs_lambda, "count");
    o.bs_lambda_check = num_or(c, "bs_lambda_check", o.bs_lambda_check, "count");
    if (!(o.kappa_min > 0) || o.points_per_decade < 4 || !(o.fd_h > 0) || !(o.fd_pad > 0) ||
        !(o.bs_lambda > 0))
      throw ConfigError("count: parameters out of range");
  }
  cfg.count.grid = cfg.grid;

  // Parameters.
  const bool wants_z = cfg.command == Command::tb2 || cfg.command == Command::tb3 ||
                       cfg.command == Command::converge;
  if (kernel_job) {
    if (j.contains("z")) throw ConfigError("config: det jobs take 'alpha', not 'z'");
    cfg.params = param_list(need(j, "alpha", "config"), "alpha");
  } else if (wants_z) {
    if (j.contains("alpha")) throw ConfigError("config: scattering jobs take 'z', not 'alpha'");
    cfg.params = param_list(need(j, "z", "config"), "z");
    const double z_min = num_or(j, "z_min", 1e-8, "config");
    for (std::size_t i = 0; i < cfg.params.size(); ++i) {
      const Complex z = cfg.params[i];
      const std::string w = "z[" + std::to_string(i) + "]";
      if (std::abs(z) < z_min) throw ConfigError(w + ": |z| below z_min");
      if (z.imag() == 0.0 && z.real() >= 0.0) throw ConfigError(w + ": z lies on the cut [0, inf)");
    }
  } else if (j.contains("alpha") || j.contains("z")) {
    throw ConfigError(std::string("config: command ") + to_string(cfg.command) +
                      " takes no parameter list");
  }

  // Specs are built once here so that every spec error is a config error.
  if (cfg.kernel) (void)make_kernel(*cfg.kernel);
  if (cfg.potential) {
    const Potential v = make_potential(*cfg.potential);
    if ((cfg.command == Command::bound_states || cfg.command == Command::bargmann) && !v.hermitian)
      throw ConfigError("potential: counting and the Bargmann bound need a self-adjoint V");
    if (cfg.command == Command::bargmann && v.domain != LineDomain::HalfLine)
      throw ConfigError("potential: the Bargmann bound is a half-line statement (domain: half)");
    if (cfg.command == Command::tb3 && v.domain != LineDomain::FullLine)
      throw ConfigError("potential: tb3 is a full-line statement");
  }
  return cfg;
}

JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------- jobs

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<RowOut> rows;
  json extra = json::object();
};

void row_error(RowOut& out, std::size_t ncols, std::size_t index, const std::string& what) {
  out.cells.assign(ncols, "nan");
  out.cells[0] = std::to_string(index);
  out.checks.push_back({"row_" + std::to_string(index), false, what});
}

Table det_job(const JobConfig& cfg, int threads) {
  const bool d1 = cfg.command == Command::det1;
  const SemiSeparableKernel k = make_kernel(*cfg.kernel);
  const Quadrature grid = kernel_grid(k, cfg.grid);
  Table t;
  t.header = {"index", "alpha_re", "alpha_im"};
  for (const auto& r : kDetRoutes)
    for (const auto& c : c_cols(r)) t.header.push_back(c);
  if (cfg.nystrom && !d1)
    for (const auto& c : c_cols("Nystrom")) t.header.push_back(c);
  for (const char* c : {"cross_route_spread", "grid_nodes", "wall_time_ms"}) t.header.push_back(c);
  if (d1)
    for (const char* c : {"trace_F1G1_re", "trace_F1G1_im", "trace_F2G2_re", "trace_F2G2_im",
                          "bridge_defect"})
      t.header.push_back(c);
  t.rows.resize(cfg.params.size());
  DetOptions opt;
  opt.consistency_tol = cfg.tol.consistency;
  opt.trace_tol = cfg.tol.trace;
  parallel_for(cfg.params.size(), threads, [&](std::size_t i) {
    RowOut& out = t.rows[i];
    const Complex alpha = cfg.params[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const DetResult r = d1 ? det1_semiseparable(k, alpha, grid, opt)
                             : det2_semiseparable(k, alpha, grid, opt);
      Row& c = out.cells;
      c.push_back(std::to_string(i));
      push_c(c, alpha);
      for (DetRoute route : {DetRoute::ReducedH1, DetRoute::PropagatorA, DetRoute::ReducedH2,
                             DetRoute::PropagatorB})
        push_c(c, r.routes.at(route));
      if (cfg.nystrom && !d1) push_c(c, det2_nystrom(k, alpha, grid).value);
      c.push_back(format_number(r.cross_route_spread));
      c.push_back(std::to_string(grid.size()));
      c.push_back(format_number(elapsed_ms(t0, cfg.timing)));
      if (d1) {
        push_c(c, r.trace_F1G1);
        push_c(c, r.trace_F2G2);
        c.push_back(format_number(r.bridge_defect));
      }
      if (r.cross_route_spread > cfg.tol.consistency)
        out.checks.push_back({"route_consistency", false,
                              "alpha = " + cplx_detail(alpha) + ": spread " +
                                  format_number(r.cross_route_spread)});
      if (d1 && !r.reliable)
        out.checks.push_back({"trace_consistency", false,
                              "alpha = " + cplx_detail(alpha) +
                                  ": int tr F1G1 and int tr F2G2 differ; det1 unreliable"});
    } catch (const Error& e) {
      row_error(out, t.header.size(), i, e.what());
    }
  });
  t.extra["routes"] = kDetRoutes;
  return t;
}

Table tb2_job(const JobConfig& cfg, int threads) {
  const Potential v = make_potential(*cfg.potential);
  const Quadrature grid = make_grid(v, cfg.grid).grid;
  const bool half = v.domain == LineDomain::HalfLine;
  Table t;
  t.header = {"index", "z_re", "z_im", "det1_K_re", "det1_K_im", "det_jost_re", "det_jost_im",
              "cross_route_spread", "grid_nodes", "wall_time_ms", "jost_route_spread"};
  t.rows.resize(cfg.params.size());
  parallel_for(cfg.params.size(), threads, [&](std::size_t i) {
    RowOut& out = t.rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SpectralPoint z = SpectralPoint::make(cfg.params[i]);
      Complex lhs, rhs;
      double jspread = 0;
      if (half) {
        lhs = det1_semiseparable(build_K_halfline(v, z, grid), 1.0, grid).value;
        rhs = numerics::det(halfline_jost_value(v, z, grid));
      } else {
        const TB2Result r = theorem_tB2_check(v, z, grid);
        lhs = r.lhs;
        rhs = r.rhs;
        const JostRoutes jr = jost_function_all(v, z, grid, INFINITY);
        jspread = std::max({numerics::rel_diff(numerics::det(jr.b8), numerics::det(jr.b8a)),
                            numerics::rel_diff(numerics::det(jr.b8), numerics::det(jr.wronskian)),
                            numerics::rel_diff(numerics::det(jr.b8a),
                                               numerics::det(jr.wronskian))});
      }
      const double spread = numerics::rel_diff(lhs, rhs);
      Row& c = out.cells;
      c.push_back(std::to_string(i));
      push_c(c, z.z);
      push_c(c, lhs);
      push_c(c, rhs);
      c.push_back(format_number(spread));
      c.push_back(std::to_string(grid.size()));
      c.push_back(format_number(elapsed_ms(t0, cfg.timing)));
      c.push_back(format_number(jspread));
      if (spread > cfg.tol.tb2)
        out.checks.push_back({"tb2", false, "z = " + cplx_detail(z.z) + ": det(I-K) vs det F " +
                                                format_number(spread)});
      if (jspread > cfg.tol.jost)
        out.checks.push_back({"jost_routes", false, "z = " + cplx_detail(z.z) + ": spread " +
                                                        format_number(jspread)});
    } catch (const Error& e) {
      row_error(out, t.header.size(), i, e.what());
    }
  });
  return t;
}

Table tb3_job(const JobConfig& cfg, int threads) {
  const Potential v = make_potential(*cfg.potential);
  const Quadrature grid = make_grid(v, cfg.grid).grid;
  Table t;
  t.header = {"index", "z_re", "z_im", "det2_system_re", "det2_system_im", "det2_K_re",
              "det2_K_im", "jost_side_re", "jost_side_im", "cross_route_spread", "grid_nodes",
              "wall_time_ms"};
  t.rows.resize(cfg.params.size());
  parallel_for(cfg.params.size(), threads, [&](std::size_t i) {
    RowOut& out = t.rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SpectralPoint z = SpectralPoint::make(cfg.params[i]);
      const TB3Result r = theorem_tB3_check(v, z, grid);
      const double spread = std::max({numerics::rel_diff(r.d2_system, r.d2_K),
                                      numerics::rel_diff(r.d2_system, r.jost_side),
                                      numerics::rel_diff(r.d2_K, r.jost_side)});
      Row& c = out.cells;
      c.push_back(std::to_string(i));
      push_c(c, z.z);
      push_c(c, r.d2_system);
      push_c(c, r.d2_K);
      push_c(c, r.jost_side);
      c.push_back(format_number(spread));
      c.push_back(std::to_string(grid.size()));
      c.push_back(format_number(elapsed_ms(t0, cfg.timing)));
      if (spread > cfg.tol.tb3)
        out.checks.push_back(
            {"tb3", false, "z = " + cplx_detail(z.z) + ": spread " + format_number(spread)});
    } catch (const Error& e) {
      row_error(out, t.header.size(), i, e.what());
    }
  });
  return t;
}

Table bound_states_job(const JobConfig& cfg, int threads) {
  const Potential v = make_potential(*cfg.potential);
  const Quadrature grid = make_grid(v, cfg.grid).grid;
  const std::vector<CountMethod> methods = {CountMethod::JostZeros, CountMethod::BirmanSchwinger,
                                            CountMethod::DirectDiag};
  Table t;
  t.header = {"index", "method", "count", "inconclusive", "grid_nodes", "wall_time_ms"};
  t.rows.resize(methods.size());
  std::vector<int> counts(methods.size(), -1);
  parallel_for(methods.size(), threads, [&](std::size_t i) {
    RowOut& out = t.rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const CountReport r = count_bound_states_report(v, v.domain, methods[i], cfg.count);
      counts[i] = r.count;
      Row& c = out.cells;
      c.push_back(std::to_string(i));
      c.push_back(to_string(methods[i]));
      c.push_back(std::to_string(r.count));
      c.push_back(r.inconclusive ? "1" : "0");
      c.push_back(std::to_string(grid.size()));
      c.push_back(format_number(elapsed_ms(t0, cfg.timing)));
      std::string notes;
      for (const auto& n : r.notes) notes += (notes.empty() ? "" : "; ") + n;
      if (r.inconclusive)
        out.checks.push_back({"conclusive", false, std::string(to_string(methods[i])) + ": " + notes});
    } catch (const Error& e) {
      row_error(out, t.header.size(), i, e.what());
      out.cells[1] = to_string(methods[i]);
    }
  });
  const bool agree = std::all_of(counts.begin(), counts.end(),
                                 [&](int c) { return c >= 0 && c == counts[0]; });
  std::ostringstream os;
  os << "JostZeros " << counts[0] << ", BirmanSchwinger " << counts[1] << ", DirectDiag "
     << counts[2];
  t.rows.back().checks.push_back({"methods_agree", agree, os.str()});
  return t;
}

Table bargmann_job(const JobConfig& cfg, int) {
  const Potential v = make_potential(*cfg.potential);
  const Quadrature grid = make_grid(v, cfg.grid).grid;
  Table t;
  t.header = {"index", "bargmann_bound", "count_direct_diag", "margin", "grid_nodes",
              "wall_time_ms"};
  t.rows.resize(1);
  RowOut& out = t.rows[0];
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const double bound = bargmann_bound(v, grid);
    const int n = count_bound_states(v, LineDomain::HalfLine, CountMethod::DirectDiag, cfg.count);
    out.cells = {"0", format_number(bound), std::to_string(n), format_number(bound - n),
                 std::to_string(grid.size()), format_number(elapsed_ms(t0, cfg.timing))};
    out.checks.push_back({"bargmann", n <= bound,
                          "N = " + std::to_string(n) + ", bound = " + format_number(bound)});
  } catch (const Error& e) {
    row_error(out, t.header.size(), 0, e.what());
  }
  return t;
}

Table converge_job(const JobConfig& cfg, int threads) {
  const Potential v = make_potential(*cfg.potential);
  const json& spec = *cfg.potential;
  const bool closed_form = spec.value("family", "") == "square_well" &&
                           v.domain == LineDomain::FullLine;
  const int L = cfg.converge_levels;
  const std::size_t nz = cfg.params.size();
  Table t;
  t.header = {"index", "z_re", "z_im", "level", "panels", "det1_K_re", "det1_K_im",
              "det_jost_re", "det_jost_im", "oracle_re", "oracle_im", "err_det1_K",
              "err_det_jost", "cross_route_spread", "grid_nodes", "wall_time_ms"};
  t.rows.resize(nz * L);
  struct Cell {
    Complex det1, jost;
    double spread = 0;
    Index nodes = 0;
    double ms = 0;
    bool ok = false;
    std::string err;
  };
  std::vector<Cell> cells(nz * L);
  parallel_for(nz * L, threads, [&](std::size_t idx) {
    const std::size_t iz = idx / L;
    const int lev = static_cast<int>(idx % L);
    const auto t0 = std::chrono::steady_clock::now();
    Cell& c = cells[idx];
    try {
      const SpectralPoint z = SpectralPoint::make(cfg.params[iz]);
      GridSpec g = cfg.grid;
      g.panels = cfg.grid.panels << lev;
      const Quadrature grid = make_grid(v, g).grid;
      const DetResult r = det1_semiseparable(build_K_fullline(v, z, grid), 1.0, grid);
      c.det1 = r.value;
      c.spread = r.cross_route_spread;
      c.jost = numerics::det(jost_function(v, z, grid, JostRoute::ViaB8));
      c.nodes = grid.size();
      c.ok = true;
    } catch (const Error& e) {
      c.err = e.what();
    }
    c.ms = elapsed_ms(t0, cfg.timing);
  });
  for (std::size_t iz = 0; iz < nz; ++iz) {
    const SpectralPoint z = SpectralPoint::make(cfg.params[iz]);
    Complex oracle;
    if (closed_form) {
      oracle = square_well_jost(spec.at("depth").get<double>(), spec.at("width").get<double>(),
                                spec.value("center", 0.0), z.k);
    } else {
      oracle = cells[iz * L + L - 1].jost;
    }
    std::vector<double> e1(L), ej(L);
    bool all_ok = true;
    for (int lev = 0; lev < L; ++lev) {
      const std::size_t idx = iz * L + lev;
      const Cell& c = cells[idx];
      RowOut& out = t.rows[idx];
      if (!c.ok) {
        all_ok = false;
        row_error(out, t.header.size(), idx, c.err);
        continue;
      }
      e1[lev] = std::abs(c.det1 - oracle);
      ej[lev] = std::abs(c.jost - oracle);
      Row& r = out.cells;
      r.push_back(std::to_string(idx));
      push_c(r, z.z);
      r.push_back(std::to_string(lev));
      r.push_back(std::to_string(cfg.grid.panels << lev));
      push_c(r, c.det1);
      push_c(r, c.jost);
      push_c(r, oracle);
      r.push_back(format_number(e1[lev]));
      r.push_back(format_number(ej[lev]));
      r.push_back(format_number(c.spread));
      r.push_back(std::to_string(c.nodes));
      r.push_back(format_number(c.ms));
    }
    if (!all_ok) continue;
    // Monotone decrease after the first (pre-asymptotic) step. Errors that
    // already sit at the floor count as converged. Without a closed form the
    // finest level is the reference and is excluded.
    const int last = closed_form ? L - 1 : L - 2;
    const double floor = cfg.tol.converge_floor;
    for (const auto* e : {&e1, &ej}) {
      const std::string which = e == &e1 ? "det1_K" : "det_jost";
      bool mono = true;
      std::ostringstream os;
      for (int lev = 2; lev <= last; ++lev)
        if (!((*e)[lev] < (*e)[lev - 1] || (*e)[lev] <= floor)) {
          mono = false;
          os << "level " << lev << ": " << (*e)[lev] << " >= " << (*e)[lev - 1] << "; ";
        }
      t.rows[iz * L + L - 1].checks.push_back(
          {"monotone_" + which, mono, "z = " + cplx_detail(z.z) + (mono ? "" : ": " + os.str())});
    }
  }
  t.extra["oracle"] = closed_form ? "square_well_transfer_matrix" : "finest_level";
  return t;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open " + p.string() + " for writing");
  out << s;
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + p.string());
}

}  // namespace

JobOutcome run_job(const JobConfig& cfg, const RunOptions& opt) {
  if (opt.threads < 1) throw ConfigError("--threads must be >= 1");
  Table t;
  switch (cfg.command) {
    case Command::det2:
    case Command::det1: t = det_job(cfg, opt.threads); break;
    case Command::tb2: t = tb2_job(cfg, opt.threads); break;
    case Command::tb3: t = tb3_job(cfg, opt.threads); break;
    case Command::bound_states: t = bound_states_job(cfg, opt.threads); break;
    case Command::bargmann: t = bargmann_job(cfg, opt.threads); break;
    case Command::converge: t = converge_job(cfg, opt.threads); break;
  }

  JobOutcome res;
  res.header = t.header;
  std::map<std::string, CheckResult> merged;  // one entry per check name
  std::vector<std::string> order;
  for (auto& r : t.rows) {
    res.rows.push_back(r.cells);
    for (auto& c : r.checks) {
      auto it = merged.find(c.name);
      if (it == merged.end()) {
        merged.emplace(c.name, c);
        order.push_back(c.name);
      } else {
        it->second.passed = it->second.passed && c.passed;
        if (!c.detail.empty())
          it->second.detail += (it->second.detail.empty() ? "" : " | ") + c.detail;
      }
    }
  }
  // Checks that never failed are reported as passed.
  const auto add_pass = [&](const std::string& name) {
    if (!merged.count(name)) {
      merged.emplace(name, CheckResult{name, true, ""});
      order.push_back(name);
    }
  };
  switch (cfg.command) {
    case Command::det2: add_pass("route_consistency"); break;
    case Command::det1:
      add_pass("route_consistency");
      add_pass("trace_consistency");
      break;
    case Command::tb2:
      add_pass("tb2");
      add_pass("jost_routes");
      break;
    case Command::tb3: add_pass("tb3"); break;
    default: break;
  }
  for (const auto& n : order) res.checks.push_back(merged.at(n));
  const bool all = std::all_of(res.checks.begin(), res.checks.end(),
                               [](const CheckResult& c) { return c.passed; });
  res.exit_code = all ? kExitOk : kExitInconsistent;

  const std::filesystem::path dir = opt.out_dir ? *opt.out_dir : cfg.output;
  std::filesystem::create_directories(dir);
  res.csv_path = dir / (std::string(to_string(cfg.command)) + ".csv");
  res.summary_path = dir / (std::string(to_string(cfg.command)) + "_summary.json");

  std::ostringstream csv;
  for (std::size_t i = 0; i < res.header.size(); ++i) csv << (i ? "," : "") << res.header[i];
  csv << "\n";
  for (const auto& r : res.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) csv << (i ? "," : "") << r[i];
    csv << "\n";
  }
  write_text(res.csv_path, csv.str());

  json s;
  s["command"] = to_string(cfg.command);
  s["rows"] = res.rows.size();
  s["csv"] = res.csv_path.filename().string();
  json checks = json::array();
  for (const auto& c : res.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  s["checks"] = checks;
  json tol;
  for (const auto& n : Tolerances::names()) tol[n] = const_cast<Tolerances&>(cfg.tol).at(n);
  s["tolerances"] = tol;
  for (auto it = t.extra.begin(); it != t.extra.end(); ++it) s[it.key()] = it.value();
  s["all_passed"] = all;
  s["exit_code"] = res.exit_code;
  write_text(res.summary_path, s.dump(2) + "\n");
  return res;
}

int run_cli(const std::string& command, const std::string& config_path, int threads,
            const std::optional<std::string>& out_dir) {
  JobConfig cfg;
  try {
    const Command c = parse_command(command);
    cfg = load_config(config_path);
    if (cfg.command != c)
      throw ConfigError(std::string("command '") + command + "' does not match config command '" +
                        to_string(cfg.command) + "'");
    apply_env_overrides(cfg.tol);
    if (threads < 1) throw ConfigError("--threads must be >= 1");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIO;
  }
  try {
    const JobOutcome r = run_job(cfg, {threads, out_dir});
    for (const auto& c : r.checks)
      if (!c.passed) std::cerr << "check failed: " << c.name << ": " << c.detail << "\n";
    std::cout << r.csv_path.string() << "\n" << r.summary_path.string() << "\n";
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIO;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIO;
  }
}

}  // namespace semisep::cli
