#include "btq/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "btq/calculus.hpp"
#include "btq/error.hpp"
#include "btq/hilbert.hpp"
#include "btq/parallel.hpp"
#include "btq/semiclassics.hpp"

namespace btq {

namespace {

constexpr double kExactTolerance = 1e-10;
constexpr double kModelTolerance = 1e-8;
constexpr double kContractionSlack = 1e-8;
constexpr double kBracketTolerance = 1e-6;
constexpr double kAntisymmetryTolerance = 1e-8;

constexpr std::array kExperimentNames{
    std::pair{ExperimentKind::gram_check, "gram_check"},
    std::pair{ExperimentKind::bergman_density, "bergman_density"},
    std::pair{ExperimentKind::kernel_diagonal, "kernel_diagonal"},
    std::pair{ExperimentKind::trace_expansion, "trace_expansion"},
    std::pair{ExperimentKind::product_trace, "product_trace"},
    std::pair{ExperimentKind::product_residual, "product_residual"},
    std::pair{ExperimentKind::commutator, "commutator"},
    std::pair{ExperimentKind::norm_convergence, "norm_convergence"},
    std::pair{ExperimentKind::distances, "distances"},
    std::pair{ExperimentKind::laplace_bound, "laplace_bound"},
    std::pair{ExperimentKind::model_kernel, "model_kernel"},
    std::pair{ExperimentKind::exact_structure, "exact_structure"},
    std::pair{ExperimentKind::invariants, "invariants"},
};

// ---------------------------------------------------------------------------
// Config parsing

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits on commas outside parentheses.
std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.emplace_back(trim(cur));
  return out;
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double scale = 1.0;
  // Accepts "2pi", "2*pi", "pi".
  if (text.size() >= 2 && text.substr(text.size() - 2) == "pi") {
    scale = std::numbers::pi;
    text = trim(text.substr(0, text.size() - 2));
    if (!text.empty() && text.back() == '*') text = trim(text.substr(0, text.size() - 1));
    if (text.empty()) return scale;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("config: key '" + std::string(key) + "': not a number: '" +
                      std::string(text) + "'");
  }
  return v * scale;
}

long long parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config: key '" + std::string(key) + "': not an integer: '" +
                      std::string(text) + "'");
  }
  return v;
}

Symbol symbol_or_config_error(const std::string& name) {
  try {
    return builtin_symbol(name);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::vector<Symbol> resolve_symbols(const ExperimentConfig& c) {
  std::vector<Symbol> out;
  for (const auto& s : c.symbols) out.push_back(symbol_or_config_error(s));
  return out;
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ";" : "") + names[i];
  return s;
}

void validate_config(ExperimentConfig& c) {
  const auto kind = c.experiment;
  if (c.p_list.empty()) {
    if (kind == ExperimentKind::model_kernel) {
      c.p_list = {1, 4, 16, 64};
    } else {
      throw ConfigError("config: p_list is required");
    }
  }
  for (std::size_t i = 0; i < c.p_list.size(); ++i) {
    if (c.p_list[i] < 1) throw ConfigError("config: p values must be >= 1");
    if (i > 0 && c.p_list[i] <= c.p_list[i - 1]) {
      throw ConfigError("config: p_list must be strictly ascending");
    }
  }
  if (is_rate_experiment(kind) && c.p_list.front() < 8) {
    throw ConfigError("config: rate experiments need every p >= 8");
  }
  if (c.quad.n_t && (*c.quad.n_t < 1 || *c.quad.n_phi < 1)) {
    throw ConfigError("config: quad orders must be positive");
  }
  if (!(c.tolerance > 0.0)) throw ConfigError("config: tolerance must be positive");

  const auto symbols = resolve_symbols(c);
  const auto count = symbols.size();
  switch (kind) {
    case ExperimentKind::gram_check:
    case ExperimentKind::bergman_density:
    case ExperimentKind::model_kernel:
    case ExperimentKind::exact_structure:
    case ExperimentKind::invariants:
      if (count != 0) throw ConfigError("config: " + std::string(to_string(kind)) + " takes no symbols");
      break;
    case ExperimentKind::product_residual:
    case ExperimentKind::commutator:
      if (count != 2) throw ConfigError("config: " + std::string(to_string(kind)) + " needs two symbols");
      break;
    case ExperimentKind::product_trace:
      if (count < 1 || count > 4) throw ConfigError("config: product_trace needs 1 to 4 symbols");
      break;
    default:
      if (count < 1) throw ConfigError("config: " + std::string(to_string(kind)) + " needs a symbol");
  }
  if (kind == ExperimentKind::commutator) {
    for (const auto& s : symbols) {
      if (s.regularity == Regularity::C0 && !s.has_gradient()) {
        throw ConfigError("config: bracket unavailable for C0 symbol '" + s.name + "'");
      }
    }
  }
  if (kind == ExperimentKind::laplace_bound) {
    for (const auto& s : symbols) {
      if (s.regularity == Regularity::C0 && !s.has_gradient()) {
        throw ConfigError("config: laplace_bound needs C1 symbols, got '" + s.name + "'");
      }
    }
  }
  if (c.order != 0 && c.order != 1) throw ConfigError("config: order must be 0 or 1");
  if (c.order == 1 && !c.quad.is_auto()) {
    throw ConfigError("config: order = 1 requires quad = auto");
  }
  if (kind == ExperimentKind::model_kernel) {
    if (c.model_a.empty()) c.model_a.assign(c.model_n, 2.0 * std::numbers::pi);
    ModelKernelParams params;
    params.n = c.model_n;
    params.a = c.model_a;
    try {
      validate(params);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Running

template <class Fn>
auto with_context(const ExperimentConfig& c, const std::string& series, int p, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericFault& e) {
    throw NumericFault(std::string(to_string(c.experiment)) + " [" + series + "] p=" +
                       std::to_string(p) + ": " + e.what());
  }
}

RateTarget target_for(const ExperimentConfig& c, Regularity weakest_class) {
  RateTarget t = RateTarget::for_class(weakest_class, c.tolerance);
  if (c.target_exponent) t.exponent = c.target_exponent;
  if (c.mode == ModeChoice::monotone) t.exponent.reset();
  if (c.mode == ModeChoice::slope && !t.exponent) {
    throw ConfigError("config: slope mode needs target_exponent for C0 symbols");
  }
  return t;
}

std::optional<double> partial_slope(const std::vector<int>& ps, const std::vector<double>& res,
                                    std::size_t upto) {
  std::size_t positive = 0;
  for (std::size_t i = 0; i <= upto; ++i) positive += res[i] > kZeroResidual;
  if (positive < 3) return std::nullopt;
  const std::span<const int> pp(ps.data(), upto + 1);
  const std::span<const double> rr(res.data(), upto + 1);
  return fit_rate(pp, rr, 0.0, 0.0, FitMode::slope).slope;
}

struct Series {
  std::string name;
  std::vector<double> residuals;
  std::vector<double> references;
  std::vector<std::pair<int, int>> grids;
};

void add_rate_series(Report& report, const Series& s, const RateTarget& target) {
  const auto& ps = report.config.p_list;
  FitSummary summary{s.name, std::nullopt, true};
  Verdict final_verdict = Verdict::not_applicable;
  if (ps.size() >= 3) {
    try {
      summary.fit = fit_rate(ps, s.residuals, target);
      summary.passed = summary.fit->verdict;
    } catch (const InvalidArgument&) {
      summary.passed = false;
    }
    final_verdict = summary.passed ? Verdict::pass : Verdict::fail;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ReportRow row{std::string(to_string(report.config.experiment)),
                  s.name,
                  ps[i],
                  s.grids[i].first,
                  s.grids[i].second,
                  s.residuals[i],
                  s.references[i],
                  partial_slope(ps, s.residuals, i),
                  i + 1 == ps.size() ? final_verdict : Verdict::not_applicable};
    report.rows.push_back(std::move(row));
  }
  report.fits.push_back(std::move(summary));
}

// Rows checked one by one against a fixed threshold; the reference column
// carries the threshold (or the quantity it is relative to).
void add_threshold_row(Report& report, const std::string& series, int p, std::pair<int, int> grid,
                       double residual, double reference, double threshold) {
  const bool ok = std::isfinite(residual) && residual <= threshold;
  report.rows.push_back({std::string(to_string(report.config.experiment)), series, p, grid.first,
                         grid.second, residual, reference, std::nullopt,
                         ok ? Verdict::pass : Verdict::fail});
  if (!ok) report.fits.push_back({series + " p=" + std::to_string(p), std::nullopt, false});
}

std::pair<int, int> grid_dims(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& q) {
  const QuadratureGrid g = assembly_grid(ps, p, f, q);
  return {g.n_t(), g.n_phi()};
}

std::vector<Point> random_points(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    const double t = std::generate_canonical<double, 53>(rng);
    const double phi = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
    pts.push_back({t, phi});
  }
  return pts;
}

using PerLevel = std::function<double(int)>;

// One residual per p, computed in parallel, assembled into a rate series.
Series sweep_series(const ExperimentConfig& c, const PhaseSpace& ps, const std::string& name,
                    const Symbol& grid_symbol, const PerLevel& residual, const PerLevel& reference) {
  Series s;
  s.name = name;
  const auto results = parallel_map(c.p_list, worker_count(), [&](int p) {
    return with_context(c, name, p, [&] { return std::pair{residual(p), reference(p)}; });
  });
  for (std::size_t i = 0; i < c.p_list.size(); ++i) {
    s.residuals.push_back(results[i].first);
    s.references.push_back(results[i].second);
    s.grids.push_back(grid_dims(ps, c.p_list[i], grid_symbol, c.quad));
  }
  return s;
}

void run_single_symbol(Report& report, const PhaseSpace& ps, const std::vector<Symbol>& symbols) {
  const auto& c = report.config;
  for (const Symbol& f : symbols) {
    const RateTarget target = target_for(c, f.regularity);
    switch (c.experiment) {
      case ExperimentKind::kernel_diagonal: {
        const auto panel = diagonal_panel();
        add_rate_series(report,
                        sweep_series(c, ps, f.name, f,
                                     [&](int p) { return kernel_diagonal_residual(ps, p, f, panel, c.quad); },
                                     [](int) { return 0.0; }),
                        target);
        break;
      }
      case ExperimentKind::trace_expansion:
        add_rate_series(
            report,
            sweep_series(c, ps, f.name, f, [&](int p) { return trace_residual(ps, p, f, c.quad); },
                         [&](int p) {
                           return integrate(ps, assembly_grid(ps, p, f, c.quad), f.eval).real();
                         }),
            target);
        break;
      case ExperimentKind::norm_convergence: {
        const auto levels = parallel_map(c.p_list, worker_count(), [&](int p) {
          return with_context(c, f.name, p, [&] { return norm_residual(ps, p, f, c.quad); });
        });
        Series s{f.name, {}, {}, {}};
        for (std::size_t i = 0; i < levels.size(); ++i) {
          s.residuals.push_back(levels[i].residual);
          s.references.push_back(levels[i].sup_norm);
          s.grids.push_back(grid_dims(ps, c.p_list[i], f, c.quad));
        }
        add_rate_series(report, s, target);
        // Coherent-state lower bound: sup|f| - |<T Psi, Psi>| against C/p.
        for (std::size_t i = 0; i < levels.size(); ++i) {
          const int p = c.p_list[i];
          const double gap = levels[i].sup_norm - levels[i].coherent_bound;
          if (c.coherent_margin) {
            add_threshold_row(report, f.name + ":coherent", p, s.grids[i], gap,
                              *c.coherent_margin / p, *c.coherent_margin / p);
          } else {
            report.rows.push_back({"norm_convergence", f.name + ":coherent", p, s.grids[i].first,
                                   s.grids[i].second, gap, 0.0, std::nullopt,
                                   Verdict::not_applicable});
          }
        }
        break;
      }
      case ExperimentKind::distances: {
        const auto levels = parallel_map(c.p_list, worker_count(), [&](int p) {
          return with_context(c, f.name, p, [&] { return distance_residuals(ps, p, f, c.quad); });
        });
        Series herm{f.name + ":herm", {}, {}, {}};
        Series scalar{f.name + ":scalar", {}, {}, {}};
        for (std::size_t i = 0; i < levels.size(); ++i) {
          const auto g = grid_dims(ps, c.p_list[i], f, c.quad);
          herm.residuals.push_back(levels[i].herm_residual());
          herm.references.push_back(levels[i].herm_limit);
          herm.grids.push_back(g);
          scalar.residuals.push_back(levels[i].scalar_residual());
          scalar.references.push_back(levels[i].scalar_limit);
          scalar.grids.push_back(g);
        }
        add_rate_series(report, herm, target);
        add_rate_series(report, scalar, target);
        break;
      }
      case ExperimentKind::laplace_bound: {
        const LaplaceReport lr = with_context(c, f.name, c.p_list.front(), [&] {
          return laplace_bound_check(ps, c.p_list, f);
        });
        for (std::size_t i = 0; i < lr.p_grid.size(); ++i) {
          add_threshold_row(report, f.name, lr.p_grid[i], grid_dims(ps, lr.p_grid[i], f, c.quad),
                            lr.lhs[i], lr.bound, lr.bound);
        }
        break;
      }
      default:
        throw InvalidArgument("run_single_symbol: unexpected experiment");
    }
  }
}

void run_model_kernel(Report& report) {
  const auto& c = report.config;
  ModelKernelParams params;
  params.n = c.model_n;
  params.a = c.model_a;
  const std::pair grid{params.order, params.order};
  const double rep =
      with_context(c, "reproducing", 0, [&] { return check_reproducing(params); });
  add_threshold_row(report, "reproducing", 0, grid, rep, kModelTolerance, kModelTolerance);
  RealVec z(2 * params.n, 0.0);
  z[0] = 0.3;
  if (params.n == 2) z[3] = -0.1;
  for (int p : c.p_list) {
    const double m = with_context(c, "moment", p, [&] { return gaussian_moment_check(params, p, z); });
    add_threshold_row(report, "moment", p, grid, m, kModelTolerance, kModelTolerance);
  }
}

void run_exact_structure(Report& report, const PhaseSpace& ps) {
  const auto& c = report.config;
  const Symbol one = builtin_symbol("const(1)");
  const Symbol z3 = builtin_symbol("z3");
  for (int p : c.p_list) {
    const QuantumSpace H = quantum_space(ps, p);
    const auto t1 = with_context(c, one.name, p, [&] { return toeplitz_matrix(H, one, c.quad); });
    const double id_defect = (t1.entries - Eigen::MatrixXcd::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff();
    add_threshold_row(report, "const(1)", p, grid_dims(ps, p, one, c.quad), id_defect, kExactTolerance,
                      kExactTolerance);

    const auto tz = with_context(c, z3.name, p, [&] { return toeplitz_matrix(H, z3, c.quad); });
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(p + 1, p + 1);
    for (int j = 0; j <= p; ++j) expected(j, j) = 2.0 * (j + 1) / (p + 2.0) - 1.0;
    add_threshold_row(report, "z3", p, grid_dims(ps, p, z3, c.quad),
                      (tz.entries - expected).cwiseAbs().maxCoeff(), kExactTolerance, kExactTolerance);
  }
}

double min_eigenvalue(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void run_invariants(Report& report, const PhaseSpace& ps) {
  const auto& c = report.config;
  const Symbol mix = builtin_symbol("complex_mix");
  const Symbol kink = builtin_symbol("kink");
  const Symbol holder = builtin_symbol("holder(0.5)");
  const Symbol z1 = builtin_symbol("z1");
  const Symbol z2 = builtin_symbol("z2");
  const Symbol z3 = builtin_symbol("z3");
  const Symbol iz3 = builtin_symbol("i_z3");
  const cplx alpha{2.0, 0.0}, beta{0.0, 3.0};
  const Symbol combo = alpha * z1 + beta * iz3;

  for (int p : c.p_list) {
    const QuantumSpace H = quantum_space(ps, p);
    auto T = [&](const Symbol& f) {
      return with_context(c, f.name, p, [&] { return toeplitz_matrix(H, f, c.quad).entries; });
    };
    const Eigen::MatrixXcd tm = T(mix);
    add_threshold_row(report, "adjoint:complex_mix", p, grid_dims(ps, p, mix, c.quad),
                      (T(conj(mix)) - tm.adjoint()).cwiseAbs().maxCoeff(), kExactTolerance, kExactTolerance);
    const Eigen::MatrixXcd tk = T(kink);
    const double sup = sup_norm(kink, assembly_grid(ps, p, kink, c.quad)).value;
    add_threshold_row(report, "contraction:kink", p, grid_dims(ps, p, kink, c.quad),
                      std::max(0.0, operator_norm(tk) - sup), kContractionSlack,
                      kContractionSlack);
    add_threshold_row(report, "positivity:holder(0.5)", p, grid_dims(ps, p, holder, c.quad),
                      std::max(0.0, -min_eigenvalue(T(holder))), kExactTolerance, kExactTolerance);
    add_threshold_row(report, "linearity:z1;i_z3", p, grid_dims(ps, p, combo, c.quad),
                      (T(combo) - (alpha * T(z1) + beta * T(iz3))).cwiseAbs().maxCoeff(), kExactTolerance,
                      kExactTolerance);
  }

  // Bracket identities at random points.
  const auto pts = random_points(c.seed, 100);
  double antisym = 0.0, jacobi = 0.0, structure = 0.0;
  const std::array<const Symbol*, 3> zs{&z1, &z2, &z3};
  const Symbol b23 = bracket_symbol(ps, z2, z3);
  const Symbol b31 = bracket_symbol(ps, z3, z1);
  const Symbol b12 = bracket_symbol(ps, z1, z2);
  for (Point x : pts) {
    x.t = 0.02 + 0.96 * x.t;  // keep the finite differences inside the chart
    antisym = std::max(antisym, std::abs(poisson_bracket(ps, mix, kink, x) +
                                         poisson_bracket(ps, kink, mix, x)));
    jacobi = std::max(jacobi, std::abs(poisson_bracket(ps, z1, b23, x) +
                                       poisson_bracket(ps, z2, b31, x) +
                                       poisson_bracket(ps, z3, b12, x)));
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3, k = (a + 2) % 3;
      const double expected = 2.0 * ps.orientation * x.embed()[k];
      structure = std::max(structure, std::abs(poisson_bracket(ps, *zs[a], *zs[b], x) - expected));
    }
  }
  add_threshold_row(report, "poisson:antisymmetry", 0, {0, 0}, antisym, kAntisymmetryTolerance, kAntisymmetryTolerance);
  add_threshold_row(report, "poisson:jacobi", 0, {0, 0}, jacobi, kBracketTolerance, kBracketTolerance);
  add_threshold_row(report, "poisson:structure", 0, {0, 0}, structure, kBracketTolerance, kBracketTolerance);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_rate_experiment(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kernel_diagonal:
    case ExperimentKind::trace_expansion:
    case ExperimentKind::product_trace:
    case ExperimentKind::product_residual:
    case ExperimentKind::commutator:
    case ExperimentKind::norm_convergence:
    case ExperimentKind::distances:
    case ExperimentKind::laplace_bound:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "n/a";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  bool have_experiment = false;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "symbol") key = "symbols";
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");

    if (key == "experiment") {
      const auto kind = parse_experiment(value);
      if (!kind) throw ConfigError("config: unknown experiment '" + std::string(value) + "'");
      c.experiment = *kind;
      have_experiment = true;
    } else if (key == "symbols") {
      c.symbols = split_list(value);
    } else if (key == "p_list") {
      for (const auto& item : split_list(value)) c.p_list.push_back(static_cast<int>(parse_int(key, item)));
    } else if (key == "quad") {
      if (value != "auto") {
        const auto parts = split_list(value);
        if (parts.size() != 2) throw ConfigError("config: quad must be 'auto' or 'n_t, n_phi'");
        c.quad = QuadSpec::fixed(static_cast<int>(parse_int(key, parts[0])),
                                 static_cast<int>(parse_int(key, parts[1])));
      }
    } else if (key == "target_exponent") {
      if (value != "auto") c.target_exponent = parse_double(key, value);
    } else if (key == "tolerance") {
      c.tolerance = parse_double(key, value);
    } else if (key == "mode") {
      if (value == "auto") c.mode = ModeChoice::automatic;
      else if (value == "slope") c.mode = ModeChoice::slope;
      else if (value == "monotone") c.mode = ModeChoice::monotone;
      else throw ConfigError("config: mode must be auto, slope or monotone");
    } else if (key == "out_path") {
      c.out_path = std::string(value);
    } else if (key == "seed") {
      const long long s = parse_int(key, value);
      if (s < 0) throw ConfigError("config: seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "orientation") {
      const long long o = parse_int(key, value);
      if (o != 1 && o != -1) throw ConfigError("config: orientation must be 1 or -1");
      c.orientation = static_cast<int>(o);
    } else if (key == "order") {
      c.order = static_cast<int>(parse_int(key, value));
    } else if (key == "coherent_margin") {
      c.coherent_margin = parse_double(key, value);
    } else if (key == "n") {
      c.model_n = static_cast<int>(parse_int(key, value));
    } else if (key == "a") {
      for (const auto& item : split_list(value)) c.model_a.push_back(parse_double(key, item));
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!have_experiment) throw ConfigError("config: 'experiment' is required");
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool Report::passed() const {
  return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.verdict == Verdict::fail; }) &&
         std::all_of(fits.begin(), fits.end(), [](const FitSummary& f) { return f.passed; });
}

Report run_experiment(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  validate_config(c);
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.config = c;
  const PhaseSpace ps = make_phase_space(c.orientation);
  const auto symbols = resolve_symbols(c);

  switch (c.experiment) {
    case ExperimentKind::gram_check:
      for (int p : c.p_list) {
        const QuantumSpace H = quantum_space(ps, p);
        const QuadratureGrid grid = c.quad.is_auto() ? quadrature_grid(ps, p + 1, 2 * p + 2)
                                                     : quadrature_grid(ps, *c.quad.n_t, *c.quad.n_phi);
        const double defect = with_context(c, "-", p, [&] { return gram_defect(H, grid); });
        add_threshold_row(report, "-", p, {grid.n_t(), grid.n_phi()}, defect, kExactTolerance, kExactTolerance);
      }
      break;
    case ExperimentKind::bergman_density: {
      const auto pts = random_points(c.seed, 100);
      for (int p : c.p_list) {
        const QuantumSpace H = quantum_space(ps, p);
        double worst = 0.0;
        for (const Point& x : pts) worst = std::max(worst, std::abs(bergman_density(H, x) - (p + 1.0)));
        add_threshold_row(report, "-", p, {0, 0}, worst, p + 1.0, kExactTolerance * (p + 1.0));
      }
      break;
    }
    case ExperimentKind::kernel_diagonal:
    case ExperimentKind::trace_expansion:
    case ExperimentKind::norm_convergence:
    case ExperimentKind::distances:
    case ExperimentKind::laplace_bound:
      run_single_symbol(report, ps, symbols);
      break;
    case ExperimentKind::product_trace: {
      Symbol prod = symbols[0];
      for (std::size_t i = 1; i < symbols.size(); ++i) prod = prod * symbols[i];
      add_rate_series(
          report,
          sweep_series(c, ps, join(c.symbols), prod,
                       [&](int p) { return product_trace_residual(ps, p, symbols, c.quad); },
                       [&](int p) { return integrate(ps, assembly_grid(ps, p, prod, c.quad), prod.eval).real(); }),
          target_for(c, weakest(symbols)));
      break;
    }
    case ExperimentKind::product_residual: {
      ExperimentConfig cc = c;
      if (c.order == 1 && c.mode == ModeChoice::automatic && !c.target_exponent) {
        cc.mode = ModeChoice::monotone;
      }
      const Symbol prod = symbols[0] * symbols[1];
      add_rate_series(report,
                      sweep_series(c, ps, join(c.symbols), prod,
                                   [&](int p) {
                                     return product_residual(quantum_space(ps, p), symbols[0],
                                                             symbols[1], c.order, c.quad);
                                   },
                                   [](int) { return 0.0; }),
                      target_for(cc, weakest(symbols)));
      break;
    }
    case ExperimentKind::commutator: {
      // C1 pairs only decay qualitatively.
      ExperimentConfig cc = c;
      const Regularity r = weakest(symbols);
      if (r == Regularity::C1 && c.mode == ModeChoice::automatic && !c.target_exponent) {
        cc.mode = ModeChoice::monotone;
      }
      const Symbol bracket = bracket_symbol(ps, symbols[0], symbols[1]);
      add_rate_series(report,
                      sweep_series(c, ps, join(c.symbols), bracket,
                                   [&](int p) {
                                     return commutator_test(quantum_space(ps, p), symbols[0],
                                                            symbols[1], c.quad);
                                   },
                                   [](int) { return 0.0; }),
                      target_for(cc, r == Regularity::C1 ? Regularity::C0 : r));
      break;
    }
    case ExperimentKind::model_kernel:
      run_model_kernel(report);
      break;
    case ExperimentKind::exact_structure:
      run_exact_structure(report, ps);
      break;
    case ExperimentKind::invariants:
      run_invariants(report, ps);
      break;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Output

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << quoted(r.symbols) << ',' << r.p << ',' << r.n_t << ','
        << r.n_phi << ',' << format_real(r.residual) << ',' << format_real(r.reference) << ','
        << (r.slope ? format_real(*r.slope) : std::string()) << ',' << to_string(r.verdict)
        << '\n';
  }
}

std::string summary_json(const std::vector<Report>& reports) {
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : r.fits) {
      nlohmann::json jf{{"series", f.series}, {"passed", f.passed}};
      if (f.fit) {
        jf["mode"] = f.fit->mode == FitMode::slope ? "slope" : "monotone";
        jf["slope"] = f.fit->slope;
        jf["intercept"] = f.fit->intercept;
        jf["target_exponent"] = f.fit->target_exponent;
        jf["tolerance"] = f.fit->tolerance;
        jf["exact_zero"] = f.fit->exact_zero;
        jf["p_grid"] = f.fit->p_grid;
        jf["residuals"] = f.fit->residuals;
      }
      fits.push_back(std::move(jf));
    }
    all.push_back({{"experiment", to_string(r.config.experiment)},
                   {"symbols", r.config.symbols},
                   {"p_list", r.config.p_list},
                   {"rows", r.rows.size()},
                   {"fits", std::move(fits)},
                   {"verdict", r.passed() ? "pass" : "fail"},
                   {"wall_seconds", r.wall_seconds}});
  }
  return all.dump(2);
}

namespace {

template <class Fn>
int guarded(std::ostream& diag, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericFault& e) {
    diag << "numeric fault: " << e.what() << '\n';
    return kExitNumeric;
  }
}

void write_files(const std::filesystem::path& csv_path, const std::vector<ReportRow>& rows,
                 const std::vector<Report>& reports) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write '" + csv_path.string() + "'");
  write_csv(rows, csv);
  std::filesystem::path json_path = csv_path;
  json_path.replace_extension(".json");
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ConfigError("cannot write '" + json_path.string() + "'");
  js << summary_json(reports) << '\n';
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& diag) {
  return guarded(diag, [&] {
    const Report report = run_experiment(config);
    const std::filesystem::path out =
        config.out_path.empty() ? std::string(to_string(config.experiment)) + ".csv" : config.out_path;
    write_files(out, report.rows, {report});
    diag << to_string(config.experiment) << ' ' << join(config.symbols) << ": "
         << (report.passed() ? "pass" : "fail") << " (" << out.string() << ")\n";
    return report.passed() ? kExitPass : kExitFail;
  });
}

int run_file(const std::filesystem::path& config_path, std::ostream& diag) {
  return guarded(diag, [&] { return run(load_config(config_path), diag); });
}

int run_suite(std::string_view name, const std::filesystem::path& out_dir, std::ostream& diag) {
  return guarded(diag, [&] {
    const auto entries = suite_entries(name);
    std::map<std::string, std::vector<ReportRow>> groups;
    std::vector<Report> reports;
    bool all_ok = true;
    for (const auto& e : entries) {
      const Report r = run_experiment(e.config);
      const bool ok = e.expect_failure ? !r.passed() : r.passed();
      all_ok = all_ok && ok;
      diag << (ok ? "[pass] " : "[FAIL] ") << e.group << ' ' << to_string(e.config.experiment)
           << ' ' << join(e.config.symbols) << (e.expect_failure ? " (mutation, must fail)" : "")
           << '\n';
      auto& rows = groups[e.group];
      rows.insert(rows.end(), r.rows.begin(), r.rows.end());
      reports.push_back(r);
    }
    std::filesystem::create_directories(out_dir);
    for (const auto& [group, rows] : groups) {
      std::ofstream csv(out_dir / (group + ".csv"), std::ios::binary);
      if (!csv) throw ConfigError("cannot write into '" + out_dir.string() + "'");
      write_csv(rows, csv);
    }
    std::ofstream js(out_dir / "suite.json", std::ios::binary);
    js << summary_json(reports) << '\n';
    diag << "suite " << name << ": " << (all_ok ? "pass" : "fail") << '\n';
    return all_ok ? kExitPass : kExitFail;
  });
}

std::vector<SuiteEntry> suite_entries(std::string_view name) {
  auto cfg = [](std::string text) { return parse_config(text); };
  std::vector<SuiteEntry> out;
  if (name == "smoke") {
    const std::string ps = "p_list = 8, 16\n";
    for (const char* text : {
             "experiment = gram_check\n",
             "experiment = bergman_density\n",
             "experiment = exact_structure\n",
             "experiment = kernel_diagonal\nsymbols = z3, kink\n",
             "experiment = trace_expansion\nsymbols = z3sq\n",
             "experiment = product_trace\nsymbols = z3, z3\n",
             "experiment = product_residual\nsymbols = z3, z1\n",
             "experiment = commutator\nsymbols = z3, z1\n",
             "experiment = norm_convergence\nsymbols = z3\ncoherent_margin = 3\n",
             "experiment = distances\nsymbols = i_z3\n",
             "experiment = laplace_bound\nsymbols = z3\n",
             "experiment = invariants\n",
         }) {
      out.push_back({"smoke", cfg(std::string(text) + ps), false});
    }
    out.push_back({"smoke", cfg("experiment = model_kernel\np_list = 1, 4\n"), false});
    return out;
  }
  if (name == "paper-full") {
    const std::string full = "p_list = 8, 16, 32, 64, 128, 256\n";
    const std::string tail = "p_list = 16, 32, 64, 128, 256\n";
    auto add = [&](const std::string& group, const std::string& text, bool expect_failure = false) {
      out.push_back({group, cfg(text), expect_failure});
    };
    add("criterion_1", "experiment = gram_check\np_list = 1, 2, 4, 8, 16, 32, 64, 128, 256\n");
    add("criterion_1", "experiment = bergman_density\nseed = 1\np_list = 1, 2, 4, 8, 16, 32, 64, 128, 256\n");
    add("criterion_1", "experiment = exact_structure\np_list = 1, 2, 4, 8, 16, 32, 64, 128, 256\n");
    add("criterion_2", "experiment = model_kernel\nn = 1\na = 2pi\np_list = 1, 4, 16, 64\n");
    add("criterion_2", "experiment = model_kernel\nn = 2\na = 2pi, 4pi\np_list = 1, 4, 16, 64\n");
    add("criterion_3", "experiment = norm_convergence\nsymbols = z3\ntolerance = 0.05\ncoherent_margin = 3\n" + tail);
    add("criterion_3", "experiment = norm_convergence\nsymbols = kink, holder(0.5)\n" + tail);
    add("criterion_4", "experiment = kernel_diagonal\nsymbols = z3, z1, complex_mix, harmonic_Y2, kink, holder(0.5)\n" + full);
    add("criterion_5", "experiment = trace_expansion\nsymbols = z3sq, harmonic_Y2, const(1)\n" + full);
    add("criterion_5", "experiment = product_trace\nsymbols = z3, z3\n" + full);
    add("criterion_5", "experiment = product_trace\nsymbols = kink, kink\n" + full);
    add("criterion_6", "experiment = product_residual\nsymbols = z3, z1\n" + full);
    add("criterion_6", "experiment = product_residual\nsymbols = z1, complex_mix\n" + full);
    add("criterion_6", "experiment = product_residual\nsymbols = kink, z1\n" + full);
    add("criterion_6", "experiment = product_residual\nsymbols = kink, kink\n" + full);
    add("criterion_6", "experiment = commutator\nsymbols = z3, z1\ntolerance = 0.2\n" + full);
    add("criterion_7", "experiment = distances\nsymbols = i_z3, z3, complex_mix, i_kink, kink\n" + full);
    add("criterion_8", "experiment = laplace_bound\nsymbols = z1, z3, kink\n" + full);
    add("criterion_9", "experiment = invariants\np_list = 8, 32, 128\nseed = 7\n");
    add("criterion_9_mutation",
        "experiment = commutator\nsymbols = z3, z1\ntolerance = 0.2\norientation = -1\n" + full, true);
    return out;
  }
  throw ConfigError("unknown suite '" + std::string(name) + "' (expected smoke or paper-full)");
}

}  // namespace btq
