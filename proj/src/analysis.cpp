#include "btq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "btq/calculus.hpp"
#include "btq/error.hpp"
#include "btq/hilbert.hpp"
#include "btq/parallel.hpp"

namespace btq {

namespace {

void require_finite(const Eigen::MatrixXcd& a, const char* what) {
  if (!a.allFinite()) throw NumericFault(std::string(what) + ": non-finite matrix entries");
}

void require_square(const Eigen::MatrixXcd& a, const char* what) {
  if (a.rows() != a.cols()) throw InvalidArgument(std::string(what) + ": matrix is not square");
}

std::vector<int> to_vector(std::span<const int> ps) { return {ps.begin(), ps.end()}; }

}  // namespace

double operator_norm(const Eigen::MatrixXcd& a) {
  require_square(a, "operator_norm");
  require_finite(a, "operator_norm");
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues()(0);
}

double hs_norm(const Eigen::MatrixXcd& a) {
  require_finite(a, "hs_norm");
  return a.norm();
}

cplx trace(const Eigen::MatrixXcd& a) {
  require_square(a, "trace");
  require_finite(a, "trace");
  return a.trace();
}

double dist_to_hermitian(const Eigen::MatrixXcd& a) {
  require_square(a, "dist_to_hermitian");
  return hs_norm(0.5 * (a - a.adjoint()));
}

double dist_to_scalar(const Eigen::MatrixXcd& a) {
  require_square(a, "dist_to_scalar");
  const double hs = hs_norm(a);
  const double radicand = hs * hs - std::norm(trace(a)) / static_cast<double>(a.rows());
  if (radicand < -1e-12) {
    throw NumericFault("dist_to_scalar: negative radicand " + std::to_string(radicand));
  }
  return std::sqrt(std::max(0.0, radicand));
}

// ---------------------------------------------------------------------------

RateFit fit_rate(std::span<const int> p_grid, std::span<const double> residuals, double target,
                 double tolerance, FitMode mode) {
  if (p_grid.size() != residuals.size()) {
    throw InvalidArgument("fit_rate: p grid and residuals differ in length");
  }
  RateFit fit;
  fit.p_grid.assign(p_grid.begin(), p_grid.end());
  fit.residuals.assign(residuals.begin(), residuals.end());
  fit.mode = mode;
  fit.target_exponent = target;
  fit.tolerance = tolerance;

  for (double r : residuals) {
    if (!std::isfinite(r)) throw NumericFault("fit_rate: non-finite residual");
  }
  if (std::all_of(residuals.begin(), residuals.end(),
                  [](double r) { return std::abs(r) <= kZeroResidual; }) &&
      !residuals.empty()) {
    fit.exact_zero = true;
    fit.verdict = true;
    return fit;
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (residuals[i] > kZeroResidual) {
      xs.push_back(std::log(static_cast<double>(p_grid[i])));
      ys.push_back(std::log(residuals[i]));
    }
  }
  const std::size_t usable = mode == FitMode::slope ? xs.size() : residuals.size();
  if (usable < 3) {
    throw InvalidArgument("fit_rate: fewer than 3 usable points (" + std::to_string(usable) + ")");
  }

  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
  }

  if (mode == FitMode::slope) {
    fit.verdict = fit.slope <= target + tolerance;
  } else {
    fit.verdict = true;
    for (std::size_t i = 1; i < residuals.size(); ++i) {
      if (!(residuals[i] < residuals[i - 1])) fit.verdict = false;
    }
  }
  return fit;
}

std::optional<double> class_target(Regularity r) {
  switch (r) {
    case Regularity::C0: return std::nullopt;
    case Regularity::C1: return -0.5;
    default: return -1.0;
  }
}

Regularity weakest(std::span<const Symbol> symbols) {
  Regularity r = Regularity::Cinf;
  for (const auto& s : symbols) r = std::min(r, s.regularity);
  return r;
}

RateTarget RateTarget::for_class(Regularity r, double tolerance) {
  return {class_target(r), tolerance};
}

RateFit fit_rate(std::span<const int> p_grid, std::span<const double> residuals,
                 const RateTarget& target) {
  if (target.exponent) {
    return fit_rate(p_grid, residuals, *target.exponent, target.tolerance, FitMode::slope);
  }
  return fit_rate(p_grid, residuals, 0.0, target.tolerance, FitMode::monotone);
}

// ---------------------------------------------------------------------------

std::vector<Point> diagonal_panel() {
  constexpr double kGoldenAngle = 2.399963229728653;
  std::vector<Point> pts;
  for (int k = 0; k < 20; ++k) {
    pts.push_back({(k + 0.5) / 20.0, std::fmod(k * kGoldenAngle, 2.0 * std::numbers::pi)});
  }
  return pts;
}

double kernel_diagonal_residual(const PhaseSpace& ps, int p, const Symbol& f,
                                std::span<const Point> points, const QuadSpec& spec) {
  const QuantumSpace H = quantum_space(ps, p);
  const ToeplitzMatrix t = toeplitz_matrix(H, f, spec);
  double worst = 0.0;
  for (const Point& x : points) worst = std::max(worst, std::abs(kernel_diagonal(H, t, x) - f(x)));
  return worst;
}

double trace_residual(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec) {
  const QuantumSpace H = quantum_space(ps, p);
  const ToeplitzMatrix t = toeplitz_matrix(H, f, spec);
  const cplx mean = integrate(ps, assembly_grid(ps, p, f, spec), f.eval);
  return std::abs(trace(t.entries) / static_cast<double>(p) - mean);
}

cplx normalized_product_trace(const PhaseSpace& ps, int p, std::span<const Symbol> fs,
                              const QuadSpec& spec) {
  if (fs.empty() || fs.size() > 4) {
    throw InvalidArgument("product trace: between 1 and 4 factors required");
  }
  const QuantumSpace H = quantum_space(ps, p);
  Eigen::MatrixXcd prod = toeplitz_matrix(H, fs[0], spec).entries;
  for (std::size_t i = 1; i < fs.size(); ++i) prod = prod * toeplitz_matrix(H, fs[i], spec).entries;
  return trace(prod) / static_cast<double>(p);
}

double product_trace_residual(const PhaseSpace& ps, int p, std::span<const Symbol> fs,
                              const QuadSpec& spec) {
  const cplx value = normalized_product_trace(ps, p, fs, spec);
  Symbol prod = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) prod = prod * fs[i];
  const cplx limit = integrate(ps, assembly_grid(ps, p, prod, spec), prod.eval);
  return std::abs(value - limit);
}

NormResidual norm_residual(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec) {
  const QuantumSpace H = quantum_space(ps, p);
  const ToeplitzMatrix t = toeplitz_matrix(H, f, spec);
  const QuadratureGrid grid = assembly_grid(ps, p, f, spec);

  NormResidual out;
  out.sup_norm = sup_norm(f, grid).value;
  out.operator_norm = operator_norm(t.entries);
  out.residual = out.sup_norm - out.operator_norm;

  Point peak = grid.node(0);
  if (f.peak) {
    peak = *f.peak;
  } else {
    double best = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = std::abs(f(grid.node(i)));
      if (v > best) {
        best = v;
        peak = grid.node(i);
      }
    }
  }
  const StateVector psi = coherent_state(H, peak);
  out.coherent_bound = std::abs(psi.coeffs.dot(t.entries * psi.coeffs));
  return out;
}

double DistanceResiduals::herm_residual() const { return std::abs(herm_value - herm_limit); }
double DistanceResiduals::scalar_residual() const { return std::abs(scalar_value - scalar_limit); }

DistanceResiduals distance_residuals(const PhaseSpace& ps, int p, const Symbol& f,
                                     const QuadSpec& spec) {
  const QuantumSpace H = quantum_space(ps, p);
  const ToeplitzMatrix t = toeplitz_matrix(H, f, spec);
  const QuadratureGrid grid = assembly_grid(ps, p, f, spec);
  DistanceResiduals out;
  const double dh = dist_to_hermitian(t.entries);
  const double ds = dist_to_scalar(t.entries);
  out.herm_value = dh * dh / p;
  out.scalar_value = ds * ds / p;
  const double lr = dist_to_real(ps, grid, f);
  const double lc = dist_to_const(ps, grid, f);
  out.herm_limit = lr * lr;
  out.scalar_limit = lc * lc;
  return out;
}

// ---------------------------------------------------------------------------

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("BTQ_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return cap;
  }
  return hw;
}

RateFit trace_expansion_residual(const PhaseSpace& ps, std::span<const int> p_grid,
                                 const Symbol& f, const RateTarget& target) {
  const auto res = parallel_map(to_vector(p_grid), worker_count(),
                                [&](int p) { return trace_residual(ps, p, f); });
  return fit_rate(p_grid, res, target);
}

RateFit product_trace_sweep(const PhaseSpace& ps, std::span<const int> p_grid,
                            std::span<const Symbol> fs, const RateTarget& target) {
  const auto res = parallel_map(to_vector(p_grid), worker_count(),
                                [&](int p) { return product_trace_residual(ps, p, fs); });
  return fit_rate(p_grid, res, target);
}

NormSweep norm_convergence_residual(const PhaseSpace& ps, std::span<const int> p_grid,
                                    const Symbol& f, const RateTarget& target) {
  NormSweep out;
  out.levels = parallel_map(to_vector(p_grid), worker_count(),
                            [&](int p) { return norm_residual(ps, p, f); });
  std::vector<double> res;
  for (const auto& l : out.levels) res.push_back(l.residual);
  out.fit = fit_rate(p_grid, res, target);
  return out;
}

DistanceSweep distance_theorem_residuals(const PhaseSpace& ps, std::span<const int> p_grid,
                                         const Symbol& f, const RateTarget& target) {
  DistanceSweep out;
  out.levels = parallel_map(to_vector(p_grid), worker_count(),
                            [&](int p) { return distance_residuals(ps, p, f); });
  std::vector<double> herm, scalar;
  for (const auto& l : out.levels) {
    herm.push_back(l.herm_residual());
    scalar.push_back(l.scalar_residual());
  }
  out.herm = fit_rate(p_grid, herm, target);
  out.scalar = fit_rate(p_grid, scalar, target);
  return out;
}

LaplaceReport laplace_bound_check(const PhaseSpace& ps, std::span<const int> p_grid,
                                  const Symbol& f, double epsilon) {
  LaplaceReport out;
  out.eigenvalue = first_laplace_eigenvalue(ps);
  out.dirichlet_energy = dirichlet_energy(ps, assembly_grid(ps, 32, f, {}), f);
  out.bound = (1.0 + epsilon) * out.dirichlet_energy / out.eigenvalue;
  out.p_grid = to_vector(p_grid);
  out.lhs = parallel_map(out.p_grid, worker_count(), [&](int p) {
    return multiplication_residual(quantum_space(ps, p), f);
  });
  out.verdict = std::all_of(out.lhs.begin(), out.lhs.end(),
                            [&](double v) { return v <= out.bound + 1e-14; });
  return out;
}

}  // namespace btq
