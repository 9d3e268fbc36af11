#pragma once

// Operator functionals, expansion residuals over p-grids, and the log-log
// rate fitter that turns remainder classes into verdicts.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btq/geometry.hpp"
#include "btq/symbol.hpp"
#include "btq/toeplitz.hpp"

namespace btq {

double operator_norm(const Eigen::MatrixXcd& a);
double hs_norm(const Eigen::MatrixXcd& a);
cplx trace(const Eigen::MatrixXcd& a);

/// HS distance to the Hermitian matrices: ||(A - A^*)/2||_HS.
double dist_to_hermitian(const Eigen::MatrixXcd& a);
/// HS distance to C Id: sqrt(tr(AA^*) - |tr A|^2 / d).
double dist_to_scalar(const Eigen::MatrixXcd& a);

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

enum class FitMode {
  slope,     // least squares slope of log residual against log p
  monotone,  // strictly decreasing residuals (little-o claims)
};

/// Residuals at or below this are treated as exact zeros.
inline constexpr double kZeroResidual = 1e-11;
inline constexpr double kDefaultSlopeTolerance = 0.15;

struct RateFit {
  std::vector<int> p_grid;
  std::vector<double> residuals;
  FitMode mode = FitMode::slope;
  double slope = 0.0;
  double intercept = 0.0;
  double target_exponent = 0.0;
  double tolerance = kDefaultSlopeTolerance;
  bool exact_zero = false;
  bool verdict = false;
};

/// Throws InvalidArgument with fewer than 3 usable points (positive residuals
/// in slope mode, values in monotone mode).  An all-zero series passes.
RateFit fit_rate(std::span<const int> p_grid, std::span<const double> residuals, double target,
                 double tolerance, FitMode mode = FitMode::slope);

/// Class target for the O(p^{-k/2}) remainders: -1 for C2 and smoother,
/// -1/2 for C1, none (monotone decay) for C0.
std::optional<double> class_target(Regularity r);
Regularity weakest(std::span<const Symbol> symbols);

struct RateTarget {
  std::optional<double> exponent;  // nullopt: monotone mode
  double tolerance = kDefaultSlopeTolerance;

  static RateTarget for_class(Regularity r, double tolerance = kDefaultSlopeTolerance);
};

RateFit fit_rate(std::span<const int> p_grid, std::span<const double> residuals,
                 const RateTarget& target);

// ---------------------------------------------------------------------------
// Per-level residuals
// ---------------------------------------------------------------------------

/// Twenty fixed points used by the kernel-diagonal experiments.
std::vector<Point> diagonal_panel();

/// max over `points` of |p^{-1} T_{f,p}(x,x) - f(x)|.
double kernel_diagonal_residual(const PhaseSpace& ps, int p, const Symbol& f,
                                std::span<const Point> points, const QuadSpec& spec = {});

/// |p^{-1} tr T_{f,p} - int f|.
double trace_residual(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec = {});

/// |p^{-1} tr(T_{f1,p} ... T_{fm,p}) - int f1...fm|, 1 <= m <= 4.
double product_trace_residual(const PhaseSpace& ps, int p, std::span<const Symbol> fs,
                              const QuadSpec& spec = {});
/// p^{-1} tr(T_{f1,p} ... T_{fm,p}).
cplx normalized_product_trace(const PhaseSpace& ps, int p, std::span<const Symbol> fs,
                              const QuadSpec& spec = {});

struct NormResidual {
  double residual = 0.0;        // ||f||_inf - ||T_{f,p}||
  double sup_norm = 0.0;
  double operator_norm = 0.0;
  double coherent_bound = 0.0;  // |<T_{f,p} Psi, Psi>| at the peak of f
};

NormResidual norm_residual(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec = {});

struct DistanceResiduals {
  double herm_value = 0.0;     // p^{-1} dist(T, Herm)^2
  double scalar_value = 0.0;   // p^{-1} dist(T, C Id)^2
  double herm_limit = 0.0;     // dist(f, L^2 real)^2
  double scalar_limit = 0.0;   // dist(f, C)^2
  double herm_residual() const;
  double scalar_residual() const;
};

DistanceResiduals distance_residuals(const PhaseSpace& ps, int p, const Symbol& f,
                                     const QuadSpec& spec = {});

// ---------------------------------------------------------------------------
// Sweeps over p-grids
// ---------------------------------------------------------------------------

/// Worker count for sweeps: BTQ_THREADS if set, else hardware concurrency.
int worker_count();

RateFit trace_expansion_residual(const PhaseSpace& ps, std::span<const int> p_grid,
                                 const Symbol& f, const RateTarget& target);

RateFit product_trace_sweep(const PhaseSpace& ps, std::span<const int> p_grid,
                            std::span<const Symbol> fs, const RateTarget& target);

struct NormSweep {
  RateFit fit;
  std::vector<NormResidual> levels;
};

NormSweep norm_convergence_residual(const PhaseSpace& ps, std::span<const int> p_grid,
                                    const Symbol& f, const RateTarget& target);

struct DistanceSweep {
  RateFit herm;
  RateFit scalar;
  std::vector<DistanceResiduals> levels;
};

DistanceSweep distance_theorem_residuals(const PhaseSpace& ps, std::span<const int> p_grid,
                                         const Symbol& f, const RateTarget& target);

inline constexpr double kLaplaceEpsilon = 0.05;

struct LaplaceReport {
  double eigenvalue = 0.0;        // lambda = 8 pi
  double dirichlet_energy = 0.0;  // ||df||^2
  double bound = 0.0;             // (1 + eps) ||df||^2 / lambda
  std::vector<int> p_grid;
  std::vector<double> lhs;        // p^{-1} ||T_f - M_f P_p||_HS^2
  bool verdict = false;
};

LaplaceReport laplace_bound_check(const PhaseSpace& ps, std::span<const int> p_grid,
                                  const Symbol& f, double epsilon = kLaplaceEpsilon);

}  // namespace btq
