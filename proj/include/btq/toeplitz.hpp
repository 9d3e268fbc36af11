#pragma once

// Berezin-Toeplitz operators T_{f,p} = P_p f P_p as dense matrices in the
// orthonormal weighted monomial basis.

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "btq/hilbert.hpp"
#include "btq/symbol.hpp"

namespace btq {

/// Quadrature parameters, either explicit or "auto".
struct QuadSpec {
  std::optional<int> n_t;
  std::optional<int> n_phi;

  static QuadSpec automatic() { return {}; }
  static QuadSpec fixed(int n_t, int n_phi) { return {n_t, n_phi}; }
  bool is_auto() const { return !n_t && !n_phi; }
};

/// Entries of the matrix change by less than this when n_t is doubled, or a
/// non-smooth symbol's matrix is rejected.
inline constexpr double kRefinementTolerance = 1e-6;

struct GridInfo {
  TRule rule = TRule::gauss_legendre;
  int n_t = 0;
  int n_phi = 0;
};

struct ToeplitzMatrix {
  Eigen::MatrixXcd entries;
  int p = 0;
  std::string symbol_name;
  GridInfo grid;

  int dim() const { return static_cast<int>(entries.rows()); }
};

/// Grid used for (p, f) under `spec`: (2p+16, 2p+16) when automatic, graded
/// at the equator when f is singular there.
QuadratureGrid assembly_grid(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec);

/// Throws NumericFault when `grid` cannot resolve degree-p products against
/// the symbol's declared band.
void require_assembly_grid(const QuantumSpace& H, const Symbol& f, const QuadratureGrid& grid);

/// entries(j,k) = <f e_k, e_j> by quadrature on `grid`.
ToeplitzMatrix toeplitz_matrix(const QuantumSpace& H, const Symbol& f, const QuadratureGrid& grid);

/// Assembly on assembly_grid(); symbols below Cinf are additionally checked
/// against the grid with n_t doubled and the finer matrix is returned.
ToeplitzMatrix toeplitz_matrix(const QuantumSpace& H, const Symbol& f,
                               const QuadSpec& spec = QuadSpec::automatic());

/// A * B.  Throws InvalidArgument on a level mismatch.
Eigen::MatrixXcd compose(const ToeplitzMatrix& a, const ToeplitzMatrix& b);

/// || (p/i)[T_f, T_g] - T_{{f,g}} ||_op.
double commutator_test(const QuantumSpace& H, const Symbol& f, const Symbol& g,
                       const QuadSpec& spec = QuadSpec::automatic());

/// Order 0: || T_f T_g - T_{fg} ||_op.
/// Order 1: Cauchy defect of p (T_f T_g - T_{fg}) between levels p and 2p,
/// measured through the scalar functionals tr(.)/p and ||.||_op:
///   max(|tau_p - tau_2p|, |nu_p - nu_2p|).
double product_residual(const QuantumSpace& H, const Symbol& f, const Symbol& g, int order,
                        const QuadSpec& spec = QuadSpec::automatic());

/// p^{-1} T_{f,p}(x,x) from the assembled matrix.
cplx kernel_diagonal(const QuantumSpace& H, const ToeplitzMatrix& t, const Point& x);
cplx kernel_diagonal(const QuantumSpace& H, const Symbol& f, const Point& x,
                     const QuadSpec& spec = QuadSpec::automatic());

/// p^{-1} ||T_f - M_f P_p||_HS^2 via the trace identity
///   p^{-1} (tr T_{|f2|^2} - ||T_{f2}||_HS^2),  f2 = f - int f.
double multiplication_residual(const QuantumSpace& H, const Symbol& f,
                               const QuadSpec& spec = QuadSpec::automatic());

}  // namespace btq
