#pragma once

#include "btq/geometry.hpp"
#include "btq/symbol.hpp"

namespace btq {

/// Relative step of the central-difference fallback.
inline constexpr double kFiniteDifferenceStep = 1e-6;

/// Analytic gradient when the symbol carries one, otherwise central
/// differences (one-sided within a step of the poles).  Throws
/// InvalidArgument for C0 symbols without derivative data.
Gradient symbol_gradient(const Symbol& f, const Point& x);

/// Poisson bracket on (X, 2 pi omega): {f,g} = xi_f(dg) with
/// 2 pi i_{xi_f} omega = df.  In the chart, with 2 pi omega = dt ^ dphi,
///   {f,g} = orientation * (f_phi g_t - f_t g_phi).
/// Fixed so that {z3, z1} = 2 z2.
cplx poisson_bracket(const PhaseSpace& ps, const Symbol& f, const Symbol& g, const Point& x);

/// {f,g} packaged as a symbol, one class below the rougher operand.
Symbol bracket_symbol(const PhaseSpace& ps, const Symbol& f, const Symbol& g);

/// |df|^2_g for the round metric of area one (R^{-2} = 4 pi):
///   R^{-2} [ t(1-t)|f_t|^2 + |f_phi|^2 / (4t(1-t)) ].
double gradient_norm_squared(const PhaseSpace& ps, const Symbol& f, const Point& x);

/// int_X |df|^2_g dv.  The value must agree with the one on the grid refined
/// by two in both directions to within 1%, otherwise NumericFault.
double dirichlet_energy(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f);

/// First positive eigenvalue of the Laplacian on the round sphere of area
/// one: l(l+1)/R^2 at l = 1, i.e. 8 pi.
double first_laplace_eigenvalue(const PhaseSpace& ps);

}  // namespace btq
