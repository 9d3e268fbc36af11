#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btq/geometry.hpp"

namespace btq {

/// Declared smoothness class.  Consumers trust the tag; nothing is inferred.
enum class Regularity { C0 = 0, C1 = 1, C2 = 2, Cinf = 3 };

std::string_view to_string(Regularity r);

/// Partial derivatives in the (t, phi) chart.
struct Gradient {
  cplx d_t;
  cplx d_phi;
};

/// Where a symbol may fail to be smooth.  Quadrature rules adapt to it.
enum class SingularSet { none, equator };

struct Symbol {
  std::string name;
  Regularity regularity = Regularity::Cinf;
  std::function<cplx(const Point&)> eval;
  std::optional<std::function<Gradient(const Point&)>> gradient;
  std::optional<double> sup_norm_hint;
  // A point where |f| attains its sup norm and f is continuous.
  std::optional<Point> peak;
  SingularSet singular_set = SingularSet::none;
  // Polynomial degree in the embedding coordinates (phi-Fourier band for
  // quadrature sizing).  Non-polynomial symbols declare an effective value.
  int bandwidth = 8;

  cplx operator()(const Point& x) const { return eval(x); }
  bool has_gradient() const { return gradient.has_value(); }
};

/// Names accepted by builtin_symbol.  Parametrized families are listed with
/// a sample argument, e.g. "holder(0.5)" and "const(1)".
std::vector<std::string> catalog_names();

/// Catalog lookup.  Throws InvalidArgument for unknown names or bad parameters.
Symbol builtin_symbol(std::string_view name);

// Pointwise algebra.  Gradients propagate when every operand carries one;
// regularity is the minimum over operands.
Symbol conj(const Symbol& f);
Symbol operator+(const Symbol& f, const Symbol& g);
Symbol operator-(const Symbol& f, const Symbol& g);
Symbol operator*(cplx c, const Symbol& f);
Symbol operator*(const Symbol& f, const Symbol& g);
Symbol shifted(const Symbol& f, cplx c);  // f + c
Symbol abs_squared(const Symbol& f);      // |f|^2

struct SupNorm {
  double value = 0.0;      // max(grid maximum, hint)
  double grid_max = 0.0;
  bool disagreement = false;  // hint and grid maximum differ by more than 1e-3
};

SupNorm sup_norm(const Symbol& f, const QuadratureGrid& grid);

/// L^2 distance to real-valued functions: sqrt(int |Im f|^2).
double dist_to_real(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f);

/// L^2 distance to the constants: sqrt(int |f|^2 - |int f|^2 / vol).
double dist_to_const(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f);

}  // namespace btq
