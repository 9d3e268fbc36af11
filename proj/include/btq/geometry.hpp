#pragma once

// Model phase space: the Riemann sphere CP^1 with the Fubini-Study form
// normalized to total mass one, written in the chart
//   t = |z|^2 / (1 + |z|^2) in [0,1],  phi = arg z,
// where the symplectic form reads omega = dt ^ dphi / (2 pi).

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace btq {

using cplx = std::complex<double>;

enum class ModelId { sphere_cp1 };

struct PhaseSpace {
  ModelId model = ModelId::sphere_cp1;
  double total_symplectic_mass = 1.0;
  // Radius R of the round sphere of area one: 4 pi R^2 = 1.
  double metric_scale = 0.0;
  // +1: omega = dt^dphi/2pi.  -1 flips omega, and with it the Poisson bracket.
  int orientation = 1;

  double volume() const { return total_symplectic_mass; }
};

PhaseSpace make_phase_space(int orientation = 1);

struct Point {
  double t = 0.5;
  double phi = 0.0;

  /// Affine coordinate z = sqrt(t/(1-t)) e^{i phi}; requires t < 1.
  cplx affine() const;
  /// Embedding into the unit sphere of R^3, z3 = 2t - 1.
  std::array<double, 3> embed() const;
  double z3() const { return 2.0 * t - 1.0; }
};

Point north_pole();
Point south_pole();

/// Angle between the images of x and y on the unit sphere.
double spherical_angle(const Point& x, const Point& y);
/// Geodesic distance for the round metric of total area one.
double geodesic_distance(const PhaseSpace& ps, const Point& x, const Point& y);

enum class TRule {
  gauss_legendre,  // n_t point Gauss-Legendre on [0,1]
  graded_equator,  // two halves split at t = 1/2, quadratically graded there
};

/// Tensor grid: a rule in t times the uniform rule in phi.  Weights sum to one.
class QuadratureGrid {
 public:
  TRule rule() const { return rule_; }
  /// Number of t nodes in total (both halves for the graded rule).
  int n_t() const { return static_cast<int>(t_nodes_.size()); }
  int n_phi() const { return n_phi_; }
  /// The order parameter the grid was built with (per half when graded).
  int order() const { return order_; }
  /// Largest a such that t^a is integrated exactly.
  int t_exactness() const;

  std::span<const double> t_nodes() const { return t_nodes_; }
  std::span<const double> t_weights() const { return t_weights_; }
  double phi_node(int k) const;

  std::size_t size() const { return t_nodes_.size() * static_cast<std::size_t>(n_phi_); }
  Point node(std::size_t i) const;
  double weight(std::size_t i) const;

  /// Same rule with the t order multiplied by `t_factor` and n_phi by `phi_factor`.
  QuadratureGrid refined(int t_factor, int phi_factor) const;

 private:
  friend QuadratureGrid quadrature_grid(const PhaseSpace&, int, int);
  friend QuadratureGrid graded_quadrature_grid(const PhaseSpace&, int, int);

  TRule rule_ = TRule::gauss_legendre;
  int order_ = 0;
  int n_phi_ = 0;
  std::vector<double> t_nodes_;
  std::vector<double> t_weights_;
};

// n-point Gauss-Legendre rule on [a, b] with ascending nodes.
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

QuadratureGrid quadrature_grid(const PhaseSpace& ps, int n_t, int n_phi);

/// Rule for symbols with a non-smooth set along the equator z3 = 0.  Each
/// half [0,1/2], [1/2,1] is mapped by t = 1/2 -+ u^2/2 and integrated with
/// an `n_half` point Gauss-Legendre rule in u.  |z3|^a becomes |u|^{2a}.
QuadratureGrid graded_quadrature_grid(const PhaseSpace& ps, int n_half, int n_phi);

using Field = std::function<cplx(const Point&)>;

/// Sum of w_i field(x_i).  Throws NumericFault on non-finite field values.
cplx integrate(const PhaseSpace& ps, const QuadratureGrid& grid, const Field& field);

}  // namespace btq
