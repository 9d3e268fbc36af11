#include "btq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include <gsl/gsl_integration.h>

#include "btq/error.hpp"

namespace btq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GlTableDeleter {
  void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};


}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("gauss_legendre: order must be positive");
  std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n)));
  if (!table) throw NumericFault("gauss_legendre: table allocation failed");
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &x[i], &w[i], table.get());
  }
  std::sort(x.begin(), x.end());
  // GSL's untabulated orders carry weight errors near 1e-10; a few Newton
  // steps on the three-term recurrence bring nodes and weights to roundoff.
  auto legendre = [n](double t) {
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    return std::pair{p1, dp};
  };
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 3; ++it) {
      const auto [pn, dp] = legendre(x[i]);
      x[i] -= pn / dp;
    }
  }
  for (int i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -m;
    x[n - 1 - i] = m;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    const double dp = legendre(x[i]).second;
    nodes[i] = mid + half * x[i];
    weights[i] = half * 2.0 / ((1.0 - x[i] * x[i]) * dp * dp);
  }
}

PhaseSpace make_phase_space(int orientation) {
  if (orientation != 1 && orientation != -1) {
    throw InvalidArgument("make_phase_space: orientation must be +1 or -1");
  }
  PhaseSpace ps;
  ps.metric_scale = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  ps.orientation = orientation;
  return ps;
}

cplx Point::affine() const {
  if (t >= 1.0) throw InvalidArgument("Point::affine: the north pole is not in the chart");
  return std::polar(std::sqrt(t / (1.0 - t)), phi);
}

std::array<double, 3> Point::embed() const {
  const double s = 2.0 * std::sqrt(std::max(0.0, t * (1.0 - t)));
  return {s * std::cos(phi), s * std::sin(phi), 2.0 * t - 1.0};
}

Point north_pole() { return {1.0, 0.0}; }
Point south_pole() { return {0.0, 0.0}; }

double spherical_angle(const Point& x, const Point& y) {
  const auto a = x.embed();
  const auto b = y.embed();
  const double c = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double geodesic_distance(const PhaseSpace& ps, const Point& x, const Point& y) {
  return ps.metric_scale * spherical_angle(x, y);
}

int QuadratureGrid::t_exactness() const {
  return rule_ == TRule::gauss_legendre ? 2 * order_ - 1 : order_ - 1;
}

double QuadratureGrid::phi_node(int k) const { return kTwoPi * k / n_phi_; }

Point QuadratureGrid::node(std::size_t i) const {
  const auto n = static_cast<std::size_t>(n_phi_);
  return {t_nodes_[i / n], phi_node(static_cast<int>(i % n))};
}

double QuadratureGrid::weight(std::size_t i) const {
  return t_weights_[i / static_cast<std::size_t>(n_phi_)] / n_phi_;
}

QuadratureGrid QuadratureGrid::refined(int t_factor, int phi_factor) const {
  PhaseSpace ps = make_phase_space();
  return rule_ == TRule::gauss_legendre
             ? quadrature_grid(ps, order_ * t_factor, n_phi_ * phi_factor)
             : graded_quadrature_grid(ps, order_ * t_factor, n_phi_ * phi_factor);
}

QuadratureGrid quadrature_grid(const PhaseSpace&, int n_t, int n_phi) {
  if (n_t < 1 || n_phi < 1) {
    throw InvalidArgument("quadrature_grid: n_t and n_phi must be positive (got " +
                          std::to_string(n_t) + ", " + std::to_string(n_phi) + ")");
  }
  QuadratureGrid g;
  g.rule_ = TRule::gauss_legendre;
  g.order_ = n_t;
  g.n_phi_ = n_phi;
  gauss_legendre(n_t, 0.0, 1.0, g.t_nodes_, g.t_weights_);
  return g;
}

QuadratureGrid graded_quadrature_grid(const PhaseSpace&, int n_half, int n_phi) {
  if (n_half < 1 || n_phi < 1) {
    throw InvalidArgument("graded_quadrature_grid: orders must be positive");
  }
  std::vector<double> u, w;
  gauss_legendre(n_half, 0.0, 1.0, u, w);

  QuadratureGrid g;
  g.rule_ = TRule::graded_equator;
  g.order_ = n_half;
  g.n_phi_ = n_phi;
  g.t_nodes_.reserve(2 * u.size());
  g.t_weights_.reserve(2 * u.size());
  // Lower half, ascending in t: t = 1/2 - u^2/2, dt = u du.
  for (std::size_t i = u.size(); i-- > 0;) {
    g.t_nodes_.push_back(0.5 - 0.5 * u[i] * u[i]);
    g.t_weights_.push_back(w[i] * u[i]);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    g.t_nodes_.push_back(0.5 + 0.5 * u[i] * u[i]);
    g.t_weights_.push_back(w[i] * u[i]);
  }
  return g;
}

cplx integrate(const PhaseSpace&, const QuadratureGrid& grid, const Field& field) {
  cplx sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.node(i);
    const cplx v = field(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericFault("integrate: non-finite field value at t=" + std::to_string(x.t) +
                         ", phi=" + std::to_string(x.phi));
    }
    sum += grid.weight(i) * v;
  }
  return sum;
}

}  // namespace btq
