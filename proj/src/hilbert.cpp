#include "btq/hilbert.hpp"

#include <cmath>
#include <string>

#include "btq/error.hpp"

namespace btq {

QuantumSpace::QuantumSpace(const PhaseSpace& ps, int p) : ps_(ps), p_(p) {
  if (p < 1) throw InvalidArgument("quantum_space: p must be >= 1, got " + std::to_string(p));
  log_norm_.resize(p + 1);
  const double lp = std::log(p + 1.0) + std::lgamma(p + 1.0);
  for (int j = 0; j <= p; ++j) {
    log_norm_[j] = 0.5 * (lp - std::lgamma(j + 1.0) - std::lgamma(p - j + 1.0));
  }
}

double QuantumSpace::radial(int j, double t) const {
  if (j < 0 || j > p_) {
    throw InvalidArgument("basis index " + std::to_string(j) + " out of range 0.." +
                          std::to_string(p_));
  }
  // 0^0 = 1 at the poles.
  if (t <= 0.0) return j == 0 ? std::exp(log_norm_[j]) : 0.0;
  if (t >= 1.0) return j == p_ ? std::exp(log_norm_[j]) : 0.0;
  return std::exp(log_norm_[j] + 0.5 * j * std::log(t) + 0.5 * (p_ - j) * std::log1p(-t));
}

cplx QuantumSpace::basis_eval(int j, const Point& x) const {
  return std::polar(radial(j, x.t), j * x.phi);
}

Eigen::VectorXcd QuantumSpace::basis_values(const Point& x) const {
  Eigen::VectorXcd v(dim());
  for (int j = 0; j <= p_; ++j) v[j] = basis_eval(j, x);
  return v;
}

QuantumSpace quantum_space(const PhaseSpace& ps, int p) { return QuantumSpace(ps, p); }

double monomial_inner_product(int p, int j, int k) {
  if (j != k) return 0.0;
  return std::exp(std::lgamma(j + 1.0) + std::lgamma(p - j + 1.0) - std::lgamma(p + 2.0));
}

Eigen::MatrixXcd gram_matrix(const QuantumSpace& H, const QuadratureGrid& grid) {
  const int p = H.p();
  if (grid.t_exactness() < p || grid.n_phi() <= p) {
    throw NumericFault("gram_matrix: grid (n_t=" + std::to_string(grid.n_t()) +
                       ", n_phi=" + std::to_string(grid.n_phi()) +
                       ") below the exactness contract for p=" + std::to_string(p));
  }
  // phi sums (1/n) sum_l e^{i m phi_l}, m = -p..p
  Eigen::VectorXcd phase(2 * p + 1);
  for (int m = -p; m <= p; ++m) {
    cplx s = 0.0;
    for (int l = 0; l < grid.n_phi(); ++l) s += std::polar(1.0, m * grid.phi_node(l));
    phase[m + p] = s / static_cast<double>(grid.n_phi());
  }
  const auto tn = grid.t_nodes();
  const auto tw = grid.t_weights();
  Eigen::MatrixXd radial(H.dim(), tn.size());
  for (std::size_t i = 0; i < tn.size(); ++i) {
    for (int j = 0; j <= p; ++j) radial(j, i) = H.radial(j, tn[i]);
  }
  const Eigen::Map<const Eigen::VectorXd> w(tw.data(), static_cast<Eigen::Index>(tw.size()));
  const Eigen::MatrixXd moments = radial * w.asDiagonal() * radial.transpose();
  Eigen::MatrixXcd g(H.dim(), H.dim());
  for (int j = 0; j <= p; ++j) {
    for (int k = 0; k <= p; ++k) g(j, k) = moments(j, k) * phase[k - j + p];
  }
  return g;
}

double gram_defect(const QuantumSpace& H, const QuadratureGrid& grid) {
  const Eigen::MatrixXcd g = gram_matrix(H, grid);
  return (g - Eigen::MatrixXcd::Identity(H.dim(), H.dim())).cwiseAbs().maxCoeff();
}

double bergman_density(const QuantumSpace& H, const Point& x) {
  double s = 0.0;
  for (int j = 0; j <= H.p(); ++j) {
    const double r = H.radial(j, x.t);
    s += r * r;
  }
  return s;
}

StateVector coherent_state(const QuantumSpace& H, const Point& x0) {
  StateVector s{H.basis_values(x0).conjugate()};
  s.coeffs /= s.coeffs.norm();
  return s;
}

cplx section_eval(const QuantumSpace& H, const StateVector& s, const Point& x) {
  return H.basis_values(x).cwiseProduct(s.coeffs).sum();
}

double mass_outside_ball(const QuantumSpace& H, const StateVector& s, const Point& x0,
                         double radius, const QuadratureGrid& grid) {
  const PhaseSpace& ps = H.phase_space();
  const cplx mass = integrate(ps, grid, [&](const Point& x) {
    if (geodesic_distance(ps, x, x0) <= radius) return cplx(0.0);
    return cplx(std::norm(section_eval(H, s, x)));
  });
  return mass.real();
}

}  // namespace btq
