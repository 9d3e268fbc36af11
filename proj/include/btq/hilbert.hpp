#pragma once

// Quantum spaces H_p = H^0(CP^1, O(p)): polynomials of degree <= p in the
// affine coordinate, with the L^2 product induced by h^{L^p} and omega.

#include <Eigen/Dense>

#include "btq/geometry.hpp"

namespace btq {

inline constexpr double kGramTolerance = 1e-10;

struct StateVector {
  Eigen::VectorXcd coeffs;

  double norm() const { return coeffs.norm(); }
};

class QuantumSpace {
 public:
  QuantumSpace(const PhaseSpace& ps, int p);

  int p() const { return p_; }
  int dim() const { return p_ + 1; }
  const PhaseSpace& phase_space() const { return ps_; }
  double gram_tolerance() const { return gram_tolerance_; }

  /// |e_j| as a function of t alone:
  ///   sqrt((p+1) binom(p,j)) t^{j/2} (1-t)^{(p-j)/2},
  /// evaluated in the log domain.
  double radial(int j, double t) const;

  /// Weighted basis value e_j(x) = radial(j, t) e^{i j phi}.
  cplx basis_eval(int j, const Point& x) const;

  /// All p+1 basis values at x.
  Eigen::VectorXcd basis_values(const Point& x) const;

 private:
  PhaseSpace ps_;
  int p_;
  double gram_tolerance_ = kGramTolerance;
  Eigen::VectorXd log_norm_;  // 0.5 * log((p+1) binom(p,j))
};

/// Throws InvalidArgument for p < 1.
QuantumSpace quantum_space(const PhaseSpace& ps, int p);

/// Raw monomial product <z^j, z^k> = delta_jk j!(p-j)!/(p+1)! (closed form).
double monomial_inner_product(int p, int j, int k);

/// Quadrature Gram matrix of the weighted basis.  Rejects grids that do not
/// integrate the basis products exactly (t exactness < p or n_phi <= p).
Eigen::MatrixXcd gram_matrix(const QuantumSpace& H, const QuadratureGrid& grid);

/// Max entrywise deviation of the Gram matrix from the identity.
double gram_defect(const QuantumSpace& H, const QuadratureGrid& grid);

/// P_p(x,x) = sum_j |e_j(x)|^2.
double bergman_density(const QuantumSpace& H, const Point& x);

/// Normalized reproducing-kernel state at x0, c_j proportional to conj(e_j(x0)).
StateVector coherent_state(const QuantumSpace& H, const Point& x0);

/// Pointwise value of the section with the given coefficients.
cplx section_eval(const QuantumSpace& H, const StateVector& s, const Point& x);

/// Mass of |s|^2 outside the geodesic ball of `radius` around x0.
double mass_outside_ball(const QuantumSpace& H, const StateVector& s, const Point& x0,
                         double radius, const QuadratureGrid& grid);

}  // namespace btq
