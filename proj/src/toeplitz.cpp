#include "btq/toeplitz.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "btq/analysis.hpp"
#include "btq/calculus.hpp"
#include "btq/error.hpp"

namespace btq {

namespace {

constexpr cplx kI{0.0, 1.0};

std::string describe(const Symbol& f, int p) {
  return "'" + f.name + "' at p=" + std::to_string(p);
}

}  // namespace

QuadratureGrid assembly_grid(const PhaseSpace& ps, int p, const Symbol& f, const QuadSpec& spec) {
  const int n_t = spec.n_t.value_or(2 * p + 16);
  const int n_phi = spec.n_phi.value_or(2 * p + 16);
  return f.singular_set == SingularSet::equator ? graded_quadrature_grid(ps, n_t, n_phi)
                                                : quadrature_grid(ps, n_t, n_phi);
}

void require_assembly_grid(const QuantumSpace& H, const Symbol& f, const QuadratureGrid& grid) {
  const int p = H.p();
  if (grid.t_exactness() < p + f.bandwidth || grid.n_phi() < p + 1 + f.bandwidth) {
    throw NumericFault("toeplitz_matrix: grid (n_t=" + std::to_string(grid.n_t()) +
                       ", n_phi=" + std::to_string(grid.n_phi()) + ") too coarse for " +
                       describe(f, p) + " with band " + std::to_string(f.bandwidth));
  }
}

ToeplitzMatrix toeplitz_matrix(const QuantumSpace& H, const Symbol& f, const QuadratureGrid& grid) {
  require_assembly_grid(H, f, grid);
  const int p = H.p();
  const int d = H.dim();
  const int n_phi = grid.n_phi();
  const auto tn = grid.t_nodes();
  const auto tw = grid.t_weights();
  const auto n_t = static_cast<Eigen::Index>(tn.size());

  // Ring Fourier coefficients G_m(t_i) = (1/n_phi) sum_l f(t_i, phi_l) e^{i m phi_l}.
  Eigen::FFT<double> fft;
  std::vector<cplx> samples(n_phi), coeffs(n_phi);
  Eigen::MatrixXcd ring(n_t, 2 * p + 1);
  for (Eigen::Index i = 0; i < n_t; ++i) {
    for (int l = 0; l < n_phi; ++l) {
      const cplx v = f(Point{tn[i], grid.phi_node(l)});
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NumericFault("toeplitz_matrix: non-finite symbol value for " + describe(f, p));
      }
      samples[l] = v;
    }
    fft.inv(coeffs, samples);
    for (int m = -p; m <= p; ++m) ring(i, m + p) = coeffs[(m % n_phi + n_phi) % n_phi];
  }

  // Columns: sqrt(w_i) |e_j(t_i)|.
  Eigen::MatrixXd radial(n_t, d);
  for (int j = 0; j <= p; ++j) {
    for (Eigen::Index i = 0; i < n_t; ++i) radial(i, j) = H.radial(j, tn[i]) * std::sqrt(tw[i]);
  }

  ToeplitzMatrix out;
  out.p = p;
  out.symbol_name = f.name;
  out.grid = {grid.rule(), grid.n_t(), grid.n_phi()};
  out.entries.resize(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const double* rj = radial.col(j).data();
      const double* rk = radial.col(k).data();
      const cplx* g = ring.col(k - j + p).data();
      double re = 0.0, im = 0.0;
      for (Eigen::Index i = 0; i < n_t; ++i) {
        const double w = rj[i] * rk[i];
        re += w * g[i].real();
        im += w * g[i].imag();
      }
      out.entries(j, k) = cplx(re, im);
    }
  }
  return out;
}

ToeplitzMatrix toeplitz_matrix(const QuantumSpace& H, const Symbol& f, const QuadSpec& spec) {
  const QuadratureGrid grid = assembly_grid(H.phase_space(), H.p(), f, spec);
  ToeplitzMatrix t = toeplitz_matrix(H, f, grid);
  if (f.regularity == Regularity::Cinf) return t;

  ToeplitzMatrix fine = toeplitz_matrix(H, f, grid.refined(2, 1));
  const double change = (fine.entries - t.entries).cwiseAbs().maxCoeff();
  if (change >= kRefinementTolerance) {
    throw NumericFault("toeplitz_matrix: refinement check failed for " + describe(f, H.p()) +
                       " (entry change " + std::to_string(change) + ")");
  }
  return fine;
}

Eigen::MatrixXcd compose(const ToeplitzMatrix& a, const ToeplitzMatrix& b) {
  if (a.p != b.p || a.dim() != b.dim()) {
    throw InvalidArgument("compose: level mismatch (p=" + std::to_string(a.p) + " vs " +
                          std::to_string(b.p) + ")");
  }
  return a.entries * b.entries;
}

double commutator_test(const QuantumSpace& H, const Symbol& f, const Symbol& g,
                       const QuadSpec& spec) {
  const Symbol bracket = bracket_symbol(H.phase_space(), f, g);
  const ToeplitzMatrix tf = toeplitz_matrix(H, f, spec);
  const ToeplitzMatrix tg = toeplitz_matrix(H, g, spec);
  const ToeplitzMatrix tb = toeplitz_matrix(H, bracket, spec);
  const Eigen::MatrixXcd comm = compose(tf, tg) - compose(tg, tf);
  return operator_norm((static_cast<double>(H.p()) / kI) * comm - tb.entries);
}

double product_residual(const QuantumSpace& H, const Symbol& f, const Symbol& g, int order,
                        const QuadSpec& spec) {
  const Symbol fg = f * g;
  auto defect = [&](const QuantumSpace& space) {
    const ToeplitzMatrix tf = toeplitz_matrix(space, f, spec);
    const ToeplitzMatrix tg = toeplitz_matrix(space, g, spec);
    const ToeplitzMatrix tfg = toeplitz_matrix(space, fg, spec);
    return Eigen::MatrixXcd(compose(tf, tg) - tfg.entries);
  };
  if (order == 0) return operator_norm(defect(H));
  if (order != 1) throw InvalidArgument("product_residual: order must be 0 or 1");
  if (!spec.is_auto()) {
    throw InvalidArgument("product_residual: the order-1 probe needs automatic quadrature");
  }

  const QuantumSpace H2 = quantum_space(H.phase_space(), 2 * H.p());
  const Eigen::MatrixXcd d1 = defect(H);
  const Eigen::MatrixXcd d2 = defect(H2);
  const cplx tau1 = trace(d1);
  const cplx tau2 = trace(d2);
  const double nu1 = H.p() * operator_norm(d1);
  const double nu2 = H2.p() * operator_norm(d2);
  return std::max(std::abs(tau1 - tau2), std::abs(nu1 - nu2));
}

cplx kernel_diagonal(const QuantumSpace& H, const ToeplitzMatrix& t, const Point& x) {
  const Eigen::VectorXcd v = H.basis_values(x);
  const cplx value = (v.transpose() * t.entries * v.conjugate())(0);
  return value / static_cast<double>(H.p());
}

cplx kernel_diagonal(const QuantumSpace& H, const Symbol& f, const Point& x, const QuadSpec& spec) {
  return kernel_diagonal(H, toeplitz_matrix(H, f, spec), x);
}

double multiplication_residual(const QuantumSpace& H, const Symbol& f, const QuadSpec& spec) {
  const PhaseSpace& ps = H.phase_space();
  const cplx mean = integrate(ps, assembly_grid(ps, H.p(), f, spec), f.eval) / ps.volume();
  const Symbol f2 = shifted(f, -mean);
  const ToeplitzMatrix t2 = toeplitz_matrix(H, f2, spec);
  const ToeplitzMatrix tabs = toeplitz_matrix(H, abs_squared(f2), spec);
  const double hs = hs_norm(t2.entries);
  return (trace(tabs.entries).real() - hs * hs) / H.p();
}

}  // namespace btq
