#pragma once

// Model Bargmann-Fock projector on C^n with frequencies a_1 <= ... <= a_n:
//   P(Z,Z') = (2 pi)^{-n} prod a_i exp(-1/4 sum a_i (|z_i|^2 + |z'_i|^2 - 2 z_i conj(z'_i))).

#include <vector>

#include "btq/geometry.hpp"
#include "btq/symbol.hpp"

namespace btq {

struct ModelKernelParams {
  int n = 1;
  std::vector<double> a{2.0 * 3.14159265358979323846};
  // Half-width of the integration box per real axis; <= 0 selects
  // 8 * max_i a_i^{-1/2}.
  double box_half_width = 0.0;
  int order = 64;  // Gauss-Legendre nodes per real axis

  double half_width() const;
};

/// Validates n in {1,2}, a.size() == n, a_i > 0 ascending, order >= 1.
void validate(const ModelKernelParams& params);

/// Real 2n-vector (x_1, y_1, ..., x_n, y_n) with z_i = x_i + i y_i.
using RealVec = std::vector<double>;

cplx model_projector(const ModelKernelParams& params, const RealVec& z, const RealVec& zp);

/// (Z, Z') pairs used by check_reproducing: 3 x 3 points of modulus <= 0.3.
std::vector<std::pair<RealVec, RealVec>> reproducing_panel(const ModelKernelParams& params);

/// max over the panel of | int P(Z,W) P(W,Z') dW - P(Z,Z') |.
double check_reproducing(const ModelKernelParams& params);
double check_reproducing(const ModelKernelParams& params, const RealVec& z, const RealVec& zp);

/// | int P(sqrt(p) Z, sqrt(p) W) p^n e^{-p|W|_a^2} dW - e^{-p|Z|_a^2} |,
/// |Z|_a^2 = 1/4 sum a_i |z_i|^2.
double gaussian_moment_check(const ModelKernelParams& params, int p, const RealVec& z);

/// Predicted leading diagonal coefficient b_{0,f}(x) = f(x) b_0, b_0 = 1.
cplx leading_coefficient(const Symbol& f, const Point& x);

}  // namespace btq
