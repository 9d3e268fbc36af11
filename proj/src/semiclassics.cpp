#include "btq/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "btq/error.hpp"
#include "btq/geometry.hpp"

namespace btq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTailMass = 1e-12;

// One complex coordinate of the model kernel.
cplx coordinate_kernel(double a, cplx u, cplx v) {
  return a / kTwoPi * std::exp(-0.25 * a * (std::norm(u) + std::norm(v) - 2.0 * u * std::conj(v)));
}

cplx coord(const RealVec& z, int i) { return {z[2 * i], z[2 * i + 1]}; }

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_rule(int order) {
  GaussRule r;
  gauss_legendre(order, -1.0, 1.0, r.nodes, r.weights);
  return r;
}

// Tensor Gauss-Legendre rule on prod_i [c_i - h, c_i + h]^2 for an integrand
// F(W) = prod_i factor(i, w_i).  The tensor sum factorizes into a product of
// per-coordinate planar sums.  Each factor's envelope is the Gaussian
// exp(-a_i |w - c_i|^2 / 2) scaled by `scale`^{-1}; its mass outside the box
// must stay below kTailMass.
template <class Factor>
cplx box_integral(const ModelKernelParams& params, const std::vector<cplx>& centers, double h,
                  double scale, Factor&& factor) {
  double tail = 0.0;
  for (int i = 0; i < params.n; ++i) {
    tail += 2.0 * std::erfc(h * scale * std::sqrt(params.a[i] / 2.0));
  }
  if (tail > kTailMass) {
    throw NumericFault("model kernel: integration box too small (tail mass " +
                       std::to_string(tail) + ")");
  }
  const GaussRule rule = gauss_rule(params.order);
  cplx total = 1.0;
  for (int i = 0; i < params.n; ++i) {
    cplx plane = 0.0;
    for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
      for (std::size_t s = 0; s < rule.nodes.size(); ++s) {
        const cplx w = centers[i] + h * cplx(rule.nodes[r], rule.nodes[s]);
        plane += rule.weights[r] * rule.weights[s] * factor(i, w);
      }
    }
    total *= plane * h * h;
  }
  return total;
}

}  // namespace

double ModelKernelParams::half_width() const {
  if (box_half_width > 0.0) return box_half_width;
  const double a_min = *std::min_element(a.begin(), a.end());
  return 8.0 / std::sqrt(a_min);
}

void validate(const ModelKernelParams& params) {
  if (params.n < 1 || params.n > 2) throw InvalidArgument("model kernel: n must be 1 or 2");
  if (static_cast<int>(params.a.size()) != params.n) {
    throw InvalidArgument("model kernel: expected " + std::to_string(params.n) + " frequencies");
  }
  for (std::size_t i = 0; i < params.a.size(); ++i) {
    if (!(params.a[i] > 0.0)) throw InvalidArgument("model kernel: frequencies must be positive");
    if (i > 0 && params.a[i] < params.a[i - 1]) {
      throw InvalidArgument("model kernel: frequencies must be sorted ascending");
    }
  }
  if (params.order < 1) throw InvalidArgument("model kernel: quadrature order must be >= 1");
}

cplx model_projector(const ModelKernelParams& params, const RealVec& z, const RealVec& zp) {
  if (static_cast<int>(z.size()) != 2 * params.n || static_cast<int>(zp.size()) != 2 * params.n) {
    throw InvalidArgument("model_projector: expected real vectors of length 2n");
  }
  cplx v = 1.0;
  for (int i = 0; i < params.n; ++i) v *= coordinate_kernel(params.a[i], coord(z, i), coord(zp, i));
  return v;
}

std::vector<std::pair<RealVec, RealVec>> reproducing_panel(const ModelKernelParams& params) {
  const std::vector<std::vector<cplx>> left{
      {0.0, 0.0}, {{0.3, 0.0}, {-0.1, 0.2}}, {{-0.1, 0.2}, {0.15, 0.0}}};
  const std::vector<std::vector<cplx>> right{
      {0.0, 0.0}, {{0.0, -0.25}, {0.2, 0.1}}, {{0.2, 0.1}, {0.0, -0.05}}};
  auto realify = [&](const std::vector<cplx>& w) {
    RealVec r;
    for (int i = 0; i < params.n; ++i) {
      r.push_back(w[i].real());
      r.push_back(w[i].imag());
    }
    return r;
  };
  std::vector<std::pair<RealVec, RealVec>> panel;
  for (const auto& l : left) {
    for (const auto& r : right) panel.emplace_back(realify(l), realify(r));
  }
  return panel;
}

double check_reproducing(const ModelKernelParams& params, const RealVec& z, const RealVec& zp) {
  validate(params);
  std::vector<cplx> centers;
  for (int i = 0; i < params.n; ++i) centers.push_back(0.5 * (coord(z, i) + coord(zp, i)));
  const cplx integral =
      box_integral(params, centers, params.half_width(), 1.0, [&](int i, cplx w) {
        const double a = params.a[i];
        return coordinate_kernel(a, coord(z, i), w) * coordinate_kernel(a, w, coord(zp, i));
      });
  return std::abs(integral - model_projector(params, z, zp));
}

double check_reproducing(const ModelKernelParams& params) {
  double worst = 0.0;
  for (const auto& [z, zp] : reproducing_panel(params)) {
    worst = std::max(worst, check_reproducing(params, z, zp));
  }
  return worst;
}

double gaussian_moment_check(const ModelKernelParams& params, int p, const RealVec& z) {
  validate(params);
  if (p < 1) throw InvalidArgument("gaussian_moment_check: p must be >= 1");
  if (static_cast<int>(z.size()) != 2 * params.n) {
    throw InvalidArgument("gaussian_moment_check: expected a real vector of length 2n");
  }
  const double sp = std::sqrt(static_cast<double>(p));
  std::vector<cplx> centers;
  double za2 = 0.0;  // |Z|_a^2
  for (int i = 0; i < params.n; ++i) {
    centers.push_back(0.5 * coord(z, i));
    za2 += 0.25 * params.a[i] * std::norm(coord(z, i));
  }
  // In Z' the envelope width shrinks by sqrt(p); the box follows it.
  const cplx integral =
      box_integral(params, centers, params.half_width() / sp, sp, [&](int i, cplx w) {
        const double a = params.a[i];
        return coordinate_kernel(a, sp * coord(z, i), sp * w) * static_cast<double>(p) *
               std::exp(-0.25 * p * a * std::norm(w));
      });
  return std::abs(integral - std::exp(-p * za2));
}

cplx leading_coefficient(const Symbol& f, const Point& x) { return f(x); }

}  // namespace btq
