#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include <doctest.h>

#include "btq/analysis.hpp"
#include "btq/error.hpp"

using namespace btq;

namespace {

const PhaseSpace kPs = make_phase_space();

Eigen::MatrixXcd diag3(double a, double b, double c) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

Eigen::MatrixXcd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = cplx{g(rng), g(rng)};
  }
  return m;
}

Eigen::MatrixXcd T(int p, const char* name) {
  return toeplitz_matrix(quantum_space(kPs, p), builtin_symbol(name)).entries;
}

}  // namespace

TEST_CASE("matrix functionals: worked values") {
  CHECK(operator_norm(Eigen::MatrixXcd::Identity(5, 5)) == doctest::Approx(1.0));
  CHECK(operator_norm(diag3(-0.5, 0.0, 0.5)) == doctest::Approx(0.5));
  CHECK(operator_norm(T(2, "z3")) == doctest::Approx(0.5).epsilon(1e-13));
  for (int p : {7, 64}) CHECK(operator_norm(T(p, "z3")) == doctest::Approx(p / (p + 2.0)).epsilon(1e-12));
  const cplx i{0.0, 1.0};
  CHECK(dist_to_hermitian(T(2, "z3")) < 1e-15);
  CHECK(dist_to_hermitian(i * T(2, "z3")) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
  CHECK(dist_to_scalar(3.0 * Eigen::MatrixXcd::Identity(4, 4)) < 1e-15);
  CHECK(dist_to_scalar(T(2, "z3")) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
  CHECK_THROWS_AS(operator_norm(Eigen::MatrixXcd::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("matrix functionals: invariants on random matrices") {
  std::mt19937_64 rng(42);
  const cplx i{0.0, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const Eigen::MatrixXcd a = random_matrix(n, rng);
    CHECK(operator_norm(a) <= hs_norm(a) + 1e-12);
    CHECK(std::pow(dist_to_hermitian(a), 2) + std::pow(dist_to_hermitian(i * a), 2) ==
          doctest::Approx(std::pow(hs_norm(a), 2)).epsilon(1e-10));
    const cplx c{0.7, -2.0};
    CHECK(std::abs(dist_to_scalar(a + c * Eigen::MatrixXcd::Identity(n, n)) - dist_to_scalar(a)) < 1e-10);
    // Rotation-diagonal unitaries preserve the trace.
    Eigen::VectorXcd phases(n);
    for (int k = 0; k < n; ++k) phases(k) = std::exp(cplx{0.0, 0.9 * k});
    const Eigen::MatrixXcd u = phases.asDiagonal();
    CHECK(std::abs(trace(u * a * u.adjoint()) - trace(a)) < 1e-10);
  }
}

TEST_CASE("rate fitting") {
  const std::vector<int> ps{8, 16, 32, 64};
  std::vector<double> inv, inv_sqrt, zero(4, 0.0), flat(4, 0.1), rising;
  for (int p : ps) {
    inv.push_back(1.0 / p);
    inv_sqrt.push_back(1.0 / std::sqrt(p));
    rising.push_back(1e-3 * p);
  }
  const RateFit a = fit_rate(ps, inv, -1.0, 0.15);
  CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(a.verdict);
  const RateFit b = fit_rate(ps, inv_sqrt, -1.0, 0.15);
  CHECK(b.slope == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK_FALSE(b.verdict);
  CHECK(fit_rate(ps, inv_sqrt, -0.5, 0.15).verdict);
  const RateFit z = fit_rate(ps, zero, -1.0, 0.15);
  CHECK(z.exact_zero);
  CHECK(z.verdict);
  CHECK(fit_rate(ps, inv_sqrt, 0.0, 0.0, FitMode::monotone).verdict);
  CHECK_FALSE(fit_rate(ps, flat, 0.0, 0.0, FitMode::monotone).verdict);
  CHECK_FALSE(fit_rate(ps, rising, -1.0, 0.15).verdict);
  const std::vector<int> two{8, 16};
  const std::vector<double> two_res{0.1, 0.05};
  CHECK_THROWS_AS(fit_rate(two, two_res, -1.0, 0.15), InvalidArgument);
  CHECK(class_target(Regularity::C0) == std::nullopt);
  CHECK(class_target(Regularity::C1) == -0.5);
  CHECK(class_target(Regularity::C2) == -1.0);
}

TEST_CASE("trace expansion residuals") {
  for (int p : {8, 16, 32}) {
    CHECK(trace_residual(kPs, p, builtin_symbol("const(1)")) == doctest::Approx(1.0 / p).epsilon(1e-12));
    CHECK(trace_residual(kPs, p, builtin_symbol("z3")) < 1e-13);
    const std::vector<Symbol> ones{builtin_symbol("const(1)"), builtin_symbol("const(1)"),
                                   builtin_symbol("const(1)")};
    CHECK(product_trace_residual(kPs, p, ones) == doctest::Approx(1.0 / p).epsilon(1e-12));
  }
  const std::vector<int> ps{8, 16, 32, 64};
  const RateFit z3 = trace_expansion_residual(kPs, ps, builtin_symbol("z3"), RateTarget{-1.0});
  CHECK(z3.exact_zero);
  CHECK(z3.verdict);
  const RateFit one = trace_expansion_residual(kPs, ps, builtin_symbol("const(1)"), RateTarget{-1.0});
  CHECK(one.slope == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("p = 2 product trace") {
  // tr(T_z3^2) = p(p+1)/(3(p+2)); at p = 2 the normalized trace is 1/4.
  const std::vector<Symbol> fs{builtin_symbol("z3"), builtin_symbol("z3")};
  CHECK(std::abs(product_trace_residual(kPs, 2, fs) - 1.0 / 12.0) < 1e-10);
}

TEST_CASE("norm convergence") {
  for (int p : {8, 32, 128}) {
    const NormResidual r = norm_residual(kPs, p, builtin_symbol("z3"));
    CHECK(r.residual == doctest::Approx(2.0 / (p + 2.0)).epsilon(1e-9));
    CHECK(r.coherent_bound >= 1.0 - 3.0 / p);
    CHECK(r.coherent_bound <= r.operator_norm + 1e-12);
    for (const char* name : {"z1", "kink", "holder(0.5)", "harmonic_Y2"}) {
      CHECK(norm_residual(kPs, p, builtin_symbol(name)).residual >= -1e-10);
    }
  }
}

TEST_CASE("distance residuals") {
  const DistanceResiduals real = distance_residuals(kPs, 16, builtin_symbol("kink"));
  CHECK(real.herm_value < 1e-20);
  CHECK(real.herm_residual() < 1e-20);
  const DistanceResiduals c = distance_residuals(kPs, 16, builtin_symbol("const(2)"));
  CHECK(c.scalar_value < 1e-14);
  const DistanceResiduals iz = distance_residuals(kPs, 256, builtin_symbol("i_z3"));
  CHECK(iz.herm_limit == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(std::abs(iz.herm_value - 1.0 / 3.0) < 2e-2);
}

TEST_CASE("Berezin kernel diagonal panel") {
  const auto panel = diagonal_panel();
  CHECK(panel.size() == 20);
  const double r16 = kernel_diagonal_residual(kPs, 16, builtin_symbol("z1"), panel);
  const double r64 = kernel_diagonal_residual(kPs, 64, builtin_symbol("z1"), panel);
  CHECK(r64 < r16);
}

TEST_CASE("Laplace bound") {
  const std::vector<int> ps{8, 16, 32};
  const LaplaceReport z3 = laplace_bound_check(kPs, ps, builtin_symbol("z3"));
  CHECK(z3.eigenvalue == doctest::Approx(8.0 * std::numbers::pi));
  CHECK(z3.bound == doctest::Approx(1.05 / 3.0).epsilon(1e-8));
  CHECK(z3.verdict);
  for (double v : z3.lhs) CHECK(v < z3.bound);
  const LaplaceReport z1 = laplace_bound_check(kPs, ps, builtin_symbol("z1"));
  CHECK(z1.bound == doctest::Approx(z3.bound).epsilon(1e-8));
  const LaplaceReport c = laplace_bound_check(kPs, ps, builtin_symbol("const(1)"));
  CHECK(c.bound == doctest::Approx(0.0));
  for (double v : c.lhs) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("worker count honors BTQ_THREADS") {
  setenv("BTQ_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  setenv("BTQ_THREADS", "0", 1);
  CHECK(worker_count() >= 1);
  unsetenv("BTQ_THREADS");
  CHECK(worker_count() >= 1);
}
