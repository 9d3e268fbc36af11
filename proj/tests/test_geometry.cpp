#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <doctest.h>

#include "btq/calculus.hpp"
#include "btq/error.hpp"
#include "btq/geometry.hpp"
#include "btq/symbol.hpp"

using namespace btq;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("phase space normalization") {
  const PhaseSpace ps = make_phase_space();
  CHECK(ps.total_symplectic_mass == 1.0);
  CHECK(ps.volume() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ps.orientation == 1);
  CHECK_THROWS_AS(make_phase_space(0), InvalidArgument);
}

TEST_CASE("single-node grid is the midpoint") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = quadrature_grid(ps, 1, 1);
  REQUIRE(g.size() == 1);
  CHECK(g.node(0).t == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.node(0).phi == 0.0);
  CHECK(g.weight(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(quadrature_grid(ps, 0, 4), InvalidArgument);
}

TEST_CASE("integrate: low moments") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = quadrature_grid(ps, 8, 8);
  CHECK(std::abs(integrate(ps, g, [](const Point&) { return cplx{1.0}; }) - 1.0) < 1e-14);
  CHECK(std::abs(integrate(ps, g, [](const Point& x) { return cplx{x.z3()}; })) < 1e-14);
  CHECK(std::abs(integrate(ps, g, [](const Point& x) { return cplx{x.z3() * x.z3()}; }) - 1.0 / 3.0) <
        1e-14);
}

TEST_CASE("quadrature exactness on monomials t^a e^{ik phi}") {
  const PhaseSpace ps = make_phase_space();
  for (int n : {3, 17, 48, 144, 528}) {
    const int n_phi = 12;
    const QuadratureGrid g = quadrature_grid(ps, n, n_phi);
    CHECK(g.t_exactness() == 2 * n - 1);
    for (int a : {0, 1, n, 2 * n - 1}) {
      for (int k = -n_phi + 1; k < n_phi; ++k) {
        const cplx v = integrate(ps, g, [&](const Point& x) {
          return std::pow(x.t, a) * std::exp(cplx{0.0, k * x.phi});
        });
        const cplx expected = k == 0 ? cplx{1.0 / (a + 1.0)} : cplx{0.0};
        CHECK(std::abs(v - expected) < 1e-13);
      }
    }
  }
}

TEST_CASE("graded rule is exact up to its contract and ascending") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = graded_quadrature_grid(ps, 20, 4);
  CHECK(g.rule() == TRule::graded_equator);
  CHECK(g.n_t() == 40);
  for (std::size_t i = 1; i < g.t_nodes().size(); ++i) CHECK(g.t_nodes()[i] > g.t_nodes()[i - 1]);
  for (int a = 0; a <= g.t_exactness(); ++a) {
    const cplx v = integrate(ps, g, [&](const Point& x) { return cplx{std::pow(x.t, a)}; });
    CHECK(std::abs(v - 1.0 / (a + 1.0)) < 1e-13);
  }
  // |z3|^(1/2) is integrated far better than by a plain rule of the same size.
  const Symbol h = builtin_symbol("holder(0.5)");
  const double exact = 2.0 / 3.0;
  const double graded = integrate(ps, g, h.eval).real();
  const double plain = integrate(ps, quadrature_grid(ps, 40, 4), h.eval).real();
  CHECK(std::abs(graded - exact) < 1e-12);
  CHECK(std::abs(plain - exact) > 1e-6);
}

TEST_CASE("integration is linear and conjugation-equivariant") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = quadrature_grid(ps, 24, 24);
  const Symbol f = builtin_symbol("complex_mix");
  const Symbol h = builtin_symbol("z3sq");
  const cplx a{0.3, -1.2};
  CHECK(std::abs(integrate(ps, g, conj(f).eval) - std::conj(integrate(ps, g, f.eval))) < 1e-14);
  CHECK(std::abs(integrate(ps, g, (a * f + h).eval) -
                 (a * integrate(ps, g, f.eval) + integrate(ps, g, h.eval))) < 1e-14);
}

TEST_CASE("non-finite integrands are numeric faults") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = quadrature_grid(ps, 4, 4);
  CHECK_THROWS_AS(integrate(ps, g, [](const Point&) { return cplx{std::nan("")}; }), NumericFault);
}

TEST_CASE("embedding and geodesic distance") {
  const PhaseSpace ps = make_phase_space();
  const Point n = north_pole(), s = south_pole();
  CHECK(n.z3() == 1.0);
  CHECK(s.z3() == -1.0);
  const Point e{0.5, 0.7};
  const auto z = e.embed();
  CHECK(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] == doctest::Approx(1.0));
  CHECK(spherical_angle(n, s) == doctest::Approx(kPi));
  // Circumference pi R between the poles of the area-1 sphere.
  CHECK(geodesic_distance(ps, n, s) == doctest::Approx(kPi / std::sqrt(4.0 * kPi)));
}

TEST_CASE("Poisson bracket: structure constants, antisymmetry, Jacobi") {
  const PhaseSpace ps = make_phase_space();
  const Symbol z1 = builtin_symbol("z1"), z2 = builtin_symbol("z2"), z3 = builtin_symbol("z3");
  const Symbol mix = builtin_symbol("complex_mix"), y2 = builtin_symbol("harmonic_Y2");
  const Symbol b23 = bracket_symbol(ps, z2, z3), b31 = bracket_symbol(ps, z3, z1),
               b12 = bracket_symbol(ps, z1, z2);
  for (int i = 0; i < 100; ++i) {
    const Point x{0.02 + 0.96 * std::fmod(0.618034 * (i + 1), 1.0), std::fmod(2.399963 * i, 2.0 * kPi)};
    const auto e = x.embed();
    CHECK(std::abs(poisson_bracket(ps, z3, z1, x) - 2.0 * e[1]) < 1e-6);
    CHECK(std::abs(poisson_bracket(ps, z1, z2, x) - 2.0 * e[2]) < 1e-6);
    CHECK(std::abs(poisson_bracket(ps, z2, z3, x) - 2.0 * e[0]) < 1e-6);
    CHECK(std::abs(poisson_bracket(ps, mix, y2, x) + poisson_bracket(ps, y2, mix, x)) < 1e-8);
    CHECK(std::abs(poisson_bracket(ps, z1, b23, x) + poisson_bracket(ps, z2, b31, x) +
                   poisson_bracket(ps, z3, b12, x)) < 1e-6);
  }
}

TEST_CASE("flipped orientation flips the bracket") {
  const PhaseSpace ps = make_phase_space(-1);
  const Point x{0.3, 1.1};
  CHECK(std::abs(poisson_bracket(ps, builtin_symbol("z3"), builtin_symbol("z1"), x) +
                 2.0 * x.embed()[1]) < 1e-12);
}

TEST_CASE("bracket needs derivatives") {
  const PhaseSpace ps = make_phase_space();
  CHECK_THROWS_AS(bracket_symbol(ps, builtin_symbol("holder(0.5)"), builtin_symbol("z1")),
                  InvalidArgument);
  CHECK(bracket_symbol(ps, builtin_symbol("kink"), builtin_symbol("z1")).regularity == Regularity::C0);
  CHECK(bracket_symbol(ps, builtin_symbol("kink2"), builtin_symbol("z1")).regularity == Regularity::C1);
}

TEST_CASE("Dirichlet energy and the first eigenvalue") {
  const PhaseSpace ps = make_phase_space();
  const QuadratureGrid g = quadrature_grid(ps, 48, 48);
  CHECK(first_laplace_eigenvalue(ps) == doctest::Approx(8.0 * kPi).epsilon(1e-14));
  CHECK(dirichlet_energy(ps, g, builtin_symbol("const(2)")) == doctest::Approx(0.0));
  CHECK(dirichlet_energy(ps, g, builtin_symbol("z3")) == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-8));
  CHECK(dirichlet_energy(ps, g, builtin_symbol("z1")) == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-6));
}

// Coarse finite-difference oracle for the first nonzero Laplace eigenvalue.
// The lowest nonconstant mode is axisymmetric, so a finite-volume
// discretization of the radial energy scale * int t(1-t) f'^2 dt against the
// mass int f^2 dt suffices; it must land within 5% of 8 pi.
TEST_CASE("finite-difference cross-check of the first eigenvalue") {
  const PhaseSpace ps = make_phase_space();
  const int n = 200;
  const double h = 1.0 / n;
  const double scale = 1.0 / (ps.metric_scale * ps.metric_scale);
  Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double tm = (i + 1) * h;
    const double c = scale * tm * (1.0 - tm) / h;
    stiffness(i, i) += c;
    stiffness(i + 1, i + 1) += c;
    stiffness(i, i + 1) -= c;
    stiffness(i + 1, i) -= c;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness / h);
  const double lambda = es.eigenvalues()(1);
  CHECK(std::abs(es.eigenvalues()(0)) < 1e-8);
  CHECK(std::abs(lambda - first_laplace_eigenvalue(ps)) < 0.05 * first_laplace_eigenvalue(ps));
}
