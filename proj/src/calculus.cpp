#include "btq/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "btq/error.hpp"

namespace btq {

namespace {

bool admits_gradient(const Symbol& f) {
  return f.has_gradient() || f.regularity != Regularity::C0;
}

}  // namespace

Gradient symbol_gradient(const Symbol& f, const Point& x) {
  if (f.gradient) return (*f.gradient)(x);
  if (f.regularity == Regularity::C0) {
    throw InvalidArgument("symbol_gradient: '" + f.name + "' is C0 without derivative data");
  }
  const double ht = kFiniteDifferenceStep * std::max(1.0, std::abs(x.t));
  cplx d_t;
  if (x.t - ht < 0.0) {
    d_t = (f({x.t + ht, x.phi}) - f(x)) / ht;
  } else if (x.t + ht > 1.0) {
    d_t = (f(x) - f({x.t - ht, x.phi})) / ht;
  } else {
    d_t = (f({x.t + ht, x.phi}) - f({x.t - ht, x.phi})) / (2.0 * ht);
  }
  const double hp = kFiniteDifferenceStep * std::max(1.0, std::abs(x.phi));
  const cplx d_phi = (f({x.t, x.phi + hp}) - f({x.t, x.phi - hp})) / (2.0 * hp);
  return {d_t, d_phi};
}

cplx poisson_bracket(const PhaseSpace& ps, const Symbol& f, const Symbol& g, const Point& x) {
  const Gradient df = symbol_gradient(f, x);
  const Gradient dg = symbol_gradient(g, x);
  return static_cast<double>(ps.orientation) * (df.d_phi * dg.d_t - df.d_t * dg.d_phi);
}

Symbol bracket_symbol(const PhaseSpace& ps, const Symbol& f, const Symbol& g) {
  if (!admits_gradient(f) || !admits_gradient(g)) {
    throw InvalidArgument("bracket_symbol: {" + f.name + "," + g.name +
                          "} needs C1 symbols or derivative data");
  }
  auto lower = [](Regularity r) {
    switch (r) {
      case Regularity::Cinf: return Regularity::Cinf;
      case Regularity::C2: return Regularity::C1;
      default: return Regularity::C0;
    }
  };
  Symbol s;
  s.name = "{" + f.name + "," + g.name + "}";
  s.regularity = lower(std::min(f.regularity, g.regularity));
  s.bandwidth = f.bandwidth + g.bandwidth;
  s.singular_set = (f.singular_set == SingularSet::equator || g.singular_set == SingularSet::equator)
                       ? SingularSet::equator
                       : SingularSet::none;
  s.eval = [ps, f, g](const Point& x) { return poisson_bracket(ps, f, g, x); };
  return s;
}

double gradient_norm_squared(const PhaseSpace& ps, const Symbol& f, const Point& x) {
  const Gradient d = symbol_gradient(f, x);
  const double s = x.t * (1.0 - x.t);
  const double inv_r2 = 1.0 / (ps.metric_scale * ps.metric_scale);
  return inv_r2 * (s * std::norm(d.d_t) + std::norm(d.d_phi) / (4.0 * s));
}

double dirichlet_energy(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f) {
  if (!admits_gradient(f)) {
    throw InvalidArgument("dirichlet_energy: '" + f.name + "' is C0 without derivative data");
  }
  auto energy = [&](const QuadratureGrid& g) {
    return integrate(ps, g, [&](const Point& x) { return cplx(gradient_norm_squared(ps, f, x)); })
        .real();
  };
  const double coarse = energy(grid);
  const double fine = energy(grid.refined(2, 2));
  if (std::abs(coarse - fine) > 0.01 * std::max(std::abs(fine), 1e-12)) {
    throw NumericFault("dirichlet_energy: no stabilization under refinement for '" + f.name +
                       "' (" + std::to_string(coarse) + " vs " + std::to_string(fine) + ")");
  }
  return fine;
}

double first_laplace_eigenvalue(const PhaseSpace& ps) {
  return 2.0 / (ps.metric_scale * ps.metric_scale);
}

}  // namespace btq
