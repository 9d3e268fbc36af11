#include "btq/symbol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "btq/error.hpp"

namespace btq {

namespace {

constexpr cplx kI{0.0, 1.0};

double rho(const Point& x) { return std::sqrt(std::max(0.0, x.t * (1.0 - x.t))); }

// d/dt of 2 sqrt(t(1-t)); singular at the poles like the chart itself.
double d_sin_theta(const Point& x) { return (1.0 - 2.0 * x.t) / rho(x); }

Symbol make(std::string name, Regularity reg, std::function<cplx(const Point&)> eval,
            std::optional<std::function<Gradient(const Point&)>> grad, std::optional<double> hint,
            std::optional<Point> peak, int bandwidth, SingularSet sing = SingularSet::none) {
  Symbol s;
  s.name = std::move(name);
  s.regularity = reg;
  s.eval = std::move(eval);
  s.gradient = std::move(grad);
  s.sup_norm_hint = hint;
  s.peak = peak;
  s.bandwidth = bandwidth;
  s.singular_set = sing;
  return s;
}

// Parses "a" or "a/b" as a real number.
std::optional<double> parse_real(std::string_view text) {
  auto parse_one = [](std::string_view s) -> std::optional<double> {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = parse_one(text.substr(0, slash));
    auto den = parse_one(text.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
  }
  return parse_one(text);
}

// "family(arg)" -> (family, arg); plain names return an empty argument.
std::pair<std::string_view, std::optional<std::string_view>> split_call(std::string_view name) {
  const auto open = name.find('(');
  if (open == std::string_view::npos || name.back() != ')') return {name, std::nullopt};
  return {name.substr(0, open), name.substr(open + 1, name.size() - open - 2)};
}

Symbol coordinate(int axis) {
  const Point equator{0.5, axis == 2 ? std::numbers::pi / 2 : 0.0};
  switch (axis) {
    case 1:
      return make(
          "z1", Regularity::Cinf, [](const Point& x) { return cplx(x.embed()[0]); },
          [](const Point& x) {
            return Gradient{d_sin_theta(x) * std::cos(x.phi), -2.0 * rho(x) * std::sin(x.phi)};
          },
          1.0, equator, 1);
    case 2:
      return make(
          "z2", Regularity::Cinf, [](const Point& x) { return cplx(x.embed()[1]); },
          [](const Point& x) {
            return Gradient{d_sin_theta(x) * std::sin(x.phi), 2.0 * rho(x) * std::cos(x.phi)};
          },
          1.0, equator, 1);
    default:
      return make(
          "z3", Regularity::Cinf, [](const Point& x) { return cplx(x.z3()); },
          [](const Point&) { return Gradient{2.0, 0.0}; }, 1.0, north_pole(), 1);
  }
}

Symbol holder(double alpha, std::string name) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("holder: exponent must lie in (0,1), got " + std::to_string(alpha));
  }
  return make(
      std::move(name), Regularity::C0,
      [alpha](const Point& x) { return cplx(std::pow(std::abs(x.z3()), alpha)); }, std::nullopt,
      1.0, north_pole(), 8, SingularSet::equator);
}

Symbol constant(cplx c, std::string name) {
  return make(
      std::move(name), Regularity::Cinf, [c](const Point&) { return c; },
      [](const Point&) { return Gradient{0.0, 0.0}; }, std::abs(c), Point{0.5, 0.0}, 0);
}

Symbol kink() {
  return make(
      "kink", Regularity::C1,
      [](const Point& x) {
        const double z = x.z3();
        return cplx(z * std::abs(z));
      },
      [](const Point& x) { return Gradient{4.0 * std::abs(x.z3()), 0.0}; }, 1.0, north_pole(), 2,
      SingularSet::equator);
}

}  // namespace

std::string_view to_string(Regularity r) {
  switch (r) {
    case Regularity::C0: return "C0";
    case Regularity::C1: return "C1";
    case Regularity::C2: return "C2";
    case Regularity::Cinf: return "Cinf";
  }
  return "?";
}

std::vector<std::string> catalog_names() {
  return {"z1",         "z2",          "z3",     "z3sq",  "harmonic_Y2", "holder(0.5)",
          "kink",       "kink2",       "i_kink", "i_z3",  "complex_mix", "const(1)"};
}

Symbol builtin_symbol(std::string_view name) {
  const auto [family, arg] = split_call(name);
  if (arg) {
    const auto value = parse_real(*arg);
    if (!value) throw InvalidArgument("builtin_symbol: bad argument in '" + std::string(name) + "'");
    if (family == "holder") return holder(*value, std::string(name));
    if (family == "const") return constant(*value, std::string(name));
    throw InvalidArgument("builtin_symbol: unknown family '" + std::string(family) + "'");
  }
  if (name == "z1") return coordinate(1);
  if (name == "z2") return coordinate(2);
  if (name == "z3") return coordinate(3);
  if (name == "z3sq") {
    return make(
        "z3sq", Regularity::Cinf, [](const Point& x) { return cplx(x.z3() * x.z3()); },
        [](const Point& x) { return Gradient{4.0 * x.z3(), 0.0}; }, 1.0, north_pole(), 2);
  }
  if (name == "harmonic_Y2") {
    // Zonal second harmonic (3 z3^2 - 1)/2; its mean over X vanishes.
    return make(
        "harmonic_Y2", Regularity::Cinf,
        [](const Point& x) {
          const double z = x.z3();
          return cplx(1.5 * z * z - 0.5);
        },
        [](const Point& x) { return Gradient{6.0 * x.z3(), 0.0}; }, 1.0, north_pole(), 2);
  }
  if (name == "kink") return kink();
  if (name == "kink2") {
    return make(
        "kink2", Regularity::C2,
        [](const Point& x) {
          const double z = std::abs(x.z3());
          return cplx(z * z * z);
        },
        [](const Point& x) {
          const double z = x.z3();
          return Gradient{6.0 * z * std::abs(z), 0.0};
        },
        1.0, north_pole(), 3, SingularSet::equator);
  }
  if (name == "i_kink") {
    Symbol s = kI * kink();
    s.name = "i_kink";
    return s;
  }
  if (name == "i_z3") {
    Symbol s = kI * coordinate(3);
    s.name = "i_z3";
    return s;
  }
  if (name == "complex_mix") {
    Symbol s = coordinate(1) + kI * coordinate(3);
    s.name = "complex_mix";
    s.sup_norm_hint = 1.0;
    s.peak = north_pole();
    return s;
  }
  throw InvalidArgument("builtin_symbol: unknown symbol '" + std::string(name) + "'");
}

Symbol conj(const Symbol& f) {
  Symbol s = f;
  s.name = "conj(" + f.name + ")";
  s.eval = [e = f.eval](const Point& x) { return std::conj(e(x)); };
  if (f.gradient) {
    s.gradient = [g = *f.gradient](const Point& x) {
      const Gradient d = g(x);
      return Gradient{std::conj(d.d_t), std::conj(d.d_phi)};
    };
  }
  return s;
}

namespace {

Symbol combine(const Symbol& f, const Symbol& g, std::string name) {
  Symbol s;
  s.name = std::move(name);
  s.regularity = std::min(f.regularity, g.regularity);
  s.bandwidth = f.bandwidth + g.bandwidth;
  s.singular_set = (f.singular_set == SingularSet::equator || g.singular_set == SingularSet::equator)
                       ? SingularSet::equator
                       : SingularSet::none;
  return s;
}

}  // namespace

Symbol operator+(const Symbol& f, const Symbol& g) {
  Symbol s = combine(f, g, f.name + "+" + g.name);
  s.bandwidth = std::max(f.bandwidth, g.bandwidth);
  s.eval = [a = f.eval, b = g.eval](const Point& x) { return a(x) + b(x); };
  if (f.gradient && g.gradient) {
    s.gradient = [a = *f.gradient, b = *g.gradient](const Point& x) {
      const Gradient u = a(x), v = b(x);
      return Gradient{u.d_t + v.d_t, u.d_phi + v.d_phi};
    };
  }
  return s;
}

Symbol operator*(cplx c, const Symbol& f) {
  Symbol s = f;
  s.name = "(" + std::to_string(c.real()) + "," + std::to_string(c.imag()) + ")*" + f.name;
  s.eval = [c, e = f.eval](const Point& x) { return c * e(x); };
  if (f.gradient) {
    s.gradient = [c, g = *f.gradient](const Point& x) {
      const Gradient d = g(x);
      return Gradient{c * d.d_t, c * d.d_phi};
    };
  }
  if (f.sup_norm_hint) s.sup_norm_hint = std::abs(c) * *f.sup_norm_hint;
  return s;
}

Symbol operator-(const Symbol& f, const Symbol& g) {
  Symbol s = f + cplx(-1.0) * g;
  s.name = f.name + "-" + g.name;
  return s;
}

Symbol operator*(const Symbol& f, const Symbol& g) {
  Symbol s = combine(f, g, f.name + "*" + g.name);
  s.eval = [a = f.eval, b = g.eval](const Point& x) { return a(x) * b(x); };
  if (f.gradient && g.gradient) {
    s.gradient = [a = f.eval, b = g.eval, da = *f.gradient, db = *g.gradient](const Point& x) {
      const cplx u = a(x), v = b(x);
      const Gradient du = da(x), dv = db(x);
      return Gradient{du.d_t * v + u * dv.d_t, du.d_phi * v + u * dv.d_phi};
    };
  }
  if (f.sup_norm_hint && g.sup_norm_hint && f.peak && g.peak && f.peak->t == g.peak->t &&
      f.peak->phi == g.peak->phi) {
    s.sup_norm_hint = *f.sup_norm_hint * *g.sup_norm_hint;
    s.peak = f.peak;
  }
  return s;
}

Symbol shifted(const Symbol& f, cplx c) {
  Symbol s = f;
  s.name = f.name + "+const";
  s.eval = [c, e = f.eval](const Point& x) { return e(x) + c; };
  s.sup_norm_hint.reset();
  s.peak.reset();
  return s;
}

Symbol abs_squared(const Symbol& f) {
  Symbol s = f;
  s.name = "|" + f.name + "|^2";
  s.bandwidth = 2 * f.bandwidth;
  s.eval = [e = f.eval](const Point& x) { return cplx(std::norm(e(x))); };
  if (f.gradient) {
    s.gradient = [e = f.eval, g = *f.gradient](const Point& x) {
      const cplx v = std::conj(e(x));
      const Gradient d = g(x);
      return Gradient{2.0 * (v * d.d_t).real(), 2.0 * (v * d.d_phi).real()};
    };
  }
  if (f.sup_norm_hint) s.sup_norm_hint = *f.sup_norm_hint * *f.sup_norm_hint;
  return s;
}

SupNorm sup_norm(const Symbol& f, const QuadratureGrid& grid) {
  SupNorm out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.grid_max = std::max(out.grid_max, std::abs(f(grid.node(i))));
  }
  out.value = out.grid_max;
  if (f.sup_norm_hint) {
    out.value = std::max(out.grid_max, *f.sup_norm_hint);
    out.disagreement = std::abs(*f.sup_norm_hint - out.grid_max) > 1e-3;
  }
  return out;
}

double dist_to_real(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f) {
  const cplx v = integrate(ps, grid, [&](const Point& x) {
    const double im = f(x).imag();
    return cplx(im * im);
  });
  return std::sqrt(std::max(0.0, v.real()));
}

double dist_to_const(const PhaseSpace& ps, const QuadratureGrid& grid, const Symbol& f) {
  const double second = integrate(ps, grid, [&](const Point& x) { return cplx(std::norm(f(x))); }).real();
  const cplx mean = integrate(ps, grid, f.eval);
  const double radicand = second - std::norm(mean) / ps.volume();
  if (radicand < -1e-12) {
    throw NumericFault("dist_to_const: negative radicand " + std::to_string(radicand) + " for " +
                       f.name);
  }
  return std::sqrt(std::max(0.0, radicand));
}

}  // namespace btq
