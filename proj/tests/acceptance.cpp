// Acceptance matrix: one PASS/FAIL line per criterion.  Each criterion runs
// the corresponding entries of the paper-full suite and, where the criterion
// names exact values, checks them directly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "btq/analysis.hpp"
#include "btq/experiment.hpp"

using namespace btq;

namespace {

const PhaseSpace kPs = make_phase_space();
const std::vector<int> kTail{16, 32, 64, 128, 256};

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::map<std::string, std::vector<Report>> suite_reports() {
  std::map<std::string, std::vector<Report>> by_group;
  for (const auto& e : suite_entries("paper-full")) {
    by_group[e.group].push_back(run_experiment(e.config));
  }
  return by_group;
}

void require_group(Outcome& o, const std::vector<Report>& reports, const std::string& label) {
  for (const auto& r : reports) {
    o.require(r.passed(), label + " " + std::string(to_string(r.config.experiment)));
    for (const auto& f : r.fits) {
      if (f.fit && f.fit->mode == FitMode::slope && !f.fit->exact_zero) {
        o.detail << ' ' << f.series << ":slope=" << format_real(f.fit->slope).substr(0, 6);
      }
    }
  }
}

// Largest residual/reference over threshold rows (reference = threshold).
double worst_ratio(const std::vector<Report>& reports) {
  double worst = 0.0;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      if (row.reference > 0.0 && row.verdict != Verdict::not_applicable) {
        worst = std::max(worst, row.residual / row.reference);
      }
    }
  }
  return worst;
}

const FitSummary* find_fit(const std::vector<Report>& reports, const std::string& series) {
  for (const auto& r : reports) {
    for (const auto& f : r.fits) {
      if (f.series == series) return &f;
    }
  }
  return nullptr;
}

}  // namespace

int main() {
  const auto groups = suite_reports();
  std::vector<std::pair<std::string, Outcome>> results;
  auto criterion = [&](const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
      body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    results.emplace_back(name, std::move(o));
  };

  criterion("1 exact structure (Gram, Bergman density, T_1, T_z3)", [&](Outcome& o) {
    require_group(o, groups.at("criterion_1"), "criterion_1");
    o.detail << " worst residual/tolerance=" << worst_ratio(groups.at("criterion_1"));
  });

  criterion("2 model kernel identities (n = 1, 2)", [&](Outcome& o) {
    require_group(o, groups.at("criterion_2"), "criterion_2");
    double worst = 0.0;
    for (const auto& r : groups.at("criterion_2")) {
      for (const auto& row : r.rows) worst = std::max(worst, row.residual);
    }
    o.detail << " max residual=" << worst;
    o.require(worst <= 1e-8, "residual <= 1e-8");
  });

  criterion("3 norm convergence", [&](Outcome& o) {
    double worst = 0.0, worst_coherent = 0.0;
    std::vector<double> res;
    for (int p : kTail) {
      const NormResidual n = norm_residual(kPs, p, builtin_symbol("z3"));
      worst = std::max(worst, std::abs(n.residual - 2.0 / (p + 2.0)));
      worst_coherent = std::max(worst_coherent, (n.sup_norm - 3.0 / p) - n.coherent_bound);
      res.push_back(n.residual);
    }
    const RateFit fit = fit_rate(kTail, res, -1.0, 0.05);
    o.detail << " z3: |r - 2/(p+2)|<=" << worst << " slope=" << fit.slope;
    o.require(worst <= 1e-9, "z3 residual equals 2/(p+2)");
    o.require(std::abs(fit.slope + 1.0) <= 0.05, "z3 slope -1 +- 0.05");
    o.require(worst_coherent <= 0.0, "coherent bound >= 1 - 3/p");
    require_group(o, groups.at("criterion_3"), "criterion_3");
    const FitSummary* holder = find_fit(groups.at("criterion_3"), "holder(0.5)");
    o.require(holder && holder->fit && holder->fit->mode == FitMode::monotone && holder->passed,
              "holder(0.5) monotone decay");
  });

  criterion("4 Berezin kernel diagonal", [&](Outcome& o) {
    require_group(o, groups.at("criterion_4"), "criterion_4");
  });

  criterion("5 traces and product traces", [&](Outcome& o) {
    require_group(o, groups.at("criterion_5"), "criterion_5");
    const std::vector<Symbol> pair{builtin_symbol("z3"), builtin_symbol("z3")};
    const double r2 = product_trace_residual(kPs, 2, pair);
    const cplx lim = normalized_product_trace(kPs, 256, pair);
    o.detail << " p=2 residual=" << r2 << " p=256 value=" << lim.real();
    o.require(std::abs(r2 - 1.0 / 12.0) <= 1e-10, "p = 2 residual 1/12");
    o.require(std::abs(lim - 1.0 / 3.0) <= 1e-2, "limit 1/3 at p = 256");
  });

  criterion("6 products and commutator", [&](Outcome& o) {
    require_group(o, groups.at("criterion_6"), "criterion_6");
    const FitSummary* comm = find_fit(groups.at("criterion_6"), "z3;z1");
    o.require(comm != nullptr, "commutator series present");
  });

  criterion("7 distance theorem", [&](Outcome& o) {
    require_group(o, groups.at("criterion_7"), "criterion_7");
    const DistanceResiduals iz = distance_residuals(kPs, 256, builtin_symbol("i_z3"));
    const DistanceResiduals z = distance_residuals(kPs, 256, builtin_symbol("z3"));
    o.detail << " herm(i_z3)=" << iz.herm_value << " scalar(z3)=" << z.scalar_value;
    o.require(std::abs(iz.herm_value - 1.0 / 3.0) <= 2e-2, "herm distance -> 1/3");
    o.require(std::abs(z.scalar_value - 1.0 / 3.0) <= 2e-2, "scalar distance -> 1/3");
  });

  criterion("8 multiplication bound", [&](Outcome& o) {
    require_group(o, groups.at("criterion_8"), "criterion_8");
    o.detail << " worst lhs/bound=" << worst_ratio(groups.at("criterion_8"));
    for (const auto& r : groups.at("criterion_8")) {
      for (const auto& row : r.rows) {
        if (row.symbols == "z3") o.require(std::abs(row.reference - 1.05 / 3.0) < 1e-8, "z3 bound 1.05/3");
      }
    }
  });

  criterion("9 invariants and mutation check", [&](Outcome& o) {
    require_group(o, groups.at("criterion_9"), "criterion_9");
    o.detail << " worst residual/tolerance=" << worst_ratio(groups.at("criterion_9"));
    bool mutation_fails = true;
    for (const auto& r : groups.at("criterion_9_mutation")) mutation_fails = mutation_fails && !r.passed();
    o.require(mutation_fails, "flipped bracket must fail the commutator experiment");
    o.detail << " mutation=" << (mutation_fails ? "caught" : "missed");
  });

  bool all = true;
  for (const auto& [name, o] : results) {
    std::cout << (o.ok ? "PASS" : "FAIL") << "  criterion " << name << " --" << o.detail.str() << '\n';
    all = all && o.ok;
  }
  return all ? 0 : 1;
}
