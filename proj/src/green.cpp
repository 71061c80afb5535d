#include "greenlab/green.hpp"

#include <cmath>
#include <limits>

#include "greenlab/parallel.hpp"

namespace greenlab {

namespace {

struct GreenSetup {
  double lambda1;
  std::vector<double> alpha;
};

GreenSetup precheck(const RationalMap& f, const GreenConfig& cfg) {
  PullbackData pd = pullback_matrix(f);
  if (!(pd.lambda1 > 1.0))
    throw UsageError("green_potential: needs lambda1 > 1");
  if (!pd.simple)
    throw UsageError("green_potential: leading eigenvalue is not simple");
  RegularityReport reg = is_1_regular(f, cfg.regularity_check);
  if (!reg.regular)
    throw UsageError("green_potential: map is not 1-regular (degree drop at n=" +
                     std::to_string(reg.first_failure) + ")");
  return {pd.lambda1, pd.perron_class};
}

}  // namespace

GreenResult green_potential(const RationalMap& f, const GreenConfig& cfg) {
  GreenSetup s = precheck(f, cfg);
  const ModelSpace& sp = f.space;
  int P = cfg.per_axis > 0 ? cfg.per_axis : default_resolution(sp.kind);

  GreenResult res;
  res.lambda1 = s.lambda1;
  res.alpha = s.alpha;
  res.potential = make_zero_potential(sp, s.alpha, P);
  GridPotential& g = res.potential;
  const Grid& grid = g.grid();

  // per-node orbit state
  std::vector<std::vector<Point>> orbit;
  for (auto& cg : grid.charts) {
    std::vector<Point> pts(cg.size());
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        pts[i] = point_from_chart(sp, cg.chart_id, cg.coords(i));
    });
    orbit.push_back(std::move(pts));
  }

  double scale = 1.0 / s.lambda1;
  int grow_streak = 0;
  std::vector<std::vector<double>> inc(grid.charts.size());
  for (std::size_t c = 0; c < grid.charts.size(); ++c)
    inc[c].assign(grid.charts[c].size(), 0.0);
  for (int n = 0; n < cfg.max_iters; ++n) {
    double sup = 0, l1 = 0;
    for (std::size_t c = 0; c < grid.charts.size(); ++c) {
      const ChartGrid& cg = grid.charts[c];
      double local = parallel_max(cg.size(), [&](std::size_t i) {
        inc[c][i] = 0.0;
        if (g.mask[c][i]) return 0.0;
        double d = scale * gamma_f(f, s.alpha, orbit[c][i]);
        if (!std::isfinite(d)) {
          g.mask[c][i] = 1;  // orbit reached the indeterminacy set
          return 0.0;
        }
        g.values[c][i] += d;
        inc[c][i] = d;
        try {
          orbit[c][i] = evaluate(f, orbit[c][i]);
        } catch (const IndeterminacyError&) {
          g.mask[c][i] = 1;
        }
        return std::abs(d);
      });
      sup = std::max(sup, local);
      l1 += deterministic_sum(cg.size(), [&](std::size_t i) {
        return cg.owned[i] ? cg.weight[i] * std::abs(inc[c][i]) : 0.0;
      });
    }
    res.sup_increments.push_back(sup);
    res.l1_increments.push_back(l1);
    res.iters = n + 1;
    if (sup < cfg.tol) {
      res.converged = true;
      break;
    }
    if (res.sup_increments.size() >= 2 && sup > res.sup_increments[res.sup_increments.size() - 2]) {
      if (++grow_streak >= 5)
        throw ConvergenceError("green_potential: normalized pull-backs diverge");
    } else {
      grow_streak = 0;
    }
    scale /= s.lambda1;
  }

  // invariance: (g o f + gamma)/lambda should reproduce g (computed on the
  // raw potential; the sup_zero shift below would spoil the identity)
  double resid = 0;
  for (std::size_t c = 0; c < grid.charts.size(); ++c) {
    const ChartGrid& cg = grid.charts[c];
    resid += deterministic_sum(cg.size(), [&](std::size_t i) {
      if (!cg.owned[i] || g.mask[c][i]) return 0.0;
      Point p = point_from_chart(sp, cg.chart_id, cg.coords(i));
      try {
        double gof = value_at(g, evaluate(f, p));
        double r = (gof + gamma_f(f, s.alpha, p)) / s.lambda1 - g.values[c][i];
        return std::isfinite(r) ? cg.weight[i] * std::abs(r) : 0.0;
      } catch (const std::runtime_error&) {
        return 0.0;
      }
    });
  }
  res.invariance_residual = resid;
  normalize_sup_zero(res.potential);
  return res;
}

GreenOperator::GreenOperator(const RationalMap& f, const GreenConfig& cfg)
    : f_(f), cfg_(cfg) {
  GreenSetup s = precheck(f, cfg);
  lambda1_ = s.lambda1;
  alpha_ = s.alpha;
}

double GreenOperator::value(const Point& p) const {
  double g = 0, scale = 1.0 / lambda1_;
  Point q = p;
  for (int n = 0; n < cfg_.max_iters; ++n) {
    double inc = scale * gamma_f(f_, alpha_, q);
    if (!std::isfinite(inc)) throw IndeterminacyError("green_value: orbit hits I_f");
    g += inc;
    q = evaluate(f_, q);
    scale /= lambda1_;
  }
  return g;
}

double GreenOperator::pullback_value(const Point& p, int n,
                                     const std::function<double(const Point&)>& rho) const {
  double g = 0, scale = 1.0 / lambda1_;
  Point q = p;
  for (int k = 0; k < n; ++k) {
    double inc = scale * gamma_f(f_, alpha_, q);
    if (!std::isfinite(inc)) throw IndeterminacyError("pullback_value: orbit hits I_f");
    g += inc;
    q = evaluate(f_, q);
    scale /= lambda1_;
  }
  if (rho) g += scale * lambda1_ * rho(q);  // lambda^{-n} rho(f^n p)
  return g;
}

double green_value(const RationalMap& f, const Point& p, const GreenConfig& cfg) {
  return GreenOperator(f, cfg).value(p);
}

}  // namespace greenlab
