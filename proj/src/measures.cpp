#include "greenlab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "greenlab/parallel.hpp"
#include "greenlab/rng.hpp"

namespace greenlab {

double EmpiricalMeasure::total() const {
  double t = 0;
  for (double w : weights) t += w;
  return t;
}

void EmpiricalMeasure::normalize() {
  double t = total();
  if (!(t > 0)) throw UsageError("EmpiricalMeasure::normalize: zero mass");
  for (double& w : weights) w /= t;
}

EmpiricalMeasure volume_sample(const ModelSpace& space, int n, std::uint64_t seed) {
  EmpiricalMeasure m;
  m.kind = space.kind;
  m.points.resize(n);
  m.weights.assign(n, 1.0 / n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Rng rng = Rng::stream(seed, i);
      m.points[i] = random_point(space, rng);
    }
  });
  return m;
}

EmpiricalMeasure preimage_measure(const RationalMap& f, const Point& w, int n,
                                  std::size_t point_cap) {
  if (f.space.dim != 1) throw UsageError("preimage_measure: curves only");
  std::vector<Point> layer{w};
  for (int k = 0; k < n; ++k) {
    std::vector<Point> next;
    next.reserve(layer.size() * 4);
    for (const Point& p : layer) {
      auto pre = preimages(f, p);
      next.insert(next.end(), pre.begin(), pre.end());
    }
    if (next.size() > point_cap)
      throw ResourceError("preimage_measure: point budget exceeded");
    layer = std::move(next);
  }
  EmpiricalMeasure m;
  m.kind = f.space.kind;
  m.points = std::move(layer);
  if (m.points.empty()) throw ConvergenceError("preimage_measure: no preimages found");
  m.weights.assign(m.points.size(), 1.0 / static_cast<double>(m.points.size()));
  return m;
}

EmpiricalMeasure measure_from_potential(const GridPotential& gp) {
  if (gp.space.dim != 1) throw UsageError("measure_from_potential: curves only");
  auto masses = ddc_masses(gp);
  const Grid& g = gp.grid();
  EmpiricalMeasure m;
  m.kind = gp.space.kind;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    for (std::size_t i = 0; i < cg.size(); ++i) {
      if (!cg.owned[i] || masses[c][i] <= 0) continue;
      m.points.push_back(point_from_chart(gp.space, cg.chart_id, cg.coords(i)));
      m.weights.push_back(masses[c][i]);
    }
  }
  return m;
}

double dual_lipschitz(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      int n_features, std::uint64_t seed) {
  if (a.kind != b.kind) throw UsageError("dual_lipschitz: space mismatch");
  int dim = 0;
  if (!a.points.empty()) embed(a.points[0], &dim);
  else if (!b.points.empty()) embed(b.points[0], &dim);
  else return 0.0;

  // precompute embeddings once
  auto embed_all = [&](const EmpiricalMeasure& m) {
    std::vector<std::array<double, 9>> es(m.points.size());
    parallel_for(m.points.size(), [&](std::size_t lo, std::size_t hi) {
      int d;
      for (std::size_t i = lo; i < hi; ++i) es[i] = embed(m.points[i], &d);
    });
    return es;
  };
  auto ea = embed_all(a), eb = embed_all(b);

  double best = 0;
  for (int j = 0; j < n_features; ++j) {
    Rng rng = Rng::stream(seed, j);
    std::array<double, 9> wv{};
    double nn = 0;
    for (int v = 0; v < dim; ++v) {
      wv[v] = rng.gaussian();
      nn += wv[v] * wv[v];
    }
    nn = std::sqrt(nn);
    for (int v = 0; v < dim; ++v) wv[v] /= nn;
    double bias = rng.uniform() * 2 * M_PI;
    auto integrate = [&](const EmpiricalMeasure& m,
                         const std::vector<std::array<double, 9>>& es) {
      return deterministic_sum(m.points.size(), [&](std::size_t i) {
        double t = bias;
        for (int v = 0; v < dim; ++v) t += wv[v] * es[i][v];
        return m.weights[i] * std::cos(t);
      });
    };
    best = std::max(best, std::abs(integrate(a, ea) - integrate(b, eb)));
  }
  return best;
}

}  // namespace greenlab
