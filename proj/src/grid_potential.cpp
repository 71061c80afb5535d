#include "greenlab/grid_potential.hpp"

#include <algorithm>
#include <cmath>

#include "greenlab/parallel.hpp"

namespace greenlab {

double theta_chart_potential(const ModelSpace& space, const std::vector<double>& theta, int chart,
                             const ChartCoords& z) {
  double s = 0;
  for (int g = 0; g < space.h11_rank; ++g)
    s += theta[static_cast<std::size_t>(g)] * generator_potential(space, g, chart, z);
  return s;
}

GridPotential make_zero_potential(const ModelSpace& space, const std::vector<double>& theta,
                                  int per_axis) {
  if (per_axis <= 0) per_axis = default_resolution(space.kind);
  GridPotential gp;
  gp.space = space;
  gp.per_axis = per_axis;
  gp.theta_coeffs = theta;
  const Grid& g = gp.grid();
  for (auto& cg : g.charts) {
    gp.values.emplace_back(cg.size(), 0.0);
    gp.mask.emplace_back(cg.size(), 0);
  }
  return gp;
}

GridPotential sample_potential(const ModelSpace& space, const std::vector<double>& theta,
                               const std::function<double(const Point&)>& func, int per_axis) {
  GridPotential gp = make_zero_potential(space, theta, per_axis);
  const Grid& g = gp.grid();
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    auto& vals = gp.values[c];
    auto& msk = gp.mask[c];
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        Point p = point_from_chart(space, cg.chart_id, cg.coords(i));
        double v = func(p);
        if (std::isfinite(v)) {
          vals[i] = v;
        } else {
          msk[i] = 1;
        }
      }
    });
  }
  return gp;
}

namespace {

// Multilinear interpolation of chart values at chart coordinates z.
// Returns false if outside the interpolation box or all corners masked.
bool interp_chart(const GridPotential& gp, std::size_t c, const ChartCoords& z, double* out) {
  const ChartGrid& cg = gp.grid().charts[c];
  int N = cg.per_axis;
  double vals[4] = {z[0].real(), z[0].imag(), z[1].real(), z[1].imag()};
  int base[4] = {0, 0, 0, 0};
  double frac[4] = {0, 0, 0, 0};
  for (int a = 0; a < cg.rdims; ++a) {
    double t = (vals[a] + cg.extent) / cg.step - 0.5;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, N - 2);
    base[a] = i;
    frac[a] = std::clamp(t - i, 0.0, 1.0);
  }
  int corners = 1 << cg.rdims;
  double acc = 0, wsum = 0, vmin = 0;
  bool have_unmasked = false;
  for (int m = 0; m < corners; ++m) {
    std::array<int, 4> mi{base[0], base[1], base[2], base[3]};
    double w = 1;
    for (int a = 0; a < cg.rdims; ++a) {
      int bit = (m >> a) & 1;
      mi[a] += bit;
      w *= bit ? frac[a] : (1.0 - frac[a]);
    }
    std::size_t idx = cg.flat(mi);
    if (gp.mask[c][idx]) continue;
    double v = gp.values[c][idx];
    if (!have_unmasked || v < vmin) vmin = v;
    have_unmasked = true;
    acc += w * v;
    wsum += w;
  }
  if (!have_unmasked) return false;
  // Masked corners: weight renormalization keeps the estimate; pull toward
  // the corner minimum so values dip (not spike) near poles.
  *out = wsum > 0.5 ? acc / wsum : vmin;
  return true;
}

}  // namespace

double value_at(const GridPotential& gp, const Point& p) {
  Point q = p;
  q.normalize();
  int c = owner_chart(q);
  double v;
  if (!interp_chart(gp, static_cast<std::size_t>(c), chart_coords(q, c), &v))
    throw DomainError("value_at: all interpolation corners masked");
  return v;
}

void normalize_sup_zero(GridPotential& gp) {
  double sup = -1e300;
  const Grid& g = gp.grid();
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    for (std::size_t i = 0; i < cg.size(); ++i)
      if (cg.owned[i] && !gp.mask[c][i]) sup = std::max(sup, gp.values[c][i]);
  }
  if (sup == -1e300) throw DomainError("normalize_sup_zero: no unmasked nodes");
  for (auto& vs : gp.values)
    for (auto& v : vs) v -= sup;
  gp.norm = Normalization::sup_zero;
}

void normalize_mean_zero(GridPotential& gp) {
  const Grid& g = gp.grid();
  double mean = 0, mass = 0;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    for (std::size_t i = 0; i < cg.size(); ++i)
      if (!gp.mask[c][i] && cg.weight[i] > 0) {
        mean += cg.weight[i] * gp.values[c][i];
        mass += cg.weight[i];
      }
  }
  if (mass == 0) throw DomainError("normalize_mean_zero: no unmasked mass");
  mean /= mass;
  for (auto& vs : gp.values)
    for (auto& v : vs) v -= mean;
  gp.norm = Normalization::mean_zero;
}

double l1_distance(const GridPotential& a, const GridPotential& b, double clamp) {
  if (!(a.space == b.space) || a.per_axis != b.per_axis)
    throw UsageError("l1_distance: incompatible grids");
  const Grid& g = a.grid();
  double total = 0;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    total += deterministic_sum(cg.size(), [&](std::size_t i) {
      if (cg.weight[i] == 0) return 0.0;
      if (a.mask[c][i] || b.mask[c][i]) return 0.0;
      double d = std::abs(a.values[c][i] - b.values[c][i]);
      return cg.weight[i] * std::min(d, clamp);
    });
  }
  return total;
}

double sup_distance(const GridPotential& a, const GridPotential& b) {
  if (!(a.space == b.space) || a.per_axis != b.per_axis)
    throw UsageError("sup_distance: incompatible grids");
  const Grid& g = a.grid();
  double sup = 0;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    for (std::size_t i = 0; i < cg.size(); ++i) {
      if (!cg.owned[i] || a.mask[c][i] || b.mask[c][i]) continue;
      sup = std::max(sup, std::abs(a.values[c][i] - b.values[c][i]));
    }
  }
  return sup;
}

std::vector<std::vector<double>> ddc_masses(const GridPotential& gp) {
  if (gp.space.dim != 1) throw UsageError("ddc_masses: defined for curves only");
  const Grid& g = gp.grid();
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    int N = cg.per_axis;
    std::vector<double> m(cg.size(), 0.0);
    auto u = [&](int i, int j) {
      std::array<int, 4> mi{i, j, 0, 0};
      std::size_t idx = cg.flat(mi);
      ChartCoords z = cg.coords(idx);
      return theta_chart_potential(gp.space, gp.theta_coeffs, cg.chart_id, z) +
             gp.values[c][idx];
    };
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b; idx < e; ++idx) {
        int j = static_cast<int>(idx) % N, i = static_cast<int>(idx) / N;
        if (!cg.owned[idx] || i == 0 || j == 0 || i == N - 1 || j == N - 1) continue;
        bool bad = gp.mask[c][idx];
        std::array<int, 4> nb[4] = {{i - 1, j, 0, 0}, {i + 1, j, 0, 0},
                                    {i, j - 1, 0, 0}, {i, j + 1, 0, 0}};
        for (auto& mi : nb) bad = bad || gp.mask[c][cg.flat(mi)];
        if (bad) continue;
        m[idx] = (u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1) - 4 * u(i, j)) /
                 (2 * M_PI);
      }
    });
    out.push_back(std::move(m));
  }
  return out;
}

void sync_halo(GridPotential& gp) {
  const Grid& g = gp.grid();
  // Snapshot: interpolate only from pre-update owner values.
  GridPotential snap = gp;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        if (cg.owned[i]) continue;
        Point p = point_from_chart(gp.space, cg.chart_id, cg.coords(i));
        int oc = owner_chart(p);
        double v;
        if (interp_chart(snap, static_cast<std::size_t>(oc), chart_coords(p, oc), &v)) {
          gp.values[c][i] = v;
          gp.mask[c][i] = 0;
        } else {
          gp.mask[c][i] = 1;
        }
      }
    });
  }
}

}  // namespace greenlab
