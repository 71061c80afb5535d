#include "greenlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "greenlab/parallel.hpp"
#include "greenlab/rng.hpp"

namespace greenlab {

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::P1: return "P1";
    case SpaceKind::P2: return "P2";
    case SpaceKind::P1xP1: return "P1xP1";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "P1") return SpaceKind::P1;
  if (s == "P2") return SpaceKind::P2;
  if (s == "P1xP1") return SpaceKind::P1xP1;
  throw UsageError("unknown space kind: " + s);
}

ModelSpace ModelSpace::make(SpaceKind k) {
  switch (k) {
    case SpaceKind::P1: return {k, 1, 1, 2, 1, 2};
    case SpaceKind::P2: return {k, 2, 1, 3, 1, 3};
    case SpaceKind::P1xP1: return {k, 2, 2, 4, 2, 4};
  }
  throw UsageError("bad kind");
}

void Point::normalize() {
  auto scale_range = [&](int b, int e) {
    double m = 0;
    for (int v = b; v < e; ++v) m = std::max(m, std::abs(h[v]));
    if (m == 0) throw UsageError("zero homogeneous vector");
    for (int v = b; v < e; ++v) h[v] /= m;
  };
  if (kind == SpaceKind::P1) scale_range(0, 2);
  else if (kind == SpaceKind::P2) scale_range(0, 3);
  else {
    scale_range(0, 2);
    scale_range(2, 4);
  }
}

double Point::dist(const Point& o) const {
  int d1 = 0, d2 = 0;
  auto a = embed(*this, &d1);
  auto b = embed(o, &d2);
  double s = 0;
  for (int i = 0; i < d1; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// --- charts -----------------------------------------------------------------

Point point_from_chart(const ModelSpace& space, int chart, const ChartCoords& z) {
  Point p;
  p.kind = space.kind;
  if (space.kind == SpaceKind::P1 || space.kind == SpaceKind::P2) {
    int n = space.nhomog;
    if (chart < 0 || chart >= n) throw UsageError("bad chart id");
    int zi = 0;
    for (int v = 0; v < n; ++v) p.h[v] = (v == chart) ? Complex(1.0) : z[zi++];
  } else {
    if (chart < 0 || chart >= 4) throw UsageError("bad chart id");
    int i = chart / 2, j = chart % 2;
    p.h[i] = 1.0;
    p.h[1 - i] = z[0];
    p.h[2 + j] = 1.0;
    p.h[2 + (1 - j)] = z[1];
  }
  p.normalize();
  return p;
}

ChartCoords chart_coords(const Point& p, int chart) {
  ModelSpace space = ModelSpace::make(p.kind);
  ChartCoords z{Complex(0), Complex(0)};
  if (space.kind == SpaceKind::P1 || space.kind == SpaceKind::P2) {
    if (chart < 0 || chart >= space.nhomog) throw UsageError("bad chart id");
    if (std::abs(p.h[chart]) < 1e-12) throw DomainError("point outside chart domain");
    int zi = 0;
    for (int v = 0; v < space.nhomog; ++v)
      if (v != chart) z[zi++] = p.h[v] / p.h[chart];
  } else {
    if (chart < 0 || chart >= 4) throw UsageError("bad chart id");
    int i = chart / 2, j = chart % 2;
    if (std::abs(p.h[i]) < 1e-12 || std::abs(p.h[2 + j]) < 1e-12)
      throw DomainError("point outside chart domain");
    z[0] = p.h[1 - i] / p.h[i];
    z[1] = p.h[2 + (1 - j)] / p.h[2 + j];
  }
  return z;
}

bool chart_contains(const Point& p, int chart, double margin) {
  ModelSpace space = ModelSpace::make(p.kind);
  Point q = p;
  q.normalize();
  if (space.kind == SpaceKind::P1 || space.kind == SpaceKind::P2)
    return std::abs(q.h[chart]) > margin;
  int i = chart / 2, j = chart % 2;
  return std::abs(q.h[i]) > margin && std::abs(q.h[2 + j]) > margin;
}

namespace {
int argmax_abs(const std::array<Complex, 4>& h, int b, int e) {
  int best = b;
  double bm = std::abs(h[b]);
  for (int v = b + 1; v < e; ++v) {
    double m = std::abs(h[v]);
    if (m > bm) {  // strict: ties go to the lowest index
      bm = m;
      best = v;
    }
  }
  return best;
}
}  // namespace

int owner_chart(const Point& p) {
  if (p.kind == SpaceKind::P1) return argmax_abs(p.h, 0, 2);
  if (p.kind == SpaceKind::P2) return argmax_abs(p.h, 0, 3);
  int i = argmax_abs(p.h, 0, 2);
  int j = argmax_abs(p.h, 2, 4) - 2;
  return 2 * i + j;
}

// --- reference forms ---------------------------------------------------------

double generator_potential(const ModelSpace& space, int gen, int chart, const ChartCoords& z) {
  if (space.kind == SpaceKind::P1) {
    if (gen != 0) throw UsageError("bad generator");
    return 0.5 * std::log1p(std::norm(z[0]));
  }
  if (space.kind == SpaceKind::P2) {
    if (gen != 0) throw UsageError("bad generator");
    return 0.5 * std::log1p(std::norm(z[0]) + std::norm(z[1]));
  }
  if (gen < 0 || gen > 1) throw UsageError("bad generator");
  (void)chart;
  return 0.5 * std::log1p(std::norm(z[gen]));
}

std::vector<double> reference_class(const ModelSpace& space) {
  switch (space.kind) {
    case SpaceKind::P1: return {1.0};
    case SpaceKind::P2: return {1.0};
    case SpaceKind::P1xP1: return {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  }
  return {};
}

double fs_potential(const ModelSpace& space, int chart, const ChartCoords& z) {
  auto c = reference_class(space);
  double s = 0;
  for (int g = 0; g < space.h11_rank; ++g) s += c[g] * generator_potential(space, g, chart, z);
  return s;
}

double volume_density(const ModelSpace& space, const ChartCoords& z) {
  constexpr double pi = M_PI;
  switch (space.kind) {
    case SpaceKind::P1: {
      double t = 1.0 + std::norm(z[0]);
      return 1.0 / (pi * t * t);
    }
    case SpaceKind::P2: {
      double t = 1.0 + std::norm(z[0]) + std::norm(z[1]);
      return 2.0 / (pi * pi * t * t * t);
    }
    case SpaceKind::P1xP1: {
      double a = 1.0 + std::norm(z[0]), b = 1.0 + std::norm(z[1]);
      return 1.0 / (pi * pi * a * a * b * b);
    }
  }
  return 0;
}

double class_volume(const ModelSpace& space, const std::vector<double>& c) {
  switch (space.kind) {
    case SpaceKind::P1: return c.at(0);
    case SpaceKind::P2: return c.at(0) * c.at(0);
    case SpaceKind::P1xP1: return 2.0 * c.at(0) * c.at(1);
  }
  return 0;
}

double class_degree(const ModelSpace& space, const std::vector<double>& c) {
  switch (space.kind) {
    case SpaceKind::P1: return c.at(0);
    case SpaceKind::P2: return c.at(0);
    case SpaceKind::P1xP1: return (c.at(0) + c.at(1)) / std::sqrt(2.0);
  }
  return 0;
}

// --- grids --------------------------------------------------------------------

ChartCoords ChartGrid::coords(std::size_t idx) const {
  ChartCoords z{Complex(0), Complex(0)};
  int N = per_axis;
  if (rdims == 2) {
    int i1 = static_cast<int>(idx % N);
    int i0 = static_cast<int>(idx / N);
    z[0] = Complex(axis_value(i0), axis_value(i1));
  } else {
    int i3 = static_cast<int>(idx % N);
    idx /= N;
    int i2 = static_cast<int>(idx % N);
    idx /= N;
    int i1 = static_cast<int>(idx % N);
    int i0 = static_cast<int>(idx / N);
    z[0] = Complex(axis_value(i0), axis_value(i1));
    z[1] = Complex(axis_value(i2), axis_value(i3));
  }
  return z;
}

bool ChartGrid::locate(const ChartCoords& z, std::array<int, 4>& mi) const {
  double vals[4] = {z[0].real(), z[0].imag(), z[1].real(), z[1].imag()};
  for (int a = 0; a < rdims; ++a) {
    double t = (vals[a] + extent) / step - 0.5;
    int i = static_cast<int>(std::lround(t));
    if (i < 0 || i >= per_axis) return false;
    mi[a] = i;
  }
  return true;
}

std::size_t ChartGrid::flat(const std::array<int, 4>& mi) const {
  std::size_t idx = 0;
  for (int a = 0; a < rdims; ++a) idx = idx * per_axis + mi[a];
  return idx;
}

int default_resolution(SpaceKind k) {
  return k == SpaceKind::P1 ? 512 : 24;
}

namespace {

// Smooth partition of unity subordinate to the chart squares: the cutoff
// s_c = ((|den_c|/max - 1/extent)^+)^3 vanishes (to second order) exactly at
// the grid edge |z_i| = extent, so cell weights are C^2 in the sample point
// and midpoint quadrature converges at second order. P1xP1 charts factor.
double chart_cutoff_1f(const std::array<Complex, 4>& h, int b, int e, int den, double extent) {
  double m = 0;
  for (int v = b; v < e; ++v) m = std::max(m, std::abs(h[v]));
  double t = std::abs(h[den]) / m - 1.0 / extent;
  return t > 0 ? t * t * t : 0.0;
}

double pou_weight(const ModelSpace& space, const Point& p, int chart, double extent) {
  if (space.kind == SpaceKind::P1 || space.kind == SpaceKind::P2) {
    int n = space.nhomog;
    double s = chart_cutoff_1f(p.h, 0, n, chart, extent);
    if (s == 0) return 0;
    double tot = 0;
    for (int c = 0; c < n; ++c) tot += chart_cutoff_1f(p.h, 0, n, c, extent);
    return s / tot;
  }
  int i = chart / 2, j = chart % 2;
  double sx = chart_cutoff_1f(p.h, 0, 2, i, extent);
  double sy = chart_cutoff_1f(p.h, 2, 4, 2 + j, extent);
  if (sx == 0 || sy == 0) return 0;
  double tx = chart_cutoff_1f(p.h, 0, 2, 0, extent) + chart_cutoff_1f(p.h, 0, 2, 1, extent);
  double ty = chart_cutoff_1f(p.h, 2, 4, 2, extent) + chart_cutoff_1f(p.h, 2, 4, 3, extent);
  return (sx / tx) * (sy / ty);
}

}  // namespace

Grid build_grid(const ModelSpace& space, int per_axis) {
  Grid g;
  g.space = space;
  g.per_axis = per_axis;
  const double S = 1.25;
  int rdims = 2 * space.dim;
  std::size_t n = 1;
  for (int a = 0; a < rdims; ++a) n *= static_cast<std::size_t>(per_axis);
  for (int c = 0; c < space.chart_count; ++c) {
    ChartGrid cg;
    cg.chart_id = c;
    cg.per_axis = per_axis;
    cg.rdims = rdims;
    cg.extent = S;
    cg.step = 2.0 * S / per_axis;
    cg.weight.assign(n, 0.0);
    cg.owned.assign(n, 0);
    double cellvol = std::pow(cg.step, rdims);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b; idx < e; ++idx) {
        ChartCoords z = cg.coords(idx);
        Point p = point_from_chart(space, c, z);
        cg.owned[idx] = owner_chart(p) == c ? 1 : 0;
        double w = pou_weight(space, p, c, S);
        if (w > 0) cg.weight[idx] = volume_density(space, z) * cellvol * w;
      }
    });
    g.charts.push_back(std::move(cg));
  }
  double mass = 0;
  for (auto& cg : g.charts)
    mass += deterministic_sum(cg.size(), [&](std::size_t i) { return cg.weight[i]; });
  g.total_mass = mass;
  return g;
}

const Grid& get_grid(const ModelSpace& space, int per_axis) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<Grid>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_pair(static_cast<int>(space.kind), per_axis);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto g = std::make_unique<Grid>(build_grid(space, per_axis));
    it = cache.emplace(key, std::move(g)).first;
  }
  return *it->second;
}

const Grid& get_grid(const ModelSpace& space) {
  return get_grid(space, default_resolution(space.kind));
}

double integrate(const ModelSpace& space, const Grid& grid, const ScalarField& field,
                 double clamp_floor) {
  if (!(grid.space == space)) throw UsageError("grid/space mismatch");
  double total = 0;
  for (auto& cg : grid.charts) {
    total += deterministic_sum(cg.size(), [&](std::size_t i) {
      if (cg.weight[i] == 0.0) return 0.0;
      Point p = point_from_chart(space, cg.chart_id, cg.coords(i));
      double v = field(p);
      if (!std::isfinite(v)) v = v > 0 ? clamp_floor : -clamp_floor;
      v = std::clamp(v, -clamp_floor, clamp_floor);
      return cg.weight[i] * v;
    });
  }
  return total;
}

Point random_point(const ModelSpace& space, Rng& rng) {
  Point p;
  p.kind = space.kind;
  for (int v = 0; v < space.nhomog; ++v) p.h[v] = rng.cgaussian();
  p.normalize();
  return p;
}

VolumeEstimate volume_of_set(const ModelSpace& space, const std::function<bool(const Point&)>& pred,
                             std::size_t sample_budget, std::uint64_t seed) {
  if (sample_budget == 0) throw UsageError("volume_of_set: zero sample budget");
  double hits = deterministic_sum(sample_budget, [&](std::size_t i) {
    Rng r = Rng::stream(seed, i);
    Point p = random_point(space, r);
    return pred(p) ? 1.0 : 0.0;
  });
  VolumeEstimate ve;
  ve.samples = sample_budget;
  ve.value = hits / static_cast<double>(sample_budget);
  ve.std_error = std::sqrt(std::max(ve.value * (1.0 - ve.value), 0.0) /
                           static_cast<double>(sample_budget));
  return ve;
}

std::array<double, 9> embed(const Point& p, int* out_dim) {
  std::array<double, 9> e{};
  auto sphere = [](Complex a, Complex b, double* out) {
    double n = std::norm(a) + std::norm(b);
    Complex c = a * std::conj(b);
    out[0] = 2 * c.real() / n;
    out[1] = 2 * c.imag() / n;
    out[2] = (std::norm(a) - std::norm(b)) / n;
  };
  if (p.kind == SpaceKind::P1) {
    sphere(p.h[0], p.h[1], e.data());
    if (out_dim) *out_dim = 3;
    return e;
  }
  if (p.kind == SpaceKind::P1xP1) {
    sphere(p.h[0], p.h[1], e.data());
    sphere(p.h[2], p.h[3], e.data() + 3);
    if (out_dim) *out_dim = 6;
    return e;
  }
  // P2: entries of the rank-one projector h h^* / |h|^2.
  double n = std::norm(p.h[0]) + std::norm(p.h[1]) + std::norm(p.h[2]);
  int k = 0;
  for (int i = 0; i < 3; ++i) e[k++] = std::norm(p.h[i]) / n;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Complex c = p.h[i] * std::conj(p.h[j]) / n;
      e[k++] = M_SQRT2 * c.real();
      e[k++] = M_SQRT2 * c.imag();
    }
  if (out_dim) *out_dim = 9;
  return e;
}

}  // namespace greenlab
