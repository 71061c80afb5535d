#include "greenlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "greenlab/parallel.hpp"
#include "greenlab/rng.hpp"

namespace greenlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double gamma_f(const RationalMap& f, const std::vector<double>& theta, const Point& p) {
  Point q = p;
  q.normalize();
  const ModelSpace& s = f.space;
  // factor norms of the source point
  double logn[2] = {0, 0};
  if (s.kind == SpaceKind::P1xP1) {
    logn[0] = std::log(std::norm(q.h[0]) + std::norm(q.h[1]));
    logn[1] = std::log(std::norm(q.h[2]) + std::norm(q.h[3]));
  } else {
    double t = 0;
    for (int v = 0; v < s.nhomog; ++v) t += std::norm(q.h[v]);
    logn[0] = std::log(t);
  }
  double out = 0;
  std::size_t ngroups = f.deg.size();
  for (std::size_t i = 0; i < ngroups; ++i) {
    double fn = 0;
    if (s.kind == SpaceKind::P1xP1) {
      fn = std::norm(f.comps[2 * i].eval(q.h)) + std::norm(f.comps[2 * i + 1].eval(q.h));
    } else {
      for (auto& c : f.comps) fn += std::norm(c.eval(q.h));
    }
    double g = 0.5 * std::log(fn);
    for (std::size_t j = 0; j < f.deg[i].size(); ++j)
      g -= 0.5 * static_cast<double>(f.deg[i][j]) * logn[j];
    out += theta.at(i) * g;
  }
  return out;
}

GridPotential pullback(const GridPotential& phi, const RationalMap& f) {
  const ModelSpace& s = phi.space;
  if (!(s == f.space)) throw UsageError("pullback: space mismatch");
  // class <- f* class (transpose of the bidegree matrix)
  std::vector<double> theta2(phi.theta_coeffs.size(), 0.0);
  for (std::size_t j = 0; j < theta2.size(); ++j)
    for (std::size_t i = 0; i < f.deg.size(); ++i)
      theta2[j] += static_cast<double>(f.deg[i][j]) * phi.theta_coeffs[i];

  GridPotential out = make_zero_potential(s, theta2, phi.per_axis);
  const Grid& g = out.grid();
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        Point p = point_from_chart(s, cg.chart_id, cg.coords(i));
        try {
          Point q = evaluate(f, p);
          double v = value_at(phi, q) + gamma_f(f, phi.theta_coeffs, p);
          if (std::isfinite(v)) out.values[c][i] = v;
          else out.mask[c][i] = 1;
        } catch (const std::runtime_error&) {
          out.mask[c][i] = 1;  // indeterminacy or masked region of phi
        }
      }
    });
  }
  return out;
}

// --- Lelong numbers ----------------------------------------------------------

double lelong_number(const std::function<double(const Point&)>& u, const Point& p, double rmin,
                     double rmax) {
  Point q = p;
  q.normalize();
  int c = owner_chart(q);
  ChartCoords z0 = chart_coords(q, c);
  ModelSpace s = ModelSpace::make(q.kind);

  std::vector<double> xs, ys;
  for (double r = rmax; r >= rmin * (1 - 1e-12); r *= 0.5) {
    double sum = 0;
    int cnt = 0;
    int npts = s.dim == 1 ? 32 : 64;
    for (int t = 0; t < npts; ++t) {
      ChartCoords z = z0;
      if (s.dim == 1) {
        double a = 2 * M_PI * t / npts;
        z[0] += Complex(r * std::cos(a), r * std::sin(a));
      } else {
        // deterministic points on the sphere of radius r in C^2
        Rng rg = Rng::stream(0x1e1069, static_cast<std::uint64_t>(t));
        Complex a = rg.cgaussian(), b = rg.cgaussian();
        double n = std::sqrt(std::norm(a) + std::norm(b));
        z[0] += a / n * r;
        z[1] += b / n * r;
      }
      try {
        double v = u(point_from_chart(s, c, z));
        if (std::isfinite(v)) {
          sum += v;
          ++cnt;
        }
      } catch (const std::runtime_error&) {
      }
    }
    if (cnt * 2 >= npts) {
      xs.push_back(std::log(r));
      ys.push_back(sum / cnt);
    }
  }
  if (xs.size() < 3) throw ConvergenceError("lelong_number: too few usable radii");
  // least-squares slope
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return std::max(0.0, num / den);
}

double lelong_number(const GridPotential& gp, const Point& p) {
  // need >= 3 dyadic radii above the interpolation scale
  double step = gp.grid().charts[0].step;
  return lelong_number([&](const Point& q) { return value_at(gp, q); }, p, 3 * step, 0.5);
}

// --- Envelopes ---------------------------------------------------------------

NodeMask mask_from_predicate(const ModelSpace& space, int per_axis,
                             const std::function<bool(const Point&)>& pred) {
  if (per_axis <= 0) per_axis = envelope_default_resolution(space.kind);
  const Grid& g = get_grid(space, per_axis);
  NodeMask m;
  for (auto& cg : g.charts) {
    std::vector<std::uint8_t> v(cg.size(), 0);
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        v[i] = pred(point_from_chart(space, cg.chart_id, cg.coords(i))) ? 1 : 0;
    });
    m.push_back(std::move(v));
  }
  return m;
}

bool mask_empty(const NodeMask& m) {
  for (auto& v : m)
    for (auto b : v)
      if (b) return false;
  return true;
}

int envelope_default_resolution(SpaceKind k) {
  return k == SpaceKind::P1 ? 128 : 16;
}

namespace {

// 4-point sub-mean stencils along complex lines (lattice offsets per real
// axis). k=1: the coordinate circle at radius h and h*sqrt(2); k=2: the two
// axis planes and four diagonal complex lines.
const std::vector<std::array<std::array<int, 4>, 4>>& stencils(int dim) {
  static const std::vector<std::array<std::array<int, 4>, 4>> s1 = {
      {{{{1, 0, 0, 0}}, {{-1, 0, 0, 0}}, {{0, 1, 0, 0}}, {{0, -1, 0, 0}}}},
      {{{{1, 1, 0, 0}}, {{-1, -1, 0, 0}}, {{1, -1, 0, 0}}, {{-1, 1, 0, 0}}}},
  };
  static const std::vector<std::array<std::array<int, 4>, 4>> s2 = {
      {{{{1, 0, 0, 0}}, {{-1, 0, 0, 0}}, {{0, 1, 0, 0}}, {{0, -1, 0, 0}}}},
      {{{{0, 0, 1, 0}}, {{0, 0, -1, 0}}, {{0, 0, 0, 1}}, {{0, 0, 0, -1}}}},
      {{{{1, 0, 1, 0}}, {{-1, 0, -1, 0}}, {{0, 1, 0, 1}}, {{0, -1, 0, -1}}}},
      {{{{1, 0, -1, 0}}, {{-1, 0, 1, 0}}, {{0, 1, 0, -1}}, {{0, -1, 0, 1}}}},
      {{{{1, 0, 0, 1}}, {{-1, 0, 0, -1}}, {{0, 1, -1, 0}}, {{0, -1, 1, 0}}}},
      {{{{1, 0, 0, -1}}, {{-1, 0, 0, 1}}, {{0, 1, 1, 0}}, {{0, -1, -1, 0}}}},
  };
  return dim == 1 ? s1 : s2;
}

struct ChartIndexer {
  int N, rdims;
  std::array<int, 4> decode(std::size_t idx) const {
    std::array<int, 4> mi{0, 0, 0, 0};
    for (int a = rdims - 1; a >= 0; --a) {
      mi[a] = static_cast<int>(idx % N);
      idx /= N;
    }
    return mi;
  }
  // per-axis parity vector: stencil offsets are +-1 per axis, so every
  // neighbor of a node lands in a different color class
  int color_of(const std::array<int, 4>& mi) const {
    int s = 0;
    for (int a = 0; a < rdims; ++a) s |= (mi[a] & 1) << a;
    return s;
  }
};

}  // namespace

GridPotential psh_envelope(const ModelSpace& space, const std::vector<double>& theta,
                           const std::function<double(int, std::size_t)>& upper,
                           const GridPotential& init, const EnvelopeConfig& cfg,
                           const std::function<double(const Point&)>& pert) {
  GridPotential gp = init;
  const Grid& g = gp.grid();
  // cached reference potentials per chart (including any smooth perturbation)
  std::vector<std::vector<double>> tpot;
  for (auto& cg : g.charts) {
    std::vector<double> t(cg.size());
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        t[i] = theta_chart_potential(space, theta, cg.chart_id, cg.coords(i));
        if (pert) t[i] += pert(point_from_chart(space, cg.chart_id, cg.coords(i)));
      }
    });
    tpot.push_back(std::move(t));
  }
  const auto& sts = stencils(space.dim);
  // overshoot beyond ~1.4 makes the min-stencil iteration diverge, so stay
  // conservative; the multilevel warm starts carry the heavy lifting
  double omega = cfg.omega > 0 ? cfg.omega : 1.2;

  // Alternating-Schwarz relaxation: every unmasked node with a full stencil
  // relaxes locally; only the outermost ring of each chart (no complete
  // stencil) is refreshed by interpolation from the charts that cover it.
  double change = kInf;
  double best = kInf;
  int since_best = 0;
  int sweep = 0;
  for (; sweep < cfg.max_sweeps && change > cfg.tol; ++sweep) {
    // overshoot can cycle or diverge; decay it whenever progress stalls
    if (change < 0.99999 * best) {
      best = change;
      since_best = 0;
    } else if (++since_best >= 50 && omega > 1.0) {
      omega = 1.0 + 0.5 * (omega - 1.0);
      best = change;
      since_best = 0;
    }
    change = 0;
    std::vector<double> chart_change(g.charts.size(), 0.0);
    double ring_change = 0;
    for (int color = 0; color < (1 << (space.dim * 2)); ++color) {
      for (std::size_t c = 0; c < g.charts.size(); ++c) {
        const ChartGrid& cg = g.charts[c];
        ChartIndexer ix{cg.per_axis, cg.rdims};
        auto& phi = gp.values[c];
        const auto& tp = tpot[c];
        double local = parallel_max(cg.size(), [&](std::size_t idx) {
          if (gp.mask[c][idx]) return 0.0;
          auto mi = ix.decode(idx);
          if (ix.color_of(mi) != color) return 0.0;
          // edge nodes are owned by the ring refresh, never relaxed: a node on
          // the boundary in one axis may still have complete stencils in the
          // other factor and would fight the interpolated value forever
          for (int a = 0; a < cg.rdims; ++a)
            if (mi[a] == 0 || mi[a] == cg.per_axis - 1) return 0.0;
          double m = kInf;
          for (auto& st : sts) {
            double s = 0;
            bool ok = true;
            for (auto& off : st) {
              std::array<int, 4> nb = mi;
              for (int a = 0; a < cg.rdims; ++a) nb[a] += off[a];
              for (int a = 0; a < cg.rdims; ++a)
                if (nb[a] < 0 || nb[a] >= cg.per_axis) ok = false;
              if (!ok) break;
              std::size_t nidx = cg.flat(nb);
              if (gp.mask[c][nidx]) {
                ok = false;
                break;
              }
              s += tp[nidx] + phi[nidx];
            }
            if (ok) m = std::min(m, s / 4.0);
          }
          if (m == kInf) return 0.0;
          double target_phi = m - tp[idx];
          double up = upper(static_cast<int>(c), idx);
          double old = phi[idx];
          double next = old + omega * (target_phi - old);
          next = std::min(next, up);
          phi[idx] = next;
          return std::abs(next - old);
        });
        change = std::max(change, local);
        chart_change[c] = std::max(chart_change[c], local);
      }
    }
    // refresh chart-boundary rings from the interiors of covering charts
    for (std::size_t c = 0; c < g.charts.size(); ++c) {
      const ChartGrid& cg = g.charts[c];
      ChartIndexer ix{cg.per_axis, cg.rdims};
      std::vector<std::pair<std::size_t, double>> ring;
      for (std::size_t idx = 0; idx < cg.size(); ++idx) {
        auto mi = ix.decode(idx);
        bool edge = false;
        for (int a = 0; a < cg.rdims; ++a)
          if (mi[a] == 0 || mi[a] == cg.per_axis - 1) edge = true;
        if (!edge || gp.mask[c][idx]) continue;
        Point p = point_from_chart(space, cg.chart_id, cg.coords(idx));
        try {
          double v = value_at(gp, p);
          v = std::min(v, upper(static_cast<int>(c), idx));
          ring.emplace_back(idx, v);
        } catch (const DomainError&) {
        }
      }
      for (auto& [idx, v] : ring) {
        ring_change = std::max(ring_change, std::abs(v - gp.values[c][idx]));
        gp.values[c][idx] = v;
      }
    }
    change = std::max(change, ring_change);
    if (std::getenv("GL_ENV_TRACE") && sweep % 200 == 0) {
      std::fprintf(stderr, "[env] P=%d sweep=%d omega=%.3f change=%.3e ring=%.3e charts:",
                   g.charts[0].per_axis, sweep, omega, change, ring_change);
      for (double cc : chart_change) std::fprintf(stderr, " %.1e", cc);
      std::fprintf(stderr, "\n");
    }
  }
  if (cfg.sweeps_out) *cfg.sweeps_out = sweep;
  if (cfg.residual_out) *cfg.residual_out = change;
  if (change > cfg.tol)
    throw ConvergenceError("psh_envelope: relaxation did not reach tolerance");
  gp.norm = Normalization::raw;
  return gp;
}

namespace {

// Prolongation: sample a coarse solution onto a finer grid of the same space.
GridPotential prolong(const GridPotential& coarse, int fine_per_axis) {
  GridPotential fine = make_zero_potential(coarse.space, coarse.theta_coeffs, fine_per_axis);
  const Grid& g = fine.grid();
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        Point p = point_from_chart(fine.space, cg.chart_id, cg.coords(i));
        try {
          fine.values[c][i] = value_at(coarse, p);
        } catch (const DomainError&) {
          fine.mask[c][i] = 1;
        }
      }
    });
  }
  return fine;
}

// Multi-level envelope where the upper bound is given pointwise; upper_at
// also receives the resolution of the current level so obstacles can be
// rendered consistently on coarse grids.
GridPotential envelope_multilevel(const ModelSpace& space, const std::vector<double>& theta,
                                  const std::function<double(const Point&, int)>& upper_at,
                                  double init_value, const EnvelopeConfig& cfg,
                                  const std::function<double(const Point&)>& pert = {}) {
  int P = cfg.per_axis > 0 ? cfg.per_axis : envelope_default_resolution(space.kind);
  int minres = space.dim == 1 ? 16 : 12;
  std::vector<int> levels;
  for (int r = P; r >= minres && levels.size() < 3; r /= 2) levels.push_back(r);
  std::reverse(levels.begin(), levels.end());

  GridPotential sol;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    int res = levels[l];
    const Grid& g = get_grid(space, res);
    // per-node upper bounds at this level
    std::vector<std::vector<double>> up;
    for (auto& cg : g.charts) {
      std::vector<double> u(cg.size());
      parallel_for(cg.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
          u[i] = upper_at(point_from_chart(space, cg.chart_id, cg.coords(i)), res);
      });
      up.push_back(std::move(u));
    }
    GridPotential init =
        (l == 0) ? make_zero_potential(space, theta, res) : prolong(sol, res);
    for (std::size_t c = 0; c < g.charts.size(); ++c)
      for (std::size_t i = 0; i < g.charts[c].size(); ++i) {
        double u0 = (l == 0) ? std::min(init_value, up[c][i]) : std::min(init.values[c][i], up[c][i]);
        init.values[c][i] = std::isfinite(u0) ? u0 : init_value;
      }
    EnvelopeConfig lc = cfg;
    lc.per_axis = res;
    sol = psh_envelope(space, theta,
                       [&](int c, std::size_t i) { return up[static_cast<std::size_t>(c)][i]; },
                       init, lc, pert);
  }
  return sol;
}

bool is_nonneg_reference_multiple(const std::vector<double>& theta) {
  for (double c : theta)
    if (c < 0) return false;
  return true;
}

}  // namespace

GridPotential v_theta(const ModelSpace& space, const std::vector<double>& theta,
                      const EnvelopeConfig& cfg,
                      const std::function<double(const Point&)>& pert) {
  int P = cfg.per_axis > 0 ? cfg.per_axis : envelope_default_resolution(space.kind);
  if (!pert && is_nonneg_reference_multiple(theta))
    return make_zero_potential(space, theta, P);  // semipositive: sup is 0, exactly
  return envelope_multilevel(space, theta, [](const Point&, int) { return 0.0; }, 0.0, cfg,
                             pert);
}

ExtremalResult extremal_function(const ModelSpace& space, const NodeMask& K,
                                 const std::vector<double>& theta, const EnvelopeConfig& cfg) {
  if (mask_empty(K)) throw DomainError("extremal_function: empty node set");
  int P = cfg.per_axis > 0 ? cfg.per_axis : envelope_default_resolution(space.kind);
  const Grid& g = get_grid(space, P);
  if (K.size() != g.charts.size()) throw UsageError("extremal_function: mask/grid mismatch");
  // membership at arbitrary points = nearest-node lookup on the owner chart
  auto in_K = [&](const Point& p) {
    Point q = p;
    q.normalize();
    int c = owner_chart(q);
    const ChartGrid& cg = g.charts[static_cast<std::size_t>(c)];
    std::array<int, 4> mi{0, 0, 0, 0};
    if (!cg.locate(chart_coords(q, c), mi)) return false;
    return K[static_cast<std::size_t>(c)][cg.flat(mi)] != 0;
  };
  // node centers of K, for the coarse-level surrogate below
  std::vector<Point> kpts;
  double rk = kInf;  // half cell size of the fine grid, in chordal units
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    rk = std::min(rk, 0.5 * cg.step);
    for (std::size_t i = 0; i < cg.size(); ++i)
      if (K[c][i]) kpts.push_back(point_from_chart(space, cg.chart_id, cg.coords(i)));
  }
  // Coarse levels can't see a thin K at all (an unbounded problem that never
  // converges), so they relax under the analytic profile of a point obstacle,
  // min_k log(max(d_k, r)/r) with d_k the distance to the k-th node of K.
  // That pins the far field already at the coarse levels; the finest level
  // imposes the exact obstacle.
  auto upper_at = [&](const Point& p, int res) -> double {
    if (in_K(p)) return 0.0;
    if (res >= P) return kInf;
    double best = kInf;
    for (const Point& k : kpts) {
      double d = p.dist(k);
      best = std::min(best, std::log(std::max(d, rk) / rk));
    }
    return best;
  };
  const double kCeil = 30.0;  // upper start; valid while sup V_K stays below it
  ExtremalResult res;
  res.v = envelope_multilevel(space, theta, upper_at, kCeil, cfg);
  double M = -kInf;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    for (std::size_t i = 0; i < cg.size(); ++i)
      if (cg.owned[i] && !res.v.mask[c][i]) M = std::max(M, res.v.values[c][i]);
  }
  res.M = M;
  return res;
}

double capacity(const ModelSpace& space, const NodeMask& B, const std::vector<double>& theta,
                const EnvelopeConfig& cfg) {
  if (mask_empty(B)) return 0.0;
  double vol = class_volume(space, theta);
  ExtremalResult ex = extremal_function(space, B, theta, cfg);
  double lemma_bound = vol / std::pow(std::max(ex.M, 1.0), space.dim);

  double cap = lemma_bound;
  if (space.dim == 1) {
    // bang-bang sup via the relative extremal function of B
    int P = cfg.per_axis > 0 ? cfg.per_axis : envelope_default_resolution(space.kind);
    GridPotential V = v_theta(space, theta, cfg);
    const Grid& g = get_grid(space, P);
    auto vb = [&](const Point& p) { return value_at(V, p); };
    auto in_B = [&](const Point& p) {
      Point q = p;
      q.normalize();
      int c = owner_chart(q);
      const ChartGrid& cg = g.charts[static_cast<std::size_t>(c)];
      std::array<int, 4> mi{0, 0, 0, 0};
      if (!cg.locate(chart_coords(q, c), mi)) return false;
      return B[static_cast<std::size_t>(c)][cg.flat(mi)] != 0;
    };
    GridPotential u = envelope_multilevel(
        space, theta, [&](const Point& p, int) { return in_B(p) ? vb(p) - 1.0 : vb(p); }, 0.0,
        cfg);
    auto masses = ddc_masses(u);
    double total = 0;
    for (std::size_t c = 0; c < g.charts.size(); ++c) {
      const ChartGrid& cg = g.charts[c];
      total += deterministic_sum(cg.size(), [&](std::size_t i) {
        if (!cg.owned[i] || !B[c][i]) return 0.0;
        return std::max(masses[c][i], 0.0);
      });
    }
    cap = std::max(cap, total);
  }
  return std::clamp(cap, lemma_bound, vol);
}

double chi_energy(const GridPotential& phi, const GridPotential& v, const ChiSpec& chi) {
  if (phi.space.dim != 1) throw UsageError("chi_energy: curves only");
  if (!(phi.space == v.space) || phi.per_axis != v.per_axis)
    throw UsageError("chi_energy: incompatible grids");
  auto mphi = ddc_masses(phi);
  auto mv = ddc_masses(v);
  const Grid& g = phi.grid();
  double e = 0;
  for (std::size_t c = 0; c < g.charts.size(); ++c) {
    const ChartGrid& cg = g.charts[c];
    e += deterministic_sum(cg.size(), [&](std::size_t i) {
      if (!cg.owned[i] || phi.mask[c][i] || v.mask[c][i]) return 0.0;
      double t = std::min(phi.values[c][i] - v.values[c][i], 0.0);
      double w = std::pow(-t, chi.p);  // (-chi)(t)
      return 0.5 * w * (std::max(mphi[c][i], 0.0) + std::max(mv[c][i], 0.0));
    });
  }
  return e;
}

}  // namespace greenlab
