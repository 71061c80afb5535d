#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenlab {

using Complex = std::complex<double>;

enum class SpaceKind { P1, P2, P1xP1 };

std::string to_string(SpaceKind k);
SpaceKind space_kind_from_string(const std::string& s);

struct ModelSpace {
  SpaceKind kind;
  int dim;         // complex dimension k
  int h11_rank;    // 1, 1, 2
  int nhomog;      // homogeneous coordinates: 2, 3, 4
  int nfactors;    // 1, 1, 2
  int chart_count; // 2, 3, 4

  static ModelSpace make(SpaceKind k);
  bool operator==(const ModelSpace& o) const { return kind == o.kind; }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndeterminacyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Point in homogeneous coordinates, sup-norm 1 per factor after normalize().
struct Point {
  SpaceKind kind;
  std::array<Complex, 4> h{};

  void normalize();
  /// Chordal-type distance via the Euclidean embedding.
  double dist(const Point& o) const;
};

using ChartCoords = std::array<Complex, 2>;  // only first `dim` entries used

// --- Chart atlas -----------------------------------------------------------

Point point_from_chart(const ModelSpace& space, int chart, const ChartCoords& z);
ChartCoords chart_coords(const Point& p, int chart);         // throws DomainError off-domain
bool chart_contains(const Point& p, int chart, double margin = 1e-9);
int owner_chart(const Point& p);                             // closest-chart rule, ties to lowest id

// --- Reference forms -------------------------------------------------------

/// Local potential of the h11 generator `gen` in the given chart.
double generator_potential(const ModelSpace& space, int gen, int chart, const ChartCoords& z);

/// Coefficients of the volume-normalized reference Kähler form in the
/// generator basis (integral of omega^k is 1).
std::vector<double> reference_class(const ModelSpace& space);

/// Local potential of the normalized reference form (omega = dd^c psi).
double fs_potential(const ModelSpace& space, int chart, const ChartCoords& z);

/// Density of dV = omega^k w.r.t. Lebesgue measure in any chart.
double volume_density(const ModelSpace& space, const ChartCoords& z);

/// vol(class) = <alpha^k> for class coefficients in the generator basis.
double class_volume(const ModelSpace& space, const std::vector<double>& coeffs);

/// Pairing <alpha, omega_ref^{k-1}> used for the Perron normalization.
double class_degree(const ModelSpace& space, const std::vector<double>& coeffs);

// --- Grids ------------------------------------------------------------------

struct ChartGrid {
  int chart_id = 0;
  int per_axis = 0;   // nodes per real axis
  int rdims = 2;      // 2*k
  double extent = 0;  // chart square [-extent, extent]^rdims
  double step = 0;
  std::vector<double> weight;  // dV mass of the owned part of the cell
  std::vector<std::uint8_t> owned;

  std::size_t size() const { return weight.size(); }
  ChartCoords coords(std::size_t idx) const;
  double axis_value(int i) const { return -extent + (i + 0.5) * step; }
  /// Nearest-node multi-index of chart coordinates; false if outside the square.
  bool locate(const ChartCoords& z, std::array<int, 4>& mi) const;
  std::size_t flat(const std::array<int, 4>& mi) const;
};

struct Grid {
  ModelSpace space;
  int per_axis = 0;
  std::vector<ChartGrid> charts;
  double total_mass = 0;
};

int default_resolution(SpaceKind k);
Grid build_grid(const ModelSpace& space, int per_axis);
/// Cached grid (built once per (kind, resolution)).
const Grid& get_grid(const ModelSpace& space, int per_axis);
const Grid& get_grid(const ModelSpace& space);  // default resolution

using ScalarField = std::function<double(const Point&)>;

/// Integral of field * omega^k over X by closest-chart quadrature.
/// Non-finite field values are clamped to +-clamp_floor magnitude.
double integrate(const ModelSpace& space, const Grid& grid, const ScalarField& field,
                 double clamp_floor = 1e6);

struct VolumeEstimate {
  double value = 0;
  double std_error = 0;
  std::size_t samples = 0;
};

/// Monte Carlo volume of {pred}, deterministic for a fixed seed.
VolumeEstimate volume_of_set(const ModelSpace& space, const std::function<bool(const Point&)>& pred,
                             std::size_t sample_budget, std::uint64_t seed);

/// FS-uniform random point.
Point random_point(const ModelSpace& space, class Rng& rng);

/// Isometric-type Euclidean embedding (P1: sphere in R^3, P2: projector in
/// R^9, P1xP1: product of spheres in R^6); used by the dual-Lipschitz metric
/// and by chart-distance measurements.
std::array<double, 9> embed(const Point& p, int* out_dim);

}  // namespace greenlab
