#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace gspde {

/// Geodesic distance on the flat torus [0,1)^m: coordinatewise wraparound,
/// then Euclidean length.
double periodic_distance(const double* x, const double* y, int m);
double periodic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Equidistant grid on the m-torus: k points per axis, nodes at
/// (j - 1/2) / k per coordinate, mesh h = 1/k.
struct TorusGrid {
  int m = 1;
  int k = 0;
  long n = 0;               // k^m
  Eigen::MatrixXd nodes;    // n x m, row-major over the last axis fastest
  double h = 0.0;           // n^{-1/m} = 1/k
};

TorusGrid build_grid(int m, int k);

/// n i.i.d. uniform samples on the torus; bit-reproducible from the seed.
struct PointCloud {
  int m = 1;
  long n = 0;
  Eigen::MatrixXd nodes;    // n x m, coordinates in [0, 1)
  std::uint64_t seed = 0;
};

PointCloud sample_point_cloud(int m, long n, std::uint64_t seed);

/// Uniform midpoint quadrature on the torus, the computational stand-in for
/// L^q integrals. Q^m points at ((i + 1/2)/Q, ...), common weight Q^{-m}.
struct QuadratureGrid {
  int m = 1;
  int q_per_axis = 0;
  long size = 0;            // Q^m
  Eigen::MatrixXd nodes;    // size x m
  double weight = 0.0;      // Q^{-m}
};

QuadratureGrid build_quadrature(int m, int q_per_axis);

/// Default quadrature resolutions: 16k per axis for grids, ceil(10 n^{1/m})
/// per axis for clouds.
int default_quadrature_axis_grid(int k);
int default_quadrature_axis_cloud(int m, long n);

/// Cell structure of a transport map T_n: each quadrature point is assigned
/// to one node, the preimage cells carry the quadrature mass.
struct TransportMap {
  long n_nodes = 0;
  std::vector<std::int32_t> cell_of;  // per quadrature point, 0-based node
  Eigen::VectorXd cell_mass;          // per node; sums to 1
  double epsilon = 0.0;               // sup_x d(x, T_n(x))
  bool exact_mass = false;            // grid construction: mass = 1/n exactly
  double max_mass_deviation = 0.0;    // max_j |cell_mass_j - 1/n|
};

/// Cube-partition transport map of the grid setting. cell_mass = 1/n exactly
/// and epsilon = (1/2) sqrt(m) n^{-1/m} in closed form.
TransportMap build_transport_map_grid(const TorusGrid& grid,
                                      const QuadratureGrid& quad);

/// Nearest-node (Voronoi) transport map for point clouds, ties broken toward
/// the lowest node index. Requires Q^m >= 10 n. Cell masses are quadrature
/// counts; the deviation from 1/n is recorded, not hidden.
TransportMap build_transport_map_voronoi(const PointCloud& cloud,
                                         const QuadratureGrid& quad);

/// One point per line, coordinates space-separated, 17 significant digits.
std::string point_cloud_to_text(const PointCloud& cloud);

}  // namespace gspde
