#include "gspde/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "gspde/rng.hpp"

namespace gspde {

double periodic_distance(const double* x, const double* y, int m) {
  double acc = 0.0;
  for (int d = 0; d < m; ++d) {
    double diff = std::fabs(x[d] - y[d]);
    diff = std::min(diff, 1.0 - diff);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

double periodic_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("periodic_distance: dimension mismatch");
  }
  return periodic_distance(x.data(), y.data(), static_cast<int>(x.size()));
}

namespace {

long checked_power(int base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<long>::max() / base) {
      throw std::invalid_argument("grid size overflows");
    }
    r *= base;
  }
  return r;
}

// Lexicographic multi-index enumeration, last axis fastest.
Eigen::MatrixXd tensor_points(int m, int k, double offset) {
  const long n = checked_power(k, m);
  Eigen::MatrixXd pts(n, m);
  for (long idx = 0; idx < n; ++idx) {
    long rest = idx;
    for (int d = m - 1; d >= 0; --d) {
      const long j = rest % k;
      rest /= k;
      pts(idx, d) = (static_cast<double>(j) + offset) / k;
    }
  }
  return pts;
}

}  // namespace

TorusGrid build_grid(int m, int k) {
  if (m < 1) throw std::invalid_argument("build_grid: m must be >= 1");
  if (k < 2) throw std::invalid_argument("build_grid: k must be >= 2");
  TorusGrid g;
  g.m = m;
  g.k = k;
  g.n = checked_power(k, m);
  g.nodes = tensor_points(m, k, 0.5);
  g.h = 1.0 / k;
  return g;
}

PointCloud sample_point_cloud(int m, long n, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_point_cloud: m must be >= 1");
  if (n < 2) throw std::invalid_argument("sample_point_cloud: n must be >= 2");
  PointCloud c;
  c.m = m;
  c.n = n;
  c.seed = seed;
  c.nodes.resize(n, m);
  const CounterRng rng(seed);
  for (long i = 0; i < n; ++i) {
    for (int d = 0; d < m; ++d) {
      // one uniform per (point, coordinate); shift to [0, 1)
      const auto u = rng.uniform_pair(static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(d));
      double v = u[0];
      if (v >= 1.0) v = 0.0;
      c.nodes(i, d) = v;
    }
  }
  return c;
}

QuadratureGrid build_quadrature(int m, int q_per_axis) {
  if (m < 1 || q_per_axis < 1) {
    throw std::invalid_argument("build_quadrature: bad resolution");
  }
  QuadratureGrid q;
  q.m = m;
  q.q_per_axis = q_per_axis;
  q.size = checked_power(q_per_axis, m);
  q.nodes = tensor_points(m, q_per_axis, 0.5);
  q.weight = 1.0 / static_cast<double>(q.size);
  return q;
}

int default_quadrature_axis_grid(int k) { return 16 * k; }

int default_quadrature_axis_cloud(int m, long n) {
  const double q = 10.0 * std::pow(static_cast<double>(n), 1.0 / m);
  return static_cast<int>(std::ceil(q));
}

TransportMap build_transport_map_grid(const TorusGrid& grid,
                                      const QuadratureGrid& quad) {
  if (grid.m != quad.m) {
    throw std::invalid_argument("transport map: dimension mismatch");
  }
  TransportMap map;
  map.n_nodes = grid.n;
  map.cell_of.resize(quad.size);
  const int m = grid.m;
  const int k = grid.k;
  for (long p = 0; p < quad.size; ++p) {
    long idx = 0;
    for (int d = 0; d < m; ++d) {
      int j = static_cast<int>(quad.nodes(p, d) * k);
      if (j >= k) j = k - 1;
      idx = idx * k + j;
    }
    map.cell_of[p] = static_cast<std::int32_t>(idx);
  }
  // Half-open cubes partition the torus exactly; each carries mass 1/n.
  map.cell_mass = Eigen::VectorXd::Constant(grid.n, 1.0 / grid.n);
  map.exact_mass = true;
  map.max_mass_deviation = 0.0;
  map.epsilon = 0.5 * std::sqrt(static_cast<double>(m)) *
                std::pow(static_cast<double>(grid.n), -1.0 / m);
  return map;
}

TransportMap build_transport_map_voronoi(const PointCloud& cloud,
                                         const QuadratureGrid& quad) {
  if (cloud.m != quad.m) {
    throw std::invalid_argument("transport map: dimension mismatch");
  }
  if (quad.size < 10 * cloud.n) {
    throw std::invalid_argument(
        "transport map: quadrature too coarse, need Q^m >= 10 n");
  }
  TransportMap map;
  map.n_nodes = cloud.n;
  map.cell_of.resize(quad.size);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(cloud.n);
  double eps = 0.0;
  const int m = cloud.m;
  for (long p = 0; p < quad.size; ++p) {
    double best = std::numeric_limits<double>::infinity();
    long arg = 0;
    for (long i = 0; i < cloud.n; ++i) {
      const double d =
          periodic_distance(&quad.nodes(p, 0), &cloud.nodes(i, 0), m);
      if (d < best) {  // strict: ties stay with the lowest index
        best = d;
        arg = i;
      }
    }
    map.cell_of[p] = static_cast<std::int32_t>(arg);
    counts[arg] += 1.0;
    eps = std::max(eps, best);
  }
  map.cell_mass = counts / static_cast<double>(quad.size);
  map.epsilon = eps;
  map.exact_mass = false;
  map.max_mass_deviation =
      (map.cell_mass.array() - 1.0 / cloud.n).abs().maxCoeff();
  return map;
}

std::string point_cloud_to_text(const PointCloud& cloud) {
  std::string out;
  char buf[64];
  for (long i = 0; i < cloud.n; ++i) {
    for (int d = 0; d < cloud.m; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", cloud.nodes(i, d));
      if (d > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace gspde
