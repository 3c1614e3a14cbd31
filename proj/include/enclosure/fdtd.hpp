#pragma once

#include "enclosure/geometry.hpp"
#include "enclosure/quadrature.hpp"
#include "enclosure/source.hpp"
#include "enclosure/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace enclosure {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  Vec3 size() const { return hi - lo; }
  bool contains(const Box& other) const {
    return (other.lo - lo).minCoeff() >= 0 && (hi - other.hi).minCoeff() >= 0;
  }
};

enum class OuterBoundary { Causal, Mur };

struct GridSpec {
  double h = 0.05;
  double dt = 0;  // 0: largest step allowed by cfl, shrunk so that T is a whole number of steps
  double cfl = 0.5;
  std::optional<Box> extent;  // default: causal_extent
  OuterBoundary boundary = OuterBoundary::Causal;
  bool allow_coarse = false;  // skip the resolution guard (smoke runs)
  int record_n_r = 6, record_n_theta = 8, record_n_phi = 8;
  int source_depth = 6;  // octree depth for partial-cell volume fractions
};

// Box centered at p whose walls are further than c T / 2 + eta (+ margin) from p, so that
// nothing reflected at the walls reaches B before T.
Box causal_extent(const SourceSpec& spec, const Obstacle& obstacle, double margin = 0.15);

// Staggered Yee fields on a node lattice origin + h * (i, j, k). Every component array has
// nx * ny * nz entries indexed (i * ny + j) * nz + k; Ex(i, j, k) sits at (i + 1/2, j, k),
// Hx(i, j, k) at (i, j + 1/2, k + 1/2), and so on.
struct SimState {
  struct Weighted {
    std::int64_t index;
    double weight;
  };

  int nx = 0, ny = 0, nz = 0;
  Vec3 origin = Vec3::Zero();
  double h = 0, dt = 0;
  int steps = 0;  // total step count reaching T
  int step_index = 0;
  double eps = 1, mu = 1;
  OuterBoundary boundary = OuterBoundary::Causal;
  std::vector<double> ex, ey, ez, hx, hy, hz;
  std::vector<std::int64_t> pec[3];
  std::vector<Weighted> source[3];  // chi_B volume fraction times the matching component of a
  std::int64_t masked_nodes = 0;
  double source_scale = 0;
  struct MurTap {
    int component;
    std::int64_t boundary, neighbor;
  };
  std::vector<MurTap> mur_taps;
  std::vector<double> mur_old;  // previous boundary and neighbor values, interleaved

  std::int64_t index(int i, int j, int k) const { return (static_cast<std::int64_t>(i) * ny + j) * nz + k; }
  double time() const { return step_index * dt; }
  std::size_t masked_edge_count() const { return pec[0].size() + pec[1].size() + pec[2].size(); }
  Vec3 node(int i, int j, int k) const { return origin + h * Vec3(i, j, k); }
  // Trilinear interpolation of the staggered E at x.
  Vec3 sample_E(const Vec3& x) const;
  double energy() const;
};

SimState build_sim(const Obstacle& obstacle, const SourceSpec& spec, const GridSpec& grid);

// One leapfrog step t_n -> t_{n+1}: H half-step then E with the current sampled at t_{n+1/2}.
void step(SimState& state, const SourceSpec& spec);

struct FieldRecord {
  SourceSpec spec;
  std::string obstacle;
  double h = 0, dt = 0, cfl = 0;
  Box extent;
  int steps = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  // (steps + 1) x nodes, row n holds a.E(t_n); row 0 is zero.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> samples;
  // Same record from an obstacle-free run on the identical grid, when requested.
  std::optional<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> reference;

  Eigen::Index node_count() const { return samples.cols(); }
};

struct RunOptions {
  bool with_reference = true;
  bool verbose = false;
};

FieldRecord run(const Obstacle& obstacle, const SourceSpec& spec, const GridSpec& grid, const RunOptions& options = {});

// Trilinear stencils of a.E at fixed points; rows are (point, corner) pairs.
class Recorder {
 public:
  Recorder(const SimState& state, const std::vector<Vec3>& points, const Vec3& a);
  void record(const SimState& state, double* row) const;

 private:
  struct Tap {
    int component;
    std::int64_t index;
    double weight;
  };
  std::vector<std::vector<Tap>> taps_;
};

int configured_threads();

}  // namespace enclosure
