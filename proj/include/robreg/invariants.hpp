#pragma once

#include <utility>
#include <vector>

#include "robreg/core.hpp"

namespace robreg {

enum class TopologyKind { complete, chain, custom };

struct GraphTopology {
  TopologyKind kind = TopologyKind::complete;
  std::vector<std::pair<int, int>> edges;

  static GraphTopology complete(int n);
  static GraphTopology chain(int n);
  // Validates i < j, range and uniqueness.
  static GraphTopology custom(int n, std::vector<std::pair<int, int>> edges);
};

struct Tim {
  int i = 0, j = 0;
  Vec3 a_bar = Vec3::Zero();
  Vec3 b_bar = Vec3::Zero();
  double beta_bar = 0.0;
};

struct Trim {
  int i = 0, j = 0;
  int tim_index = 0;
  double s_meas = 0.0;
  double alpha = 0.0;
};

struct TrimBuild {
  std::vector<Trim> trims;
  std::vector<int> skipped;  // TIM indices with a degenerate source difference
};

struct MeasurementGraph {
  int n_vertices = 0;
  GraphTopology topology;
  std::vector<Tim> tims;
  std::vector<Trim> trims;
  std::vector<int> degenerate_tims;
};

std::vector<Tim> build_tims(const CorrespondenceSet& c, const GraphTopology& g);

// eps_degenerate is an absolute length; see degenerate_threshold().
TrimBuild build_trims(const std::vector<Tim>& tims, double eps_degenerate);
double degenerate_threshold(const std::vector<Point3>& source);

MeasurementGraph build_measurement_graph(const CorrespondenceSet& c, const GraphTopology& g);

}  // namespace robreg
