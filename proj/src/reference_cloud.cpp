#include "robreg/synthetic.hpp"

namespace robreg {

// Same points as data/reference_cloud.ply.
const std::vector<Point3>& reference_cloud() {
  static const std::vector<Point3> cloud = [] {
    const double xyz[40][3] = {
    {0.048912, 0.286396, 0.405340},
    {0.467917, 0.365223, 0.585294},
    {0.178528, 0.399205, 0.035187},
    {0.548967, 0.163176, 0.568192},
    {0.212934, 0.377194, 0.003583},
    {0.108802, 0.324226, 0.471963},
    {0.642109, 0.000000, 0.342553},
    {0.629480, 0.482105, 0.053850},
    {0.836344, 0.418135, 0.251398},
    {0.452231, 0.039883, 0.039884},
    {0.850812, 0.332105, 0.153458},
    {0.040466, 0.171113, 0.202458},
    {0.168571, 0.065695, 0.401636},
    {0.396228, 0.026172, 0.060164},
    {0.376863, 0.461822, 0.000000},
    {0.737609, 0.209850, 0.025618},
    {0.591590, 0.571499, 0.217203},
    {0.838933, 0.134827, 0.260199},
    {0.771201, 0.402083, 0.085932},
    {0.841415, 0.169949, 0.356758},
    {0.846483, 0.225472, 0.389620},
    {0.381453, 0.514594, 0.051027},
    {0.739540, 0.353338, 0.685242},
    {0.828579, 0.488911, 0.534758},
    {1.000000, 0.403207, 0.591838},
    {0.985842, 0.198388, 0.557407},
    {0.725992, 0.192227, 0.606979},
    {0.816056, 0.486391, 0.566160},
    {0.799053, 0.468316, 0.616901},
    {0.863535, 0.316985, 0.717896},
    {0.807458, 0.472558, 0.611589},
    {0.709815, 0.383717, 0.647630},
    {0.895929, 0.252446, 0.985985},
    {0.875164, 0.266091, 0.873201},
    {0.899778, 0.210566, 0.940434},
    {0.908539, 0.218948, 0.956381},
    {0.843025, 0.418170, 0.915255},
    {0.815577, 0.395193, 0.702106},
    {0.828634, 0.380386, 0.967187},
    {0.000000, 0.289892, 0.261641},
    };
    std::vector<Point3> out;
    for (const auto& p : xyz) out.emplace_back(p[0], p[1], p[2]);
    return out;
  }();
  return cloud;
}

}  // namespace robreg
