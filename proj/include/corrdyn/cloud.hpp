#pragma once

#include "corrdyn/sphere.hpp"

#include <cstdint>
#include <vector>

namespace corrdyn {

struct CloudMeta {
    std::uint64_t seed = 0;
    int n = 0;
    std::uint64_t correspondence_hash = 0;
    bool monte_carlo = false;
    bool operator==(const CloudMeta&) const = default;
};

/// Weighted atoms on the sphere, total weight 1. Points are kept canonical.
class PointCloudMeasure {
  public:
    PointCloudMeasure() = default;
    /// Weights must be nonnegative with sum 1 +- 1e-9; points are canonicalized.
    PointCloudMeasure(std::vector<SpherePoint> points, std::vector<double> weights, CloudMeta meta = {});
    static PointCloudMeasure dirac(const SpherePoint& a);
    /// Equal weights summing to 1.
    static PointCloudMeasure uniform(std::vector<SpherePoint> points, CloudMeta meta = {});
    /// t * a + (1 - t) * b.
    static PointCloudMeasure mixture(const PointCloudMeasure& a, const PointCloudMeasure& b, double t);

    std::size_t size() const { return points_.size(); }
    const std::vector<SpherePoint>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const CloudMeta& meta() const { return meta_; }
    CloudMeta& meta() { return meta_; }
    double total_mass() const;

    /// Merges atoms closer than tol in chordal distance (coincident atoms for tol = 0).
    PointCloudMeasure compressed(double tol = 0) const;

    bool operator==(const PointCloudMeasure&) const = default;

  private:
    std::vector<SpherePoint> points_;
    std::vector<double> weights_;
    CloudMeta meta_;
};

} // namespace corrdyn
