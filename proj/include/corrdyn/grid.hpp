#pragma once

#include "corrdyn/sphere.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace corrdyn {

/// Equal-area latitude-longitude grid: R bands uniform in t = cos(polar angle), R longitudes.
/// Every node carries Fubini-Study weight 1 / R^2.
class SphereGrid {
  public:
    explicit SphereGrid(int resolution);

    int resolution() const { return r_; }
    std::size_t size() const { return static_cast<std::size_t>(r_) * r_; }
    double weight() const { return 1.0 / (static_cast<double>(r_) * r_); }
    const SpherePoint& node(std::size_t k) const { return nodes_[k]; }
    const std::vector<SpherePoint>& nodes() const { return nodes_; }

    struct Stencil {
        std::array<std::uint32_t, 4> index;
        std::array<double, 4> weight;
    };
    /// Bilinear weights in (t, longitude), periodic in longitude, clamped in t.
    Stencil stencil(const SpherePoint& p) const;

  private:
    int r_;
    std::vector<SpherePoint> nodes_;
};

enum class FieldKind { function, oneform };

/// Samples on a grid. For one-forms u dz the stored value is v = u (1 + |z|^2), whose
/// modulus is the pointwise Fubini-Study norm; near infinity u is recovered in the w chart.
struct GridField {
    std::shared_ptr<const SphereGrid> grid;
    FieldKind kind = FieldKind::function;
    std::vector<cplx> values;

    static GridField function(std::shared_ptr<const SphereGrid> grid,
                              const std::function<cplx(const SpherePoint&)>& h);
    /// The form u dz with u given in the affine chart at canonical chart-0 points and as
    /// the w-chart coefficient at canonical chart-1 points.
    static GridField oneform(std::shared_ptr<const SphereGrid> grid,
                             const std::function<cplx(const SpherePoint&)>& u);

    cplx interpolate(const SpherePoint& p) const;
    /// Coefficient of the form in the chart of p (p canonical).
    cplx oneform_coefficient(const SpherePoint& p) const;
    /// For forms (int |u|^2 dx dy)^(1/2) = (pi sum w |v|^2)^(1/2); for functions the L2(omega) norm.
    double l2_norm() const;
};

/// Multiplier turning a chart coefficient u at p into the stored value v.
cplx oneform_to_stored(const SpherePoint& p);

} // namespace corrdyn
