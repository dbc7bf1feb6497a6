#include "corrdyn/grid.hpp"
#include "corrdyn/common.hpp"
#include "corrdyn/parallel.hpp"

#include <cmath>
#include <numbers>

namespace corrdyn {

SphereGrid::SphereGrid(int resolution) : r_(resolution)
{
    if (resolution < 2)
        throw DomainError("grid resolution must be at least 2");
    nodes_.resize(size());
    for (int i = 0; i < r_; ++i) {
        const double t = -1.0 + (i + 0.5) * 2.0 / r_;
        const double s = std::sqrt(1.0 - t * t);
        for (int j = 0; j < r_; ++j) {
            const double phi = (j + 0.5) * 2.0 * std::numbers::pi / r_;
            nodes_[static_cast<std::size_t>(i) * r_ + j] =
                SpherePoint::from_unit_vector({s * std::cos(phi), s * std::sin(phi), t});
        }
    }
}

SphereGrid::Stencil SphereGrid::stencil(const SpherePoint& p) const
{
    const Vec3 v = p.unit_vector();
    double phi = std::atan2(v[1], v[0]);
    if (phi < 0)
        phi += 2.0 * std::numbers::pi;
    const double b = (v[2] + 1.0) * r_ / 2.0 - 0.5;
    int b0 = static_cast<int>(std::floor(b));
    b0 = std::clamp(b0, 0, r_ - 2);
    const double fb = std::clamp(b - b0, 0.0, 1.0);
    const double l = phi * r_ / (2.0 * std::numbers::pi) - 0.5;
    const double lf = std::floor(l);
    const double fl = l - lf;
    int l0 = static_cast<int>(lf) % r_;
    if (l0 < 0)
        l0 += r_;
    const int l1 = (l0 + 1) % r_;
    auto idx = [&](int bi, int li) { return static_cast<std::uint32_t>(bi * r_ + li); };
    return {{idx(b0, l0), idx(b0, l1), idx(b0 + 1, l0), idx(b0 + 1, l1)},
            {(1 - fb) * (1 - fl), (1 - fb) * fl, fb * (1 - fl), fb * fl}};
}

cplx oneform_to_stored(const SpherePoint& p)
{
    const double g = 1.0 + std::norm(p.coord);
    if (p.chart == 0)
        return g;
    if (p.coord == cplx{})
        return -g;
    return -g * p.coord / std::conj(p.coord);
}

GridField GridField::function(std::shared_ptr<const SphereGrid> grid,
                              const std::function<cplx(const SpherePoint&)>& h)
{
    GridField f{grid, FieldKind::function, std::vector<cplx>(grid->size())};
    parallel_for(grid->size(), [&](std::size_t k) { f.values[k] = h(grid->node(k)); });
    return f;
}

GridField GridField::oneform(std::shared_ptr<const SphereGrid> grid,
                             const std::function<cplx(const SpherePoint&)>& u)
{
    GridField f{grid, FieldKind::oneform, std::vector<cplx>(grid->size())};
    parallel_for(grid->size(), [&](std::size_t k) {
        const SpherePoint& p = grid->node(k);
        f.values[k] = u(p) * oneform_to_stored(p);
    });
    return f;
}

cplx GridField::interpolate(const SpherePoint& p) const
{
    const auto s = grid->stencil(p);
    cplx acc{};
    for (int k = 0; k < 4; ++k)
        acc += s.weight[k] * values[s.index[k]];
    return acc;
}

cplx GridField::oneform_coefficient(const SpherePoint& p) const
{
    const SpherePoint q = p.canonical();
    return interpolate(q) / oneform_to_stored(q);
}

double GridField::l2_norm() const
{
    std::vector<double> sq(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        sq[k] = std::norm(values[k]);
    const double s = stable_sum(sq) * grid->weight();
    return std::sqrt(kind == FieldKind::oneform ? std::numbers::pi * s : s);
}

} // namespace corrdyn
