#include "corrdyn/cloud.hpp"
#include "corrdyn/common.hpp"
#include "corrdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace corrdyn {

PointCloudMeasure::PointCloudMeasure(std::vector<SpherePoint> points, std::vector<double> weights, CloudMeta meta)
    : points_(std::move(points)), weights_(std::move(weights)), meta_(meta)
{
    if (points_.size() != weights_.size())
        throw DomainError("cloud needs one weight per point");
    for (auto& p : points_)
        p = p.canonical();
    for (double w : weights_)
        if (!(w >= 0))
            throw DomainError("cloud weights must be nonnegative");
    const double m = total_mass();
    if (std::abs(m - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "cloud weights sum to " << m << ", expected 1";
        throw DomainError(msg.str());
    }
}

PointCloudMeasure PointCloudMeasure::dirac(const SpherePoint& a) { return PointCloudMeasure({a}, {1.0}); }

PointCloudMeasure PointCloudMeasure::uniform(std::vector<SpherePoint> points, CloudMeta meta)
{
    if (points.empty())
        throw DomainError("uniform cloud of no points");
    std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
    return PointCloudMeasure(std::move(points), std::move(w), meta);
}

PointCloudMeasure PointCloudMeasure::mixture(const PointCloudMeasure& a, const PointCloudMeasure& b, double t)
{
    if (!(t >= 0 && t <= 1))
        throw DomainError("mixture parameter outside [0, 1]");
    std::vector<SpherePoint> pts = a.points_;
    pts.insert(pts.end(), b.points_.begin(), b.points_.end());
    std::vector<double> w;
    w.reserve(pts.size());
    for (double v : a.weights_)
        w.push_back(t * v);
    for (double v : b.weights_)
        w.push_back((1 - t) * v);
    return PointCloudMeasure(std::move(pts), std::move(w));
}

double PointCloudMeasure::total_mass() const { return stable_sum(weights_); }

PointCloudMeasure PointCloudMeasure::compressed(double tol) const
{
    std::vector<std::size_t> order(points_.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Vec3> u(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k)
        u[k] = points_[k].unit_vector();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });

    std::vector<SpherePoint> pts;
    std::vector<double> w;
    std::vector<Vec3> rep;
    for (std::size_t k : order) {
        bool merged = false;
        // candidates within tol in the first coordinate sit at the end of the sorted output
        for (std::size_t j = rep.size(); j-- > 0;) {
            if (u[k][0] - rep[j][0] > tol)
                break;
            const double dx = u[k][0] - rep[j][0], dy = u[k][1] - rep[j][1], dz = u[k][2] - rep[j][2];
            if (std::sqrt(dx * dx + dy * dy + dz * dz) <= tol) {
                w[j] += weights_[k];
                merged = true;
                break;
            }
        }
        if (!merged) {
            pts.push_back(points_[k]);
            w.push_back(weights_[k]);
            rep.push_back(u[k]);
        }
    }
    return PointCloudMeasure(std::move(pts), std::move(w), meta_);
}

} // namespace corrdyn
