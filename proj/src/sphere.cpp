#include "corrdyn/sphere.hpp"

#include <cmath>
#include <limits>

namespace corrdyn {

SpherePoint SpherePoint::affine(cplx z)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        return infinity();
    return SpherePoint{0, z}.canonical();
}

SpherePoint SpherePoint::ratio(cplx num, cplx den)
{
    if (std::abs(num) <= std::abs(den))
        return {0, num / den};
    return {1, den / num};
}

SpherePoint SpherePoint::from_unit_vector(const Vec3& v)
{
    // stereographic projection from the north pole, choosing the stable side
    if (v[2] <= 0)
        return SpherePoint{0, cplx(v[0], v[1]) / (1.0 - v[2])}.canonical();
    return SpherePoint{1, cplx(v[0], -v[1]) / (1.0 + v[2])}.canonical();
}

SpherePoint SpherePoint::canonical() const
{
    if (std::abs(coord) <= 1.0)
        return *this;
    return {1 - chart, 1.0 / coord};
}

cplx SpherePoint::to_affine() const
{
    if (chart == 0)
        return coord;
    if (coord == cplx{}) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return 1.0 / coord;
}

Vec3 SpherePoint::unit_vector() const
{
    const double n2 = std::norm(coord);
    const double s = 1.0 / (1.0 + n2);
    if (chart == 0)
        return {2 * coord.real() * s, 2 * coord.imag() * s, (n2 - 1) * s};
    return {2 * coord.real() * s, -2 * coord.imag() * s, (1 - n2) * s};
}

double sphere_distance(const Vec3& a, const Vec3& b)
{
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    const double chord = std::sqrt(dx * dx + dy * dy + dz * dz);
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

double sphere_distance(const SpherePoint& a, const SpherePoint& b)
{
    return sphere_distance(a.unit_vector(), b.unit_vector());
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b)
{
    const Vec3 u = a.unit_vector(), v = b.unit_vector();
    const double dx = u[0] - v[0], dy = u[1] - v[1], dz = u[2] - v[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

} // namespace corrdyn
