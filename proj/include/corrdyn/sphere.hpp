#pragma once

#include "corrdyn/common.hpp"

#include <array>

namespace corrdyn {

using Vec3 = std::array<double, 3>;

/// A point of the Riemann sphere in a two-chart atlas.
///
/// Chart 0 holds the affine coordinate z, chart 1 holds w = 1/z. Canonical
/// points keep |coordinate| <= 1, so infinity is (chart 1, w = 0).
struct SpherePoint {
    int chart = 0;
    cplx coord{};

    static SpherePoint affine(cplx z);
    static SpherePoint infinity() { return {1, cplx{}}; }
    /// The point num/den, computed without overflow.
    static SpherePoint ratio(cplx num, cplx den);
    static SpherePoint from_unit_vector(const Vec3& v);

    SpherePoint canonical() const;
    bool is_infinity() const { return chart == 1 && coord == cplx{}; }
    /// Affine coordinate; infinite components for the point at infinity.
    cplx to_affine() const;
    /// Point on the unit sphere, infinity at the north pole (0, 0, 1).
    Vec3 unit_vector() const;

    bool operator==(const SpherePoint&) const = default;
};

/// Great-circle distance on the unit sphere, in [0, pi].
double sphere_distance(const SpherePoint& a, const SpherePoint& b);
double sphere_distance(const Vec3& a, const Vec3& b);

/// Euclidean distance in R^3 between the unit-sphere images, in [0, 2].
double chordal_distance(const SpherePoint& a, const SpherePoint& b);

} // namespace corrdyn
