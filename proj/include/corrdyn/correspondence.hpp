#pragma once

#include "corrdyn/algebra.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace corrdyn {

/// An irreducible-by-declaration factor of the graph with its multiplicity.
struct Component {
    BiPoly poly;
    int multiplicity = 1;
    bool operator==(const Component&) const = default;
};

struct CompositionReport;

/// A correspondence on the Riemann sphere given by the affine equation P(x, y) = 0.
///
/// d1 = deg_y P counts the images of a generic point, d2 = deg_x P its preimages.
class Correspondence {
  public:
    /// Validates that no factor of P depends on a single variable.
    static Correspondence from_bipoly(const BiPoly& p, const NumericPolicy& policy = {});
    /// The cycle sum m_k [P_k = 0]; P is the product with multiplicities.
    static Correspondence from_components(std::vector<Component> components,
                                          const NumericPolicy& policy = {});

    const BiPoly& poly() const { return poly_; }
    /// Product of the distinct components, used where a reduced equation is needed.
    const BiPoly& reduced() const { return reduced_; }
    const std::vector<Component>& components() const { return components_; }
    int d1() const { return poly_.deg_y(); }
    int d2() const { return poly_.deg_x(); }
    bool is_adjoint() const { return adjoint_; }

    /// The d2 roots of P(., y), repeated by multiplicity.
    std::vector<SpherePoint> preimages(const SpherePoint& y, const NumericPolicy& policy = {}) const;
    /// The d1 roots of P(x, .), repeated by multiplicity.
    std::vector<SpherePoint> images(const SpherePoint& x, const NumericPolicy& policy = {}) const;

    /// The polynomial in the charts of x and y (0 affine, 1 at infinity).
    const BiPoly& in_charts(int chart_x, int chart_y) const { return charts_[3 * (2 * chart_x + chart_y)]; }
    /// |P(x, y)| relative to the coefficient scale, evaluated in the points' charts.
    double residual(const SpherePoint& x, const SpherePoint& y) const;
    /// dy/dx along the branch through (x, y), in the charts of x and y.
    cplx slope(const SpherePoint& x, const SpherePoint& y) const;

    bool operator==(const Correspondence& o) const
    {
        return poly_ == o.poly_ && components_ == o.components_ && adjoint_ == o.adjoint_;
    }

  private:
    Correspondence(BiPoly p, BiPoly reduced, std::vector<Component> comps, bool adj);
    friend Correspondence adjoint(const Correspondence& f);
    friend Correspondence compose(const Correspondence&, const Correspondence&,
                                  const NumericPolicy&, CompositionReport*);
    friend Correspondence from_record(const std::string& text);

    BiPoly poly_;
    BiPoly reduced_;
    std::vector<Component> components_;
    bool adjoint_ = false;
    std::vector<BiPoly> charts_; // per chart pair: Q, dQ/dx, dQ/dy of the reduced equation
};

Correspondence adjoint(const Correspondence& f);

/// Graph x -> y = x.
Correspondence identity_correspondence();

/// Divides out factors of p depending on x alone (in_x) or on y alone; removed roots are appended.
BiPoly remove_fiber_factors(const BiPoly& p, bool in_x, const NumericPolicy& policy = {},
                            std::vector<cplx>* removed = nullptr);

struct CompositionReport {
    int removed_x_factors = 0;
    int removed_z_factors = 0;
};

/// f o g: first g, then f. Graph Res_y(g.P(x, y), f.P(y, z)) in (x, z).
Correspondence compose(const Correspondence& f, const Correspondence& g,
                       const NumericPolicy& policy = {}, CompositionReport* report = nullptr);

/// f^n by repeated composition.
Correspondence iterate(const Correspondence& f, int n, const NumericPolicy& policy = {});

struct CriticalValue {
    SpherePoint value;
    SpherePoint witness;        // the collision point in the fiber
    int fiber_multiplicity = 2; // size of the colliding cluster
    bool component_crossing = false;
};

struct CriticalData {
    std::vector<CriticalValue> b1; // critical values of the adjoint (images collide)
    std::vector<CriticalValue> b2; // critical values of f (preimages collide)
    bool b1_has_infinity() const;
    bool b2_has_infinity() const;
};

/// Points over which the preimage fiber collides (B2), and the same for the adjoint (B1).
CriticalData critical_values(const Correspondence& f, const NumericPolicy& policy = {});

struct OrbitEntry {
    SpherePoint value;
    int horizon = 0;
    bool periodic_detected = false;
    bool certified = false;   // residual checked along the returning path
    bool near_return = false; // returned within tol_near_return only
    bool inconclusive = false; // point cap reached before the horizon
    bool component_crossing = false;
    double min_return_distance = 0;
    std::vector<SpherePoint> returning_branch; // v, x1, ..., v
};

struct CriticalOrbitReport {
    std::vector<OrbitEntry> entries;
    /// True when some critical value that is not a component crossing returns to itself.
    bool hypothesis_violated() const;
};

CriticalOrbitReport critical_orbit_report(const Correspondence& f, const CriticalData& data,
                                          int horizon, const NumericPolicy& policy = {},
                                          std::size_t point_cap = 4096);

/// d2^k with k the number of critical values that ramify (crossings excluded).
long long delta_bound(const Correspondence& f, const CriticalData& data);

/// Structured text record: bidegree, row-major (re, im) coefficients, optional components.
std::string to_record(const Correspondence& f);
/// Inverse of to_record, bit-exact.
Correspondence from_record(const std::string& text);

/// FNV-1a over the serialized record.
std::uint64_t correspondence_hash(const Correspondence& f);

} // namespace corrdyn
