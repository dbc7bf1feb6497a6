#pragma once

#include "corrdyn/correspondence.hpp"
#include "corrdyn/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace corrdyn {

enum class PointClass { repelling, attracting, neutral };

std::string to_string(PointClass c);

/// A germ of the graph of f^n crossing the diagonal at (x, x).
struct PeriodicPoint {
    SpherePoint point;
    int period = 1;
    cplx multiplier;    // slope of the germ; infinite for a vertical germ
    int multiplicity = 1;
    PointClass cls = PointClass::neutral;
    double residual = 0; // |R(x, x)| relative to the coefficient scale, in the chart of x
};

struct PeriodicReport {
    int period = 1;
    int diagonal_components = 0; // copies of y = x divided out of the graph
    std::vector<PeriodicPoint> points;

    /// Isolated points with multiplicity plus two per diagonal copy; equals d1 + d2 of f^n.
    int total_count() const;
    int isolated_count() const;
};

PointClass classify(cplx multiplier, double tol_neutral);

/// Solutions of x in f^n(x): the graph of f^n meets the diagonal after its (y - x) factors are removed.
PeriodicReport periodic_points(const Correspondence& f, int n, const NumericPolicy& policy = {});

struct GraphPairing {
    double lhs = 0;   // d^-n integral of phi (f^n)^* (psi omega)
    double rhs = 0;   // c_psi <mu+, phi> from a deeper independent run
    double c_psi = 0; // integral of psi omega
    bool monte_carlo = false;
};

/// Pairs d^-n [graph of f^n] with pi1^* phi and pi2^* (psi omega) by transporting a quadrature
/// cloud of psi n steps back. The reference uses the area form pulled back reference_n steps
/// (n + 10 when negative) with an independent seed.
GraphPairing graph_pairing(const Correspondence& f, int n, const std::function<double(const SpherePoint&)>& phi,
                           const GridField& psi, std::size_t budget, std::uint64_t seed, int reference_n = -1,
                           const NumericPolicy& policy = {});

} // namespace corrdyn
