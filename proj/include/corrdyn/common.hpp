#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace corrdyn {

using cplx = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (fiber in the graph, bad degree, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure failed (non-convergence, degenerate composition, ...).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Malformed configuration or serialized record.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Every tolerance used by the library. Passed explicitly, never global.
struct NumericPolicy {
    double tol_root = 1e-10;        // relative residual accepted for a root
    double tol_cluster = 1e-7;      // base radius for merging roots into a multiple root
    double tol_multiplicity = 1e-6; // derivative test accepting a merged cluster
    double tol_lead = 1e-13;        // leading coefficient treated as zero (root at infinity)
    double tol_trim = 1e-11;        // coefficient treated as zero when tightening degrees
    double tol_content = 1e-8;      // residual for a common root of all coefficient columns
    double tol_gcd = 1e-8;          // singular value threshold for approximate gcd
    double gcd_rank_gap = 1e3;      // minimum singular value gap before flagging a gcd
    double tol_fiber_collision = 1e-5; // chordal distance at which two fiber points collide
    double tol_periodic = 1e-8;     // return distance certifying a periodic orbit
    double tol_near_return = 1e-4;  // return distance reported as a near return
    double tol_neutral = 0.05;      // band around |multiplier| = 1
    double tol_diagonal = 1e-9;     // remainder tolerance for diagonal factor removal
    int newton_steps = 3;           // polishing iterations per root
    int iterate_cap = 4096;         // maximum projected degree d^n for explicit iterates
    double mask_radius_factor = 10; // critical masking radius = factor / grid resolution
    double max_mask_fraction = 0.2; // masked area beyond which a grid is rejected

    bool operator==(const NumericPolicy&) const = default;
};

} // namespace corrdyn
