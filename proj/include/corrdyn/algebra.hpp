#pragma once

#include "corrdyn/common.hpp"
#include "corrdyn/sphere.hpp"

#include <span>
#include <vector>

namespace corrdyn {

/// Univariate complex polynomial, coefficient index = power.
///
/// Exact zero leading coefficients are never stored; the zero polynomial has
/// no coefficients and degree -1.
class UniPoly {
  public:
    UniPoly() = default;
    explicit UniPoly(std::vector<cplx> coeffs);
    static UniPoly from_roots(std::span<const cplx> roots, cplx leading = 1.0);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    std::span<const cplx> coeffs() const { return coeffs_; }
    cplx coeff(int i) const { return i >= 0 && i <= degree() ? coeffs_[i] : cplx{}; }
    cplx leading() const { return coeffs_.empty() ? cplx{} : coeffs_.back(); }

    cplx operator()(cplx z) const;
    /// Sum |c_i| |z|^i, the magnitude against which residuals are judged.
    double scale_at(cplx z) const;
    double max_abs() const;

    UniPoly derivative() const;
    UniPoly normalized() const;
    /// Drops leading coefficients below rel_tol * max|c|.
    UniPoly trimmed(double rel_tol) const;

    friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
    friend UniPoly operator+(const UniPoly& a, const UniPoly& b);
    friend UniPoly operator-(const UniPoly& a, const UniPoly& b);
    friend UniPoly operator*(cplx s, const UniPoly& a);
    bool operator==(const UniPoly&) const = default;

  private:
    std::vector<cplx> coeffs_;
};

/// Bivariate complex polynomial P(x, y) = sum c(i, j) x^i y^j, i <= deg_x, j <= deg_y.
class BiPoly {
  public:
    BiPoly() = default;
    BiPoly(int deg_x, int deg_y);
    /// rows[i][j] is the coefficient of x^i y^j.
    static BiPoly from_rows(const std::vector<std::vector<cplx>>& rows);
    /// Polynomial in x alone (embedded with deg_y = 0).
    static BiPoly in_x(const UniPoly& p);
    static BiPoly in_y(const UniPoly& p);

    int deg_x() const { return deg_x_; }
    int deg_y() const { return deg_y_; }
    bool is_zero() const;

    cplx& at(int i, int j) { return c_[static_cast<std::size_t>(i) * (deg_y_ + 1) + j]; }
    cplx at(int i, int j) const
    {
        return i <= deg_x_ && j <= deg_y_ && i >= 0 && j >= 0
                   ? c_[static_cast<std::size_t>(i) * (deg_y_ + 1) + j]
                   : cplx{};
    }
    std::span<const cplx> data() const { return c_; }

    cplx operator()(cplx x, cplx y) const;
    double max_abs() const;

    /// Coefficients (in x) of the binary form P(., y) for a sphere point y.
    std::vector<cplx> fiber_in_x(const SpherePoint& y) const;
    /// Coefficients (in y) of the binary form P(x, .) for a sphere point x.
    std::vector<cplx> fiber_in_y(const SpherePoint& x) const;
    /// Coefficient polynomial of y^j, as a polynomial in x.
    UniPoly column(int j) const;
    /// Coefficient polynomial of x^i, as a polynomial in y.
    UniPoly row(int i) const;

    BiPoly transposed() const;
    BiPoly d_dx() const;
    BiPoly d_dy() const;
    /// P(x0 + h, y0 + k) as a polynomial in (h, k).
    BiPoly shifted(cplx x0, cplx y0) const;
    /// The affine chart (1/x, 1/y) polynomial x^a y^b P(1/x, 1/y) in the chosen variables.
    BiPoly reversed(bool in_x, bool in_y) const;

    BiPoly normalized() const;
    /// Removes top rows and columns whose coefficients are all below rel_tol * max|c|.
    BiPoly tightened(double rel_tol) const;

    friend BiPoly operator*(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator+(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator-(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator*(cplx s, const BiPoly& a);
    bool operator==(const BiPoly&) const = default;

  private:
    int deg_x_ = -1;
    int deg_y_ = -1;
    std::vector<cplx> c_;
};

/// max_ij |p_ij - s q_ij| / max|p| minimized over the complex scale s (least squares fit).
double scaled_distance(const BiPoly& p, const BiPoly& q);
double scaled_distance(const UniPoly& p, const UniPoly& q);

struct Root {
    cplx value;
    int multiplicity = 1;
};

/// All roots of p, with clustered roots merged into multiple roots.
std::vector<Root> roots(const UniPoly& p, const NumericPolicy& policy = {});

/// Roots with repetition, no clustering. Companion eigenvalues plus Newton polishing.
std::vector<cplx> raw_roots(const UniPoly& p, const NumericPolicy& policy = {});

/// Zeros on the sphere of the binary form sum coeffs[i] X^i Z^(n-i), n = coeffs.size() - 1.
/// Returns exactly n points; a drop in degree becomes roots at infinity.
std::vector<SpherePoint> projective_roots(std::span<const cplx> coeffs,
                                          const NumericPolicy& policy = {});

/// Determinant of the Sylvester matrix of p and q taken at their formal degrees.
cplx sylvester_determinant(std::span<const cplx> p, std::span<const cplx> q);

enum class Var { x, y };

/// Res_v(p, q) for p, q in the same variables; the result lives in the other variable.
UniPoly resultant(const BiPoly& p, const BiPoly& q, Var eliminate);

/// Res_y(first(x, y), second(y, z)) as a polynomial in (x, z).
BiPoly chain_resultant(const BiPoly& first, const BiPoly& second);

/// Discriminant of p with respect to var, as a polynomial in the other variable.
///
/// Computed from the binary form at the formal degree, so a degree drop by two
/// or more at some value shows up as a zero there. Degree deficits against
/// (2 deg_var - 2) * deg_other are zeros at infinity.
UniPoly discriminant(const BiPoly& p, Var var);

/// Lowest-order homogeneous part of p around the origin, as coefficients t[j] of h^(m-j) k^j.
/// Terms below rel_tol * max|c| are ignored when locating the order m.
std::vector<cplx> tangent_cone(const BiPoly& p, double rel_tol);

struct SquarefreeResult {
    UniPoly part;
    int gcd_degree = 0;
    double rank_gap = 0;       // ratio of the singular values straddling the gcd rank
    bool ill_conditioned = false;
};

/// p / gcd(p, p') by an approximate gcd on the Sylvester matrix.
SquarefreeResult squarefree_part(const UniPoly& p, const NumericPolicy& policy = {});

} // namespace corrdyn
