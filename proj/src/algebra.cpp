#include "corrdyn/algebra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>

namespace corrdyn {

namespace {

void strip_zero_leading(std::vector<cplx>& c)
{
    while (!c.empty() && c.back() == cplx{})
        c.pop_back();
}

double max_modulus(std::span<const cplx> c)
{
    double m = 0;
    for (auto v : c)
        m = std::max(m, std::abs(v));
    return m;
}

cplx horner(std::span<const cplx> c, cplx z)
{
    cplx acc{};
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

// value and first derivative
std::pair<cplx, cplx> horner2(std::span<const cplx> c, cplx z)
{
    cplx p{}, dp{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    return {p, dp};
}

double scale_of(std::span<const cplx> c, double r)
{
    double acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * r + std::abs(*it);
    return acc;
}

// Newton polishing in whichever chart keeps the root bounded.
cplx polish(std::span<const cplx> c, cplx r, int steps)
{
    if (steps <= 0 || !std::isfinite(std::abs(r)))
        return r;
    const bool flip = std::abs(r) > 1.0;
    std::vector<cplx> rev;
    std::span<const cplx> poly = c;
    cplx z = r;
    if (flip) {
        rev.assign(c.rbegin(), c.rend());
        poly = rev;
        z = 1.0 / r;
    }
    double res = std::abs(horner(poly, z));
    for (int k = 0; k < steps && res > 0; ++k) {
        auto [p, dp] = horner2(poly, z);
        if (dp == cplx{})
            break;
        const cplx zn = z - p / dp;
        const double rn = std::abs(horner(poly, zn));
        if (!(rn < res))
            break;
        z = zn;
        res = rn;
    }
    return flip ? 1.0 / z : z;
}

// Roots of a polynomial with nonzero constant and leading coefficients.
std::vector<cplx> nonzero_roots(std::span<const cplx> c, const NumericPolicy& policy)
{
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<cplx> out;
    if (n <= 0)
        return out;
    if (n == 1) {
        out.push_back(-c[0] / c[1]);
        return out;
    }
    if (n == 2) {
        const cplx a = c[2], b = c[1], cc = c[0];
        const cplx disc = std::sqrt(b * b - 4.0 * a * cc);
        const cplx q = std::real(std::conj(b) * disc) >= 0 ? -0.5 * (b + disc) : -0.5 * (b - disc);
        out.push_back(q / a);
        out.push_back(cc / q);
        return out;
    }
    // companion matrix in the chart where the leading coefficient dominates
    const bool flip = std::abs(c.front()) > std::abs(c.back());
    std::vector<cplx> w(c.begin(), c.end());
    if (flip)
        std::reverse(w.begin(), w.end());
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i)
        comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i)
        comp(i, n - 1) = -w[i] / w[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "root solver did not converge for degree " << n << " polynomial";
        throw NumericError(msg.str());
    }
    for (int i = 0; i < n; ++i) {
        cplx r = solver.eigenvalues()[i];
        if (flip)
            r = 1.0 / r;
        out.push_back(polish(c, r, policy.newton_steps));
    }
    return out;
}

// |p^(k)(z)| / k! together with the matching magnitude scale on the disc of radius max(1, |z|)
std::pair<double, double> taylor_term(std::span<const cplx> c, cplx z, int k)
{
    cplx acc{};
    double scale = 0;
    const double r = std::max(1.0, std::abs(z));
    for (int i = static_cast<int>(c.size()) - 1; i >= k; --i) {
        double binom = 1;
        for (int t = 0; t < k; ++t)
            binom = binom * (i - t) / (t + 1);
        acc += binom * c[i] * std::pow(z, i - k);
        scale += binom * std::abs(c[i]) * std::pow(r, i - k);
    }
    return {std::abs(acc), scale};
}

bool accepts_multiplicity(std::span<const cplx> c, cplx z, int m, double tol)
{
    for (int k = 0; k < m; ++k) {
        auto [val, scale] = taylor_term(c, z, k);
        if (val > tol * std::max(scale, 1e-300))
            return false;
    }
    return true;
}

std::vector<cplx> dft_inverse(std::span<const cplx> values)
{
    const std::size_t n = values.size();
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc{};
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((i * k) % n) / n;
            acc += values[k] * cplx(std::cos(ang), std::sin(ang));
        }
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

cplx unit_root(std::size_t k, std::size_t n)
{
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(ang), std::sin(ang)};
}

// Hadamard bound of the Sylvester matrix of p and q.
double sylvester_bound(std::span<const cplx> p, std::span<const cplx> q)
{
    double np = 0, nq = 0;
    for (auto v : p)
        np += std::norm(v);
    for (auto v : q)
        nq += std::norm(v);
    return std::pow(std::sqrt(np), static_cast<double>(q.size()) - 1) *
           std::pow(std::sqrt(nq), static_cast<double>(p.size()) - 1);
}

// Below this fraction of the Hadamard bound a resultant is treated as identically zero.
constexpr double kVanishingResultant = 1e-11;

std::vector<cplx> trim_relative(std::vector<cplx> c, double rel_tol)
{
    const double m = max_modulus(c);
    while (!c.empty() && std::abs(c.back()) <= rel_tol * m)
        c.pop_back();
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// UniPoly

UniPoly::UniPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs))
{
    strip_zero_leading(coeffs_);
}

UniPoly UniPoly::from_roots(std::span<const cplx> rts, cplx leading)
{
    std::vector<cplx> c{leading};
    for (auto r : rts) {
        c.push_back(cplx{});
        for (std::size_t i = c.size() - 1; i > 0; --i)
            c[i] = c[i - 1] - r * c[i];
        c[0] = -r * c[0];
    }
    return UniPoly(std::move(c));
}

cplx UniPoly::operator()(cplx z) const { return horner(coeffs_, z); }

double UniPoly::scale_at(cplx z) const { return scale_of(coeffs_, std::abs(z)); }

double UniPoly::max_abs() const { return max_modulus(coeffs_); }

UniPoly UniPoly::derivative() const
{
    std::vector<cplx> d;
    for (int i = 1; i <= degree(); ++i)
        d.push_back(static_cast<double>(i) * coeffs_[i]);
    return UniPoly(std::move(d));
}

UniPoly UniPoly::normalized() const
{
    const double m = max_abs();
    if (m == 0)
        return *this;
    std::vector<cplx> c(coeffs_);
    for (auto& v : c)
        v /= m;
    return UniPoly(std::move(c));
}

UniPoly UniPoly::trimmed(double rel_tol) const
{
    return UniPoly(trim_relative(coeffs_, rel_tol));
}

UniPoly operator*(const UniPoly& a, const UniPoly& b)
{
    if (a.is_zero() || b.is_zero())
        return {};
    std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
            c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return UniPoly(std::move(c));
}

UniPoly operator+(const UniPoly& a, const UniPoly& b)
{
    std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
    return UniPoly(std::move(c));
}

UniPoly operator-(const UniPoly& a, const UniPoly& b) { return a + cplx(-1.0) * b; }

UniPoly operator*(cplx s, const UniPoly& a)
{
    std::vector<cplx> c(a.coeffs_);
    for (auto& v : c)
        v *= s;
    return UniPoly(std::move(c));
}

// ---------------------------------------------------------------------------
// BiPoly

BiPoly::BiPoly(int deg_x, int deg_y)
    : deg_x_(deg_x), deg_y_(deg_y),
      c_(static_cast<std::size_t>(deg_x + 1) * static_cast<std::size_t>(deg_y + 1))
{
    if (deg_x < 0 || deg_y < 0)
        throw DomainError("bidegree must be nonnegative");
}

BiPoly BiPoly::from_rows(const std::vector<std::vector<cplx>>& rows)
{
    if (rows.empty())
        throw DomainError("empty coefficient matrix");
    std::size_t width = 0;
    for (auto& r : rows)
        width = std::max(width, r.size());
    if (width == 0)
        throw DomainError("empty coefficient matrix");
    BiPoly p(static_cast<int>(rows.size()) - 1, static_cast<int>(width) - 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            p.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return p;
}

BiPoly BiPoly::in_x(const UniPoly& q)
{
    BiPoly p(std::max(q.degree(), 0), 0);
    for (int i = 0; i <= q.degree(); ++i)
        p.at(i, 0) = q.coeff(i);
    return p;
}

BiPoly BiPoly::in_y(const UniPoly& q) { return in_x(q).transposed(); }

bool BiPoly::is_zero() const
{
    return std::all_of(c_.begin(), c_.end(), [](cplx v) { return v == cplx{}; });
}

cplx BiPoly::operator()(cplx x, cplx y) const
{
    cplx acc{};
    for (int i = deg_x_; i >= 0; --i) {
        cplx row{};
        for (int j = deg_y_; j >= 0; --j)
            row = row * y + at(i, j);
        acc = acc * x + row;
    }
    return acc;
}

double BiPoly::max_abs() const { return max_modulus(c_); }

std::vector<cplx> BiPoly::fiber_in_x(const SpherePoint& y) const
{
    std::vector<cplx> out(static_cast<std::size_t>(deg_x_ + 1));
    for (int i = 0; i <= deg_x_; ++i) {
        cplx acc{};
        if (y.chart == 0) {
            for (int j = deg_y_; j >= 0; --j)
                acc = acc * y.coord + at(i, j);
        } else {
            for (int j = 0; j <= deg_y_; ++j)
                acc = acc * y.coord + at(i, j);
        }
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> BiPoly::fiber_in_y(const SpherePoint& x) const
{
    std::vector<cplx> out(static_cast<std::size_t>(deg_y_ + 1));
    for (int j = 0; j <= deg_y_; ++j) {
        cplx acc{};
        if (x.chart == 0) {
            for (int i = deg_x_; i >= 0; --i)
                acc = acc * x.coord + at(i, j);
        } else {
            for (int i = 0; i <= deg_x_; ++i)
                acc = acc * x.coord + at(i, j);
        }
        out[j] = acc;
    }
    return out;
}

UniPoly BiPoly::column(int j) const
{
    std::vector<cplx> c(static_cast<std::size_t>(deg_x_ + 1));
    for (int i = 0; i <= deg_x_; ++i)
        c[i] = at(i, j);
    return UniPoly(std::move(c));
}

UniPoly BiPoly::row(int i) const
{
    std::vector<cplx> c(static_cast<std::size_t>(deg_y_ + 1));
    for (int j = 0; j <= deg_y_; ++j)
        c[j] = at(i, j);
    return UniPoly(std::move(c));
}

BiPoly BiPoly::transposed() const
{
    BiPoly t(deg_y_, deg_x_);
    for (int i = 0; i <= deg_x_; ++i)
        for (int j = 0; j <= deg_y_; ++j)
            t.at(j, i) = at(i, j);
    return t;
}

BiPoly BiPoly::d_dx() const
{
    BiPoly d(std::max(deg_x_ - 1, 0), deg_y_);
    for (int i = 1; i <= deg_x_; ++i)
        for (int j = 0; j <= deg_y_; ++j)
            d.at(i - 1, j) = static_cast<double>(i) * at(i, j);
    return d;
}

BiPoly BiPoly::d_dy() const { return transposed().d_dx().transposed(); }

BiPoly BiPoly::shifted(cplx x0, cplx y0) const
{
    // Taylor shift by repeated synthetic division, first along x then along y.
    BiPoly out(*this);
    for (int j = 0; j <= deg_y_; ++j) {
        for (int k = 0; k < deg_x_; ++k)
            for (int i = deg_x_ - 1; i >= k; --i)
                out.at(i, j) += x0 * out.at(i + 1, j);
    }
    for (int i = 0; i <= deg_x_; ++i) {
        for (int k = 0; k < deg_y_; ++k)
            for (int j = deg_y_ - 1; j >= k; --j)
                out.at(i, j) += y0 * out.at(i, j + 1);
    }
    return out;
}

BiPoly BiPoly::reversed(bool in_x, bool in_y) const
{
    BiPoly r(deg_x_, deg_y_);
    for (int i = 0; i <= deg_x_; ++i)
        for (int j = 0; j <= deg_y_; ++j)
            r.at(in_x ? deg_x_ - i : i, in_y ? deg_y_ - j : j) = at(i, j);
    return r;
}

BiPoly BiPoly::normalized() const
{
    const double m = max_abs();
    if (m == 0)
        return *this;
    BiPoly p(*this);
    for (auto& v : p.c_)
        v /= m;
    return p;
}

BiPoly BiPoly::tightened(double rel_tol) const
{
    const double thr = rel_tol * max_abs();
    int dx = deg_x_, dy = deg_y_;
    auto row_small = [&](int i) {
        for (int j = 0; j <= dy; ++j)
            if (std::abs(at(i, j)) > thr)
                return false;
        return true;
    };
    auto col_small = [&](int j) {
        for (int i = 0; i <= dx; ++i)
            if (std::abs(at(i, j)) > thr)
                return false;
        return true;
    };
    while (dx > 0 && row_small(dx))
        --dx;
    while (dy > 0 && col_small(dy))
        --dy;
    BiPoly out(dx, dy);
    for (int i = 0; i <= dx; ++i)
        for (int j = 0; j <= dy; ++j)
            out.at(i, j) = at(i, j);
    return out;
}

BiPoly operator*(const BiPoly& a, const BiPoly& b)
{
    BiPoly p(a.deg_x_ + b.deg_x_, a.deg_y_ + b.deg_y_);
    for (int i = 0; i <= a.deg_x_; ++i)
        for (int j = 0; j <= a.deg_y_; ++j) {
            const cplx v = a.at(i, j);
            if (v == cplx{})
                continue;
            for (int k = 0; k <= b.deg_x_; ++k)
                for (int l = 0; l <= b.deg_y_; ++l)
                    p.at(i + k, j + l) += v * b.at(k, l);
        }
    return p;
}

BiPoly operator+(const BiPoly& a, const BiPoly& b)
{
    BiPoly p(std::max(a.deg_x_, b.deg_x_), std::max(a.deg_y_, b.deg_y_));
    for (int i = 0; i <= p.deg_x_; ++i)
        for (int j = 0; j <= p.deg_y_; ++j)
            p.at(i, j) = a.at(i, j) + b.at(i, j);
    return p;
}

BiPoly operator-(const BiPoly& a, const BiPoly& b) { return a + cplx(-1.0) * b; }

BiPoly operator*(cplx s, const BiPoly& a)
{
    BiPoly p(a);
    for (auto& v : p.c_)
        v *= s;
    return p;
}

namespace {

template <class Coeffs>
double scaled_distance_impl(const Coeffs& p, const Coeffs& q)
{
    // best complex s minimizing sum |p - s q|^2
    cplx num{};
    double den = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        num += std::conj(q[k]) * p[k];
        den += std::norm(q[k]);
    }
    const double pm = max_modulus(p);
    if (den == 0)
        return pm == 0 ? 0.0 : 1.0;
    const cplx s = num / den;
    double worst = 0;
    for (std::size_t k = 0; k < p.size(); ++k)
        worst = std::max(worst, std::abs(p[k] - s * q[k]));
    return pm == 0 ? worst : worst / pm;
}

} // namespace

double scaled_distance(const BiPoly& p, const BiPoly& q)
{
    const int dx = std::max(p.deg_x(), q.deg_x()), dy = std::max(p.deg_y(), q.deg_y());
    std::vector<cplx> a, b;
    for (int i = 0; i <= dx; ++i)
        for (int j = 0; j <= dy; ++j) {
            a.push_back(p.at(i, j));
            b.push_back(q.at(i, j));
        }
    return scaled_distance_impl(a, b);
}

double scaled_distance(const UniPoly& p, const UniPoly& q)
{
    const int n = std::max(p.degree(), q.degree());
    std::vector<cplx> a, b;
    for (int i = 0; i <= n; ++i) {
        a.push_back(p.coeff(i));
        b.push_back(q.coeff(i));
    }
    return scaled_distance_impl(a, b);
}

// ---------------------------------------------------------------------------
// roots

std::vector<cplx> raw_roots(const UniPoly& p, const NumericPolicy& policy)
{
    if (p.is_zero())
        throw DomainError("identically zero fiber");
    auto c = p.coeffs();
    std::size_t zeros = 0;
    while (zeros < c.size() && c[zeros] == cplx{})
        ++zeros;
    std::vector<cplx> out(zeros, cplx{});
    auto rest = nonzero_roots(c.subspan(zeros), policy);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

std::vector<Root> roots(const UniPoly& p, const NumericPolicy& policy)
{
    const auto raw = raw_roots(p, policy);
    const auto c = p.coeffs();

    struct Cluster {
        cplx sum;
        int count;
        cplx centroid() const { return sum / static_cast<double>(count); }
    };
    std::vector<Cluster> clusters;
    for (auto r : raw)
        clusters.push_back({r, 1});

    // agglomerate the closest pair while the merge passes the derivative test
    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const cplx ci = clusters[i].centroid(), cj = clusters[j].centroid();
                const double d = std::abs(ci - cj) / std::max({1.0, std::abs(ci), std::abs(cj)});
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        const int m = clusters[bi].count + clusters[bj].count;
        if (best > std::pow(policy.tol_cluster, 1.0 / m))
            break;
        const Cluster merged{clusters[bi].sum + clusters[bj].sum, m};
        if (!accepts_multiplicity(c, merged.centroid(), m, policy.tol_multiplicity))
            break;
        clusters[bi] = merged;
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    std::vector<Root> out;
    for (auto& cl : clusters) {
        cplx z = cl.centroid();
        if (cl.count > 1) {
            // Newton on the (m-1)-th derivative converges to the multiple root
            UniPoly d = p;
            for (int k = 1; k < cl.count; ++k)
                d = d.derivative();
            z = polish(d.coeffs(), z, policy.newton_steps);
        }
        const double res = std::abs(p(z)) / std::max(scale_of(c, std::max(1.0, std::abs(z))), 1e-300);
        if (!(res <= 1e-6)) {
            std::ostringstream msg;
            msg << "root refinement failed: relative residual " << res << " at " << z;
            throw NumericError(msg.str());
        }
        out.push_back({z, cl.count});
    }
    return out;
}

std::vector<SpherePoint> projective_roots(std::span<const cplx> coeffs, const NumericPolicy& policy)
{
    const int n = static_cast<int>(coeffs.size()) - 1;
    const double m = max_modulus(coeffs);
    if (m == 0)
        throw DomainError("identically zero fiber");
    const double thr = policy.tol_lead * m;
    int top = n, bottom = 0;
    while (std::abs(coeffs[top]) <= thr)
        --top;
    while (std::abs(coeffs[bottom]) <= thr)
        ++bottom;

    std::vector<SpherePoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < bottom; ++k)
        out.push_back(SpherePoint{0, cplx{}});
    const auto mid = coeffs.subspan(bottom, top - bottom + 1);
    const int deg = top - bottom;
    if (deg == 1) {
        out.push_back(SpherePoint::ratio(-mid[0], mid[1]));
    } else if (deg == 2) {
        const cplx a = mid[2], b = mid[1], cc = mid[0];
        const cplx disc = std::sqrt(b * b - 4.0 * a * cc);
        const cplx q = std::real(std::conj(b) * disc) >= 0 ? -0.5 * (b + disc) : -0.5 * (b - disc);
        out.push_back(SpherePoint::ratio(q, a));
        out.push_back(SpherePoint::ratio(cc, q));
    } else if (deg > 2) {
        for (auto r : nonzero_roots(mid, policy))
            out.push_back(SpherePoint::affine(r));
    }
    for (int k = top; k < n; ++k)
        out.push_back(SpherePoint::infinity());
    return out;
}

// ---------------------------------------------------------------------------
// resultants

cplx sylvester_determinant(std::span<const cplx> p, std::span<const cplx> q)
{
    const int m = static_cast<int>(p.size()) - 1;
    const int n = static_cast<int>(q.size()) - 1;
    if (m < 0 || n < 0)
        throw DomainError("sylvester matrix of an empty coefficient list");
    const int size = m + n;
    if (size == 0)
        return 1.0;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
    for (int r = 0; r < n; ++r)
        for (int k = 0; k <= m; ++k)
            s(r, r + k) = p[m - k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= n; ++k)
            s(n + r, r + k) = q[n - k];
    return s.partialPivLu().determinant();
}

UniPoly resultant(const BiPoly& p, const BiPoly& q, Var eliminate)
{
    if (eliminate == Var::x)
        return resultant(p.transposed(), q.transposed(), Var::y);
    const BiPoly a = p.tightened(0.0), b = q.tightened(0.0);
    if (a.deg_y() < 1 || b.deg_y() < 1)
        throw DomainError("resultant needs positive degree in the eliminated variable");
    const int deg_bound = a.deg_x() * b.deg_y() + b.deg_x() * a.deg_y();
    const std::size_t n = static_cast<std::size_t>(deg_bound) + 1;
    std::vector<cplx> values(n);
    double bound = 0, peak = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const SpherePoint x{0, unit_root(k, n)};
        const auto pc = a.fiber_in_y(x), qc = b.fiber_in_y(x);
        values[k] = sylvester_determinant(pc, qc);
        bound = std::max(bound, sylvester_bound(pc, qc));
        peak = std::max(peak, std::abs(values[k]));
    }
    if (peak <= kVanishingResultant * bound)
        return {};
    NumericPolicy policy;
    return UniPoly(trim_relative(dft_inverse(values), policy.tol_trim)).normalized();
}

BiPoly chain_resultant(const BiPoly& first, const BiPoly& second)
{
    const BiPoly a = first.tightened(0.0), b = second.tightened(0.0);
    const int m = a.deg_y(), n = b.deg_x();
    if (m < 1 || n < 1)
        throw DomainError("resultant needs positive degree in the eliminated variable");
    const std::size_t nx = static_cast<std::size_t>(a.deg_x() * n) + 1;
    const std::size_t nz = static_cast<std::size_t>(b.deg_y() * m) + 1;

    std::vector<std::vector<cplx>> qcols(nz);
    for (std::size_t l = 0; l < nz; ++l)
        qcols[l] = b.fiber_in_x(SpherePoint{0, unit_root(l, nz)});

    // values[k][l] = R(x_k, z_l), transformed along z then along x
    std::vector<std::vector<cplx>> rows(nx);
    double bound = 0, peak = 0;
    for (std::size_t k = 0; k < nx; ++k) {
        const auto pcoef = a.fiber_in_y(SpherePoint{0, unit_root(k, nx)});
        std::vector<cplx> vals(nz);
        for (std::size_t l = 0; l < nz; ++l) {
            vals[l] = sylvester_determinant(pcoef, qcols[l]);
            bound = std::max(bound, sylvester_bound(pcoef, qcols[l]));
            peak = std::max(peak, std::abs(vals[l]));
        }
        rows[k] = dft_inverse(vals);
    }
    if (peak <= kVanishingResultant * bound)
        return BiPoly(0, 0);
    BiPoly out(static_cast<int>(nx) - 1, static_cast<int>(nz) - 1);
    std::vector<cplx> col(nx);
    for (std::size_t l = 0; l < nz; ++l) {
        for (std::size_t k = 0; k < nx; ++k)
            col[k] = rows[k][l];
        const auto coeffs = dft_inverse(col);
        for (std::size_t i = 0; i < nx; ++i)
            out.at(static_cast<int>(i), static_cast<int>(l)) = coeffs[i];
    }
    return out.normalized();
}

UniPoly discriminant(const BiPoly& p, Var var)
{
    if (var == Var::y)
        return discriminant(p.transposed(), Var::x);
    const BiPoly a = p.tightened(0.0);
    const int deg = a.deg_x();
    if (deg < 2)
        throw DomainError("no ramification possible: degree below 2 in the discriminant variable");
    const int deg_bound = (2 * deg - 2) * a.deg_y();
    const std::size_t n = static_cast<std::size_t>(deg_bound) + 1;
    std::vector<cplx> values(n);
    double bound = 0, peak = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto f = a.fiber_in_x(SpherePoint{0, unit_root(k, n)});
        std::vector<cplx> fx(static_cast<std::size_t>(deg)), fz(static_cast<std::size_t>(deg));
        for (int i = 1; i <= deg; ++i)
            fx[i - 1] = static_cast<double>(i) * f[i];
        for (int i = 0; i < deg; ++i)
            fz[i] = static_cast<double>(deg - i) * f[i];
        values[k] = sylvester_determinant(fx, fz);
        bound = std::max(bound, sylvester_bound(fx, fz));
        peak = std::max(peak, std::abs(values[k]));
    }
    if (peak <= kVanishingResultant * bound)
        return {};
    NumericPolicy policy;
    return UniPoly(trim_relative(dft_inverse(values), policy.tol_trim)).normalized();
}

// ---------------------------------------------------------------------------
// square-free part

SquarefreeResult squarefree_part(const UniPoly& p, const NumericPolicy& policy)
{
    if (p.is_zero())
        throw DomainError("square-free part of the zero polynomial");
    const int m = p.degree();
    SquarefreeResult out;
    if (m <= 1) {
        out.part = p.normalized();
        out.rank_gap = std::numeric_limits<double>::infinity();
        return out;
    }
    const UniPoly pn = p.normalized();
    const UniPoly dp = pn.derivative();
    const auto pc = pn.coeffs(), dc = dp.coeffs();

    // Sylvester matrix of (p, p'), sizes m and m - 1
    const int size = 2 * m - 1;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
    for (int r = 0; r < m - 1; ++r)
        for (int k = 0; k <= m; ++k)
            s(r, r + k) = pc[m - k];
    for (int r = 0; r < m; ++r)
        for (int k = 0; k <= m - 1; ++k)
            s(m - 1 + r, r + k) = dc[m - 1 - k];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
    const auto& sv = svd.singularValues();
    int k = 0;
    for (int i = 0; i < size; ++i)
        if (sv[i] <= policy.tol_gcd * sv[0])
            ++k;
    k = std::min(k, m - 1);
    out.gcd_degree = k;
    if (k == 0) {
        out.rank_gap = sv[size - 1] / (policy.tol_gcd * sv[0]);
        out.ill_conditioned = out.rank_gap < policy.gcd_rank_gap;
        out.part = pn;
        return out;
    }
    out.rank_gap = sv[size - k - 1] / std::max(sv[size - k], 1e-300);
    out.ill_conditioned = out.rank_gap < policy.gcd_rank_gap;

    // cofactors: p v - p' u = 0 with deg u = m - k, deg v = m - 1 - k
    const int nu = m - k + 1, nv = m - k;
    const int rows = 2 * m - k;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(rows, nu + nv);
    for (int c = 0; c < nv; ++c)
        for (int i = 0; i <= m; ++i)
            a(c + i, c) += pc[i];
    for (int c = 0; c < nu; ++c)
        for (int i = 0; i <= m - 1; ++i)
            a(c + i, nv + c) -= dc[i];
    Eigen::JacobiSVD<Eigen::MatrixXcd> nsvd(a, Eigen::ComputeFullV);
    const Eigen::VectorXcd null = nsvd.matrixV().col(nu + nv - 1);
    std::vector<cplx> u(static_cast<std::size_t>(nu));
    for (int i = 0; i < nu; ++i)
        u[i] = null[nv + i];
    out.part = UniPoly(std::move(u)).normalized();
    return out;
}

} // namespace corrdyn

namespace corrdyn {

std::vector<cplx> tangent_cone(const BiPoly& p, double rel_tol)
{
    const double thr = rel_tol * p.max_abs();
    for (int m = 0; m <= p.deg_x() + p.deg_y(); ++m) {
        std::vector<cplx> t(static_cast<std::size_t>(m + 1));
        bool any = false;
        for (int j = 0; j <= m; ++j) {
            t[j] = p.at(m - j, j);
            any = any || std::abs(t[j]) > thr;
        }
        if (any) {
            for (auto& v : t)
                if (std::abs(v) <= thr)
                    v = 0;
            return t;
        }
    }
    return {};
}

} // namespace corrdyn
