#include "corrdyn/periodic.hpp"
#include "corrdyn/dynamics.hpp"
#include "corrdyn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace corrdyn {

namespace {

double binomial(int n, int k)
{
    double r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

// P(u, u + v) as a polynomial in (u, v)
BiPoly shear(const BiPoly& p)
{
    BiPoly s(p.deg_x() + p.deg_y(), p.deg_y());
    for (int i = 0; i <= p.deg_x(); ++i)
        for (int j = 0; j <= p.deg_y(); ++j)
            for (int k = 0; k <= j; ++k)
                s.at(i + j - k, k) += p.at(i, j) * binomial(j, k);
    return s;
}

// S(x, y - x), truncated to the given bidegree
BiPoly unshear(const BiPoly& s, int deg_x, int deg_y)
{
    BiPoly full(s.deg_x() + s.deg_y(), s.deg_y());
    for (int a = 0; a <= s.deg_x(); ++a)
        for (int b = 0; b <= s.deg_y(); ++b)
            for (int c = 0; c <= b; ++c)
                full.at(a + b - c, c) += s.at(a, b) * binomial(b, c) * ((b - c) % 2 ? -1.0 : 1.0);
    BiPoly r(deg_x, deg_y);
    for (int i = 0; i <= deg_x; ++i)
        for (int j = 0; j <= deg_y; ++j)
            r.at(i, j) = full.at(i, j);
    return r;
}

std::vector<cplx> diagonal_restriction(const BiPoly& r)
{
    std::vector<cplx> q(static_cast<std::size_t>(r.deg_x() + r.deg_y() + 1));
    for (int i = 0; i <= r.deg_x(); ++i)
        for (int j = 0; j <= r.deg_y(); ++j)
            q[static_cast<std::size_t>(i + j)] += r.at(i, j);
    return q;
}

std::vector<Root> chart_roots(std::vector<cplx> q, const NumericPolicy& policy)
{
    double top = 0;
    for (auto c : q)
        top = std::max(top, std::abs(c));
    for (auto& c : q)
        if (std::abs(c) <= policy.tol_lead * top)
            c = 0;
    const UniPoly p(q);
    if (p.degree() < 1)
        return {};
    return roots(p, policy);
}

// germs of r through the origin: slopes of the tangent cone
std::vector<cplx> germ_slopes(const BiPoly& shifted)
{
    auto t = tangent_cone(shifted, 1e-6);
    const int order = static_cast<int>(t.size()) - 1;
    if (order < 1)
        return {};
    while (t.size() > 1 && t.back() == cplx{})
        t.pop_back();
    const int finite = static_cast<int>(t.size()) - 1;
    std::vector<cplx> slopes;
    if (finite == 1) {
        slopes.push_back(-t[0] / t[1]);
    } else if (finite > 1) {
        for (auto& r : raw_roots(UniPoly(t)))
            slopes.push_back(r);
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = finite; k < order; ++k)
        slopes.push_back({inf, 0.0});
    return slopes;
}

} // namespace

std::string to_string(PointClass c)
{
    switch (c) {
    case PointClass::repelling:
        return "repelling";
    case PointClass::attracting:
        return "attracting";
    default:
        return "neutral";
    }
}

PointClass classify(cplx multiplier, double tol_neutral)
{
    const double a = std::abs(multiplier);
    if (a > 1 + tol_neutral)
        return PointClass::repelling;
    if (a < 1 - tol_neutral)
        return PointClass::attracting;
    return PointClass::neutral;
}

int PeriodicReport::isolated_count() const
{
    int s = 0;
    for (auto& p : points)
        s += p.multiplicity;
    return s;
}

int PeriodicReport::total_count() const { return isolated_count() + 2 * diagonal_components; }

PeriodicReport periodic_points(const Correspondence& f, int n, const NumericPolicy& policy)
{
    if (n < 1)
        throw DomainError("periodic_points needs n >= 1");
    const Correspondence fn = n == 1 ? f : iterate(f, n, policy);
    const BiPoly& p = fn.poly();
    const BiPoly s = shear(p.normalized());

    int k = 0;
    const double thr = policy.tol_diagonal * s.max_abs();
    while (k <= s.deg_y()) {
        const UniPoly col = s.column(k);
        if (col.max_abs() > thr)
            break;
        ++k;
    }
    const int a = p.deg_x() - k, b = p.deg_y() - k;
    if (k > s.deg_y() || a + b == 0)
        throw DomainError("graph contains diagonal with full multiplicity");
    BiPoly stripped(s.deg_x(), s.deg_y() - k);
    for (int i = 0; i <= s.deg_x(); ++i)
        for (int j = k; j <= s.deg_y(); ++j)
            stripped.at(i, j - k) = s.at(i, j);
    const BiPoly r = unshear(stripped, a, b).normalized();
    const BiPoly r_inf = r.reversed(true, true);

    const auto q = diagonal_restriction(r);
    if (std::all_of(q.begin(), q.end(), [&](cplx c) { return std::abs(c) <= policy.tol_trim; }))
        throw DomainError("graph contains diagonal with full multiplicity");
    std::vector<cplx> q_rev(q.rbegin(), q.rend());
    const int formal = a + b;

    // roots in the chart where they are bounded, with the affine chart as fallback
    struct Site {
        int chart;
        cplx coord;
        int multiplicity;
    };
    std::vector<Site> sites;
    int found = 0;
    for (auto& rt : chart_roots(q, policy))
        if (std::abs(rt.value) <= 1) {
            sites.push_back({0, rt.value, rt.multiplicity});
            found += rt.multiplicity;
        }
    for (auto& rt : chart_roots(q_rev, policy))
        if (std::abs(rt.value) < 1) {
            sites.push_back({1, rt.value, rt.multiplicity});
            found += rt.multiplicity;
        }
    if (found != formal) {
        sites.clear();
        int affine = 0;
        for (auto& rt : chart_roots(q, policy)) {
            const SpherePoint pt = SpherePoint::affine(rt.value);
            sites.push_back({pt.chart, pt.coord, rt.multiplicity});
            affine += rt.multiplicity;
        }
        if (affine < formal)
            sites.push_back({1, cplx{}, formal - affine});
    }

    PeriodicReport rep;
    rep.period = n;
    rep.diagonal_components = k;
    for (const Site& site : sites) {
        const BiPoly& chart_poly = site.chart == 0 ? r : r_inf;
        const cplx x = site.coord;
        double scale = 0;
        const double ax = std::max(1.0, std::abs(x));
        for (int i = 0; i <= chart_poly.deg_x(); ++i)
            for (int j = 0; j <= chart_poly.deg_y(); ++j)
                scale += std::abs(chart_poly.at(i, j)) * std::pow(ax, i + j);
        const double residual = std::abs(chart_poly(x, x)) / scale;

        auto slopes = germ_slopes(chart_poly.shifted(x, x));
        if (slopes.empty())
            slopes.push_back({1.0, 0.0});
        // transverse germs meet the diagonal once; the rest of the multiplicity goes to tangent germs
        std::vector<int> mult(slopes.size(), 0);
        int remaining = site.multiplicity;
        std::vector<std::size_t> tangent;
        for (std::size_t g = 0; g < slopes.size(); ++g) {
            if (std::abs(slopes[g] - 1.0) > 1e-3) {
                if (remaining > 0) {
                    mult[g] = 1;
                    --remaining;
                }
            } else {
                tangent.push_back(g);
            }
        }
        if (remaining > 0) {
            if (tangent.empty())
                mult[0] += remaining;
            else
                for (std::size_t t = 0; t < tangent.size(); ++t)
                    mult[tangent[t]] += remaining / static_cast<int>(tangent.size()) +
                                        (static_cast<int>(t) < remaining % static_cast<int>(tangent.size()));
        }
        for (std::size_t g = 0; g < slopes.size(); ++g) {
            if (mult[g] == 0)
                continue;
            PeriodicPoint pp;
            pp.point = SpherePoint{site.chart, x}.canonical();
            pp.period = n;
            pp.multiplier = slopes[g];
            pp.multiplicity = mult[g];
            pp.cls = std::isfinite(std::abs(slopes[g])) ? classify(slopes[g], policy.tol_neutral)
                                                         : PointClass::repelling;
            pp.residual = residual;
            rep.points.push_back(pp);
        }
    }
    return rep;
}

GraphPairing graph_pairing(const Correspondence& f, int n, const std::function<double(const SpherePoint&)>& phi,
                           const GridField& psi, std::size_t budget, std::uint64_t seed, int reference_n,
                           const NumericPolicy& policy)
{
    if (n < 0)
        throw DomainError("graph_pairing needs n >= 0");
    if (psi.kind != FieldKind::function)
        throw DomainError("graph_pairing needs psi as a density");
    GraphPairing out;
    double total = 0;
    for (auto v : psi.values)
        total += v.real();
    out.c_psi = total * psi.grid->weight();

    const auto cloud = pullback_form(f, psi, n, budget, seed, policy);
    out.lhs = out.c_psi * pair(cloud, phi);

    const int depth = reference_n < 0 ? n + 10 : reference_n;
    const auto area = GridField::function(psi.grid, [](const SpherePoint&) { return cplx(1.0); });
    const auto ref = pullback_form(f, area, depth, budget, seed ^ 0x9E3779B97F4A7C15ull, policy);
    out.rhs = out.c_psi * pair(ref, phi);
    out.monte_carlo = cloud.meta().monte_carlo;
    return out;
}

} // namespace corrdyn
