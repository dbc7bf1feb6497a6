#include "corrdyn/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace corrdyn {

namespace {

double eval_scale(const BiPoly& q, cplx x, cplx y)
{
    const double ax = std::max(1.0, std::abs(x)), ay = std::max(1.0, std::abs(y));
    double s = 0, px = 1;
    for (int i = 0; i <= q.deg_x(); ++i, px *= ax) {
        double py = 1;
        for (int j = 0; j <= q.deg_y(); ++j, py *= ay)
            s += std::abs(q.at(i, j)) * px * py;
    }
    return s;
}

BiPoly product(const std::vector<Component>& comps, bool with_multiplicity)
{
    BiPoly p = BiPoly::from_rows({{1.0}});
    for (auto& c : comps) {
        const int reps = with_multiplicity ? c.multiplicity : 1;
        for (int k = 0; k < reps; ++k)
            p = p * c.poly;
    }
    return p.normalized();
}

BiPoly validated(const BiPoly& p, const NumericPolicy& policy)
{
    if (p.is_zero())
        throw DomainError("zero polynomial does not define a graph");
    const BiPoly q = p.tightened(0.0);
    if (q.deg_x() == 0 && q.deg_y() == 0)
        throw DomainError("constant polynomial does not define a graph");
    if (q.deg_x() == 0 || q.deg_y() == 0)
        throw DomainError("graph contains a fiber");
    std::vector<cplx> removed;
    remove_fiber_factors(q, true, policy, &removed);
    remove_fiber_factors(q, false, policy, &removed);
    if (!removed.empty()) {
        std::ostringstream msg;
        msg << "graph contains a fiber (factor vanishing at " << removed.front() << ")";
        throw DomainError(msg.str());
    }
    return q.normalized();
}

struct Cone {
    int order = 0;
    bool crossing = false;
};

// Classifies the point (x, y) of q = 0 for the projection to y.
Cone classify(const BiPoly& q, cplx x, cplx y, const NumericPolicy& policy)
{
    const auto t = tangent_cone(q.shifted(x, y), 1e-6);
    Cone c;
    c.order = static_cast<int>(t.size()) - 1;
    if (c.order < 2 || t[0] == cplx{})
        return c;
    // slopes dy/dx of the tangent lines; distinct slopes mean transverse smooth germs
    const UniPoly cone(t);
    const auto slopes = cone.degree() > 0 ? roots(cone, policy) : std::vector<Root>{};
    const int vertical = c.order - cone.degree();
    c.crossing = vertical <= 1 &&
                 std::all_of(slopes.begin(), slopes.end(), [](const Root& r) { return r.multiplicity == 1; });
    return c;
}

std::vector<CriticalValue> collision_values(const Correspondence& f, const NumericPolicy& policy)
{
    const BiPoly& p = f.reduced();
    if (p.deg_x() < 2)
        return {};
    const UniPoly disc = discriminant(p, Var::x);
    if (disc.is_zero())
        throw DomainError("non-reduced graph: discriminant vanishes identically");

    struct Candidate {
        SpherePoint y;
        int multiplicity;
    };
    std::vector<Candidate> cands;
    if (disc.degree() > 0)
        for (auto& r : roots(disc, policy))
            cands.push_back({SpherePoint::affine(r.value), r.multiplicity});
    const int deficit = (2 * p.deg_x() - 2) * p.deg_y() - disc.degree();
    if (deficit > 0)
        cands.push_back({SpherePoint::infinity(), deficit});

    std::vector<CriticalValue> out;
    for (auto& c : cands) {
        const auto fiber = projective_roots(p.fiber_in_x(c.y), policy);
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        for (std::size_t i = 0; i < fiber.size(); ++i)
            for (std::size_t j = i + 1; j < fiber.size(); ++j) {
                const double d = chordal_distance(fiber[i], fiber[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                }
            }
        const double thr = std::pow(policy.tol_fiber_collision, 1.0 / c.multiplicity);
        if (!(best <= thr))
            continue;
        Vec3 mean{0, 0, 0};
        int count = 0;
        for (auto& q : fiber)
            if (chordal_distance(q, fiber[bi]) <= thr) {
                const Vec3 u = q.unit_vector();
                for (int k = 0; k < 3; ++k)
                    mean[k] += u[k];
                ++count;
            }
        const double norm = std::sqrt(mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]);
        for (auto& v : mean)
            v /= norm;
        CriticalValue cv;
        cv.value = c.y.canonical();
        cv.witness = SpherePoint::from_unit_vector(mean);
        cv.fiber_multiplicity = count;
        const BiPoly& q = f.in_charts(cv.witness.chart, cv.value.chart);
        cv.component_crossing = classify(q, cv.witness.coord, cv.value.coord, policy).crossing;
        out.push_back(cv);
    }
    return out;
}

} // namespace

Correspondence::Correspondence(BiPoly p, BiPoly reduced, std::vector<Component> comps, bool adj)
    : poly_(std::move(p)), reduced_(std::move(reduced)), components_(std::move(comps)), adjoint_(adj)
{
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy) {
            BiPoly q = reduced_.reversed(cx == 1, cy == 1);
            charts_.push_back(q);
            charts_.push_back(q.d_dx());
            charts_.push_back(q.d_dy());
        }
}

Correspondence Correspondence::from_bipoly(const BiPoly& p, const NumericPolicy& policy)
{
    BiPoly q = validated(p, policy);
    return Correspondence(q, q, {Component{q, 1}}, false);
}

Correspondence Correspondence::from_components(std::vector<Component> components,
                                               const NumericPolicy& policy)
{
    if (components.empty())
        throw DomainError("empty component list");
    for (auto& c : components) {
        if (c.multiplicity < 1)
            throw DomainError("component multiplicity must be positive");
        c.poly = validated(c.poly, policy);
    }
    BiPoly p = product(components, true);
    BiPoly r = product(components, false);
    return Correspondence(std::move(p), std::move(r), std::move(components), false);
}

std::vector<SpherePoint> Correspondence::preimages(const SpherePoint& y, const NumericPolicy& policy) const
{
    return projective_roots(poly_.fiber_in_x(y), policy);
}

std::vector<SpherePoint> Correspondence::images(const SpherePoint& x, const NumericPolicy& policy) const
{
    return projective_roots(poly_.fiber_in_y(x), policy);
}

double Correspondence::residual(const SpherePoint& x, const SpherePoint& y) const
{
    const BiPoly& q = in_charts(x.chart, y.chart);
    const double s = eval_scale(q, x.coord, y.coord);
    return s > 0 ? std::abs(q(x.coord, y.coord)) / s : 0.0;
}

cplx Correspondence::slope(const SpherePoint& x, const SpherePoint& y) const
{
    const std::size_t k = 3 * static_cast<std::size_t>(2 * x.chart + y.chart);
    return -charts_[k + 1](x.coord, y.coord) / charts_[k + 2](x.coord, y.coord);
}

Correspondence adjoint(const Correspondence& f)
{
    std::vector<Component> comps;
    for (auto& c : f.components_)
        comps.push_back({c.poly.transposed(), c.multiplicity});
    return Correspondence(f.poly_.transposed(), f.reduced_.transposed(), std::move(comps), !f.adjoint_);
}

Correspondence identity_correspondence()
{
    return Correspondence::from_bipoly(BiPoly::from_rows({{0.0, 1.0}, {-1.0, 0.0}}));
}

BiPoly remove_fiber_factors(const BiPoly& p, bool in_x, const NumericPolicy& policy,
                            std::vector<cplx>* removed)
{
    if (!in_x)
        return remove_fiber_factors(p.transposed(), true, policy, removed).transposed();
    BiPoly q = p.tightened(0.0);
    while (q.deg_x() > 0) {
        const double thr = policy.tol_trim * q.max_abs();
        int best_j = -1, best_deg = std::numeric_limits<int>::max();
        for (int j = 0; j <= q.deg_y(); ++j) {
            int deg = q.deg_x();
            while (deg >= 0 && std::abs(q.at(deg, j)) <= thr)
                --deg;
            if (deg >= 0 && deg < best_deg) {
                best_deg = deg;
                best_j = j;
            }
        }
        if (best_j < 0 || best_deg == 0)
            break;
        std::vector<cplx> col(static_cast<std::size_t>(best_deg + 1));
        for (int i = 0; i <= best_deg; ++i)
            col[i] = q.at(i, best_j);

        bool found = false;
        for (cplx r : raw_roots(UniPoly(col), policy)) {
            const double s = eval_scale(q, r, 1.0);
            bool all = true;
            for (int j = 0; j <= q.deg_y() && all; ++j)
                all = std::abs(q.column(j)(r)) <= policy.tol_content * s;
            if (!all)
                continue;
            BiPoly next(q.deg_x() - 1, q.deg_y());
            for (int j = 0; j <= q.deg_y(); ++j) {
                cplx carry{};
                for (int i = q.deg_x(); i >= 1; --i) {
                    carry = q.at(i, j) + r * carry;
                    next.at(i - 1, j) = carry;
                }
            }
            q = next.normalized();
            if (removed)
                removed->push_back(r);
            found = true;
            break;
        }
        if (!found)
            break;
    }
    return q;
}

Correspondence compose(const Correspondence& f, const Correspondence& g, const NumericPolicy& policy,
                       CompositionReport* report)
{
    BiPoly r = chain_resultant(g.poly(), f.poly());
    if (r.is_zero())
        throw NumericError("composition degenerated: resultant vanishes identically");
    r = r.tightened(policy.tol_trim);
    std::vector<cplx> rx, rz;
    r = remove_fiber_factors(r, true, policy, &rx);
    r = remove_fiber_factors(r, false, policy, &rz);
    if (report) {
        report->removed_x_factors = static_cast<int>(rx.size());
        report->removed_z_factors = static_cast<int>(rz.size());
    }
    const int ex = f.d2() * g.d2(), ez = f.d1() * g.d1();
    if (r.deg_x() != ex || r.deg_y() != ez) {
        std::ostringstream msg;
        msg << "composition degenerated: bidegree (" << r.deg_x() << ", " << r.deg_y() << "), expected (" << ex
            << ", " << ez << "); removed " << rx.size() << " x-fibers and " << rz.size() << " z-fibers";
        throw NumericError(msg.str());
    }
    r = r.normalized();
    return Correspondence(r, r, {Component{r, 1}}, false);
}

Correspondence iterate(const Correspondence& f, int n, const NumericPolicy& policy)
{
    if (n < 1)
        throw DomainError("iterate needs n >= 1");
    const double d = std::max(f.d1(), f.d2());
    if (std::pow(d, n) > policy.iterate_cap) {
        std::ostringstream msg;
        msg << "iterate degree " << d << "^" << n << " exceeds cap " << policy.iterate_cap
            << "; use Monte-Carlo transport instead";
        throw DomainError(msg.str());
    }
    Correspondence out = f;
    for (int k = 1; k < n; ++k)
        out = compose(f, out, policy);
    return out;
}

bool CriticalData::b1_has_infinity() const
{
    return std::any_of(b1.begin(), b1.end(), [](auto& c) { return c.value.is_infinity(); });
}

bool CriticalData::b2_has_infinity() const
{
    return std::any_of(b2.begin(), b2.end(), [](auto& c) { return c.value.is_infinity(); });
}

CriticalData critical_values(const Correspondence& f, const NumericPolicy& policy)
{
    CriticalData out;
    out.b2 = collision_values(f, policy);
    out.b1 = collision_values(adjoint(f), policy);
    return out;
}

bool CriticalOrbitReport::hypothesis_violated() const
{
    return std::any_of(entries.begin(), entries.end(),
                       [](auto& e) { return e.periodic_detected && !e.component_crossing; });
}

CriticalOrbitReport critical_orbit_report(const Correspondence& f, const CriticalData& data, int horizon,
                                          const NumericPolicy& policy, std::size_t point_cap)
{
    constexpr double kSamePoint = 1e-10;
    constexpr double kPathResidual = 1e-8;
    CriticalOrbitReport report;
    for (auto& cv : data.b2) {
        OrbitEntry e;
        e.value = cv.value;
        e.horizon = horizon;
        e.component_crossing = cv.component_crossing;
        e.min_return_distance = std::numeric_limits<double>::infinity();

        struct Node {
            SpherePoint p;
            int parent;
        };
        std::vector<std::vector<Node>> levels{{Node{cv.value, -1}}};
        for (int step = 1; step <= horizon && !e.periodic_detected; ++step) {
            std::vector<Node> next;
            const auto& cur = levels.back();
            for (std::size_t k = 0; k < cur.size() && !e.inconclusive; ++k) {
                for (auto& y : f.images(cur[k].p, policy)) {
                    const bool dup = std::any_of(next.begin(), next.end(), [&](const Node& n) {
                        return chordal_distance(n.p, y) <= kSamePoint;
                    });
                    if (dup)
                        continue;
                    if (next.size() >= point_cap) {
                        e.inconclusive = true;
                        break;
                    }
                    next.push_back({y, static_cast<int>(k)});
                }
            }
            levels.push_back(std::move(next));
            for (std::size_t k = 0; k < levels.back().size(); ++k) {
                const double dist = sphere_distance(levels.back()[k].p, cv.value);
                e.min_return_distance = std::min(e.min_return_distance, dist);
                if (dist > policy.tol_periodic || e.periodic_detected)
                    continue;
                e.periodic_detected = true;
                std::vector<SpherePoint> path;
                int idx = static_cast<int>(k);
                for (int lv = static_cast<int>(levels.size()) - 1; lv >= 0; --lv) {
                    path.push_back(levels[lv][idx].p);
                    idx = levels[lv][idx].parent;
                }
                std::reverse(path.begin(), path.end());
                bool ok = true;
                for (std::size_t s = 0; s + 1 < path.size(); ++s)
                    ok = ok && f.residual(path[s], path[s + 1]) <= kPathResidual;
                // the closing step is checked against the critical value itself
                ok = ok && f.residual(path[path.size() - 2], cv.value) <= kPathResidual;
                e.certified = ok;
                e.returning_branch = std::move(path);
            }
            if (e.inconclusive)
                break;
        }
        e.near_return = !e.periodic_detected && e.min_return_distance <= policy.tol_near_return;
        report.entries.push_back(std::move(e));
    }
    return report;
}

long long delta_bound(const Correspondence& f, const CriticalData& data)
{
    long long out = 1;
    for (auto& cv : data.b2)
        if (!cv.component_crossing)
            out *= f.d2();
    return out;
}

} // namespace corrdyn
