// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "corrdyn/dynamics.hpp"
#include "corrdyn/grid.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/periodic.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace corrdyn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Correspondence graph(const std::vector<std::vector<cplx>>& rows)
{
    return Correspondence::from_bipoly(BiPoly::from_rows(rows));
}

Correspondence linear_pair() { return graph({{0.0, 0.0, 1.0}, {0.0, -5.0, 0.0}, {6.0, 0.0, 0.0}}); }
Correspondence square_map() { return graph({{0.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0}}); }
Correspondence hyperbola() { return graph({{-1.0, 0.0, 1.0}, {0.0}, {-1.0}}); }

Correspondence random_pair(std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    return Correspondence::from_bipoly(test::random_bipoly(gen, 2, 2));
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double mass_near(const PointCloudMeasure& mu, const SpherePoint& c, double radius)
{
    double m = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (sphere_distance(mu.points()[i], c) <= radius)
            m += mu.weights()[i];
    return m;
}

struct LogFit {
    double slope = 0;
    double residual = 0;
};

// least squares of log|v| against n, RMS residual
LogFit log_fit(const std::vector<int>& ns, const std::vector<double>& v)
{
    const double k = static_cast<double>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> y;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        y.push_back(std::log(std::abs(v[i])));
        sx += ns[i];
        sy += y[i];
        sxx += double(ns[i]) * ns[i];
        sxy += ns[i] * y[i];
    }
    LogFit fit;
    fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double icpt = (sy - fit.slope * sx) / k;
    double ss = 0;
    for (std::size_t i = 0; i < ns.size(); ++i)
        ss += std::pow(y[i] - icpt - fit.slope * ns[i], 2);
    fit.residual = std::sqrt(ss / k);
    return fit;
}

Outcome graph_algebra()
{
    int violations = 0, failures = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto f = random_pair(1000 + s), g = random_pair(5000 + s);
        try {
            const auto h = compose(f, g);
            if (h.d1() != f.d1() * g.d1() || h.d2() != f.d2() * g.d2())
                ++violations;
        } catch (const Error&) {
            ++failures;
        }
    }
    // z - y^2 after y - x^2 is z - x^4
    const auto h = compose(square_map(), square_map());
    const BiPoly& p = h.poly();
    double err = p.deg_x() == 4 && p.deg_y() == 1 ? 0.0 : 1.0;
    if (err == 0) {
        const cplx lead = p.at(0, 1);
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; j <= 1; ++j) {
                const cplx want = (i == 0 && j == 1) ? 1.0 : (i == 4 && j == 0) ? -1.0 : 0.0;
                err = std::max(err, std::abs(p.at(i, j) / lead - want));
            }
    }
    return {violations == 0 && failures == 0 && err <= 1e-10,
            "degree law violations " + std::to_string(violations) + ", errors " + std::to_string(failures) +
                ", z-x^4 coefficient error " + fmt("%.2e", err)};
}

Outcome linear_pair_oracle()
{
    const auto f = linear_pair();
    const auto exact = backward_cloud(f, SpherePoint::affine(1.0), 2, 100, 1);
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t i = 0; i < exact.size(); ++i)
        atoms.emplace_back(exact.points()[i].to_affine().real(), exact.weights()[i]);
    std::sort(atoms.begin(), atoms.end());
    const double want[] = {1.0 / 9, 1.0 / 6, 1.0 / 6, 1.0 / 4};
    double err = atoms.size() == 4 ? 0.0 : 1.0;
    for (std::size_t i = 0; i < atoms.size() && i < 4; ++i) {
        err = std::max(err, std::abs(atoms[i].first - want[i]));
        err = std::max(err, std::abs(atoms[i].second - 0.25));
    }
    for (auto& p : exact.points())
        err = std::max(err, std::abs(p.to_affine().imag()));

    const auto back = backward_cloud(f, SpherePoint::affine(1.0), 20, 100000, 7);
    const auto fwd = forward_cloud(f, SpherePoint::affine(1.0), 20, 100000, 7);
    const double at0 = mass_near(back, SpherePoint::affine(0.0), 0.1);
    const double at_inf = mass_near(fwd, SpherePoint::infinity(), 0.1);
    return {err <= 1e-12 && back.meta().monte_carlo && at0 >= 0.99 && at_inf >= 0.99,
            "n=2 atom error " + fmt("%.2e", err) + ", n=20 mass near 0 " + fmt("%.4f", at0) + ", forward near inf " +
                fmt("%.4f", at_inf)};
}

Outcome contraction()
{
    auto grid = std::make_shared<const SphereGrid>(512);
    const OneformPlan plan(random_pair(77), grid);
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto u = random_oneform(grid, 100 + seed);
        worst = std::max(worst, plan.apply(u).l2_norm() / u.l2_norm());
    }
    return {worst <= 1.02, "max ||f*u|| / (d ||u||) " + fmt("%.4f", worst) + ", masked " +
                               fmt("%.4f", plan.masked_fraction())};
}

Outcome weak_modularity()
{
    const cplx ea = std::polar(1.0, 1.0), eb = std::polar(1.0, 2.5);
    const auto rot = graph({{0.0, 0.0, 1.0}, {0.0, -(ea + eb), 0.0}, {ea * eb, 0.0, 0.0}});
    const auto r = operator_norm_estimate(rot, Direction::pullback, 40, 256, 11);
    const auto g = operator_norm_estimate(hyperbola(), Direction::pullback, 40, 256, 11);
    const auto tail = std::vector<double>(g.history.end() - 5, g.history.end());
    const double spread = *std::max_element(tail.begin(), tail.end()) - *std::min_element(tail.begin(), tail.end());
    return {r.estimate >= 0.98 && r.estimate <= 1.02 && g.estimate <= 0.99 && spread < 0.01,
            "rotation pair " + fmt("%.4f", r.estimate) + ", y^2-x^2-1 " + fmt("%.4f", g.estimate) +
                " (last-5 spread " + fmt("%.4f", spread) + ")"};
}

Outcome equidistribution()
{
    const auto f = hyperbola();
    const auto& dict = default_dictionary();
    const std::vector<SpherePoint> starts{SpherePoint::affine({0.4, 0.3}), SpherePoint::affine({-1.2, 0.7}),
                                          SpherePoint::affine({0.0, 2.5}), SpherePoint::affine({0.1, -0.9}),
                                          SpherePoint::affine({3.0, -2.0})};
    std::vector<std::vector<double>> m4, m12;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto clouds = backward_clouds(f, starts[i], {4, 12}, 200000, 21 + i);
        m4.push_back(moments(clouds[0], dict));
        m12.push_back(moments(clouds[1], dict));
    }
    double worst = 0;
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = i + 1; j < starts.size(); ++j)
            worst = std::max(worst, dual_lip_distance(m12[i], m12[j], dict) / dual_lip_distance(m4[i], m4[j], dict));
    const auto rate = rate_fit(f, starts[0], 4, 12, dict, 21, 200000);
    return {worst <= 0.25 && rate.lambda < 0.9 && rate.residual < 0.2,
            "max pairwise ratio n=12/n=4 " + fmt("%.4f", worst) + ", lambda " + fmt("%.4f", rate.lambda) +
                ", fit residual " + fmt("%.4f", rate.residual)};
}

Outcome invariance()
{
    const auto f = hyperbola();
    const auto clouds = backward_clouds(f, SpherePoint::affine({0.4, 0.3}), {6, 14}, 200000, 5);
    const double r6 = invariance_residual(f, clouds[0], default_dictionary());
    const double r14 = invariance_residual(f, clouds[1], default_dictionary());
    return {r14 < r6 && r14 < 0.02, "residual n=6 " + fmt("%.4f", r6) + ", n=14 " + fmt("%.4f", r14)};
}

Outcome map_case()
{
    const auto mu = backward_cloud(square_map(), SpherePoint::affine({0.5, 0.2}), 12, 1 << 13, 3);
    // the rectangle rule with 4096 nodes integrates trigonometric polynomials of degree < 4096
    // exactly, so these are the moments of the uniform measure on |z| = 1 for every dictionary entry
    const auto& dict = default_dictionary();
    std::vector<double> circle(dict.size(), 0.0), vals(dict.size());
    const int m = 4096;
    for (int k = 0; k < m; ++k) {
        const double t = 2 * std::numbers::pi * k / m;
        dict.evaluate_all(Vec3{std::cos(t), std::sin(t), 0.0}, vals.data());
        for (std::size_t i = 0; i < dict.size(); ++i)
            circle[i] += vals[i] / m;
    }
    const double d = dual_lip_distance(moments(mu, dict), circle, dict);
    return {d <= 0.03, "distance to the unit circle " + fmt("%.4f", d) + (mu.meta().monte_carlo ? " (MC)" : "")};
}

Outcome self_adjoint()
{
    const auto f = graph({{0.0, 0.0, 0.0, -1.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {-1.0}});
    const auto a = SpherePoint::affine(0.5);
    const auto b = backward_cloud(f, a, 10, 100000, 9);
    const auto w = forward_cloud(f, a, 10, 100000, 9);
    const double d = dual_lip_distance(b, w, default_dictionary());
    return {d <= 0.05, "backward/forward distance " + fmt("%.4f", d)};
}

Outcome periodic_count()
{
    std::ostringstream bad;
    int misses = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto f = random_pair(300 + s);
        for (int n = 1; n <= 3; ++n) {
            const int want = 2 * (1 << n);
            int got = -1;
            try {
                got = periodic_points(f, n).total_count();
            } catch (const Error&) {
            }
            if (got != want) {
                ++misses;
                bad << " seed " << s << " n=" << n << " got " << got;
            }
        }
    }
    return {misses == 0, "mismatches " + std::to_string(misses) + bad.str()};
}

Outcome mixing()
{
    const auto f = hyperbola();
    const auto& dict = default_dictionary();
    const auto mu = backward_cloud(f, SpherePoint::affine({0.4, 0.3}), 14, 20000, 1);
    const std::pair<std::size_t, std::size_t> pairs[] = {{2, 2}, {6, 8}, {12, 2}};
    std::vector<int> ns;
    for (int n = 2; n <= 8; ++n)
        ns.push_back(n);
    bool ok = true;
    std::ostringstream out;
    for (auto [a, b] : pairs) {
        const auto rep = mixing_correlation(f, mu, dict.function(a), dict.function(b), ns, 4096, 1);
        const auto fit = log_fit(ns, rep.values);
        ok = ok && std::abs(rep.values.back()) < std::abs(rep.values.front()) && fit.slope < 0 && fit.residual < 0.3;
        out << dict.label(a) << "*" << dict.label(b) << ": |I_2| " << fmt("%.3e", std::abs(rep.values.front()))
            << " |I_8| " << fmt("%.3e", std::abs(rep.values.back())) << " slope " << fmt("%.3f", fit.slope)
            << " residual " << fmt("%.3f", fit.residual) << "; ";
    }
    return {ok, out.str()};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "graph algebra exactness", 5, graph_algebra},
        {2, "linear-pair oracle", 10, linear_pair_oracle},
        {3, "contraction bound", 30, contraction},
        {4, "weak-modularity detector", 60, weak_modularity},
        {5, "equidistribution and uniformity", 120, equidistribution},
        {6, "invariance", 60, invariance},
        {7, "map-case cross-check", 30, map_case},
        {8, "self-adjoint symmetry", 60, self_adjoint},
        {9, "periodic-point count", 60, periodic_count},
        {10, "mixing decay", 120, mixing},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_s;
        failed += !pass;
        std::printf("%s criterion %d (%s): %s [%.1f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed ? 1 : 0;
}
