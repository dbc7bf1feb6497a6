#include "doctest.h"

#include "corrdyn/dynamics.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace corrdyn;

namespace {

BiPoly square_map() { return BiPoly::from_rows({{0.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0}}); }
BiPoly linear_pair() { return BiPoly::from_rows({{0.0, 0.0, 1.0}, {0.0, -5.0, 0.0}, {6.0, 0.0, 0.0}}); }
BiPoly hyperbola() { return BiPoly::from_rows({{-1.0, 0.0, 1.0}, {0.0}, {-1.0}}); }

std::vector<cplx> sorted_affine(const PointCloudMeasure& m)
{
    std::vector<cplx> z;
    for (auto& p : m.points())
        z.push_back(p.to_affine());
    std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return z;
}

bool same_values(std::vector<cplx> got, std::vector<cplx> want, double tol)
{
    if (got.size() != want.size())
        return false;
    std::sort(want.begin(), want.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t k = 0; k < got.size(); ++k)
        if (std::abs(got[k] - want[k]) > tol)
            return false;
    return true;
}

} // namespace

TEST_CASE("pullback of a Dirac mass")
{
    const auto sq = Correspondence::from_bipoly(square_map());
    auto m = pullback_dirac(sq, SpherePoint::affine(4.0));
    CHECK(same_values(sorted_affine(m), {2.0, -2.0}, 1e-14));
    CHECK(m.weights() == std::vector<double>{0.5, 0.5});

    m = pullback_dirac(Correspondence::from_bipoly(linear_pair()), SpherePoint::affine(6.0));
    CHECK(same_values(sorted_affine(m), {2.0, 3.0}, 1e-14));

    m = pullback_dirac(Correspondence::from_bipoly(hyperbola()), SpherePoint::affine(0.0));
    CHECK(same_values(sorted_affine(m), {{0, 1}, {0, -1}}, 1e-14));
}

TEST_CASE("backward and forward clouds")
{
    const auto l = Correspondence::from_bipoly(linear_pair());
    const SpherePoint one = SpherePoint::affine(1.0);

    auto b = backward_cloud(l, one, 2, 1000, 1);
    CHECK_FALSE(b.meta().monte_carlo);
    CHECK(same_values(sorted_affine(b), {1.0 / 4, 1.0 / 6, 1.0 / 6, 1.0 / 9}, 1e-12));
    for (double w : b.weights())
        CHECK(w == 0.25);

    auto zero = backward_cloud(l, one, 0, 1000, 1);
    CHECK(zero.size() == 1);
    CHECK(zero.points()[0] == one);

    const auto sq = Correspondence::from_bipoly(square_map());
    auto r8 = backward_cloud(sq, one, 3, 1000, 1);
    std::vector<cplx> roots8;
    for (int k = 0; k < 8; ++k)
        roots8.push_back(std::polar(1.0, k * std::numbers::pi / 4));
    CHECK(same_values(sorted_affine(r8), roots8, 1e-12));

    auto fw = forward_cloud(l, one, 2, 1000, 1);
    CHECK(same_values(sorted_affine(fw), {4.0, 6.0, 6.0, 9.0}, 1e-12));
}

TEST_CASE("forward cloud is the backward cloud of the adjoint, also in Monte-Carlo mode")
{
    const auto h = Correspondence::from_bipoly(hyperbola());
    const SpherePoint a = SpherePoint::affine({0.3, 0.7});
    const auto fw = forward_cloud(h, a, 12, 500, 77);
    const auto bw = backward_cloud(adjoint(h), a, 12, 500, 77);
    CHECK(fw.meta().monte_carlo);
    CHECK(fw == bw);
}

TEST_CASE("clouds conserve mass")
{
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = Correspondence::from_bipoly(test::random_bipoly(gen, 2, 2));
        const SpherePoint a = SpherePoint::affine(test::gaussian(gen));
        for (std::size_t budget : {64u, 1000u, 4096u}) {
            CHECK(std::abs(backward_cloud(f, a, 10, budget, 3).total_mass() - 1) <= 1e-12);
            CHECK(std::abs(forward_cloud(f, a, 10, budget, 3).total_mass() - 1) <= 1e-12);
        }
    }
}

TEST_CASE("Monte-Carlo clouds are reproducible")
{
    const auto h = Correspondence::from_bipoly(hyperbola());
    const SpherePoint a = SpherePoint::affine(0.5);
    CHECK(backward_cloud(h, a, 15, 3000, 5) == backward_cloud(h, a, 15, 3000, 5));
    CHECK_FALSE(backward_cloud(h, a, 15, 3000, 5) == backward_cloud(h, a, 15, 3000, 6));
}

TEST_CASE("pullback of the area form")
{
    auto grid = std::make_shared<const SphereGrid>(16);
    const auto omega = GridField::function(grid, [](const SpherePoint&) { return cplx(1.0); });
    const auto sq = Correspondence::from_bipoly(square_map());

    const auto uni = pullback_form(sq, omega, 0, grid->size(), 1);
    std::vector<SpherePoint> got = uni.points(), want = grid->nodes();
    auto key = [](const SpherePoint& p) { return p.unit_vector(); };
    std::sort(got.begin(), got.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    std::sort(want.begin(), want.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
    CHECK(got == want);

    // the equilibrium measure of z^2 is uniform on the unit circle
    const auto deep = pullback_form(sq, omega, 30, 2000, 1);
    CHECK(std::abs(deep.total_mass() - 1) <= 1e-12);
    double near_circle = 0;
    for (std::size_t k = 0; k < deep.size(); ++k)
        if (std::abs(deep.points()[k].unit_vector()[2]) < 1e-3)
            near_circle += deep.weights()[k];
    CHECK(near_circle > 0.99);

    const auto zero = GridField::function(grid, [](const SpherePoint&) { return cplx{}; });
    CHECK_THROWS_AS(pullback_form(sq, zero, 1, 10, 1), DomainError);
}

TEST_CASE("transfer operator")
{
    auto grid = std::make_shared<const SphereGrid>(256);
    const auto l = Correspondence::from_bipoly(linear_pair());
    const auto c = GridField::function(grid, [](const SpherePoint&) { return cplx(0.7); });
    const auto lc = transfer_apply(l, c);
    for (auto v : lc.values)
        CHECK(std::abs(v - 0.7) < 1e-9);

    // h(z) = z on the affine chart
    const auto id = GridField::function(grid, [](const SpherePoint& p) { return p.to_affine(); });
    const auto lid = transfer_apply(l, id);
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const SpherePoint& y = grid->node(k);
        // interior: away from the pole row, where the lat-long stencil degenerates
        if (y.chart == 0 && std::abs(y.coord) > 0.2 && std::abs(y.coord) < 0.8) {
            const cplx expect = 5.0 * y.coord / 12.0;
            CHECK(std::abs(lid.values[k] - expect) < 2e-3);
        }
    }
}

TEST_CASE("duality between pullback and transfer")
{
    auto grid = std::make_shared<const SphereGrid>(128);
    std::mt19937_64 gen(20);
    const auto h = Correspondence::from_bipoly(hyperbola());
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 dir{test::gaussian(gen).real(), test::gaussian(gen).real(), test::gaussian(gen).real()};
        const double n = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
        auto bump = [&](const SpherePoint& p) {
            const Vec3 u = p.unit_vector();
            return std::exp((u[0] * dir[0] + u[1] * dir[1] + u[2] * dir[2]) / n);
        };
        const auto field = GridField::function(grid, [&](const SpherePoint& p) { return cplx(bump(p)); });
        const SpherePoint a = SpherePoint::affine(test::gaussian(gen));
        const auto cloud = backward_cloud(h, a, 1, 10, 0);
        double lhs = 0;
        for (std::size_t k = 0; k < cloud.size(); ++k)
            lhs += cloud.weights()[k] * bump(cloud.points()[k]);
        CHECK(std::abs(lhs - transfer_at(h, bump, a)) < 1e-12);
        // gridded operator: agreement up to interpolation error
        const auto lf = transfer_apply(h, field);
        CHECK(std::abs(lhs - lf.interpolate(a).real()) < 5e-3);
    }
}

TEST_CASE("one-form pullback examples")
{
    auto grid = std::make_shared<const SphereGrid>(256);
    // dz: u = 1 in the affine chart, -1 / w^2 at infinity
    const auto dz = GridField::oneform(grid, [](const SpherePoint& p) {
        return p.chart == 0 ? cplx(1.0) : -1.0 / (p.coord * p.coord);
    });
    const auto line = Correspondence::from_bipoly(BiPoly::from_rows({{0.0, 1.0}, {-2.0, 0.0}}));
    const auto two = oneform_pullback(line, dz);
    const auto pair = oneform_pullback(Correspondence::from_bipoly(linear_pair()), dz);
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const SpherePoint& x = grid->node(k);
        if (x.chart != 0 || std::abs(x.coord) > 0.3)
            continue;
        CHECK(std::abs(two.oneform_coefficient(x) - 2.0) < 1e-3);
        // normalized by the two branches: (2 + 3) / 2
        CHECK(std::abs(pair.oneform_coefficient(x) - 2.5) < 1e-3);
    }
}

TEST_CASE("normalized pullback contracts L2 norms")
{
    auto grid = std::make_shared<const SphereGrid>(128);
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 4; ++trial) {
        const auto f = Correspondence::from_bipoly(test::random_bipoly(gen, 2, 2));
        const OneformPlan plan(f, grid);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto u = random_oneform(grid, seed);
            CHECK(plan.apply(u).l2_norm() <= 1.02 * u.l2_norm());
        }
    }
}

TEST_CASE("operator norm estimates")
{
    SUBCASE("square map pushforward is a strict contraction")
    {
        const auto sq = Correspondence::from_bipoly(square_map());
        const auto est = operator_norm_estimate(sq, Direction::pushforward, 20, 96, 3);
        CHECK(est.estimate < 0.95);
        CHECK_FALSE(est.weak_modularity_suspected);
        for (std::size_t k = 6; k < est.history.size(); ++k)
            CHECK(est.history[k] <= est.history[k - 1] + 1e-3);
    }
    SUBCASE("rotations about a common axis are isometries")
    {
        const cplx ea = std::polar(1.0, 1.0), eb = std::polar(1.0, 2.5);
        const auto rot = Correspondence::from_bipoly(
            BiPoly::from_rows({{0.0, 0.0, 1.0}, {0.0, -(ea + eb), 0.0}, {ea * eb, 0.0, 0.0}}));
        const auto est = operator_norm_estimate(rot, Direction::pullback, 30, 128, 3);
        CHECK(est.estimate == doctest::Approx(1.0).epsilon(0.02));
        CHECK(est.weak_modularity_suspected);
    }
    SUBCASE("too few iterations")
    {
        const auto sq = Correspondence::from_bipoly(square_map());
        CHECK_THROWS_AS(operator_norm_estimate(sq, Direction::pullback, 5, 32, 1), DomainError);
    }
}
