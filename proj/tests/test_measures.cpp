#include "doctest.h"

#include "corrdyn/dynamics.hpp"
#include "corrdyn/measures.hpp"
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

SpherePoint random_point(std::mt19937_64& gen)
{
    std::normal_distribution<double> nd;
    return SpherePoint::from_unit_vector([&] {
        Vec3 v{nd(gen), nd(gen), nd(gen)};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        return Vec3{v[0] / n, v[1] / n, v[2] / n};
    }());
}

PointCloudMeasure random_cloud(std::mt19937_64& gen, std::size_t n)
{
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    std::vector<SpherePoint> pts;
    std::vector<double> w;
    double total = 0;
    for (std::size_t k = 0; k < n; ++k) {
        pts.push_back(random_point(gen));
        w.push_back(ud(gen));
        total += w.back();
    }
    for (auto& x : w)
        x /= total;
    return PointCloudMeasure(pts, w);
}

// the equidistributed measure on the unit circle, paired in closed form via a fine quadrature
PointCloudMeasure circle_measure(std::size_t n)
{
    std::vector<SpherePoint> pts;
    for (std::size_t k = 0; k < n; ++k)
        pts.push_back(SpherePoint::affine(std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / n)));
    return PointCloudMeasure::uniform(pts);
}

} // namespace

TEST_CASE("dictionary functions")
{
    const auto& dict = default_dictionary();
    CHECK(dict.size() == 81);
    const double c0 = 1 / std::sqrt(4 * std::numbers::pi);
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 20; ++trial) {
        const SpherePoint p = random_point(gen);
        const Vec3 u = p.unit_vector();
        const auto v = dict.evaluate_all(p);
        CHECK(v[0] == doctest::Approx(c0).epsilon(1e-14));
        // closed forms of the degree one and two harmonics
        CHECK(std::abs(v[2] - std::sqrt(3 / (4 * std::numbers::pi)) * u[2]) < 1e-14);
        CHECK(std::abs(v[3] - std::sqrt(3 / (4 * std::numbers::pi)) * u[0]) < 1e-14);
        CHECK(std::abs(v[1] - std::sqrt(3 / (4 * std::numbers::pi)) * u[1]) < 1e-14);
        CHECK(std::abs(v[6] - std::sqrt(5 / (16 * std::numbers::pi)) * (3 * u[2] * u[2] - 1)) < 1e-13);
        CHECK(std::abs(v[8] - std::sqrt(15 / (16 * std::numbers::pi)) * (u[0] * u[0] - u[1] * u[1])) < 1e-13);
    }
    CHECK(dict.lip(2) == doctest::Approx(1.01 * std::sqrt(3 / (4 * std::numbers::pi))).epsilon(1e-4));
    CHECK(dict.sup(0) == doctest::Approx(c0));
}

TEST_CASE("dictionary is orthonormal under an independent quadrature")
{
    // Gauss-Legendre in cos(theta) times the trapezoid rule in longitude is exact for degree <= 16
    const auto& dict = default_dictionary();
    const int nt = 12, np = 24;
    const double gl_x[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                            0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
    const double gl_w[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                            0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    std::vector<double> gram(dict.size() * dict.size(), 0.0), v(dict.size());
    for (int i = 0; i < nt; ++i) {
        const double t = i < 6 ? -gl_x[5 - i] : gl_x[i - 6];
        const double wt = i < 6 ? gl_w[5 - i] : gl_w[i - 6];
        for (int j = 0; j < np; ++j) {
            const double phi = 2 * std::numbers::pi * j / np, s = std::sqrt(1 - t * t);
            dict.evaluate_all(Vec3{s * std::cos(phi), s * std::sin(phi), t}, v.data());
            for (std::size_t a = 0; a < v.size(); ++a)
                for (std::size_t b = 0; b < v.size(); ++b)
                    gram[a * v.size() + b] += wt * 2 * std::numbers::pi / np * v[a] * v[b];
        }
    }
    double worst = 0;
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = 0; b < v.size(); ++b)
            worst = std::max(worst, std::abs(gram[a * v.size() + b] - (a == b ? 1.0 : 0.0)));
    CHECK(worst < 1e-12);
}

TEST_CASE("recorded Lipschitz bounds hold")
{
    const auto& dict = default_dictionary();
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 2000; ++trial) {
        const SpherePoint a = random_point(gen);
        const double scale = trial % 2 ? 1e-3 : 0.3;
        const SpherePoint b = SpherePoint::affine(a.to_affine() + scale * cplx(nd(gen), nd(gen)));
        const double dist = sphere_distance(a, b);
        const auto va = dict.evaluate_all(a), vb = dict.evaluate_all(b);
        for (std::size_t m = 1; m < dict.size(); ++m)
            CHECK(std::abs(va[m] - vb[m]) <= dict.lip(m) * dist * (1 + 1e-9) + 1e-15);
    }
}

TEST_CASE("pairing examples")
{
    const auto& dict = default_dictionary();
    const SpherePoint a = SpherePoint::affine({0.3, -1.7});
    const auto phi = dict.function(17);
    CHECK(pair(PointCloudMeasure::dirac(a), phi) == phi(a));

    const auto circle4 = PointCloudMeasure::uniform({SpherePoint::affine(1.0), SpherePoint::affine({0, 1}),
                                                     SpherePoint::affine(-1.0), SpherePoint::affine({0, -1})});
    CHECK(std::abs(pair(circle4, [](const SpherePoint& p) {
              return std::clamp(p.to_affine().real(), -1.0, 1.0);
          })) <= 1e-12);

    const auto cloud = backward_cloud(Correspondence::from_bipoly(linear_pair()), SpherePoint::affine(1.0), 2, 100, 0);
    const double expect = (phi(SpherePoint::affine(0.25)) + 2 * phi(SpherePoint::affine(1.0 / 6)) +
                           phi(SpherePoint::affine(1.0 / 9))) / 4;
    CHECK(std::abs(pair(cloud, phi) - expect) < 1e-15);
}

TEST_CASE("pairing is linear in the measure")
{
    std::mt19937_64 gen(3);
    const auto& dict = default_dictionary();
    for (int trial = 0; trial < 10; ++trial) {
        const auto mu = random_cloud(gen, 50), nu = random_cloud(gen, 70);
        const double t = 0.1 * trial;
        const auto mix = PointCloudMeasure::mixture(mu, nu, t);
        const auto mm = moments(mix, dict), a = moments(mu, dict), b = moments(nu, dict);
        for (std::size_t m = 0; m < dict.size(); ++m)
            CHECK(std::abs(mm[m] - (t * a[m] + (1 - t) * b[m])) < 1e-14);
    }
}

TEST_CASE("dual Lipschitz distance is a pseudometric")
{
    std::mt19937_64 gen(4);
    const auto& dict = default_dictionary();
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_cloud(gen, 30), y = random_cloud(gen, 40), z = random_cloud(gen, 5);
        CHECK(dual_lip_distance(x, x, dict) == 0.0);
        CHECK(dual_lip_distance(x, y, dict) == dual_lip_distance(y, x, dict));
        CHECK(dual_lip_distance(x, z, dict) <= dual_lip_distance(x, y, dict) + dual_lip_distance(y, z, dict) + 1e-15);
    }
    for (int trial = 0; trial < 50; ++trial) {
        const SpherePoint a = random_point(gen), b = random_point(gen);
        for (int degree : {1, 3, 8})
            CHECK(dual_lip_distance(PointCloudMeasure::dirac(a), PointCloudMeasure::dirac(b), TestDictionary(degree)) <=
                  sphere_distance(a, b));
    }
    CHECK_THROWS_AS(dual_lip_distance(PointCloudMeasure::dirac(SpherePoint::affine(0.0)),
                                      PointCloudMeasure::dirac(SpherePoint::affine(1.0)), TestDictionary(0)),
                    DomainError);
}

TEST_CASE("invariance residual")
{
    const auto& dict = default_dictionary();
    const auto pair_f = Correspondence::from_bipoly(linear_pair());
    CHECK(invariance_residual(pair_f, PointCloudMeasure::dirac(SpherePoint::affine(0.0)), dict) <= 1e-12);

    std::mt19937_64 gen(5);
    const auto generic = Correspondence::from_bipoly(test::random_bipoly(gen, 2, 2));
    auto grid = std::make_shared<const SphereGrid>(32);
    CHECK(invariance_residual(generic, PointCloudMeasure::uniform(grid->nodes()), dict) > 0.01);

    const auto h = Correspondence::from_bipoly(hyperbola());
    const SpherePoint a = SpherePoint::affine({0.4, 0.3});
    const auto deep = backward_cloud(h, a, 14, 20000, 1), shallow = backward_cloud(h, a, 6, 20000, 1);
    CHECK(invariance_residual(h, deep, dict) < invariance_residual(h, shallow, dict));
}

TEST_CASE("Monte-Carlo and exact clouds agree")
{
    const auto& dict = default_dictionary();
    const auto f = Correspondence::from_bipoly(linear_pair());
    const SpherePoint a = SpherePoint::affine({0.7, 0.2});
    const auto exact = backward_cloud(f, a, 10, 1 << 12, 1);
    CHECK_FALSE(exact.meta().monte_carlo);
    for (std::size_t budget : {64u, 256u, 1000u}) {
        const auto mc = backward_cloud(f, a, 10, budget, 9);
        CHECK(mc.meta().monte_carlo);
        CHECK(dual_lip_distance(mc, exact, dict) <= 3 / std::sqrt(double(budget)));
    }
}

TEST_CASE("rate fits")
{
    const auto& dict = default_dictionary();
    SUBCASE("map case converges at rate one half")
    {
        const auto sq = Correspondence::from_bipoly(square_map());
        const auto rep = rate_fit(sq, SpherePoint::affine(3.0), 2, 10, dict, 1, 1 << 16);
        CHECK(rep.lambda == doctest::Approx(0.5).epsilon(0.2));
        CHECK(rep.reference_n == 14);
        // 0 is a fixed critical value of z^2
        CHECK(rep.hypothesis_unverified);
    }
    SUBCASE("linear pair")
    {
        const auto f = Correspondence::from_bipoly(linear_pair());
        const auto rep = rate_fit(f, SpherePoint::affine(1.0), 2, 10, dict, 1, 1 << 14);
        CHECK(rep.lambda <= 0.55);
        CHECK_FALSE(rep.unreliable);
        // the oracle: every atom lies in [9^-n, 2^-n]
        for (std::size_t k = 0; k < rep.ns.size(); ++k)
            CHECK(rep.distances[k] <= 2 * std::pow(0.5, rep.ns[k]));

        std::vector<double> gap;
        for (int n = 2; n <= 10; n += 2) {
            const auto ca = backward_cloud(f, SpherePoint::affine(1.0), n, 1 << 12, 1);
            const auto cb = backward_cloud(f, SpherePoint::affine(2.0), n, 1 << 12, 1);
            gap.push_back(dual_lip_distance(ca, cb, dict));
        }
        for (std::size_t k = 1; k < gap.size(); ++k)
            CHECK(gap[k] <= 0.5 * gap[k - 1]);
    }
}

TEST_CASE("map case: backward clouds approach the circle measure")
{
    const auto sq = Correspondence::from_bipoly(square_map());
    const auto cloud = backward_cloud(sq, SpherePoint::affine({0.5, 0.2}), 12, 1 << 13, 1);
    CHECK(dual_lip_distance(cloud, circle_measure(1 << 14), default_dictionary()) <= 0.03);
}

TEST_CASE("self-adjoint correspondence: forward and backward clouds agree")
{
    // (y - x^2)(x - y^2) = xy - y^3 - x^3 + x^2 y^2
    const auto p = BiPoly::from_rows({{0.0, 0.0, 0.0, -1.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {-1.0}});
    const auto f = Correspondence::from_bipoly(p);
    CHECK(adjoint(f).poly() == f.poly().transposed());
    const SpherePoint a = SpherePoint::affine(0.5);
    const auto bw = backward_cloud(f, a, 10, 20000, 3), fw = forward_cloud(f, a, 10, 20000, 3);
    CHECK(dual_lip_distance(bw, fw, default_dictionary()) <= 0.05);
}

TEST_CASE("mixing correlations")
{
    std::mt19937_64 gen(6);
    const auto f = Correspondence::from_bipoly(test::random_bipoly(gen, 2, 2));
    const auto& dict = default_dictionary();
    const auto mu = backward_cloud(f, SpherePoint::affine(0.3), 14, 2000, 2);
    const std::vector<int> ns{0, 2, 4, 6, 8};

    const auto flat = mixing_correlation(f, mu, dict.function(0), dict.function(5), ns, 256, 1);
    for (double v : flat.values)
        CHECK(std::abs(v) <= 1e-10);

    const auto centred = mixing_correlation(f, mu, dict.function(3), dict.function(0), ns, 256, 1);
    CHECK(std::abs(centred.values.back()) < std::abs(centred.values[1]));

    const auto rep = mixing_correlation(f, mu, dict.function(2), dict.function(7), ns, 256, 1);
    CHECK_FALSE(rep.monte_carlo);
    CHECK(std::abs(rep.values[0] - (pair(mu, [&](const SpherePoint& p) {
                                          return dict.evaluate(2, p) * dict.evaluate(7, p);
                                      }) - pair(mu, dict.function(2)) * pair(mu, dict.function(7)))) < 1e-12);
    const double floor = 0.01;
    for (std::size_t k = 1; k < rep.values.size(); ++k)
        CHECK(std::abs(rep.values[k]) <= std::abs(rep.values[k - 1]) + floor);

    const auto capped = mixing_correlation(f, mu, dict.function(2), dict.function(7), ns, 64, 1);
    CHECK(capped.monte_carlo);
}

TEST_CASE("density rendering")
{
    SUBCASE("a Dirac mass at 0 lights the centre of the left disk")
    {
        const auto img = render_density(PointCloudMeasure::dirac(SpherePoint::affine(0.0)), 64, 1.0);
        CHECK(img.width == 128);
        const auto peak = std::max_element(img.pixels.begin(), img.pixels.end()) - img.pixels.begin();
        const int px = static_cast<int>(peak % img.width), py = static_cast<int>(peak / img.width);
        CHECK(std::abs(px - 32) <= 1);
        CHECK(std::abs(py - 32) <= 1);
        // nothing on the right disk, whose cap ends 10 degrees past the equator
        for (int y = 0; y < 64; ++y)
            for (int x = 64; x < 128; ++x)
                CHECK(img.pixels[static_cast<std::size_t>(y) * 128 + x] == 0);
    }
    SUBCASE("uniform cloud renders flat")
    {
        std::mt19937_64 gen(7);
        std::vector<SpherePoint> pts;
        for (int k = 0; k < 1000000; ++k)
            pts.push_back(random_point(gen));
        const auto img = render_density(PointCloudMeasure::uniform(pts), 64, 2.0);
        double lo = 1e300, hi = 0;
        for (std::size_t k = 0; k < img.density.size(); ++k)
            if (img.inside[k]) {
                lo = std::min(lo, img.density[k]);
                hi = std::max(hi, img.density[k]);
            }
        CHECK(hi / lo < 1.5);
        // a uniform probability measure has density 1 / (4 pi) per unit area
        CHECK(std::abs(hi - 1 / (4 * std::numbers::pi)) < 0.2 / (4 * std::numbers::pi));
    }
    SUBCASE("the map case shows a ring at the unit circle")
    {
        const auto sq = Correspondence::from_bipoly(square_map());
        const auto img = render_density(backward_cloud(sq, SpherePoint::affine(2.0), 12, 1 << 13, 1), 128, 1.5);
        // the equator sits at Lambert radius sqrt(2) of 2 sin(50 deg)
        const double rho = 64 * std::sqrt(2.0) / (2 * std::sin(50 * std::numbers::pi / 180));
        const auto at = [&](double x, double y) {
            return img.pixels[static_cast<std::size_t>(y) * 256 + static_cast<std::size_t>(x)];
        };
        CHECK(at(64 + rho, 64) > 50000);
        CHECK(at(64, 64 - rho) > 50000);
        CHECK(at(64, 64) == 0);
        CHECK(at(64 + 0.5 * rho, 64) == 0);
    }
}
