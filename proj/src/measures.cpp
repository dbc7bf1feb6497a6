#include "corrdyn/measures.hpp"
#include "corrdyn/dynamics.hpp"
#include "corrdyn/parallel.hpp"
#include "corrdyn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace corrdyn {

namespace {

constexpr std::size_t block_atoms = 4096;

Vec3 normalize(Vec3 v)
{
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

std::vector<Vec3> fibonacci_sphere(std::size_t n)
{
    std::vector<Vec3> pts(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(k);
        pts[k] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return pts;
}

// Per-atom values summed in fixed blocks so the result does not depend on the thread count.
template <class AtomFn>
std::vector<double> blocked_moments(std::size_t atoms, std::size_t width, AtomFn&& atom)
{
    const std::size_t blocks = (atoms + block_atoms - 1) / block_atoms;
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(width, 0.0));
    parallel_for(blocks, [&](std::size_t b) {
        std::vector<double> vals(width);
        const std::size_t hi = std::min(atoms, (b + 1) * block_atoms);
        for (std::size_t i = b * block_atoms; i < hi; ++i) {
            atom(i, vals.data());
            for (std::size_t m = 0; m < width; ++m)
                partial[b][m] += vals[m];
        }
    }, blocks >= 2 ? thread_count() : 1);
    std::vector<double> out(width, 0.0);
    std::vector<double> col(blocks);
    for (std::size_t m = 0; m < width; ++m) {
        for (std::size_t b = 0; b < blocks; ++b)
            col[b] = partial[b][m];
        out[m] = stable_sum(col);
    }
    return out;
}

double max_normalized(const std::vector<double>& diff, const TestDictionary& dict)
{
    if (dict.size() < 2)
        throw DomainError("empty test dictionary");
    double best = 0;
    for (std::size_t m = 1; m < dict.size(); ++m)
        best = std::max(best, std::abs(diff[m]) / dict.lip(m));
    return best;
}

} // namespace

TestDictionary::TestDictionary(int degree) : degree_(degree)
{
    if (degree < 0)
        throw DomainError("dictionary degree must be nonnegative");
    const int l_max = degree;
    norm_.assign(static_cast<std::size_t>((l_max + 1) * (l_max + 1)), 0.0);
    for (int l = 0; l <= l_max; ++l)
        for (int m = 0; m <= l; ++m) {
            double ratio = 1; // (l - m)! / (l + m)!
            for (int k = l - m + 1; k <= l + m; ++k)
                ratio /= k;
            norm_[static_cast<std::size_t>(l * (l_max + 1) + m)] =
                std::sqrt((2 * l + 1) / (4 * std::numbers::pi) * ratio) * (m > 0 ? std::sqrt(2.0) : 1.0);
        }

    // Lipschitz constants and sup norms from the tangential gradient on a dense lattice
    const std::size_t count = static_cast<std::size_t>((l_max + 1) * (l_max + 1));
    lip_.assign(count, 0.0);
    sup_.assign(count, 0.0);
    const auto pts = fibonacci_sphere(100000);
    const double h = 1e-5;
    std::vector<double> f0(count), fp(count), fm(count), grad2(count);
    for (const Vec3& u : pts) {
        const Vec3 ref = std::abs(u[2]) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        const Vec3 e1 = normalize({ref[1] * u[2] - ref[2] * u[1], ref[2] * u[0] - ref[0] * u[2],
                                   ref[0] * u[1] - ref[1] * u[0]});
        const Vec3 e2{u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2], u[0] * e1[1] - u[1] * e1[0]};
        evaluate_all(u, f0.data());
        std::fill(grad2.begin(), grad2.end(), 0.0);
        for (const Vec3& e : {e1, e2}) {
            evaluate_all(normalize({u[0] + h * e[0], u[1] + h * e[1], u[2] + h * e[2]}), fp.data());
            evaluate_all(normalize({u[0] - h * e[0], u[1] - h * e[1], u[2] - h * e[2]}), fm.data());
            for (std::size_t m = 0; m < count; ++m) {
                const double g = (fp[m] - fm[m]) / (2 * h);
                grad2[m] += g * g;
            }
        }
        for (std::size_t m = 0; m < count; ++m) {
            lip_[m] = std::max(lip_[m], std::sqrt(grad2[m]));
            sup_[m] = std::max(sup_[m], std::abs(f0[m]));
        }
    }
    for (auto& l : lip_)
        l *= 1.01;
    lip_[0] = 0;
}

void TestDictionary::evaluate_all(const Vec3& u, double* out) const
{
    const int lm = degree_;
    const double t = u[2];
    // (x + i y)^m carries the sin^m factor, so the Legendre part is a plain polynomial in t
    cplx power{1.0, 0.0};
    const cplx xy{u[0], u[1]};
    for (int m = 0; m <= lm; ++m) {
        double a_prev = 0;
        double a = 1; // (2m - 1)!!
        for (int k = 1; k <= m; ++k)
            a *= 2 * k - 1;
        for (int l = m; l <= lm; ++l) {
            if (l == m + 1) {
                const double next = t * (2 * m + 1) * a;
                a_prev = a;
                a = next;
            } else if (l > m + 1) {
                const double next = (t * (2 * l - 1) * a - (l + m - 1) * a_prev) / (l - m);
                a_prev = a;
                a = next;
            }
            const double base = norm_[static_cast<std::size_t>(l * (lm + 1) + m)] * a;
            const std::size_t centre = static_cast<std::size_t>(l * l + l);
            if (m == 0) {
                out[centre] = base;
            } else {
                out[centre + m] = base * power.real();
                out[centre - m] = base * power.imag();
            }
        }
        power *= xy;
    }
}

std::vector<double> TestDictionary::evaluate_all(const SpherePoint& p) const
{
    std::vector<double> out(size());
    evaluate_all(p.unit_vector(), out.data());
    return out;
}

double TestDictionary::evaluate(std::size_t m, const SpherePoint& p) const
{
    return evaluate_all(p)[m];
}

std::function<double(const SpherePoint&)> TestDictionary::function(std::size_t m) const
{
    if (m >= size())
        throw DomainError("dictionary index out of range");
    return [this, m](const SpherePoint& p) { return evaluate(m, p); };
}

std::string TestDictionary::label(std::size_t m) const
{
    const int l = static_cast<int>(std::sqrt(static_cast<double>(m)));
    const int k = static_cast<int>(m) - l * l - l;
    return "Y" + std::to_string(l) + (k < 0 ? ",s" : ",c") + std::to_string(std::abs(k));
}

const TestDictionary& default_dictionary()
{
    static const TestDictionary dict(8);
    return dict;
}

double pair(const PointCloudMeasure& mu, const std::function<double(const SpherePoint&)>& phi)
{
    return blocked_moments(mu.size(), 1, [&](std::size_t i, double* v) {
        v[0] = mu.weights()[i] * phi(mu.points()[i]);
    })[0];
}

std::vector<double> moments(const PointCloudMeasure& mu, const TestDictionary& dict)
{
    const std::size_t width = dict.size();
    return blocked_moments(mu.size(), width, [&](std::size_t i, double* v) {
        dict.evaluate_all(mu.points()[i].unit_vector(), v);
        for (std::size_t m = 0; m < width; ++m)
            v[m] *= mu.weights()[i];
    });
}

double dual_lip_distance(const std::vector<double>& mu_moments, const std::vector<double>& nu_moments,
                         const TestDictionary& dict)
{
    std::vector<double> diff(dict.size());
    for (std::size_t m = 0; m < diff.size(); ++m)
        diff[m] = mu_moments[m] - nu_moments[m];
    return max_normalized(diff, dict);
}

double dual_lip_distance(const PointCloudMeasure& mu, const PointCloudMeasure& nu, const TestDictionary& dict)
{
    if (dict.size() < 2)
        throw DomainError("empty test dictionary");
    return dual_lip_distance(moments(mu, dict), moments(nu, dict), dict);
}

double invariance_residual(const Correspondence& f, const PointCloudMeasure& mu, const TestDictionary& dict,
                           const NumericPolicy& policy)
{
    if (dict.size() < 2)
        throw DomainError("empty test dictionary");
    const std::size_t width = dict.size();
    const auto lifted = blocked_moments(mu.size(), width, [&](std::size_t i, double* v) {
        std::vector<double> tmp(width);
        std::fill(v, v + width, 0.0);
        const auto pre = f.preimages(mu.points()[i], policy);
        for (auto& x : pre) {
            dict.evaluate_all(x.unit_vector(), tmp.data());
            for (std::size_t m = 0; m < width; ++m)
                v[m] += tmp[m];
        }
        const double s = mu.weights()[i] / static_cast<double>(pre.size());
        for (std::size_t m = 0; m < width; ++m)
            v[m] *= s;
    });
    return dual_lip_distance(lifted, moments(mu, dict), dict);
}

RateReport rate_fit(const Correspondence& f, const SpherePoint& a, int n_lo, int n_hi, const TestDictionary& dict,
                    std::uint64_t seed, std::size_t budget, const NumericPolicy& policy)
{
    if (n_lo < 0 || n_hi - n_lo < 2)
        throw DomainError("rate_fit needs at least three depths");
    RateReport rep;
    try {
        const auto cv = critical_values(f, policy);
        rep.hypothesis_unverified = critical_orbit_report(f, cv, 10, policy).hypothesis_violated();
    } catch (const Error&) {
        rep.hypothesis_unverified = true;
    }

    rep.reference_n = n_hi + 4;
    std::vector<int> depths;
    for (int n = n_lo; n <= n_hi; ++n)
        depths.push_back(n);
    depths.push_back(rep.reference_n);
    const auto clouds = backward_clouds(f, a, depths, budget, seed, policy);
    const auto ref = moments(clouds.back(), dict);
    for (std::size_t k = 0; k + 1 < depths.size(); ++k) {
        rep.ns.push_back(depths[k]);
        rep.distances.push_back(dual_lip_distance(moments(clouds[k], dict), ref, dict));
    }
    rep.monte_carlo = clouds.back().meta().monte_carlo;

    const double floor = rep.monte_carlo ? 3.0 / std::sqrt(static_cast<double>(budget)) : 1e-12;
    for (std::size_t k = 1; k < rep.distances.size(); ++k)
        if (rep.distances[k] > 1.1 * rep.distances[k - 1] + floor)
            rep.unreliable = true;

    const std::size_t k = rep.ns.size();
    double xm = 0, ym = 0;
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        y[i] = std::log(std::max(rep.distances[i], 1e-300));
        xm += rep.ns[i];
        ym += y[i];
    }
    xm /= static_cast<double>(k);
    ym /= static_cast<double>(k);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (rep.ns[i] - xm) * (rep.ns[i] - xm);
        sxy += (rep.ns[i] - xm) * (y[i] - ym);
    }
    const double slope = sxy / sxx;
    double rss = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = y[i] - (ym + slope * (rep.ns[i] - xm));
        rss += r * r;
    }
    const double se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
    rep.lambda = std::exp(slope);
    rep.lambda_low = std::exp(slope - 2 * se);
    rep.lambda_high = std::exp(slope + 2 * se);
    rep.residual = std::sqrt(rss / static_cast<double>(k));
    return rep;
}

MixingReport mixing_correlation(const Correspondence& f, const PointCloudMeasure& mu,
                                const std::function<double(const SpherePoint&)>& phi,
                                const std::function<double(const SpherePoint&)>& psi, const std::vector<int>& ns,
                                std::size_t per_atom_budget, std::uint64_t seed, const NumericPolicy& policy)
{
    if (per_atom_budget < 1)
        throw DomainError("mixing_correlation needs a positive budget");
    int n_max = 0;
    for (int n : ns) {
        if (n < 0)
            throw DomainError("mixing_correlation needs n >= 0");
        n_max = std::max(n_max, n);
    }
    const auto atoms = mu.compressed();
    const std::size_t d = static_cast<std::size_t>(f.d2());
    std::size_t leaves = 1;
    int exact_depth = 0;
    while (exact_depth < n_max && leaves * d <= per_atom_budget) {
        leaves *= d;
        ++exact_depth;
    }
    MixingReport rep;
    rep.ns = ns;
    rep.monte_carlo = exact_depth < n_max;

    // level means of phi along each atom's preimage tree, depth 0..n_max
    const std::size_t width = static_cast<std::size_t>(n_max) + 1;
    const CounterRng rng(seed);
    const auto lifted = blocked_moments(atoms.size(), width + 2, [&](std::size_t i, double* v) {
        const SpherePoint& p = atoms.points()[i];
        const double w = atoms.weights()[i];
        std::vector<double> level(width, 0.0);
        std::vector<SpherePoint> layer{p};
        level[0] = phi(p);
        for (int n = 1; n <= exact_depth; ++n) {
            std::vector<SpherePoint> next;
            next.reserve(layer.size() * d);
            for (auto& x : layer)
                for (auto& y : f.preimages(x, policy))
                    next.push_back(y);
            layer = std::move(next);
            double s = 0;
            for (auto& x : layer)
                s += phi(x);
            level[static_cast<std::size_t>(n)] = s / static_cast<double>(layer.size());
        }
        if (exact_depth < n_max) {
            // random continuations, stratified over the exact layer
            std::vector<double> sums(width, 0.0);
            for (std::size_t k = 0; k < per_atom_budget; ++k) {
                SpherePoint x = layer[k * layer.size() / per_atom_budget];
                const std::uint64_t particle = i * per_atom_budget + k;
                for (int n = exact_depth + 1; n <= n_max; ++n) {
                    const auto pre = f.preimages(x, policy);
                    x = pre[rng.index(static_cast<std::uint32_t>(pre.size()), particle,
                                      static_cast<std::uint32_t>(n), 4)];
                    sums[static_cast<std::size_t>(n)] += phi(x);
                }
            }
            for (int n = exact_depth + 1; n <= n_max; ++n)
                level[static_cast<std::size_t>(n)] = sums[static_cast<std::size_t>(n)] /
                                                     static_cast<double>(per_atom_budget);
        }
        const double ps = psi(p);
        for (std::size_t n = 0; n < width; ++n)
            v[n] = w * level[n] * ps;
        v[width] = w * level[0];
        v[width + 1] = w * ps;
    });
    const double mean_phi = lifted[width], mean_psi = lifted[width + 1];
    for (int n : ns)
        rep.values.push_back(lifted[static_cast<std::size_t>(n)] - mean_phi * mean_psi);
    return rep;
}

DensityImage render_density(const PointCloudMeasure& mu, int resolution, double bandwidth_px)
{
    if (resolution < 8 || resolution > 4096)
        throw DomainError("render resolution must lie in [8, 4096]");
    if (!(bandwidth_px >= 0))
        throw DomainError("render bandwidth must be nonnegative");
    const int r = resolution;
    DensityImage img;
    img.width = 2 * r;
    img.height = r;
    const std::size_t npx = static_cast<std::size_t>(img.width) * r;

    // each disk shows a cap of polar radius 100 degrees around its centre
    const double cap = 100.0 * std::numbers::pi / 180.0;
    const double rho_max = 2.0 * std::sin(cap / 2);
    const double px_per_unit = r / (2.0 * rho_max);
    const double pixel_area = 1.0 / (px_per_unit * px_per_unit);

    auto to_pixel = [&](const Vec3& u, int panel, double& px, double& py) {
        // Lambert azimuthal equal-area around the south pole (panel 0) or north pole (panel 1)
        const double depth = panel == 0 ? 1.0 + u[2] : 1.0 - u[2];
        if (2.0 * depth > rho_max * rho_max)
            return false;
        const double s = std::sqrt(2.0 / (2.0 - depth));
        const double ex = s * u[0], ey = panel == 0 ? s * u[1] : -s * u[1];
        px = (ex + rho_max) * px_per_unit + panel * r;
        py = (rho_max - ey) * px_per_unit;
        return true;
    };

    std::vector<double> hist(npx, 0.0), cover(npx, 0.0);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        const Vec3 u = mu.points()[k].unit_vector();
        for (int panel = 0; panel < 2; ++panel) {
            double px, py;
            if (!to_pixel(u, panel, px, py))
                continue;
            const int ix = std::clamp(static_cast<int>(px), panel * r, panel * r + r - 1);
            const int iy = std::clamp(static_cast<int>(py), 0, r - 1);
            hist[static_cast<std::size_t>(iy) * img.width + ix] += mu.weights()[k];
        }
    }
    img.inside.assign(npx, 0);
    constexpr int sub = 4;
    for (int iy = 0; iy < r; ++iy)
        for (int ix = 0; ix < img.width; ++ix) {
            const double cx = (ix % r + 0.5) / px_per_unit - rho_max, cy = rho_max - (iy + 0.5) / px_per_unit;
            img.inside[static_cast<std::size_t>(iy) * img.width + ix] = std::hypot(cx, cy) <= rho_max;
            int hits = 0;
            for (int a = 0; a < sub; ++a)
                for (int b = 0; b < sub; ++b) {
                    const double sx = (ix % r + (a + 0.5) / sub) / px_per_unit - rho_max;
                    const double sy = rho_max - (iy + (b + 0.5) / sub) / px_per_unit;
                    hits += std::hypot(sx, sy) <= rho_max;
                }
            cover[static_cast<std::size_t>(iy) * img.width + ix] = hits / double(sub * sub);
        }

    // separable Gaussian within each panel, normalized by the smoothed coverage
    auto blur = [&](std::vector<double> v) {
        if (bandwidth_px <= 0)
            return v;
        const int half = static_cast<int>(std::ceil(3 * bandwidth_px));
        std::vector<double> kern(static_cast<std::size_t>(2 * half + 1));
        for (int k = -half; k <= half; ++k)
            kern[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * k * k / (bandwidth_px * bandwidth_px));
        std::vector<double> tmp(npx, 0.0);
        for (int iy = 0; iy < r; ++iy)
            for (int ix = 0; ix < img.width; ++ix) {
                const int lo = (ix / r) * r;
                double s = 0;
                for (int k = -half; k <= half; ++k) {
                    const int jx = ix + k;
                    if (jx >= lo && jx < lo + r)
                        s += kern[static_cast<std::size_t>(k + half)] * v[static_cast<std::size_t>(iy) * img.width + jx];
                }
                tmp[static_cast<std::size_t>(iy) * img.width + ix] = s;
            }
        for (int iy = 0; iy < r; ++iy)
            for (int ix = 0; ix < img.width; ++ix) {
                double s = 0;
                for (int k = -half; k <= half; ++k) {
                    const int jy = iy + k;
                    if (jy >= 0 && jy < r)
                        s += kern[static_cast<std::size_t>(k + half)] * tmp[static_cast<std::size_t>(jy) * img.width + ix];
                }
                v[static_cast<std::size_t>(iy) * img.width + ix] = s;
            }
        return v;
    };
    const auto num = blur(hist);
    const auto den = blur(cover);
    img.density.assign(npx, 0.0);
    double peak = 0;
    for (std::size_t k = 0; k < npx; ++k)
        if (img.inside[k] && den[k] > 0) {
            img.density[k] = num[k] / (den[k] * pixel_area);
            peak = std::max(peak, img.density[k]);
        }

    img.pixels.assign(npx, 0);
    if (peak > 0) {
        const double floor = 1e-4 * peak;
        const double top = std::log1p(peak / floor);
        for (std::size_t k = 0; k < npx; ++k)
            if (img.inside[k])
                img.pixels[k] = static_cast<std::uint16_t>(std::lround(65535.0 * std::log1p(img.density[k] / floor) / top));
    }
    return img;
}

} // namespace corrdyn
