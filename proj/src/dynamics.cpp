#include "corrdyn/dynamics.hpp"
#include "corrdyn/parallel.hpp"
#include "corrdyn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace corrdyn {

PointCloudMeasure pullback_dirac(const Correspondence& f, const SpherePoint& a, const NumericPolicy& policy)
{
    auto pts = f.preimages(a, policy);
    return PointCloudMeasure::uniform(std::move(pts), {0, 1, correspondence_hash(f), false});
}

std::vector<PointCloudMeasure> backward_clouds(const Correspondence& f, const SpherePoint& a,
                                               const std::vector<int>& ns, std::size_t max_atoms,
                                               std::uint64_t seed, const NumericPolicy& policy)
{
    if (max_atoms < 1)
        throw DomainError("backward_cloud needs a positive atom budget");
    int n_max = 0;
    for (int n : ns) {
        if (n < 0)
            throw DomainError("backward_cloud needs n >= 0");
        n_max = std::max(n_max, n);
    }
    const std::size_t d = static_cast<std::size_t>(f.d2());
    const std::uint64_t hash = correspondence_hash(f);
    std::vector<PointCloudMeasure> out(ns.size());
    auto snapshot = [&](int level, const std::vector<SpherePoint>& pts, const std::vector<double>& w, bool mc) {
        for (std::size_t k = 0; k < ns.size(); ++k)
            if (ns[k] == level)
                out[k] = PointCloudMeasure(pts, w, {seed, level, hash, mc});
    };

    std::vector<SpherePoint> atoms{a.canonical()};
    std::vector<double> weights{1.0};
    int level = 0;
    snapshot(0, atoms, weights, false);
    while (level < n_max && atoms.size() * d <= max_atoms) {
        std::vector<SpherePoint> next(atoms.size() * d);
        std::vector<double> nw(next.size());
        parallel_for(atoms.size(), [&](std::size_t k) {
            const auto pre = f.preimages(atoms[k], policy);
            for (std::size_t j = 0; j < d; ++j) {
                next[k * d + j] = pre[j];
                nw[k * d + j] = weights[k] / static_cast<double>(d);
            }
        });
        atoms = std::move(next);
        weights = std::move(nw);
        ++level;
        snapshot(level, atoms, weights, false);
    }
    if (level == n_max)
        return out;

    // stratified start: particle p continues atom p * M / B, sharing its weight
    const std::size_t m = atoms.size(), b = max_atoms;
    std::vector<std::size_t> count(m, 0);
    for (std::size_t p = 0; p < b; ++p)
        ++count[p * m / b];
    const CounterRng rng(seed);
    std::vector<SpherePoint> x(b);
    std::vector<double> w(b);
    for (std::size_t p = 0; p < b; ++p) {
        x[p] = atoms[p * m / b];
        w[p] = weights[p * m / b] / static_cast<double>(count[p * m / b]);
    }
    for (int step = level; step < n_max; ++step) {
        parallel_for(b, [&](std::size_t p) {
            const auto pre = f.preimages(x[p], policy);
            x[p] = pre[rng.index(static_cast<std::uint32_t>(pre.size()), p, static_cast<std::uint32_t>(step))];
        });
        snapshot(step + 1, x, w, true);
    }
    return out;
}

PointCloudMeasure backward_cloud(const Correspondence& f, const SpherePoint& a, int n, std::size_t max_atoms,
                                 std::uint64_t seed, const NumericPolicy& policy)
{
    return std::move(backward_clouds(f, a, {n}, max_atoms, seed, policy).front());
}

PointCloudMeasure forward_cloud(const Correspondence& f, const SpherePoint& a, int n, std::size_t max_atoms,
                                std::uint64_t seed, const NumericPolicy& policy)
{
    return backward_cloud(adjoint(f), a, n, max_atoms, seed, policy);
}

PointCloudMeasure pullback_form(const Correspondence& f, const GridField& alpha, int n, std::size_t budget,
                                std::uint64_t seed, const NumericPolicy& policy)
{
    if (budget < 1)
        throw DomainError("pullback_form needs a positive budget");
    const auto& grid = *alpha.grid;
    std::vector<double> cum(grid.size());
    double total = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double a = alpha.values[k].real();
        if (a < 0)
            throw DomainError("pullback_form needs a nonnegative density");
        total += a;
        cum[k] = total;
    }
    if (!(total > 0))
        throw DomainError("pullback_form: density has zero total mass");

    const CounterRng rng(seed);
    const double offset = rng.uniform(0, 0, 1);
    const std::size_t d = static_cast<std::size_t>(f.d2());
    std::vector<SpherePoint> out(budget);
    parallel_for(budget, [&](std::size_t p) {
        const double target = (static_cast<double>(p) + offset) / static_cast<double>(budget) * total;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
        k = std::min(k, grid.size() - 1);
        SpherePoint x = grid.node(k);
        for (int step = 0; step < n; ++step) {
            const auto pre = f.preimages(x, policy);
            x = pre[rng.index(static_cast<std::uint32_t>(d), p, static_cast<std::uint32_t>(step), 2)];
        }
        out[p] = x;
    });
    return PointCloudMeasure::uniform(std::move(out), {seed, n, correspondence_hash(f), true});
}

double transfer_at(const Correspondence& f, const std::function<double(const SpherePoint&)>& h,
                   const SpherePoint& y, const NumericPolicy& policy)
{
    double acc = 0;
    const auto pre = f.preimages(y, policy);
    for (auto& x : pre)
        acc += h(x);
    return acc / static_cast<double>(pre.size());
}

GridField transfer_apply(const Correspondence& f, const GridField& h, const NumericPolicy& policy)
{
    if (h.kind != FieldKind::function)
        throw DomainError("transfer_apply acts on functions");
    GridField out{h.grid, FieldKind::function, std::vector<cplx>(h.values.size())};
    parallel_for(h.grid->size(), [&](std::size_t k) {
        const auto pre = f.preimages(h.grid->node(k), policy);
        cplx acc{};
        for (auto& x : pre)
            acc += h.interpolate(x);
        out.values[k] = acc / static_cast<double>(pre.size());
    });
    return out;
}

OneformPlan::OneformPlan(const Correspondence& f, std::shared_ptr<const SphereGrid> grid,
                         const NumericPolicy& policy)
    : grid_(std::move(grid)), branches_(f.d1())
{
    std::vector<SpherePoint> blowup;
    if (f.d1() >= 2)
        for (auto& cv : critical_values(adjoint(f), policy).b2)
            blowup.push_back(cv.value);
    const double radius = policy.mask_radius_factor / grid_->resolution();

    const std::size_t nodes = grid_->size();
    terms_.resize(nodes * static_cast<std::size_t>(branches_));
    std::vector<char> masked(nodes, 0);
    parallel_for(nodes, [&](std::size_t k) {
        const SpherePoint& x = grid_->node(k);
        Term* t = &terms_[k * static_cast<std::size_t>(branches_)];
        bool mask = std::any_of(blowup.begin(), blowup.end(),
                                [&](const SpherePoint& c) { return sphere_distance(x, c) <= radius; });
        const auto ys = mask ? std::vector<SpherePoint>{} : f.images(x, policy);
        const cplx out_factor = oneform_to_stored(x) / static_cast<double>(branches_);
        for (int j = 0; j < branches_ && !mask; ++j) {
            const SpherePoint y = ys[j].canonical();
            const cplx s = f.slope(x, y);
            const cplx factor = out_factor * s / oneform_to_stored(y);
            if (!std::isfinite(std::abs(factor))) {
                mask = true;
                break;
            }
            t[j] = {grid_->stencil(y), factor};
        }
        if (mask) {
            masked[k] = 1;
            for (int j = 0; j < branches_; ++j)
                t[j] = {grid_->stencil(x), cplx{}};
        }
    });
    std::size_t count = 0;
    for (char m : masked)
        count += static_cast<std::size_t>(m);
    masked_fraction_ = static_cast<double>(count) / static_cast<double>(nodes);
    if (masked_fraction_ > policy.max_mask_fraction) {
        std::ostringstream msg;
        msg << "grid too coarse near critical set: " << masked_fraction_ * 100 << "% of nodes masked";
        throw NumericError(msg.str());
    }
}

GridField OneformPlan::apply(const GridField& u) const
{
    if (u.kind != FieldKind::oneform || u.grid.get() != grid_.get())
        throw DomainError("one-form plan applied to a field on another grid");
    GridField out{grid_, FieldKind::oneform, std::vector<cplx>(grid_->size())};
    parallel_for(grid_->size(), [&](std::size_t k) {
        cplx acc{};
        const Term* t = &terms_[k * static_cast<std::size_t>(branches_)];
        for (int j = 0; j < branches_; ++j) {
            cplx v{};
            for (int q = 0; q < 4; ++q)
                v += t[j].stencil.weight[q] * u.values[t[j].stencil.index[q]];
            acc += t[j].factor * v;
        }
        out.values[k] = acc;
    });
    return out;
}

GridField oneform_pullback(const Correspondence& f, const GridField& u, const NumericPolicy& policy)
{
    return OneformPlan(f, u.grid, policy).apply(u);
}

GridField random_oneform(std::shared_ptr<const SphereGrid> grid, std::uint64_t seed, int degree)
{
    const CounterRng rng(seed);
    const int l = degree;
    std::vector<cplx> c(static_cast<std::size_t>((l + 1) * (l + 1)));
    for (std::size_t k = 0; k < c.size(); ++k)
        c[k] = {rng.normal(k, 0, 3), rng.normal(k, 1, 3)};
    // v = u (1 + |z|^2) is evaluated in whichever chart keeps the powers bounded
    GridField f{grid, FieldKind::oneform, std::vector<cplx>(grid->size())};
    parallel_for(grid->size(), [&](std::size_t k) {
        const SpherePoint& p = grid->node(k);
        const cplx z = p.coord;
        const double g = 1.0 + std::norm(z);
        cplx v{};
        for (int a = 0; a <= l; ++a)
            for (int b = 0; b <= l; ++b) {
                const cplx coef = c[static_cast<std::size_t>(a * (l + 1) + b)];
                if (p.chart == 0) {
                    v += coef * std::pow(std::conj(z), a) * std::pow(z, b) / std::pow(g, l + 1);
                } else {
                    // z = 1/w: conj(z)^a z^b / (1+|z|^2)^(L+1) = conj(w)^(L+1-a) w^(L+1-b) / (1+|w|^2)^(L+1)
                    v += coef * std::pow(std::conj(z), l + 1 - a) * std::pow(z, l + 1 - b) / std::pow(g, l + 1);
                }
            }
        f.values[k] = v;
    });
    return f;
}

NormEstimate operator_norm_estimate(const Correspondence& f, Direction direction, int iters, int resolution,
                                    std::uint64_t seed, const NumericPolicy& policy)
{
    if (iters < 10)
        throw DomainError("operator_norm_estimate needs at least 10 iterations");
    auto grid = std::make_shared<const SphereGrid>(resolution);
    const OneformPlan plan(direction == Direction::pullback ? f : adjoint(f), grid, policy);
    GridField u = random_oneform(grid, seed);
    NormEstimate out;
    out.masked_fraction = plan.masked_fraction();
    double norm = u.l2_norm();
    for (int it = 0; it < iters; ++it) {
        for (auto& v : u.values)
            v /= norm;
        u = plan.apply(u);
        norm = u.l2_norm();
        out.history.push_back(norm);
        if (!(norm > 0))
            break;
    }
    const std::size_t k = std::min<std::size_t>(5, out.history.size());
    double logsum = 0;
    for (std::size_t i = out.history.size() - k; i < out.history.size(); ++i)
        logsum += std::log(out.history[i]);
    out.estimate = std::exp(logsum / static_cast<double>(k));
    out.weak_modularity_suspected = std::abs(out.estimate - 1.0) <= 0.02;
    return out;
}

} // namespace corrdyn
