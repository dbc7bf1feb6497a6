#pragma once

#include "corrdyn/cloud.hpp"
#include "corrdyn/correspondence.hpp"
#include "corrdyn/grid.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace corrdyn {

/// d2^-1 f^* delta_a: the preimages of a, each with weight 1 / d2.
PointCloudMeasure pullback_dirac(const Correspondence& f, const SpherePoint& a,
                                 const NumericPolicy& policy = {});

/// d^-n (f^n)^* delta_a. Exact tree while it fits in max_atoms, then one uniform
/// backward branch per particle and step, drawn from the counter-based generator.
PointCloudMeasure backward_cloud(const Correspondence& f, const SpherePoint& a, int n,
                                 std::size_t max_atoms, std::uint64_t seed,
                                 const NumericPolicy& policy = {});

/// backward_cloud at several depths from one pass; entry k equals backward_cloud(f, a, ns[k], ...).
std::vector<PointCloudMeasure> backward_clouds(const Correspondence& f, const SpherePoint& a,
                                               const std::vector<int>& ns, std::size_t max_atoms,
                                               std::uint64_t seed, const NumericPolicy& policy = {});

/// d^-n (f^n)_* delta_a, the backward cloud of the adjoint.
PointCloudMeasure forward_cloud(const Correspondence& f, const SpherePoint& a, int n,
                                std::size_t max_atoms, std::uint64_t seed,
                                const NumericPolicy& policy = {});

/// Normalized d^-n (f^n)^* (alpha omega): budget grid nodes drawn by systematic sampling
/// in proportion to alpha, each carried back n steps along a random branch.
PointCloudMeasure pullback_form(const Correspondence& f, const GridField& alpha, int n,
                                std::size_t budget, std::uint64_t seed,
                                const NumericPolicy& policy = {});

/// (Lambda h)(y) = d2^-1 sum over x in f^-1(y) of h(x), at a single point.
double transfer_at(const Correspondence& f, const std::function<double(const SpherePoint&)>& h,
                   const SpherePoint& y, const NumericPolicy& policy = {});

/// Lambda h on every node, h interpolated bilinearly between nodes.
GridField transfer_apply(const Correspondence& f, const GridField& h, const NumericPolicy& policy = {});

/// Precomputed branches and chart factors for pulling back one-forms by f on a grid.
///
/// Nodes within mask_radius_factor / R (geodesic) of a critical value of the adjoint,
/// where a branch derivative blows up, are masked and contribute zero.
class OneformPlan {
  public:
    OneformPlan(const Correspondence& f, std::shared_ptr<const SphereGrid> grid,
                const NumericPolicy& policy = {});

    /// (1 / d1) f^* u.
    GridField apply(const GridField& u) const;
    double masked_fraction() const { return masked_fraction_; }
    const std::shared_ptr<const SphereGrid>& grid() const { return grid_; }
    int branches() const { return branches_; }

  private:
    struct Term {
        SphereGrid::Stencil stencil;
        cplx factor;
    };
    std::shared_ptr<const SphereGrid> grid_;
    int branches_;
    std::vector<Term> terms_; // branches_ per node
    double masked_fraction_ = 0;
};

/// One application of (1 / d1) f^*, building a plan on the fly.
GridField oneform_pullback(const Correspondence& f, const GridField& u, const NumericPolicy& policy = {});

/// Seeded smooth (1,0)-form u dz with u = sum c_ab conj(z)^a z^b / (1 + |z|^2)^(L + 2), a, b <= L.
GridField random_oneform(std::shared_ptr<const SphereGrid> grid, std::uint64_t seed, int degree = 4);

enum class Direction { pullback, pushforward };

struct NormEstimate {
    double estimate = 0;          // geometric mean of the last five growth ratios
    std::vector<double> history;  // growth ratio per iteration
    double masked_fraction = 0;
    bool weak_modularity_suspected = false; // estimate within 0.02 of 1
};

/// Power iteration of (1/d1) f^* (or (1/d2) f_* for pushforward) on L2 one-forms.
NormEstimate operator_norm_estimate(const Correspondence& f, Direction direction, int iters,
                                    int resolution, std::uint64_t seed,
                                    const NumericPolicy& policy = {});

} // namespace corrdyn
