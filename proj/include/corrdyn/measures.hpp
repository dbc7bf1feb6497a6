#pragma once

#include "corrdyn/cloud.hpp"
#include "corrdyn/correspondence.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace corrdyn {

/// Real spherical harmonics up to degree L on the unit sphere, the constant first.
///
/// Index m = l^2 + l + k for k in [-l, l]; k < 0 is the sine part, k > 0 the cosine part.
/// Lipschitz constants are with respect to great-circle distance.
class TestDictionary {
  public:
    explicit TestDictionary(int degree = 8);

    int degree() const { return degree_; }
    std::size_t size() const { return lip_.size(); }
    double lip(std::size_t m) const { return lip_[m]; }
    double sup(std::size_t m) const { return sup_[m]; }
    std::string label(std::size_t m) const;

    /// All functions at one point, in index order.
    void evaluate_all(const Vec3& u, double* out) const;
    std::vector<double> evaluate_all(const SpherePoint& p) const;
    double evaluate(std::size_t m, const SpherePoint& p) const;
    std::function<double(const SpherePoint&)> function(std::size_t m) const;

  private:
    int degree_;
    std::vector<double> norm_; // per (l, |k|)
    std::vector<double> lip_;
    std::vector<double> sup_;
};

/// The shared degree-8 dictionary.
const TestDictionary& default_dictionary();

/// sum w_i phi(p_i).
double pair(const PointCloudMeasure& mu, const std::function<double(const SpherePoint&)>& phi);

/// Pairings with every dictionary function, summed in a fixed order.
std::vector<double> moments(const PointCloudMeasure& mu, const TestDictionary& dict);

/// max over non-constant phi of |<mu - nu, phi>| / Lip(phi).
double dual_lip_distance(const PointCloudMeasure& mu, const PointCloudMeasure& nu, const TestDictionary& dict);
double dual_lip_distance(const std::vector<double>& mu_moments, const std::vector<double>& nu_moments,
                         const TestDictionary& dict);

/// max over non-constant phi of |<mu, Lambda phi> - <mu, phi>| / Lip(phi), with
/// Lambda phi solved exactly at every atom.
double invariance_residual(const Correspondence& f, const PointCloudMeasure& mu, const TestDictionary& dict,
                           const NumericPolicy& policy = {});

struct RateReport {
    std::vector<int> ns;
    std::vector<double> distances;
    int reference_n = 0;
    double lambda = 0;
    double lambda_low = 0; // slope -+ 2 standard errors
    double lambda_high = 0;
    double residual = 0;   // RMS of the log-linear fit
    bool unreliable = false;           // distances grow beyond the noise floor
    bool hypothesis_unverified = false; // a periodic critical value was certified or not checkable
    bool monte_carlo = false;
};

/// Distances of backward clouds at n_lo..n_hi to the cloud at n_hi + 4 (same seed),
/// and the exponential rate of a least-squares fit to their logarithms.
RateReport rate_fit(const Correspondence& f, const SpherePoint& a, int n_lo, int n_hi,
                    const TestDictionary& dict, std::uint64_t seed, std::size_t budget,
                    const NumericPolicy& policy = {});

struct MixingReport {
    std::vector<int> ns;
    std::vector<double> values; // I_n
    bool monte_carlo = false;
};

/// I_n = <mu, (Lambda^n phi) psi> - <mu, phi><mu, psi> for n in ns.
///
/// Lambda^n phi is the mean of phi over the depth-n preimage tree of each atom while the
/// tree has at most per_atom_budget leaves, otherwise over that many random branches.
MixingReport mixing_correlation(const Correspondence& f, const PointCloudMeasure& mu,
                                const std::function<double(const SpherePoint&)>& phi,
                                const std::function<double(const SpherePoint&)>& psi,
                                const std::vector<int>& ns, std::size_t per_atom_budget,
                                std::uint64_t seed, const NumericPolicy& policy = {});

/// Two Lambert equal-area disks side by side, centred at 0 (left) and infinity (right),
/// each reaching 10 degrees past the equator.
struct DensityImage {
    int width = 0;
    int height = 0;
    std::vector<double> density;        // smoothed mass per unit area, 0 off the disks
    std::vector<std::uint16_t> pixels;  // log-scaled intensity
    std::vector<char> inside;           // pixel centre lies on a disk
};

DensityImage render_density(const PointCloudMeasure& mu, int resolution, double bandwidth_px);

} // namespace corrdyn
