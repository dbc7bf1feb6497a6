#include "corrdyn/commands.hpp"
#include "corrdyn/dynamics.hpp"
#include "corrdyn/io.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/parallel.hpp"
#include "corrdyn/periodic.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>

namespace corrdyn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json point_json(const SpherePoint& p)
{
    if (p.is_infinity())
        return "inf";
    const cplx z = p.to_affine();
    return {z.real(), z.imag()};
}

json critical_json(const std::vector<CriticalValue>& vals)
{
    json arr = json::array();
    for (auto& v : vals)
        arr.push_back({{"value", point_json(v.value)},
                       {"witness", point_json(v.witness)},
                       {"fiber_multiplicity", v.fiber_multiplicity},
                       {"component_crossing", v.component_crossing}});
    return arr;
}

std::string fmt_point(const SpherePoint& p)
{
    if (p.is_infinity())
        return "inf";
    cplx z = p.to_affine();
    const double snap = 1e-12 * std::max(1.0, std::abs(z));
    z = {std::abs(z.real()) < snap ? 0.0 : z.real(), std::abs(z.imag()) < snap ? 0.0 : z.imag()};
    std::ostringstream os;
    os << std::setprecision(6) << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

struct LogFit {
    double slope = 0;
    double residual = 0;
};

LogFit log_linear(const std::vector<int>& ns, const std::vector<double>& v)
{
    const std::size_t k = ns.size();
    double xm = 0, ym = 0;
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        y[i] = std::log(std::max(std::abs(v[i]), 1e-300));
        xm += ns[i];
        ym += y[i];
    }
    xm /= static_cast<double>(k);
    ym /= static_cast<double>(k);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (ns[i] - xm) * (ns[i] - xm);
        sxy += (ns[i] - xm) * (y[i] - ym);
    }
    LogFit fit;
    fit.slope = sxy / sxx;
    double rss = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = y[i] - (ym + fit.slope * (ns[i] - xm));
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / static_cast<double>(k));
    return fit;
}

bool orbit_hypothesis_fails(const Correspondence& f, const Config& c)
{
    try {
        const auto cd = critical_values(f, c.policy);
        return critical_orbit_report(f, cd, c.analyze.horizon, c.policy, c.analyze.point_cap).hypothesis_violated();
    } catch (const Error&) {
        return true;
    }
}

class Run {
  public:
    Run(std::string dir) : dir_(std::move(dir)) {}

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
    void text(const std::string& name, const std::string& body)
    {
        write_text(path(name), body);
        add(name);
    }
    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
    void add(const std::string& name) { outputs_[name] = hex64(file_hash(path(name))); }
    json outputs() const { return outputs_; }

  private:
    std::string dir_;
    std::map<std::string, std::string> outputs_;
};

std::string tsv_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void cmd_analyze(const Config& c, Run& run, RunResult& res)
{
    const auto f = c.graph();
    const auto& p = c.policy;
    const auto cd = critical_values(f, p);
    const auto orbit = critical_orbit_report(f, cd, c.analyze.horizon, p, c.analyze.point_cap);
    json entries = json::array();
    for (auto& e : orbit.entries)
        entries.push_back({{"value", point_json(e.value)},
                           {"horizon", e.horizon},
                           {"periodic_detected", e.periodic_detected},
                           {"certified", e.certified},
                           {"near_return", e.near_return},
                           {"inconclusive", e.inconclusive},
                           {"component_crossing", e.component_crossing},
                           {"min_return_distance", e.min_return_distance}});
    json report = {{"d1", f.d1()},
                   {"d2", f.d2()},
                   {"b1", critical_json(cd.b1)},
                   {"b2", critical_json(cd.b2)},
                   {"orbit_report", {{"entries", entries}, {"hypothesis_violated", orbit.hypothesis_violated()}}},
                   {"delta_bound", delta_bound(f, cd)}};
    std::ostringstream out;
    out << "d1 = " << f.d1() << ", d2 = " << f.d2() << "\n";
    auto list = [&](const char* name, const std::vector<CriticalValue>& vals) {
        out << name << " = {";
        for (std::size_t k = 0; k < vals.size(); ++k)
            out << (k ? ", " : "") << fmt_point(vals[k].value) << (vals[k].component_crossing ? " (crossing)" : "");
        out << "}\n";
    };
    list("B1", cd.b1);
    list("B2", cd.b2);
    for (auto& e : orbit.entries)
        out << "orbit of " << fmt_point(e.value) << ": "
            << (e.periodic_detected ? (e.certified ? "periodic (certified)" : "periodic") : "no return")
            << (e.near_return && !e.periodic_detected ? ", near return" : "")
            << (e.inconclusive ? ", inconclusive" : "") << ", min return distance " << e.min_return_distance << "\n";
    out << "delta bound = " << delta_bound(f, cd) << "\n";
    try {
        const auto est = operator_norm_estimate(f, Direction::pullback, c.analyze.norm_iters, c.analyze.resolution,
                                                c.seed, p);
        const std::string verdict = est.weak_modularity_suspected ? "weak-modularity suspected" : "contracting";
        report["norm_estimate"] = {{"estimate", est.estimate},
                                   {"history", est.history},
                                   {"masked_fraction", est.masked_fraction},
                                   {"verdict", verdict}};
        out << "norm estimate = " << est.estimate << " (" << verdict << ")\n";
    } catch (const NumericError& e) {
        report["norm_estimate"] = {{"error", e.what()}};
        out << "norm estimate failed: " << e.what() << "\n";
    }
    res.hypothesis_unverified = orbit.hypothesis_violated();
    run.json_file("report.json", report);
    res.summary = out.str();
}

void cmd_equidistribute(const Config& c, Run& run, RunResult& res)
{
    const auto& e = c.equidistribute;
    const auto f = c.graph();
    const Correspondence g = e.direction == "plus" ? f : adjoint(f);
    const TestDictionary dict(e.dictionary_degree);
    std::vector<int> ns;
    for (int n = e.n_min; n <= e.n_max; ++n)
        ns.push_back(n);

    std::vector<std::vector<std::vector<double>>> mom(e.starts.size());
    std::ostringstream inv;
    inv << "n\tinvariance_residual\n";
    PointCloudMeasure first_final;
    for (std::size_t s = 0; s < e.starts.size(); ++s) {
        const auto clouds = backward_clouds(g, e.starts[s], ns, e.budget, c.seed, c.policy);
        for (std::size_t k = 0; k < ns.size(); ++k) {
            mom[s].push_back(moments(clouds[k], dict));
            if (e.save_all_clouds || ns[k] == e.n_max) {
                const std::string name = "cloud_s" + std::to_string(s) + "_n" + std::to_string(ns[k]) + ".cloud";
                write_cloud(run.path(name), clouds[k]);
                run.add(name);
            }
            if (s == 0)
                inv << ns[k] << '\t' << tsv_double(invariance_residual(g, clouds[k], dict, c.policy)) << '\n';
        }
        if (s == 0)
            first_final = clouds.back();
    }
    if (e.starts.size() >= 2) {
        std::ostringstream uni;
        uni << "n\tmax_pairwise_distance\n";
        for (std::size_t k = 0; k < ns.size(); ++k) {
            double worst = 0;
            for (std::size_t a = 0; a < e.starts.size(); ++a)
                for (std::size_t b = a + 1; b < e.starts.size(); ++b)
                    worst = std::max(worst, dual_lip_distance(mom[a][k], mom[b][k], dict));
            uni << ns[k] << '\t' << tsv_double(worst) << '\n';
        }
        run.text("uniformity.tsv", uni.str());
    }
    run.text("invariance.tsv", inv.str());

    const auto rate = rate_fit(g, e.starts.front(), e.n_min, e.n_max, dict, c.seed, e.budget, c.policy);
    res.hypothesis_unverified = rate.hypothesis_unverified;
    const std::string tag = rate.hypothesis_unverified ? "_unverified" : "";
    run.json_file("rate" + tag + ".json", {{"ns", rate.ns},
                                           {"distances", rate.distances},
                                           {"reference_n", rate.reference_n},
                                           {"lambda", rate.lambda},
                                           {"lambda_band", {rate.lambda_low, rate.lambda_high}},
                                           {"fit_residual", rate.residual},
                                           {"unreliable", rate.unreliable},
                                           {"hypothesis_unverified", rate.hypothesis_unverified},
                                           {"monte_carlo", rate.monte_carlo}});
    write_pgm(run.path("density" + tag + ".pgm"), render_density(first_final, e.raster_resolution, e.bandwidth));
    run.add("density" + tag + ".pgm");

    std::ostringstream out;
    out << "lambda = " << rate.lambda << " [" << rate.lambda_low << ", " << rate.lambda_high << "], fit residual "
        << rate.residual << (rate.unreliable ? " (unreliable)" : "") << "\n";
    if (rate.hypothesis_unverified)
        out << "hypothesis unverified: a critical value may be periodic\n";
    res.summary = out.str();
}

void cmd_spectra(const Config& c, Run& run, RunResult& res)
{
    const auto f = c.graph();
    json report = json::object();
    std::ostringstream out;
    for (auto [name, dir] : {std::pair{"pullback", Direction::pullback}, std::pair{"pushforward", Direction::pushforward}}) {
        if (c.spectra.direction != "both" && c.spectra.direction != name)
            continue;
        const auto est = operator_norm_estimate(f, dir, c.spectra.iters, c.spectra.resolution, c.seed, c.policy);
        std::ostringstream tsv;
        tsv << "iteration\tratio\n";
        for (std::size_t k = 0; k < est.history.size(); ++k)
            tsv << k + 1 << '\t' << tsv_double(est.history[k]) << '\n';
        run.text(std::string("norms_") + name + ".tsv", tsv.str());
        const std::string verdict = est.weak_modularity_suspected ? "weak-modularity suspected" : "contracting";
        report[name] = {{"estimate", est.estimate}, {"masked_fraction", est.masked_fraction}, {"verdict", verdict}};
        out << name << ": " << est.estimate << " (" << verdict << ")\n";
    }
    run.json_file("spectra.json", report);
    res.summary = out.str();
}

void cmd_mixing(const Config& c, Run& run, RunResult& res)
{
    const auto& m = c.mixing;
    const auto f = c.graph();
    const auto& dict = default_dictionary();
    const auto mu = backward_cloud(f, m.start, m.cloud_n, m.cloud_budget, c.seed, c.policy);
    std::vector<int> ns;
    for (int n = 0; n <= m.n_max; ++n)
        ns.push_back(n);
    std::ostringstream tsv, out;
    tsv << "phi\tpsi\tn\tI_n\n";
    json pairs = json::array();
    for (auto [a, b] : m.pairs) {
        const auto rep = mixing_correlation(f, mu, dict.function(static_cast<std::size_t>(a)),
                                            dict.function(static_cast<std::size_t>(b)), ns, m.per_atom_budget,
                                            c.seed, c.policy);
        for (std::size_t k = 0; k < ns.size(); ++k)
            tsv << a << '\t' << b << '\t' << ns[k] << '\t' << tsv_double(rep.values[k]) << '\n';
        std::vector<int> tail(ns.begin() + 2, ns.end());
        std::vector<double> vals(rep.values.begin() + 2, rep.values.end());
        const auto fit = log_linear(tail, vals);
        pairs.push_back({{"phi", dict.label(static_cast<std::size_t>(a))},
                         {"psi", dict.label(static_cast<std::size_t>(b))},
                         {"values", rep.values},
                         {"slope", fit.slope},
                         {"fit_residual", fit.residual},
                         {"monte_carlo", rep.monte_carlo}});
        out << dict.label(static_cast<std::size_t>(a)) << " x " << dict.label(static_cast<std::size_t>(b))
            << ": |I_2| = " << std::abs(rep.values[2]) << ", |I_" << m.n_max << "| = " << std::abs(rep.values.back())
            << ", slope " << fit.slope << "\n";
    }
    run.text("mixing.tsv", tsv.str());
    res.hypothesis_unverified = orbit_hypothesis_fails(f, c);
    run.json_file("mixing.json", {{"pairs", pairs}, {"hypothesis_unverified", res.hypothesis_unverified}});
    res.summary = out.str();
}

void cmd_periodic(const Config& c, Run& run, RunResult& res)
{
    const auto& pc = c.periodic;
    const auto f = c.graph();
    const auto mu = backward_cloud(f, pc.start, pc.reference_n, pc.budget, c.seed, c.policy);
    const auto& dict = default_dictionary();
    json periods = json::array();
    std::ostringstream out;
    for (int n : pc.periods) {
        const auto rep = periodic_points(f, n, c.policy);
        const std::string name = "periodic_n" + std::to_string(n) + ".tsv";
        write_periodic_tsv(run.path(name), rep);
        run.add(name);
        std::map<std::string, int> classes{{"repelling", 0}, {"attracting", 0}, {"neutral", 0}};
        std::vector<SpherePoint> repelling;
        for (auto& p : rep.points) {
            classes[to_string(p.cls)] += p.multiplicity;
            if (p.cls == PointClass::repelling)
                for (int k = 0; k < p.multiplicity; ++k)
                    repelling.push_back(p.point);
        }
        const double fraction = rep.isolated_count() ? double(classes["repelling"]) / rep.isolated_count() : 0.0;
        json entry = {{"period", n},
                      {"total_count", rep.total_count()},
                      {"isolated_count", rep.isolated_count()},
                      {"diagonal_components", rep.diagonal_components},
                      {"classes", classes},
                      {"repelling_fraction", fraction}};
        if (!repelling.empty())
            entry["repelling_distance_to_mu_plus"] =
                dual_lip_distance(PointCloudMeasure::uniform(repelling), mu, dict);
        periods.push_back(entry);
        out << "n = " << n << ": " << rep.total_count() << " with multiplicity (" << rep.diagonal_components
            << " diagonal), repelling " << classes["repelling"] << ", attracting " << classes["attracting"]
            << ", neutral " << classes["neutral"] << "\n";
    }
    run.json_file("periodic.json", {{"periods", periods}});
    res.summary = out.str();
}

void cmd_render(const Config& c, Run& run, RunResult& res)
{
    const auto& r = c.render;
    PointCloudMeasure mu;
    if (!r.cloud.empty()) {
        mu = read_cloud(r.cloud);
    } else {
        const auto f = c.graph();
        mu = r.direction == "plus" ? backward_cloud(f, r.start, r.n, r.budget, c.seed, c.policy)
                                   : forward_cloud(f, r.start, r.n, r.budget, c.seed, c.policy);
    }
    const auto img = render_density(mu, r.resolution, r.bandwidth);
    write_pgm(run.path("density.pgm"), img);
    run.add("density.pgm");
    double peak = 0;
    for (double v : img.density)
        peak = std::max(peak, v);
    run.json_file("render.json", {{"width", img.width}, {"height", img.height}, {"peak_density", peak},
                                  {"atoms", mu.size()}});
    res.summary = "density.pgm " + std::to_string(img.width) + "x" + std::to_string(img.height) + "\n";
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"analyze", "equidistribute", "spectra", "mixing", "periodic", "render"};
    return names;
}

std::string run_key(const std::string& command, const Config& config)
{
    return command + "-" + hex64(fnv1a(command + "\n" + serialize_config(config)));
}

RunResult run_command(const std::string& command, const Config& config, const std::string& out_root, bool serial)
{
    const auto start = std::chrono::steady_clock::now();
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ConfigError("unknown command '" + command + "'");
    RunResult res;
    res.directory = (fs::path(out_root) / run_key(command, config)).string();
    fs::create_directories(res.directory);
    Run run(res.directory);
    if (command == "analyze")
        cmd_analyze(config, run, res);
    else if (command == "equidistribute")
        cmd_equidistribute(config, run, res);
    else if (command == "spectra")
        cmd_spectra(config, run, res);
    else if (command == "mixing")
        cmd_mixing(config, run, res);
    else if (command == "periodic")
        cmd_periodic(config, run, res);
    else if (command == "render")
        cmd_render(config, run, res);
    else
        throw ConfigError("unknown command '" + command + "'");

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {{"manifest_version", 1},
                           {"command", command},
                           {"tool_version", tool_version},
                           {"config", json::parse(serialize_config(config))},
                           {"run_key", run_key(command, config)},
                           {"correspondence_hash", hex64(correspondence_hash(config.graph()))},
                           {"seed", config.seed},
                           {"serial", serial},
                           {"threads", serial ? 1u : thread_count()},
                           {"hypothesis_unverified", res.hypothesis_unverified},
                           {"wall_clock_seconds", secs},
                           {"outputs", run.outputs()}};
    write_text(run.path("manifest.json"), manifest.dump(2) + "\n");
    return res;
}

} // namespace corrdyn
