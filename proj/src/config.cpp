#include "corrdyn/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>

namespace corrdyn {

using nlohmann::json;

namespace {

json point_json(const SpherePoint& p)
{
    if (p.is_infinity())
        return "inf";
    if (p.chart == 0)
        return {p.coord.real(), p.coord.imag()};
    return {{"chart", 1}, {"coord", {p.coord.real(), p.coord.imag()}}};
}

// Reads the fields of one object, remembering which keys were consumed.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ConfigError("config field '" + join(key) + "': " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void get(const std::string& key, T& out)
    {
        if (!j_.contains(key))
            return;
        seen_.insert(key);
        const json& v = j_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                fail(key, "expected true or false");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                fail(key, "expected a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number())
                fail(key, "expected a number");
            out = v.get<double>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer())
                fail(key, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned())
                    out = v.get<T>();
                else if (v.get<long long>() >= 0)
                    out = static_cast<T>(v.get<long long>());
                else
                    fail(key, "expected a nonnegative integer");
            } else {
                out = v.get<T>();
            }
        }
    }

    void get_point(const std::string& key, SpherePoint& out)
    {
        if (!j_.contains(key))
            return;
        seen_.insert(key);
        out = parse_point(j_.at(key), key);
    }

    SpherePoint parse_point(const json& v, const std::string& key) const
    {
        if (v.is_string() && (v == "inf" || v == "infinity"))
            return SpherePoint::infinity();
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return SpherePoint::affine({v[0].get<double>(), v[1].get<double>()});
        if (v.is_object() && v.contains("chart") && v.contains("coord") && v.size() == 2) {
            const json& c = v.at("coord");
            if (v.at("chart").is_number_integer() && c.is_array() && c.size() == 2 && c[0].is_number() &&
                c[1].is_number()) {
                const int chart = v.at("chart").get<int>();
                if (chart == 0 || chart == 1)
                    return SpherePoint{chart, {c[0].get<double>(), c[1].get<double>()}}.canonical();
            }
        }
        fail(key, "expected [re, im], \"inf\" or {\"chart\": 0|1, \"coord\": [re, im]}");
    }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string join(const std::string& key) const
    {
        if (path_.empty())
            return key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(it.key(), "unknown field");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_policy(Section s, NumericPolicy& p)
{
    s.get("tol_root", p.tol_root);
    s.get("tol_cluster", p.tol_cluster);
    s.get("tol_multiplicity", p.tol_multiplicity);
    s.get("tol_lead", p.tol_lead);
    s.get("tol_trim", p.tol_trim);
    s.get("tol_content", p.tol_content);
    s.get("tol_gcd", p.tol_gcd);
    s.get("gcd_rank_gap", p.gcd_rank_gap);
    s.get("tol_fiber_collision", p.tol_fiber_collision);
    s.get("tol_periodic", p.tol_periodic);
    s.get("tol_near_return", p.tol_near_return);
    s.get("tol_neutral", p.tol_neutral);
    s.get("tol_diagonal", p.tol_diagonal);
    s.get("newton_steps", p.newton_steps);
    s.get("iterate_cap", p.iterate_cap);
    s.get("mask_radius_factor", p.mask_radius_factor);
    s.get("max_mask_fraction", p.max_mask_fraction);
    s.finish();
}

json policy_json(const NumericPolicy& p)
{
    return {{"tol_root", p.tol_root},
            {"tol_cluster", p.tol_cluster},
            {"tol_multiplicity", p.tol_multiplicity},
            {"tol_lead", p.tol_lead},
            {"tol_trim", p.tol_trim},
            {"tol_content", p.tol_content},
            {"tol_gcd", p.tol_gcd},
            {"gcd_rank_gap", p.gcd_rank_gap},
            {"tol_fiber_collision", p.tol_fiber_collision},
            {"tol_periodic", p.tol_periodic},
            {"tol_near_return", p.tol_near_return},
            {"tol_neutral", p.tol_neutral},
            {"tol_diagonal", p.tol_diagonal},
            {"newton_steps", p.newton_steps},
            {"iterate_cap", p.iterate_cap},
            {"mask_radius_factor", p.mask_radius_factor},
            {"max_mask_fraction", p.max_mask_fraction}};
}

void check(bool ok, const Section& s, const std::string& key, const std::string& what)
{
    if (!ok)
        s.fail(key, what);
}

std::string canonical_record(const json& j)
{
    try {
        if (j.contains("bidegree") || j.contains("coefficients"))
            return to_record(from_record(j.dump()));
        if (!j.contains("components"))
            throw ConfigError("config field 'correspondence': needs 'bidegree' and 'coefficients' or 'components'");
        std::vector<Component> comps;
        for (auto& cj : j.at("components")) {
            json pj = cj;
            const int mult = pj.value("multiplicity", 1);
            pj.erase("multiplicity");
            const auto part = from_record(pj.dump());
            comps.push_back({part.poly(), mult});
        }
        return to_record(Correspondence::from_components(comps));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config field 'correspondence': ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field 'correspondence': ") + e.what());
    }
}

} // namespace

Correspondence Config::graph() const { return from_record(correspondence); }

Config parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError("config syntax error at line " + std::to_string(line) + ": " + e.what());
    }
    if (root.is_object() && root.contains("manifest_version") && root.contains("config"))
        root = json(root.at("config"));

    Config c;
    Section top(root, "");
    if (!top.has("correspondence"))
        top.fail("correspondence", "missing");
    c.correspondence = canonical_record(top.raw("correspondence"));
    top.get("seed", c.seed);
    if (top.has("policy"))
        read_policy(Section(top.raw("policy"), "policy"), c.policy);

    if (top.has("analyze")) {
        Section s(top.raw("analyze"), "analyze");
        auto& a = c.analyze;
        s.get("horizon", a.horizon);
        s.get("point_cap", a.point_cap);
        s.get("norm_iters", a.norm_iters);
        s.get("resolution", a.resolution);
        check(a.horizon >= 1, s, "horizon", "must be positive");
        check(a.norm_iters >= 10, s, "norm_iters", "must be at least 10");
        check(a.resolution >= 8, s, "resolution", "must be at least 8");
        s.finish();
    }
    if (top.has("equidistribute")) {
        Section s(top.raw("equidistribute"), "equidistribute");
        auto& e = c.equidistribute;
        s.get("direction", e.direction);
        if (s.has("starts")) {
            const json& arr = s.raw("starts");
            check(arr.is_array() && !arr.empty(), s, "starts", "expected a nonempty list of points");
            e.starts.clear();
            for (auto& v : arr)
                e.starts.push_back(s.parse_point(v, "starts"));
        }
        s.get("n_min", e.n_min);
        s.get("n_max", e.n_max);
        s.get("budget", e.budget);
        s.get("dictionary_degree", e.dictionary_degree);
        s.get("save_all_clouds", e.save_all_clouds);
        s.get("raster_resolution", e.raster_resolution);
        s.get("bandwidth", e.bandwidth);
        check(e.direction == "plus" || e.direction == "minus", s, "direction", "expected \"plus\" or \"minus\"");
        check(e.n_min >= 0 && e.n_max - e.n_min >= 2, s, "n_max", "needs n_max >= n_min + 2 >= 2");
        check(e.budget >= 1, s, "budget", "must be positive");
        check(e.dictionary_degree >= 1, s, "dictionary_degree", "must be positive");
        check(e.raster_resolution >= 8 && e.raster_resolution <= 4096, s, "raster_resolution", "must lie in [8, 4096]");
        s.finish();
    }
    if (top.has("spectra")) {
        Section s(top.raw("spectra"), "spectra");
        auto& sp = c.spectra;
        s.get("direction", sp.direction);
        s.get("iters", sp.iters);
        s.get("resolution", sp.resolution);
        check(sp.direction == "pullback" || sp.direction == "pushforward" || sp.direction == "both", s, "direction",
              "expected \"pullback\", \"pushforward\" or \"both\"");
        check(sp.iters >= 10, s, "iters", "must be at least 10");
        check(sp.resolution >= 8, s, "resolution", "must be at least 8");
        s.finish();
    }
    if (top.has("mixing")) {
        Section s(top.raw("mixing"), "mixing");
        auto& m = c.mixing;
        s.get_point("start", m.start);
        s.get("cloud_n", m.cloud_n);
        s.get("cloud_budget", m.cloud_budget);
        s.get("n_max", m.n_max);
        s.get("per_atom_budget", m.per_atom_budget);
        if (s.has("pairs")) {
            const json& arr = s.raw("pairs");
            check(arr.is_array() && !arr.empty(), s, "pairs", "expected a nonempty list of [phi, psi]");
            m.pairs.clear();
            for (auto& v : arr) {
                check(v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer(), s,
                      "pairs", "expected [phi, psi] index pairs");
                m.pairs.emplace_back(v[0].get<int>(), v[1].get<int>());
            }
        }
        check(m.cloud_n >= 0, s, "cloud_n", "must be nonnegative");
        check(m.n_max >= 2, s, "n_max", "must be at least 2");
        check(m.cloud_budget >= 1 && m.per_atom_budget >= 1, s, "per_atom_budget", "budgets must be positive");
        for (auto& [a, b] : m.pairs)
            check(a >= 0 && b >= 0 && a < 81 && b < 81, s, "pairs", "indices must lie in [0, 80]");
        s.finish();
    }
    if (top.has("periodic")) {
        Section s(top.raw("periodic"), "periodic");
        auto& p = c.periodic;
        if (s.has("periods")) {
            const json& arr = s.raw("periods");
            check(arr.is_array() && !arr.empty(), s, "periods", "expected a nonempty list of integers");
            p.periods.clear();
            for (auto& v : arr) {
                check(v.is_number_integer() && v.get<int>() >= 1, s, "periods", "expected positive integers");
                p.periods.push_back(v.get<int>());
            }
        }
        s.get_point("start", p.start);
        s.get("reference_n", p.reference_n);
        s.get("budget", p.budget);
        check(p.reference_n >= 0, s, "reference_n", "must be nonnegative");
        check(p.budget >= 1, s, "budget", "must be positive");
        s.finish();
    }
    if (top.has("render")) {
        Section s(top.raw("render"), "render");
        auto& r = c.render;
        s.get("cloud", r.cloud);
        s.get("direction", r.direction);
        s.get_point("start", r.start);
        s.get("n", r.n);
        s.get("budget", r.budget);
        s.get("resolution", r.resolution);
        s.get("bandwidth", r.bandwidth);
        check(r.direction == "plus" || r.direction == "minus", s, "direction", "expected \"plus\" or \"minus\"");
        check(r.n >= 0, s, "n", "must be nonnegative");
        check(r.budget >= 1, s, "budget", "must be positive");
        check(r.resolution >= 8 && r.resolution <= 4096, s, "resolution", "must lie in [8, 4096]");
        check(r.bandwidth >= 0, s, "bandwidth", "must be nonnegative");
        s.finish();
    }
    top.finish();
    return c;
}

std::string serialize_config(const Config& c)
{
    json starts = json::array();
    for (auto& p : c.equidistribute.starts)
        starts.push_back(point_json(p));
    json pairs = json::array();
    for (auto& [a, b] : c.mixing.pairs)
        pairs.push_back({a, b});
    const auto& e = c.equidistribute;
    json j = {
        {"correspondence", json::parse(c.correspondence)},
        {"seed", c.seed},
        {"policy", policy_json(c.policy)},
        {"analyze",
         {{"horizon", c.analyze.horizon},
          {"point_cap", c.analyze.point_cap},
          {"norm_iters", c.analyze.norm_iters},
          {"resolution", c.analyze.resolution}}},
        {"equidistribute",
         {{"direction", e.direction},
          {"starts", starts},
          {"n_min", e.n_min},
          {"n_max", e.n_max},
          {"budget", e.budget},
          {"dictionary_degree", e.dictionary_degree},
          {"save_all_clouds", e.save_all_clouds},
          {"raster_resolution", e.raster_resolution},
          {"bandwidth", e.bandwidth}}},
        {"spectra",
         {{"direction", c.spectra.direction}, {"iters", c.spectra.iters}, {"resolution", c.spectra.resolution}}},
        {"mixing",
         {{"start", point_json(c.mixing.start)},
          {"cloud_n", c.mixing.cloud_n},
          {"cloud_budget", c.mixing.cloud_budget},
          {"pairs", pairs},
          {"n_max", c.mixing.n_max},
          {"per_atom_budget", c.mixing.per_atom_budget}}},
        {"periodic",
         {{"periods", c.periodic.periods},
          {"start", point_json(c.periodic.start)},
          {"reference_n", c.periodic.reference_n},
          {"budget", c.periodic.budget}}},
        {"render",
         {{"cloud", c.render.cloud},
          {"direction", c.render.direction},
          {"start", point_json(c.render.start)},
          {"n", c.render.n},
          {"budget", c.render.budget},
          {"resolution", c.render.resolution},
          {"bandwidth", c.render.bandwidth}}},
    };
    return j.dump(2) + "\n";
}

} // namespace corrdyn
