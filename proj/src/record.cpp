#include "corrdyn/correspondence.hpp"

#include "json.hpp"

namespace corrdyn {

using nlohmann::json;

namespace {

json poly_json(const BiPoly& p)
{
    json coeffs = json::array();
    for (int i = 0; i <= p.deg_x(); ++i)
        for (int j = 0; j <= p.deg_y(); ++j)
            coeffs.push_back({p.at(i, j).real(), p.at(i, j).imag()});
    return {{"bidegree", {p.deg_x(), p.deg_y()}}, {"coefficients", coeffs}};
}

BiPoly poly_from_json(const json& j)
{
    if (!j.contains("bidegree") || !j.contains("coefficients"))
        throw ConfigError("polynomial record needs 'bidegree' and 'coefficients'");
    const int a = j.at("bidegree").at(0).get<int>();
    const int b = j.at("bidegree").at(1).get<int>();
    if (a < 0 || b < 0)
        throw ConfigError("negative bidegree");
    const auto& c = j.at("coefficients");
    if (c.size() != static_cast<std::size_t>((a + 1) * (b + 1)))
        throw ConfigError("coefficient count does not match bidegree");
    BiPoly p(a, b);
    std::size_t k = 0;
    for (int i = 0; i <= a; ++i)
        for (int jj = 0; jj <= b; ++jj, ++k)
            p.at(i, jj) = cplx(c[k].at(0).get<double>(), c[k].at(1).get<double>());
    return p;
}

} // namespace

std::string to_record(const Correspondence& f)
{
    json j = poly_json(f.poly());
    if (f.components().size() > 1 || f.components().front().multiplicity > 1) {
        json comps = json::array();
        for (auto& c : f.components()) {
            json cj = poly_json(c.poly);
            cj["multiplicity"] = c.multiplicity;
            comps.push_back(cj);
        }
        j["components"] = comps;
    }
    if (f.is_adjoint())
        j["adjoint"] = true;
    return j.dump();
}

Correspondence from_record(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("correspondence record: ") + e.what());
    }
    try {
        const BiPoly p = poly_from_json(j);
        const bool adj = j.value("adjoint", false);
        if (!j.contains("components")) {
            Correspondence::from_bipoly(p); // validation only
            return Correspondence(p, p, {Component{p, 1}}, adj);
        }
        std::vector<Component> comps;
        for (auto& cj : j.at("components"))
            comps.push_back({poly_from_json(cj), cj.value("multiplicity", 1)});
        const Correspondence check = Correspondence::from_components(comps);
        return Correspondence(p, check.reduced(), comps, adj);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("correspondence record: ") + e.what());
    }
}

std::uint64_t correspondence_hash(const Correspondence& f)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : to_record(f)) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace corrdyn
