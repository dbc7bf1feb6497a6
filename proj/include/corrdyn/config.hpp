#pragma once

#include "corrdyn/correspondence.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace corrdyn {

struct AnalyzeConfig {
    int horizon = 10;
    std::size_t point_cap = 4096;
    int norm_iters = 40;
    int resolution = 128;
    bool operator==(const AnalyzeConfig&) const = default;
};

struct EquidistributeConfig {
    std::string direction = "plus"; // plus: backward clouds (mu+), minus: forward clouds (mu-)
    std::vector<SpherePoint> starts{SpherePoint::affine({0.4, 0.3})};
    int n_min = 2;
    int n_max = 12;
    std::size_t budget = 20000;
    int dictionary_degree = 8;
    bool save_all_clouds = false;
    int raster_resolution = 256;
    double bandwidth = 2.0;
    bool operator==(const EquidistributeConfig&) const = default;
};

struct SpectraConfig {
    std::string direction = "both"; // pullback, pushforward or both
    int iters = 40;
    int resolution = 256;
    bool operator==(const SpectraConfig&) const = default;
};

struct MixingConfig {
    SpherePoint start = SpherePoint::affine({0.4, 0.3});
    int cloud_n = 14;
    std::size_t cloud_budget = 20000;
    std::vector<std::pair<int, int>> pairs{{2, 2}, {6, 8}, {12, 2}}; // dictionary indices (phi, psi)
    int n_max = 8;
    std::size_t per_atom_budget = 4096;
    bool operator==(const MixingConfig&) const = default;
};

struct PeriodicConfig {
    std::vector<int> periods{1, 2, 3};
    SpherePoint start = SpherePoint::affine({0.4, 0.3});
    int reference_n = 14;
    std::size_t budget = 20000;
    bool operator==(const PeriodicConfig&) const = default;
};

struct RenderConfig {
    std::string cloud;              // cloud file; empty computes one
    std::string direction = "plus";
    SpherePoint start = SpherePoint::affine({0.4, 0.3});
    int n = 12;
    std::size_t budget = 20000;
    int resolution = 256;
    double bandwidth = 2.0;
    bool operator==(const RenderConfig&) const = default;
};

/// A run configuration. Every field has a default except the correspondence.
struct Config {
    std::string correspondence; // canonical record
    NumericPolicy policy;
    std::uint64_t seed = 1;
    AnalyzeConfig analyze;
    EquidistributeConfig equidistribute;
    SpectraConfig spectra;
    MixingConfig mixing;
    PeriodicConfig periodic;
    RenderConfig render;

    Correspondence graph() const;
    bool operator==(const Config&) const = default;
};

/// Parses JSON text. Unknown keys and mistyped fields raise ConfigError naming the field;
/// syntax errors name the line. A manifest is accepted in place of a config.
Config parse_config(const std::string& text);

/// Canonical JSON with every field spelled out, sorted keys.
std::string serialize_config(const Config& c);

} // namespace corrdyn
