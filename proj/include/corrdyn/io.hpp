#pragma once

#include "corrdyn/cloud.hpp"
#include "corrdyn/measures.hpp"
#include "corrdyn/periodic.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace corrdyn {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

/// FNV-1a of a file's bytes.
std::uint64_t file_hash(const std::string& path);

/// Text header (format, atom count, metadata) then little-endian records
/// (int32 chart, f64 re, f64 im, f64 weight).
void write_cloud(const std::string& path, const PointCloudMeasure& mu);
PointCloudMeasure read_cloud(const std::string& path);

/// Binary PGM (P5), 16-bit big-endian samples.
void write_pgm(const std::string& path, const DensityImage& img);

/// One row per germ: re, im, chart, period, multiplier re/im, multiplicity, class.
void write_periodic_tsv(const std::string& path, const PeriodicReport& rep);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace corrdyn
