#include "corrdyn/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace corrdyn {

namespace {

template <class T>
void put_le(std::ostream& os, T v)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T)))
        throw ConfigError("cloud file truncated");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

std::ofstream open_out(const std::string& path, bool binary)
{
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os)
        throw ConfigError("cannot write " + path);
    return os;
}

} // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h)
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string read_text(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    auto os = open_out(path, true);
    os << text;
}

std::uint64_t file_hash(const std::string& path) { return fnv1a(read_text(path)); }

void write_cloud(const std::string& path, const PointCloudMeasure& mu)
{
    auto os = open_out(path, true);
    const auto& m = mu.meta();
    os << "corrdyn-cloud 1\n"
       << "atoms " << mu.size() << "\n"
       << "seed " << m.seed << "\n"
       << "depth " << m.n << "\n"
       << "correspondence " << hex64(m.correspondence_hash) << "\n"
       << "monte_carlo " << (m.monte_carlo ? 1 : 0) << "\n"
       << "data\n";
    for (std::size_t k = 0; k < mu.size(); ++k) {
        put_le<std::int32_t>(os, mu.points()[k].chart);
        put_le<double>(os, mu.points()[k].coord.real());
        put_le<double>(os, mu.points()[k].coord.imag());
        put_le<double>(os, mu.weights()[k]);
    }
}

PointCloudMeasure read_cloud(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot read " + path);
    std::string line;
    std::getline(is, line);
    if (line != "corrdyn-cloud 1")
        throw ConfigError(path + ": not a cloud file");
    CloudMeta meta;
    std::size_t atoms = 0;
    bool have_atoms = false;
    while (std::getline(is, line) && line != "data") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "atoms") {
            ls >> atoms;
            have_atoms = true;
        } else if (key == "seed") {
            ls >> meta.seed;
        } else if (key == "depth") {
            ls >> meta.n;
        } else if (key == "correspondence") {
            ls >> std::hex >> meta.correspondence_hash;
        } else if (key == "monte_carlo") {
            int v = 0;
            ls >> v;
            meta.monte_carlo = v != 0;
        }
        if (ls.fail())
            throw ConfigError(path + ": bad header line '" + line + "'");
    }
    if (!have_atoms || line != "data")
        throw ConfigError(path + ": incomplete header");
    std::vector<SpherePoint> pts(atoms);
    std::vector<double> w(atoms);
    for (std::size_t k = 0; k < atoms; ++k) {
        pts[k].chart = get_le<std::int32_t>(is);
        const double re = get_le<double>(is), im = get_le<double>(is);
        pts[k].coord = {re, im};
        w[k] = get_le<double>(is);
    }
    return PointCloudMeasure(std::move(pts), std::move(w), meta);
}

void write_pgm(const std::string& path, const DensityImage& img)
{
    auto os = open_out(path, true);
    os << "P5\n" << img.width << " " << img.height << "\n65535\n";
    for (std::uint16_t v : img.pixels) {
        os.put(static_cast<char>(v >> 8));
        os.put(static_cast<char>(v & 0xff));
    }
}

void write_periodic_tsv(const std::string& path, const PeriodicReport& rep)
{
    auto os = open_out(path, false);
    os << std::setprecision(17);
    os << "re\tim\tchart\tperiod\tmultiplier_re\tmultiplier_im\tmultiplicity\tclass\n";
    for (auto& p : rep.points)
        os << p.point.coord.real() << '\t' << p.point.coord.imag() << '\t' << p.point.chart << '\t' << p.period
           << '\t' << p.multiplier.real() << '\t' << p.multiplier.imag() << '\t' << p.multiplicity << '\t'
           << to_string(p.cls) << '\n';
}

} // namespace corrdyn
