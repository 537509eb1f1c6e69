#include "bbm/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bbm::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc())
        throw std::runtime_error("parse_double: bad float '" + s + "'");
    return v;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap,
                    int d) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "t=" << format_double(snap.time) << " d=" << d << " n=" << snap.size()
        << "\n";
    for (std::size_t i = 0; i < snap.size(); ++i) {
        out << snap.ids[i];
        for (int j = 0; j < d; ++j)
            out << ',' << format_double(snap.coords[i * std::size_t(d) +
                                                    std::size_t(j)]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path, int* d_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    double t = 0.0;
    int d = 0;
    std::uint64_t n = 0;
    if (std::sscanf(header.c_str(), "t=%lf d=%d n=%" SCNu64, &t, &d, &n) != 3)
        throw std::runtime_error("bad snapshot header in " + path.string());
    Snapshot snap;
    snap.time = t;
    snap.ids.reserve(n);
    snap.coords.reserve(n * std::uint64_t(d));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        snap.ids.push_back(std::stoull(cell));
        for (int j = 0; j < d; ++j) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("short row in " + path.string());
            snap.coords.push_back(parse_double(cell));
        }
    }
    if (snap.ids.size() != n)
        throw std::runtime_error("row count mismatch in " + path.string());
    if (d_out) *d_out = d;
    return snap;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t h = UINT64_C(0xCBF29CE484222325);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= std::uint8_t(buf[i]);
            h *= UINT64_C(0x100000001B3);
        }
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, digest);
    return buf;
}

}  // namespace bbm::io
