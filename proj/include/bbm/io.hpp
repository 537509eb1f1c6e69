#ifndef BBM_IO_HPP
#define BBM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "bbm/simulator.hpp"

namespace bbm::io {

// Snapshot file: header `t=<time> d=<dim> n=<count>`, then one CSV row
// `id,x_1,...,x_d` per particle with 17-significant-digit floats
// (round-trip exact for doubles).
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap,
                    int d);
Snapshot read_snapshot(const std::filesystem::path& path, int* d_out = nullptr);

std::string format_double(double v);  // 17 significant digits
double parse_double(const std::string& s);

// FNV-1a 64-bit over file bytes, for manifest digests.
std::uint64_t file_digest(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

}  // namespace bbm::io

#endif
