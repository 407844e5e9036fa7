// Shared small utilities: error types, seeding rule, hashing, file helpers.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ggl {

// Thrown for any rejected input (bad dimensions, asymmetry, unknown config keys,
// out-of-budget requests, ...). The CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an evaluation lands on the infinite-energy branch and the caller
// asked for a finite number (CLI exit code 3 path).
class infinite_energy : public std::runtime_error {
public:
    explicit infinite_energy(const std::string& msg) : std::runtime_error(msg) {}
};

inline double sq(double x) { return x * x; }

// Seeding rule for anything stochastic: one user-facing 64-bit seed; subtask k
// (restart, trial, ...) uses engine mt19937_64(seed + k). Keep this the single
// documented split rule so runs are reproducible across platforms.
inline std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t k) {
    return std::mt19937_64(seed + k);
}

// Uniform draws mapped by hand (std::uniform_real_distribution is not pinned
// down by the standard, so its output can differ between library versions).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * uniform01(rng) - 1.0;  // [-1, 1)
}

// FNV-1a over bytes; used for content hashes of kernels and states.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::vector<double>& v) {
    return fnv1a(v.data(), v.size() * sizeof(double));
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Write-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw validation_error("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ggl
