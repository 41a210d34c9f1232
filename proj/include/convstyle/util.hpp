#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convstyle {

/// FNV-1a, 64 bit. Stable across platforms and releases.
std::uint64_t stable_hash(std::string_view bytes) noexcept;

/// 16 lowercase hex digits of stable_hash.
std::string stable_digest(std::string_view bytes);

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

/// Population mean and standard deviation. `n == 0` means nothing was aggregated.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> values);

/// Seeded generator whose output sequence does not depend on the standard library vendor.
/// std::uniform_int_distribution and std::shuffle are implementation-defined, so draws go
/// through rejection sampling on the raw mt19937_64 stream instead.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1).
    double unit();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// k distinct indices from [0, n) in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

/// Reads a whole file; throws Error(IoError) on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace convstyle
