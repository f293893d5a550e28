#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace summaug {

// Thrown by the trainer when the loss stops being finite. Experiment runs
// catch this and record the run as failed instead of aborting the grid.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

using Rng = std::mt19937_64;

uint64_t fnv1a64(std::string_view data);
uint64_t splitmix64(uint64_t x);

// Order-sensitive seed combinator; stable across platforms and stdlibs.
inline uint64_t combine_seed(uint64_t a, uint64_t b) {
  return splitmix64(splitmix64(a) ^ b);
}

inline uint64_t combine_seed(uint64_t a, std::string_view tag) {
  return combine_seed(a, fnv1a64(tag));
}

// Uniform integer in [0, n) via rejection sampling; no distribution objects
// so sequences are reproducible independent of the standard library build.
uint64_t rng_below(Rng& rng, uint64_t n);

// Uniform double in [0, 1) with 53 bits of precision.
inline double rng_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::string_view trim_view(std::string_view s);

// Write-to-temp-then-rename so interrupted runs never leave truncated files.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

std::string to_hex64(uint64_t value);

// UTC timestamp like 2024-05-01T12:00:00Z.
std::string utc_timestamp();

}  // namespace summaug
