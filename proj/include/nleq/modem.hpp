// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nleq::modem {

enum class Lane { XI = 0, XQ = 1, YI = 2, YQ = 3 };

const char* lane_name(Lane lane);
Lane lane_from_index(int idx);

// Gray-labeled PAM constellation for one real dimension. Levels are strictly
// increasing and normalized to unit average power; labels[i] holds the m bits
// of level i with bit 0 (the first label bit) acting as the sign bit: label
// bit value 0 corresponds to positive amplitude, so that positive LLRs decide
// bit 0 downstream.
struct GrayPamMap {
    int bits_per_symbol = 0;
    std::vector<double> levels;
    std::vector<std::vector<std::uint8_t>> labels;

    int num_levels() const { return static_cast<int>(levels.size()); }
};

// Transmitted bits for one lane, row i = the m bits of symbol i.
struct BitFrame {
    std::size_t n = 0;
    int m = 0;
    std::vector<std::uint8_t> bits;  // row-major n x m
    Lane lane = Lane::XI;
    std::uint64_t seed = 0;

    std::uint8_t bit(std::size_t i, int j) const { return bits[i * m + j]; }
    std::uint8_t& bit(std::size_t i, int j) { return bits[i * m + j]; }
};

struct SymbolFrame {
    std::vector<double> symbols;
    std::string source;  // "mapped", "channel", "capture:<path>", ...

    std::size_t size() const { return symbols.size(); }
};

// Reflected-Gray 2^m-PAM with levels {+-1, +-3, ...} scaled to unit mean
// power. 1 <= m <= 6.
GrayPamMap build_gray_pam(int m);

// Uniform i.i.d. bits from a seeded deterministic generator.
BitFrame random_bits(std::size_t n, int m, std::uint64_t seed, Lane lane = Lane::XI);

SymbolFrame map_bits(const GrayPamMap& map, const BitFrame& frame);

// Index of the constellation level nearest to y (midpoint slicing).
int nearest_level(const GrayPamMap& map, double y);

// Hard decisions by nearest-level slicing; inverse of map_bits on noiseless
// data.
BitFrame slice_bits(const GrayPamMap& map, const SymbolFrame& frame);

// The 2^m - 1 decision boundaries between adjacent levels.
std::vector<double> level_midpoints(const GrayPamMap& map);

}  // namespace nleq::modem
