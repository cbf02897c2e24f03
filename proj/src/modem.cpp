// SPDX-License-Identifier: Apache-2.0
#include "nleq/modem.hpp"

#include <cmath>
#include <stdexcept>

#include "nleq/common.hpp"

namespace nleq::modem {

const char* lane_name(Lane lane) {
    switch (lane) {
        case Lane::XI: return "XI";
        case Lane::XQ: return "XQ";
        case Lane::YI: return "YI";
        case Lane::YQ: return "YQ";
    }
    return "??";
}

Lane lane_from_index(int idx) {
    if (idx < 0 || idx > 3) throw std::invalid_argument("lane index must be in [0,3]");
    return static_cast<Lane>(idx);
}

GrayPamMap build_gray_pam(int m) {
    if (m < 1 || m > 6) throw std::invalid_argument("build_gray_pam: m must be in [1,6]");
    const int n_levels = 1 << m;

    GrayPamMap map;
    map.bits_per_symbol = m;
    map.levels.resize(n_levels);
    map.labels.resize(n_levels);

    double power = 0.0;
    for (int i = 0; i < n_levels; ++i) {
        const double amp = static_cast<double>(2 * i + 1 - n_levels);
        map.levels[i] = amp;
        power += amp * amp;
    }
    const double scale = 1.0 / std::sqrt(power / n_levels);
    for (double& level : map.levels) level *= scale;

    // Reflected-Gray label of the index counted from the positive end, so the
    // first label bit is 0 on the positive half and flips exactly once across
    // the constellation. For m=3 the second bit then separates the inner
    // magnitude pair from the outer one.
    for (int i = 0; i < n_levels; ++i) {
        const unsigned r = static_cast<unsigned>(n_levels - 1 - i);
        const unsigned gray = r ^ (r >> 1);
        map.labels[i].resize(m);
        for (int j = 0; j < m; ++j)
            map.labels[i][j] = static_cast<std::uint8_t>((gray >> (m - 1 - j)) & 1u);
    }
    return map;
}

BitFrame random_bits(std::size_t n, int m, std::uint64_t seed, Lane lane) {
    if (n < 1) throw std::invalid_argument("random_bits: n must be positive");
    if (m < 1) throw std::invalid_argument("random_bits: m must be positive");

    BitFrame frame;
    frame.n = n;
    frame.m = m;
    frame.lane = lane;
    frame.seed = seed;
    frame.bits.resize(n * static_cast<std::size_t>(m));

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(lane)));
    std::uint64_t word = 0;
    int avail = 0;
    for (auto& b : frame.bits) {
        if (avail == 0) {
            word = rng.bits();
            avail = 64;
        }
        b = static_cast<std::uint8_t>(word & 1u);
        word >>= 1;
        --avail;
    }
    return frame;
}

SymbolFrame map_bits(const GrayPamMap& map, const BitFrame& frame) {
    const int m = map.bits_per_symbol;
    if (frame.m != m)
        throw std::invalid_argument("map_bits: frame has " + std::to_string(frame.m) +
                                    " bit columns, map expects " + std::to_string(m));

    // label -> level lookup
    std::vector<int> index_of_label(map.levels.size());
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        unsigned key = 0;
        for (int j = 0; j < m; ++j) key = (key << 1) | map.labels[i][j];
        index_of_label[key] = static_cast<int>(i);
    }

    SymbolFrame out;
    out.source = "mapped";
    out.symbols.resize(frame.n);
    for (std::size_t i = 0; i < frame.n; ++i) {
        unsigned key = 0;
        for (int j = 0; j < m; ++j) key = (key << 1) | frame.bit(i, j);
        out.symbols[i] = map.levels[index_of_label[key]];
    }
    return out;
}

int nearest_level(const GrayPamMap& map, double y) {
    // levels are uniformly spaced; slice by midpoints
    const int n_levels = map.num_levels();
    const double step = n_levels > 1 ? map.levels[1] - map.levels[0] : 1.0;
    int idx = static_cast<int>(std::floor((y - map.levels[0]) / step + 0.5));
    if (idx < 0) idx = 0;
    if (idx >= n_levels) idx = n_levels - 1;
    return idx;
}

BitFrame slice_bits(const GrayPamMap& map, const SymbolFrame& frame) {
    BitFrame out;
    out.n = frame.size();
    out.m = map.bits_per_symbol;
    out.bits.resize(out.n * static_cast<std::size_t>(out.m));
    for (std::size_t i = 0; i < out.n; ++i) {
        const auto& label = map.labels[nearest_level(map, frame.symbols[i])];
        for (int j = 0; j < out.m; ++j) out.bit(i, j) = label[j];
    }
    return out;
}

std::vector<double> level_midpoints(const GrayPamMap& map) {
    std::vector<double> mids;
    mids.reserve(map.levels.size() - 1);
    for (std::size_t i = 0; i + 1 < map.levels.size(); ++i)
        mids.push_back(0.5 * (map.levels[i] + map.levels[i + 1]));
    return mids;
}

}  // namespace nleq::modem
