// SPDX-License-Identifier: Apache-2.0
#include "nleq/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "nleq/common.hpp"

namespace nleq::channel {

void WienerHammersteinChannel::validate() const {
    if (pre_fir.taps.empty() || post_fir.taps.empty())
        throw std::invalid_argument("channel: FIR tap vectors must be nonempty");
    if (pre_fir.center < 0 || pre_fir.center >= static_cast<int>(pre_fir.taps.size()) ||
        post_fir.center < 0 || post_fir.center >= static_cast<int>(post_fir.taps.size()))
        throw std::invalid_argument("channel: FIR center index out of range");
    if (poly[0] == 0.0) throw std::invalid_argument("channel: linear coefficient a1 must be nonzero");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("channel: noise_sigma must be >= 0");
}

WienerHammersteinChannel default_channel(double noise_sigma, std::uint64_t seed) {
    WienerHammersteinChannel ch;
    ch.pre_fir = {{0.08, 0.9, 0.25, -0.12, 0.04}, 1};
    ch.poly = {1.0, 0.0, -0.12, 0.0, 0.03};
    ch.post_fir = {{1.0, 0.15}, 0};
    ch.noise_sigma = noise_sigma;
    ch.seed = seed;
    return ch;
}

std::vector<double> convolve_same(const Fir& fir, const std::vector<double>& x) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto t = static_cast<std::ptrdiff_t>(fir.taps.size());
    std::vector<double> y(x.size(), 0.0);
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t i = 0; i < t; ++i) {
            const std::ptrdiff_t src = k - (i - fir.center);
            if (src >= 0 && src < n) acc += fir.taps[i] * x[src];
        }
        y[k] = acc;
    }
    return y;
}

modem::SymbolFrame propagate_raw(const WienerHammersteinChannel& ch, const modem::SymbolFrame& x) {
    ch.validate();
    if (x.symbols.empty()) throw std::invalid_argument("propagate: input frame is empty");

    std::vector<double> z = convolve_same(ch.pre_fir, x.symbols);
    for (double& v : z) {
        const double v2 = v * v;
        v = ch.poly[0] * v + ch.poly[1] * v2 + ch.poly[2] * v2 * v + ch.poly[3] * v2 * v2 +
            ch.poly[4] * v2 * v2 * v;
    }
    z = convolve_same(ch.post_fir, z);

    if (ch.noise_sigma > 0.0) {
        Rng rng(derive_seed(ch.seed, 0xA5E0));
        for (double& v : z) v += ch.noise_sigma * rng.gaussian();
    }

    modem::SymbolFrame out;
    out.source = "channel";
    out.symbols = std::move(z);
    return out;
}

modem::SymbolFrame propagate(const WienerHammersteinChannel& ch, const modem::SymbolFrame& x) {
    modem::SymbolFrame out = propagate_raw(ch, x);
    double power = 0.0;
    for (double v : out.symbols) power += v * v;
    power /= static_cast<double>(out.symbols.size());
    if (power > 0.0) {
        const double inv = 1.0 / std::sqrt(power);
        for (double& v : out.symbols) v *= inv;
    }
    return out;
}

double sigma_from_snr(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::sqrt(std::pow(10.0, -snr_db / 10.0));
}

double osnr_to_snr(double osnr_db, double symbol_rate_ghz) {
    if (!(symbol_rate_ghz > 0.0))
        throw std::invalid_argument("osnr_to_snr: symbol rate must be positive");
    return osnr_db - 10.0 * std::log10(symbol_rate_ghz / 12.5);
}

}  // namespace nleq::channel
