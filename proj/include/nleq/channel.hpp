// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nleq/modem.hpp"

namespace nleq::channel {

// FIR tap vector with an explicit delay-zero position, so asymmetric
// responses can place their cursor anywhere.
struct Fir {
    std::vector<double> taps;
    int center = 0;  // index of the delay-0 tap
};

// Memoryless polynomial a1*x + a2*x^2 + ... + a5*x^5.
using Poly5 = std::array<double, 5>;

// Wiener-Hammerstein component-nonlinearity model: FIR, static polynomial,
// FIR, additive Gaussian noise, then power normalization of the output.
struct WienerHammersteinChannel {
    Fir pre_fir{{1.0}, 0};
    Poly5 poly{1.0, 0.0, 0.0, 0.0, 0.0};
    Fir post_fir{{1.0}, 0};
    double noise_sigma = 0.0;  // per real dimension
    std::uint64_t seed = 0;

    void validate() const;
};

// Odd-dominant default with two-sided ISI; the exact values are arbitrary
// but fixed so experiments are comparable.
WienerHammersteinChannel default_channel(double noise_sigma = 0.0, std::uint64_t seed = 0);

// "same"-length convolution with zero padding; taps[center] multiplies x(k).
std::vector<double> convolve_same(const Fir& fir, const std::vector<double>& x);

// post_fir * poly(pre_fir * x) + noise, without output normalization.
modem::SymbolFrame propagate_raw(const WienerHammersteinChannel& ch, const modem::SymbolFrame& x);

// Full channel: propagate_raw followed by normalization to unit mean square.
modem::SymbolFrame propagate(const WienerHammersteinChannel& ch, const modem::SymbolFrame& x);

// Noise std for a target electrical SNR (dB) on a unit-power real signal.
double sigma_from_snr(double snr_db);

// OSNR (0.1nm reference bandwidth, dual polarization) to per-real-dimension
// electrical SNR at the given symbol rate.
double osnr_to_snr(double osnr_db, double symbol_rate_ghz);

}  // namespace nleq::channel
