// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nleq {

// softplus(z) = log(1 + exp(z)), overflow-safe for any z. The saturated
// branches are exact at double precision: for z >= 40 the e^{-z} correction
// is below one ulp of z, and for z <= -50 the value itself is < 2e-22.
inline double softplus(double z) {
    if (z >= 40.0) return z;
    if (z <= -50.0) return 0.0;
    const double a = std::fabs(z);
    return std::fmax(z, 0.0) + std::log1p(std::exp(-a));
}

// Bitwise equivocation in bits: log2(1 + exp(-(1-2b) * llr)). Positive LLR
// means "bit 0"; a confident wrong sign is penalized, a confident right sign
// costs ~0, and llr = 0 costs exactly 1 bit.
inline double equivocation_loss(int bit, double llr) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("equivocation_loss: bit must be 0 or 1");
    const double a = 1.0 - 2.0 * bit;
    return softplus(-a * llr) / std::numbers::ln2;
}

// d/dllr of equivocation_loss. sigma(-a*llr) is the probability mass the
// current soft value leaves on the wrong hypothesis.
inline double equivocation_loss_dllr(int bit, double llr) {
    const double a = 1.0 - 2.0 * bit;
    const double z = -a * llr;
    double sig;  // logistic(z), overflow-safe
    if (z >= 0) {
        const double e = std::exp(-z);
        sig = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(z);
        sig = e / (1.0 + e);
    }
    return -a * sig / std::numbers::ln2;
}

}  // namespace nleq
