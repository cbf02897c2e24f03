// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "nleq/adam.hpp"
#include "nleq/modem.hpp"

namespace nleq::demap {

// Soft bits aligned with the transmitted bits that produced them. The bits
// are optional at construction; rate evaluation requires them.
struct LlrBlock {
    std::size_t n = 0;
    int m = 0;
    std::vector<double> llrs;  // row-major n x m
    modem::BitFrame bits;      // empty unless attached

    double llr(std::size_t i, int j) const { return llrs[i * m + j]; }
    double& llr(std::size_t i, int j) { return llrs[i * m + j]; }
    bool has_bits() const { return bits.n == n && bits.m == m && n > 0; }
};

// Max-log demapper over a Gray PAM map. Fixed mode scales squared-distance
// differences by the configured noise variance; trained mode keeps one affine
// piece per (bit, segment), where segments are delimited by the constellation
// midpoints in both modes. Positive LLR decides bit 0.
struct MlaDemapper {
    enum class Mode { Fixed, Trained };

    modem::GrayPamMap map;
    Mode mode = Mode::Fixed;
    double noise_var = 1.0;
    std::vector<double> boundaries;               // 2^m - 1 midpoints
    std::vector<std::vector<double>> slopes;      // [m][2^m], Trained mode
    std::vector<std::vector<double>> intercepts;  // [m][2^m], Trained mode

    int num_segments() const { return static_cast<int>(boundaries.size()) + 1; }
    int segment_of(double y) const;
};

MlaDemapper make_fixed_mla(const modem::GrayPamMap& map, double noise_var);

// Trained-mode demapper initialized to be pointwise identical to the fixed
// demapper at the given noise variance.
MlaDemapper make_trained_mla(const modem::GrayPamMap& map, double init_noise_var);

// LLR of bit j for one equalized sample.
double demap_bit(const MlaDemapper& d, double y, int j);

LlrBlock demap_max_log(const MlaDemapper& d, const modem::SymbolFrame& y);
LlrBlock demap_max_log(const MlaDemapper& d, const modem::SymbolFrame& y,
                       const modem::BitFrame& bits);

// Sign rule: llr > 0 -> 0, llr < 0 -> 1, llr == 0 -> 0.
modem::BitFrame hard_decide(const LlrBlock& block);

struct SlopeFitResult {
    MlaDemapper demapper;
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// Minimizes the mean bitwise equivocation over the slope/intercept
// parameters with held-out validation; returns the best-validation state.
SlopeFitResult fit_slopes(const MlaDemapper& init, const modem::SymbolFrame& y,
                          const modem::BitFrame& bits, const AdamConfig& opt,
                          double split = 0.5);

}  // namespace nleq::demap
