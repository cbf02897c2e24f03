// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "nleq/demapper.hpp"
#include "nleq/modem.hpp"
#include "nleq/sdnne.hpp"
#include "nleq/volterra.hpp"

namespace nleq::analysis {

using BigInt = boost::multiprecision::cpp_int;

struct RateReport {
    double rate_bits = 0.0;  // per real symbol
    double minimizing_s = 1.0;
    std::size_t n = 0;
    int m = 0;
    std::vector<double> per_bit_equivocation;  // at the minimizing s
};

// Achievable rate R = m - min_{s>=0} mean_i sum_j log2(1+exp(-s(1-2b)l));
// the scalar search exploits convexity in s and runs to |ds| < 1e-6.
// Infinite LLRs are admitted (they saturate), NaN is rejected.
RateReport achievable_rate(const demap::LlrBlock& block);

// True a-posteriori LLRs ln[P(b=0|y)/P(b=1|y)] for uniform PAM symbols in
// AWGN, computed with stable log-sum-exp. Natural-log units.
demap::LlrBlock exact_llrs_awgn(const modem::GrayPamMap& map, const modem::SymbolFrame& y,
                                double noise_var);
demap::LlrBlock exact_llrs_awgn(const modem::GrayPamMap& map, const modem::SymbolFrame& y,
                                double noise_var, const modem::BitFrame& bits);

// Volterra kernels of one network output around y0: order 1 from the exact
// input gradient, order 2 from central differences of that gradient folded
// upper-triangular, order 3 from second differences with one Richardson
// refinement, folded over non-decreasing position tuples.
struct ExtractedKernels {
    Eigen::VectorXd h1;
    Eigen::MatrixXd h2;  // upper triangular, zeros below the diagonal
    bool has_h3 = false;
    std::vector<std::array<int, 3>> h3_index;  // window positions t1<=t2<=t3
    std::vector<double> h3_value;
};

struct ExtractionConfig {
    int orders = 2;          // 1..3
    double h2_step = 1e-3;
    double h3_step = 5e-2;
};

std::vector<ExtractedKernels> extract_kernels(const sdnne::MlpModel& model,
                                              const ExtractionConfig& cfg = {},
                                              const Eigen::VectorXd* y0 = nullptr);

// Upper bound on the number of hidden-unit activation patterns a design can
// realize over the whole input space; exact integer arithmetic.
BigInt activation_patterns(const sdnne::MlpDesign& design);

struct ComplexityReport {
    long long multipliers = 0;
    long long kernels_or_weights = 0;
    long long feature_matrix = 0;
    long long activations = 0;
    long long demapper = 0;
    std::string formula;

    long long sum() const { return kernels_or_weights + feature_matrix + activations + demapper; }
};

// Hardware multiplier count of a (possibly pruned) Volterra equalizer, plus
// m for the max-log demapper when attached.
ComplexityReport multiplier_count(const volterra::VolterraModel& model, bool with_mla,
                                  int m_bits);
ComplexityReport multiplier_count(const volterra::VolterraDesign& design, bool with_mla,
                                  int m_bits);

// Multiplier count of a (possibly pruned) network. ReLU/hard-tanh cost one
// multiplier per hidden unit; interpolated tanh costs K-1 per hidden unit.
// A plain tanh model is costed as its K-point LUT emulation.
ComplexityReport multiplier_count(const sdnne::MlpModel& model, int lut_points_for_tanh = 16);
ComplexityReport multiplier_count(const sdnne::MlpDesign& design, int lut_points_for_tanh = 16);

struct DiscreteChannelOracle {
    double conditional_entropy_bits = 0.0;  // H(B|Y)
    std::vector<double> posterior_llr;      // ln P(0|y)/P(1|y) per y
};

// p_by[y] = {P(B=0, Y=y), P(B=1, Y=y)}; must be a distribution.
DiscreteChannelOracle discrete_channel_oracle(const std::vector<std::array<double, 2>>& p_by);

}  // namespace nleq::analysis
