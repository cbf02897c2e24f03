// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nleq/adam.hpp"
#include "nleq/analysis.hpp"
#include "nleq/channel.hpp"
#include "nleq/sdnne.hpp"
#include "nleq/volterra.hpp"

namespace nleq::harness {

// Raised for anything the user got wrong (config files, design strings,
// flag combinations); the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "17:17:11" -> per-order tap counts
std::vector<int> parse_vnle_design(const std::string& text);
// "17|16|10|3" -> layer sizes
std::vector<int> parse_mlp_design(const std::string& text);

struct EqualizerSpec {
    enum class Kind { LE, VNLE, SDNNE };

    Kind kind = Kind::LE;
    std::string name;

    // LE / VNLE
    std::vector<int> taps{17};        // per order; LE uses one entry
    std::string objective = "ls";     // ls | mse | bitwise
    double prune_lambda = 0.0;        // L1 pruning when > 0
    double prune_threshold = 0.0;

    // SDNNE
    std::vector<int> layer_sizes;
    sdnne::Activation activation = sdnne::Activation::Tanh;
    int itanh_points = 16;
    double prune_sparsity = 0.0;      // gradual pruning when > 0

    std::string display_name() const;
};

struct ExperimentConfig {
    channel::WienerHammersteinChannel chan = channel::default_channel();
    int m = 3;
    std::size_t frame_length = 66444;
    double split = 0.5;
    int eval_frames = 6;
    std::vector<double> sweep_points;
    bool sweep_is_osnr = false;
    double symbol_rate_ghz = 92.0;
    std::uint64_t seed = 1;
    AdamConfig adam;
    std::vector<EqualizerSpec> equalizers;

    void validate() const;
};

ExperimentConfig config_from_toml(const std::filesystem::path& path);

struct KernelRow1 {
    int bit;  // -1 for symbol-level Volterra kernels
    int offset;
    double value;
};

struct KernelRow3 {
    int bit;
    int o1, o2, o3;  // offsets relative to the equalized instant
    double value;
};

struct EqualizerResult {
    std::string name;
    bool failed = false;
    std::string error;
    analysis::RateReport rate;
    analysis::ComplexityReport complexity;
    std::optional<double> gain_vs_le;
    std::vector<double> train_trace;
    std::vector<double> val_trace;
    std::vector<KernelRow1> kernels1;
    std::vector<KernelRow3> kernels3;
};

struct PointResult {
    double sweep_value = 0.0;
    double snr_db = 0.0;
    double noise_sigma = 0.0;
    std::vector<EqualizerResult> equalizers;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<PointResult> points;
};

// Trains and scores every equalizer at every sweep point. Training uses the
// first `split` of a dedicated frame per point; rates are measured on the
// trailing (1 - split) of `eval_frames` fresh frames. Per-equalizer failures
// are recorded and the sweep continues. Deterministic for fixed seeds; the
// thread fan-out is across sweep points only.
SweepResult run_sweep(const ExperimentConfig& cfg, int threads = 1, std::ostream* log = nullptr);

// rate_vs_snr.csv, gain_vs_snr.csv, rate_vs_multipliers.csv,
// kernels_order1.csv, kernels_order3.csv and summary.json.
void emit_reports(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace nleq::harness
