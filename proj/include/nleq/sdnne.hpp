// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nleq/adam.hpp"
#include "nleq/demapper.hpp"
#include "nleq/loss.hpp"
#include "nleq/modem.hpp"

namespace nleq::sdnne {

using nleq::equivocation_loss;
using nleq::equivocation_loss_dllr;

// Hidden-layer activation. ITanh is tanh tabulated at K uniformly spaced
// points on [-4, 4] with linear interpolation in between and clamping
// outside; Linear exists for analysis of exactly-linear networks.
enum class Activation { Tanh, ITanh, HTanh, Relu, Linear };

Activation activation_from_string(const std::string& name);
const char* activation_name(Activation a);

double activation_eval(Activation a, double z, int itanh_points = 16);
double activation_deriv(Activation a, double z, int itanh_points = 16);

struct MlpDesign {
    std::vector<int> layer_sizes;  // s_1 .. s_d, s_1 = 2M+1 inputs, s_d = m outputs
    Activation activation = Activation::Tanh;
    int itanh_points = 16;

    int num_layers() const { return static_cast<int>(layer_sizes.size()); }
    int inputs() const { return layer_sizes.front(); }
    int outputs() const { return layer_sizes.back(); }
    int memory() const { return (inputs() - 1) / 2; }
    void validate() const;
};

struct MlpModel {
    MlpDesign design;
    std::vector<Eigen::MatrixXd> weights;  // [d-1], s_{l+1} x s_l
    std::vector<Eigen::VectorXd> biases;
    std::vector<Eigen::MatrixXd> masks;    // 0/1, same shapes as weights

    std::size_t weight_count() const;
    std::size_t active_weights() const;
    double sparsity() const;  // fraction of masked weight entries
};

// Fan-based symmetric uniform weight init, zero biases, all weights active.
MlpModel init_model(const MlpDesign& design, std::uint64_t seed);

// Batched forward pass; X holds one delay-line window per column.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& x);
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& window);

// Jacobian of the outputs w.r.t. the input window (m x s_1), exact
// reverse-mode differentiation.
Eigen::MatrixXd input_jacobian(const MlpModel& model, const Eigen::VectorXd& window);

using BitTargets = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;  // m x batch

struct Gradient {
    std::vector<Eigen::MatrixXd> weight_grads;
    std::vector<Eigen::VectorXd> bias_grads;
    double loss = 0.0;

    double norm() const;
};

// Exact gradient of the mean bitwise equivocation over the batch; masked
// weights report zero gradient.
Gradient backprop_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                           const BitTargets& bits);

// Same machinery under a mean-square regression objective.
Gradient backprop_gradient_mse(const MlpModel& model, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& targets);

// Delay-line windows for samples [lo, hi), zero padding at the frame edges.
Eigen::MatrixXd window_matrix(const modem::SymbolFrame& y, int memory, std::size_t lo,
                              std::size_t hi);

struct TrainResult {
    MlpModel model;
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// ADAM + backpropagation on the bitwise equivocation; chronological
// train/validation split, best-validation parameters returned.
TrainResult train(const MlpDesign& design, const modem::SymbolFrame& y,
                  const modem::BitFrame& bits, const AdamConfig& opt, double split = 0.5);

// Regression variant (symbol-level MSE target), used when the network
// replaces an equalizer one-to-one instead of emitting soft bits.
TrainResult train_regression(const MlpDesign& design, const modem::SymbolFrame& y,
                             const modem::SymbolFrame& target, const AdamConfig& opt,
                             double split = 0.5);

struct PruneSchedule {
    double initial_sparsity = 0.0;
    double final_sparsity = 0.0;
    long start_step = 0;   // optimizer step of the first pruning event
    long steps = 4;        // number of schedule intervals
    long interval = 100;   // optimizer steps between pruning events

    void validate() const;
    double target_at(long t) const;  // cubic ramp from initial to final sparsity
};

struct GradualPruneResult {
    MlpModel model;
    std::vector<std::pair<long, double>> sparsity_trace;  // (step, achieved sparsity)
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// Gradual magnitude pruning during continued training: at each scheduled
// step the globally smallest-magnitude weights are masked to reach the ramp
// target, then training fine-tunes the survivors.
GradualPruneResult prune_gradual(const MlpModel& model, const modem::SymbolFrame& y,
                                 const modem::BitFrame& bits, const PruneSchedule& schedule,
                                 const AdamConfig& opt, double split = 0.5);

// Soft bits for a whole frame.
demap::LlrBlock demap_frame(const MlpModel& model, const modem::SymbolFrame& y);
demap::LlrBlock demap_frame(const MlpModel& model, const modem::SymbolFrame& y,
                            const modem::BitFrame& bits);

}  // namespace nleq::sdnne
