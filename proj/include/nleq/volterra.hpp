// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nleq/adam.hpp"
#include "nleq/demapper.hpp"
#include "nleq/modem.hpp"

namespace nleq::volterra {

// Per-order two-sided tap counts T_1..T_P (all odd, T_p = 2*M_p + 1).
struct VolterraDesign {
    std::vector<int> taps_per_order;

    int order() const { return static_cast<int>(taps_per_order.size()); }
    int taps(int p) const { return taps_per_order[p - 1]; }        // 1-based order
    int memory(int p) const { return (taps(p) - 1) / 2; }          // M_p
    int linear_memory() const { return memory(1); }
    void validate() const;
};

// Kernels stored flat in canonical order: orders 1..P, and within order p the
// non-decreasing window-position tuples (t_1 <= ... <= t_p), t in [0, T_p),
// in lexicographic order. Window position t corresponds to sample offset
// t - M_p relative to the equalized instant.
struct VolterraModel {
    VolterraDesign design;
    std::vector<double> kernels;
    std::vector<std::uint8_t> mask;  // 1 = active, 0 = pruned

    std::size_t size() const { return kernels.size(); }
    std::size_t active_kernels() const;
};

// Closed-form kernel count per order: N_p = C(T_p + p - 1, p).
std::vector<long long> kernel_count(const VolterraDesign& design);
std::size_t total_kernels(const VolterraDesign& design);

// All non-decreasing position tuples of the given order over [0, taps).
std::vector<std::vector<int>> enumerate_tuples(int taps, int order);

// Feature vector at sample k: concatenated delay-line products in canonical
// order, zero padding outside the frame.
Eigen::VectorXd features(const VolterraDesign& design, const modem::SymbolFrame& y, std::size_t k);

// Identity equalizer: linear center tap 1, all other kernels 0.
VolterraModel identity_model(const VolterraDesign& design);

modem::SymbolFrame predict(const VolterraModel& model, const modem::SymbolFrame& y);

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(const std::string& what, Eigen::Index rank, double condition)
        : std::runtime_error(what), rank(rank), condition(condition) {}
    Eigen::Index rank;
    double condition;
};

struct LsFitResult {
    VolterraModel model;
    double condition = 0.0;  // of the regression matrix
    Eigen::Index rank = 0;
    double mse = 0.0;        // residual on the fitted samples
};

// Least-squares identification over the edge-trimmed samples via
// rank-revealing column-pivoted QR.
LsFitResult fit_ls(const VolterraDesign& design, const modem::SymbolFrame& y,
                   const modem::SymbolFrame& x);

struct FitResult {
    VolterraModel model;
    std::optional<demap::MlaDemapper> demapper;  // engaged for the bitwise objective
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// ADAM minimization of the symbol MSE; chronological train/validation split,
// best-validation parameters returned.
FitResult fit_gd_mse(const VolterraDesign& design, const modem::SymbolFrame& y,
                     const modem::SymbolFrame& x, const AdamConfig& opt, double split = 0.5,
                     const VolterraModel* warm = nullptr);

struct BitwiseInit {
    VolterraModel model;
    demap::MlaDemapper demapper;
};

// Joint ADAM minimization of the mean bitwise equivocation over the kernels
// and the max-log demapper slopes.
FitResult fit_gd_bitwise(const VolterraDesign& design, const modem::SymbolFrame& y,
                         const modem::BitFrame& bits, const modem::GrayPamMap& map,
                         const AdamConfig& opt, double split = 0.5,
                         const BitwiseInit* warm = nullptr);

struct L1PruneResult {
    VolterraModel model;
    std::size_t active = 0;
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// L1-penalized training, magnitude thresholding, then penalty-free
// fine-tuning of the surviving kernels.
L1PruneResult prune_l1(const VolterraDesign& design, const modem::SymbolFrame& y,
                       const modem::SymbolFrame& x, double lambda, double threshold,
                       const AdamConfig& opt, double split = 0.5);

// Batch objective values and gradients on explicit sample indices; these are
// the functions the trainers step on, exposed for verification.
double mse_loss_grad(const VolterraModel& model, const modem::SymbolFrame& y,
                     const modem::SymbolFrame& x, std::span<const std::size_t> idx,
                     Eigen::VectorXd* grad_kernels);
double bitwise_loss_grad(const VolterraModel& model, const demap::MlaDemapper& mla,
                         const modem::SymbolFrame& y, const modem::BitFrame& bits,
                         std::span<const std::size_t> idx, Eigen::VectorXd* grad_kernels,
                         Eigen::VectorXd* grad_demapper);

}  // namespace nleq::volterra
