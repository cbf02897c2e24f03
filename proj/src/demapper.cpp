// SPDX-License-Identifier: Apache-2.0
#include "nleq/demapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nleq/common.hpp"
#include "nleq/loss.hpp"

namespace nleq::demap {

int MlaDemapper::segment_of(double y) const {
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), y);
    return static_cast<int>(it - boundaries.begin());
}

namespace {

// Fixed-mode max-log LLR: scaled difference of nearest-symbol square
// distances under the two bit hypotheses.
double fixed_llr(const modem::GrayPamMap& map, double noise_var, double y, int j) {
    double d0 = std::numeric_limits<double>::infinity();
    double d1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.levels.size(); ++i) {
        const double d = (y - map.levels[i]) * (y - map.levels[i]);
        if (map.labels[i][j] == 0)
            d0 = std::min(d0, d);
        else
            d1 = std::min(d1, d);
    }
    return (d1 - d0) / (2.0 * noise_var);
}

}  // namespace

MlaDemapper make_fixed_mla(const modem::GrayPamMap& map, double noise_var) {
    if (!(noise_var > 0)) throw std::invalid_argument("mla: noise_var must be positive");
    MlaDemapper d;
    d.map = map;
    d.mode = MlaDemapper::Mode::Fixed;
    d.noise_var = noise_var;
    d.boundaries = modem::level_midpoints(map);
    return d;
}

MlaDemapper make_trained_mla(const modem::GrayPamMap& map, double init_noise_var) {
    MlaDemapper fixed = make_fixed_mla(map, init_noise_var);
    MlaDemapper d = fixed;
    d.mode = MlaDemapper::Mode::Trained;
    const int m = map.bits_per_symbol;
    const int segments = d.num_segments();
    d.slopes.assign(m, std::vector<double>(segments, 0.0));
    d.intercepts.assign(m, std::vector<double>(segments, 0.0));

    // The fixed max-log LLR is affine on every inter-midpoint segment, so two
    // probe points inside each segment recover slope and intercept exactly.
    const double step = map.levels.size() > 1 ? map.levels[1] - map.levels[0] : 1.0;
    for (int s = 0; s < segments; ++s) {
        const double ya = map.levels[s] - 0.25 * step;
        const double yb = map.levels[s] + 0.25 * step;
        for (int j = 0; j < m; ++j) {
            const double la = fixed_llr(map, init_noise_var, ya, j);
            const double lb = fixed_llr(map, init_noise_var, yb, j);
            const double slope = (lb - la) / (yb - ya);
            d.slopes[j][s] = slope;
            d.intercepts[j][s] = la - slope * ya;
        }
    }
    return d;
}

double demap_bit(const MlaDemapper& d, double y, int j) {
    if (d.mode == MlaDemapper::Mode::Fixed) return fixed_llr(d.map, d.noise_var, y, j);
    const int s = d.segment_of(y);
    return d.slopes[j][s] * y + d.intercepts[j][s];
}

LlrBlock demap_max_log(const MlaDemapper& d, const modem::SymbolFrame& y) {
    const int m = d.map.bits_per_symbol;
    LlrBlock block;
    block.n = y.size();
    block.m = m;
    block.llrs.resize(block.n * static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < block.n; ++i)
        for (int j = 0; j < m; ++j) block.llr(i, j) = demap_bit(d, y.symbols[i], j);
    return block;
}

LlrBlock demap_max_log(const MlaDemapper& d, const modem::SymbolFrame& y,
                       const modem::BitFrame& bits) {
    if (bits.n != y.size() || bits.m != d.map.bits_per_symbol)
        throw std::invalid_argument("demap: bit frame not aligned with symbols");
    LlrBlock block = demap_max_log(d, y);
    block.bits = bits;
    return block;
}

modem::BitFrame hard_decide(const LlrBlock& block) {
    modem::BitFrame out;
    out.n = block.n;
    out.m = block.m;
    out.bits.resize(block.llrs.size());
    for (std::size_t i = 0; i < block.llrs.size(); ++i)
        out.bits[i] = block.llrs[i] < 0.0 ? 1 : 0;
    return out;
}

SlopeFitResult fit_slopes(const MlaDemapper& init, const modem::SymbolFrame& y,
                          const modem::BitFrame& bits, const AdamConfig& opt, double split) {
    opt.validate();
    if (bits.n != y.size()) throw std::invalid_argument("fit_slopes: unaligned data");
    if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("fit_slopes: split in (0,1)");

    MlaDemapper d = init.mode == MlaDemapper::Mode::Trained
                        ? init
                        : make_trained_mla(init.map, init.noise_var);
    const int m = d.map.bits_per_symbol;
    const int segments = d.num_segments();
    const Eigen::Index dim = static_cast<Eigen::Index>(2 * m * segments);

    auto pack = [&](const MlaDemapper& from) {
        Eigen::VectorXd p(dim);
        Eigen::Index at = 0;
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) p[at++] = from.slopes[j][s];
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) p[at++] = from.intercepts[j][s];
        return p;
    };
    auto unpack = [&](const Eigen::VectorXd& p, MlaDemapper& to) {
        Eigen::Index at = 0;
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) to.slopes[j][s] = p[at++];
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) to.intercepts[j][s] = p[at++];
    };

    const std::size_t n = y.size();
    const std::size_t n_train = static_cast<std::size_t>(split * static_cast<double>(n));
    if (n_train < 1 || n_train >= n) throw std::invalid_argument("fit_slopes: split leaves no data");

    // Cache segments once; they do not change during training.
    std::vector<int> seg(n);
    for (std::size_t i = 0; i < n; ++i) seg[i] = d.segment_of(y.symbols[i]);

    auto loss_grad = [&](const Eigen::VectorXd& p, const std::vector<std::size_t>& idx,
                         Eigen::VectorXd* grad) {
        if (grad) grad->setZero();
        double loss = 0.0;
        const double scale = 1.0 / (static_cast<double>(idx.size()) * m);
        for (std::size_t i : idx) {
            const int s = seg[i];
            const double yi = y.symbols[i];
            for (int j = 0; j < m; ++j) {
                const Eigen::Index slope_at = static_cast<Eigen::Index>(j) * segments + s;
                const Eigen::Index icpt_at = static_cast<Eigen::Index>(m) * segments + slope_at;
                const double llr = p[slope_at] * yi + p[icpt_at];
                const int b = bits.bit(i, j);
                loss += equivocation_loss(b, llr);
                if (grad) {
                    const double dllr = equivocation_loss_dllr(b, llr) * scale;
                    (*grad)[slope_at] += dllr * yi;
                    (*grad)[icpt_at] += dllr;
                }
            }
        }
        return loss * scale;
    };

    Eigen::VectorXd params = pack(d);
    SlopeFitResult result;
    result.demapper = d;
    if (opt.max_epochs == 0) return result;

    std::vector<std::size_t> train_idx(n_train), val_idx(n - n_train);
    for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
    for (std::size_t i = n_train; i < n; ++i) val_idx[i - n_train] = i;

    Adam adam(dim, opt);
    Rng rng(derive_seed(opt.seed, 0x51DE5));
    Eigen::VectorXd grad(dim);
    Eigen::VectorXd best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(train_idx[i - 1], train_idx[rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < n_train; at += opt.batch_size) {
            const std::size_t hi = std::min(at + opt.batch_size, n_train);
            const std::vector<std::size_t> batch(train_idx.begin() + at, train_idx.begin() + hi);
            const double l = loss_grad(params, batch, &grad);
            if (!std::isfinite(l))
                throw std::runtime_error("fit_slopes: loss diverged at epoch " +
                                         std::to_string(epoch));
            epoch_loss += l;
            ++batches;
            adam.update(params, grad);
        }
        result.train_trace.push_back(epoch_loss / static_cast<double>(batches));

        const double val = loss_grad(params, val_idx, nullptr);
        result.val_trace.push_back(val);
        if (val < best_val - 1e-12) {
            best_val = val;
            best = params;
            stagnant = 0;
        } else if (++stagnant >= opt.patience) {
            break;
        }
    }

    unpack(best, result.demapper);
    return result;
}

}  // namespace nleq::demap
