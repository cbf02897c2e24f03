// SPDX-License-Identifier: Apache-2.0
#include "nleq/volterra.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nleq/common.hpp"
#include "nleq/loss.hpp"

namespace nleq::volterra {

void VolterraDesign::validate() const {
    if (taps_per_order.empty()) throw std::invalid_argument("volterra: order must be >= 1");
    for (std::size_t p = 0; p < taps_per_order.size(); ++p) {
        const int t = taps_per_order[p];
        if (t < 1 || t % 2 == 0)
            throw std::invalid_argument("volterra: tap counts must be odd and positive");
        if (p > 0 && t > taps_per_order[0])
            throw std::invalid_argument("volterra: nonlinear memory cannot exceed linear memory");
    }
}

std::vector<long long> kernel_count(const VolterraDesign& design) {
    design.validate();
    std::vector<long long> counts;
    counts.reserve(design.taps_per_order.size());
    for (int p = 1; p <= design.order(); ++p) {
        // C(T_p + p - 1, p) evaluated as (1/p!) * prod_{i=0}^{p-1} (T_p + i)
        long long num = 1;
        for (int i = 0; i < p; ++i) num *= design.taps(p) + i;
        for (int i = 2; i <= p; ++i) num /= i;
        counts.push_back(num);
    }
    return counts;
}

std::size_t total_kernels(const VolterraDesign& design) {
    std::size_t total = 0;
    for (long long c : kernel_count(design)) total += static_cast<std::size_t>(c);
    return total;
}

std::vector<std::vector<int>> enumerate_tuples(int taps, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> tuple(order, 0);
    while (true) {
        out.push_back(tuple);
        int i = order - 1;
        while (i >= 0 && tuple[i] == taps - 1) --i;
        if (i < 0) break;
        const int v = tuple[i] + 1;
        for (int j = i; j < order; ++j) tuple[j] = v;
    }
    return out;
}

namespace {

// Flattened canonical kernel index: per order, tuples of window positions.
struct FeatureMap {
    const VolterraDesign& design;
    std::vector<std::vector<std::vector<int>>> tuples;  // [order-1][kernel][position]
    std::size_t total = 0;

    explicit FeatureMap(const VolterraDesign& d) : design(d) {
        d.validate();
        tuples.reserve(d.order());
        for (int p = 1; p <= d.order(); ++p) {
            tuples.push_back(enumerate_tuples(d.taps(p), p));
            total += tuples.back().size();
        }
    }

    // Writes the feature vector for sample k; zero padding outside the frame.
    void fill(const std::vector<double>& y, std::size_t k, double* out) const {
        const auto n = static_cast<std::ptrdiff_t>(y.size());
        std::size_t at = 0;
        for (int p = 1; p <= design.order(); ++p) {
            const int mem = design.memory(p);
            for (const auto& tuple : tuples[static_cast<std::size_t>(p - 1)]) {
                double prod = 1.0;
                for (int t : tuple) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(k) - mem + t;
                    prod *= (src >= 0 && src < n) ? y[static_cast<std::size_t>(src)] : 0.0;
                }
                out[at++] = prod;
            }
        }
    }
};

std::vector<std::size_t> index_range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(hi > lo ? hi - lo : 0);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = lo + i;
    return idx;
}

// Chronological split of the edge-trimmed sample range.
void split_indices(std::size_t n, int margin, double split, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& val) {
    if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("volterra: split must be in (0,1)");
    const auto m = static_cast<std::size_t>(margin);
    const auto cut = static_cast<std::size_t>(split * static_cast<double>(n));
    if (n < 2 * m + 2 || cut <= m || cut + m >= n)
        throw std::invalid_argument("volterra: frame too short for this design and split");
    train = index_range(m, cut);
    val = index_range(cut, n - m);
}

struct AdamLoopResult {
    Eigen::VectorXd best;
    std::vector<double> train_trace;
    std::vector<double> val_trace;
};

// Shared minibatch ADAM loop with chronological validation and early stop.
template <typename EvalFn>
AdamLoopResult run_adam(Eigen::VectorXd params, std::vector<std::size_t> train_idx,
                        const std::vector<std::size_t>& val_idx, const AdamConfig& opt,
                        std::uint64_t shuffle_stream, EvalFn&& eval) {
    AdamLoopResult out;
    out.best = params;
    if (opt.max_epochs == 0) return out;

    Adam adam(params.size(), opt);
    Rng rng(derive_seed(opt.seed, shuffle_stream));
    Eigen::VectorXd grad(params.size());
    double best_val = std::numeric_limits<double>::infinity();
    int stagnant = 0;
    const std::size_t n_train = train_idx.size();

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(train_idx[i - 1], train_idx[rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < n_train; at += opt.batch_size) {
            const std::size_t hi = std::min(at + static_cast<std::size_t>(opt.batch_size), n_train);
            const double l =
                eval(params, std::span<const std::size_t>(train_idx.data() + at, hi - at), &grad);
            if (!std::isfinite(l))
                throw std::runtime_error("volterra: training loss diverged at epoch " +
                                         std::to_string(epoch) + " (last validation " +
                                         (out.val_trace.empty()
                                              ? std::string("n/a")
                                              : std::to_string(out.val_trace.back())) +
                                         ")");
            epoch_loss += l;
            ++batches;
            adam.update(params, grad);
        }
        out.train_trace.push_back(epoch_loss / static_cast<double>(batches));

        const double val =
            eval(params, std::span<const std::size_t>(val_idx.data(), val_idx.size()), nullptr);
        out.val_trace.push_back(val);
        if (val < best_val - 1e-12) {
            best_val = val;
            out.best = params;
            stagnant = 0;
        } else if (++stagnant >= opt.patience) {
            break;
        }
    }
    return out;
}

}  // namespace

std::size_t VolterraModel::active_kernels() const {
    std::size_t active = 0;
    for (std::size_t i = 0; i < kernels.size(); ++i)
        if (mask.empty() || mask[i]) ++active;
    return active;
}

Eigen::VectorXd features(const VolterraDesign& design, const modem::SymbolFrame& y,
                         std::size_t k) {
    const FeatureMap map(design);
    Eigen::VectorXd out(static_cast<Eigen::Index>(map.total));
    map.fill(y.symbols, k, out.data());
    return out;
}

VolterraModel identity_model(const VolterraDesign& design) {
    VolterraModel model;
    model.design = design;
    model.kernels.assign(total_kernels(design), 0.0);
    model.mask.assign(model.kernels.size(), 1);
    model.kernels[static_cast<std::size_t>(design.linear_memory())] = 1.0;  // center tap
    return model;
}

modem::SymbolFrame predict(const VolterraModel& model, const modem::SymbolFrame& y) {
    const FeatureMap map(model.design);
    if (model.kernels.size() != map.total)
        throw std::invalid_argument("volterra: kernel vector does not match design");
    Eigen::VectorXd h(static_cast<Eigen::Index>(map.total));
    for (std::size_t i = 0; i < map.total; ++i)
        h[static_cast<Eigen::Index>(i)] =
            (model.mask.empty() || model.mask[i]) ? model.kernels[i] : 0.0;

    modem::SymbolFrame out;
    out.source = "equalized";
    out.symbols.resize(y.size());
    Eigen::VectorXd phi(static_cast<Eigen::Index>(map.total));
    for (std::size_t k = 0; k < y.size(); ++k) {
        map.fill(y.symbols, k, phi.data());
        out.symbols[k] = h.dot(phi);
    }
    return out;
}

LsFitResult fit_ls(const VolterraDesign& design, const modem::SymbolFrame& y,
                   const modem::SymbolFrame& x) {
    design.validate();
    if (y.size() != x.size()) throw std::invalid_argument("fit_ls: unaligned frames");
    const FeatureMap map(design);
    const auto margin = static_cast<std::size_t>(design.linear_memory());
    if (y.size() < 2 * margin + map.total)
        throw std::invalid_argument("fit_ls: sample count below kernel count");
    const std::size_t rows = y.size() - 2 * margin;
    const auto cols = static_cast<Eigen::Index>(map.total);

    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    Eigen::VectorXd phi(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        map.fill(y.symbols, r + margin, phi.data());
        a.row(static_cast<Eigen::Index>(r)) = phi;
        b[static_cast<Eigen::Index>(r)] = x.symbols[r + margin];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd r_factor =
        qr.matrixR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r_factor);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(cols - 1);
    const double condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();

    if (qr.rank() < cols)
        throw RankDeficientError("fit_ls: regression matrix is rank deficient (rank " +
                                     std::to_string(qr.rank()) + " of " + std::to_string(cols) +
                                     ", condition " + std::to_string(condition) + ")",
                                 qr.rank(), condition);

    LsFitResult result;
    result.condition = condition;
    result.rank = qr.rank();
    result.model.design = design;
    const Eigen::VectorXd h = qr.solve(b);
    result.model.kernels.assign(h.data(), h.data() + h.size());
    result.model.mask.assign(map.total, 1);
    result.mse = (a * h - b).squaredNorm() / static_cast<double>(rows);
    return result;
}

double mse_loss_grad(const VolterraModel& model, const modem::SymbolFrame& y,
                     const modem::SymbolFrame& x, std::span<const std::size_t> idx,
                     Eigen::VectorXd* grad_kernels) {
    const FeatureMap map(model.design);
    Eigen::VectorXd h(static_cast<Eigen::Index>(map.total));
    for (std::size_t i = 0; i < map.total; ++i)
        h[static_cast<Eigen::Index>(i)] =
            (model.mask.empty() || model.mask[i]) ? model.kernels[i] : 0.0;
    if (grad_kernels) grad_kernels->setZero();

    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(idx.size());
    Eigen::VectorXd phi(static_cast<Eigen::Index>(map.total));
    for (std::size_t k : idx) {
        map.fill(y.symbols, k, phi.data());
        const double r = h.dot(phi) - x.symbols[k];
        loss += r * r;
        if (grad_kernels) grad_kernels->noalias() += (2.0 * r * scale) * phi;
    }
    if (grad_kernels && !model.mask.empty())
        for (std::size_t i = 0; i < map.total; ++i)
            if (!model.mask[i]) (*grad_kernels)[static_cast<Eigen::Index>(i)] = 0.0;
    return loss * scale;
}

double bitwise_loss_grad(const VolterraModel& model, const demap::MlaDemapper& mla,
                         const modem::SymbolFrame& y, const modem::BitFrame& bits,
                         std::span<const std::size_t> idx, Eigen::VectorXd* grad_kernels,
                         Eigen::VectorXd* grad_demapper) {
    if (mla.mode != demap::MlaDemapper::Mode::Trained)
        throw std::invalid_argument("bitwise objective requires a trained-mode demapper");
    const FeatureMap map(model.design);
    const int m = mla.map.bits_per_symbol;
    const int segments = mla.num_segments();
    Eigen::VectorXd h(static_cast<Eigen::Index>(map.total));
    for (std::size_t i = 0; i < map.total; ++i)
        h[static_cast<Eigen::Index>(i)] =
            (model.mask.empty() || model.mask[i]) ? model.kernels[i] : 0.0;
    if (grad_kernels) grad_kernels->setZero();
    if (grad_demapper) grad_demapper->setZero();

    double loss = 0.0;
    const double scale = 1.0 / (static_cast<double>(idx.size()) * m);
    Eigen::VectorXd phi(static_cast<Eigen::Index>(map.total));
    for (std::size_t k : idx) {
        map.fill(y.symbols, k, phi.data());
        const double eq = h.dot(phi);
        const int s = mla.segment_of(eq);
        double dl_deq = 0.0;
        for (int j = 0; j < m; ++j) {
            const double llr = mla.slopes[j][s] * eq + mla.intercepts[j][s];
            const int b = bits.bit(k, j);
            loss += equivocation_loss(b, llr);
            const double dllr = equivocation_loss_dllr(b, llr) * scale;
            dl_deq += dllr * mla.slopes[j][s];
            if (grad_demapper) {
                const Eigen::Index slope_at = static_cast<Eigen::Index>(j) * segments + s;
                (*grad_demapper)[slope_at] += dllr * eq;
                (*grad_demapper)[static_cast<Eigen::Index>(m) * segments + slope_at] += dllr;
            }
        }
        if (grad_kernels) grad_kernels->noalias() += dl_deq * phi;
    }
    if (grad_kernels && !model.mask.empty())
        for (std::size_t i = 0; i < map.total; ++i)
            if (!model.mask[i]) (*grad_kernels)[static_cast<Eigen::Index>(i)] = 0.0;
    return loss * scale;
}

FitResult fit_gd_mse(const VolterraDesign& design, const modem::SymbolFrame& y,
                     const modem::SymbolFrame& x, const AdamConfig& opt, double split,
                     const VolterraModel* warm) {
    design.validate();
    opt.validate();
    if (y.size() != x.size()) throw std::invalid_argument("fit_gd: unaligned frames");

    FitResult result;
    result.model = warm ? *warm : identity_model(design);
    if (opt.max_epochs == 0) return result;

    std::vector<std::size_t> train_idx, val_idx;
    split_indices(y.size(), design.linear_memory(), split, train_idx, val_idx);

    VolterraModel scratch = result.model;
    auto eval = [&](const Eigen::VectorXd& params, std::span<const std::size_t> idx,
                    Eigen::VectorXd* grad) {
        std::copy(params.data(), params.data() + params.size(), scratch.kernels.begin());
        return mse_loss_grad(scratch, y, x, idx, grad);
    };

    Eigen::VectorXd params =
        Eigen::Map<const Eigen::VectorXd>(result.model.kernels.data(),
                                          static_cast<Eigen::Index>(result.model.kernels.size()));
    auto loop = run_adam(params, train_idx, val_idx, opt, 0x6D5E, eval);
    std::copy(loop.best.data(), loop.best.data() + loop.best.size(),
              result.model.kernels.begin());
    result.train_trace = std::move(loop.train_trace);
    result.val_trace = std::move(loop.val_trace);
    return result;
}

FitResult fit_gd_bitwise(const VolterraDesign& design, const modem::SymbolFrame& y,
                         const modem::BitFrame& bits, const modem::GrayPamMap& map,
                         const AdamConfig& opt, double split, const BitwiseInit* warm) {
    design.validate();
    opt.validate();
    if (bits.n != y.size()) throw std::invalid_argument("fit_gd: unaligned bits");
    const modem::SymbolFrame x = modem::map_bits(map, bits);

    FitResult result;
    if (warm) {
        result.model = warm->model;
        result.demapper = warm->demapper.mode == demap::MlaDemapper::Mode::Trained
                              ? warm->demapper
                              : demap::make_trained_mla(map, warm->demapper.noise_var);
    } else {
        result.model = identity_model(design);
        double res = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y.symbols[k] - x.symbols[k];
            res += d * d;
        }
        res = std::max(res / static_cast<double>(y.size()), 1e-6);
        result.demapper = demap::make_trained_mla(map, res);
    }
    if (opt.max_epochs == 0) return result;

    std::vector<std::size_t> train_idx, val_idx;
    split_indices(y.size(), design.linear_memory(), split, train_idx, val_idx);

    const std::size_t n_kernels = result.model.kernels.size();
    const int m = map.bits_per_symbol;
    const int segments = result.demapper->num_segments();
    const std::size_t n_demap = static_cast<std::size_t>(2 * m * segments);

    VolterraModel scratch = result.model;
    demap::MlaDemapper scratch_mla = *result.demapper;
    auto unpack = [&](const Eigen::VectorXd& params) {
        std::copy(params.data(), params.data() + n_kernels, scratch.kernels.begin());
        Eigen::Index at = static_cast<Eigen::Index>(n_kernels);
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) scratch_mla.slopes[j][s] = params[at++];
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) scratch_mla.intercepts[j][s] = params[at++];
    };

    Eigen::VectorXd grad_k(static_cast<Eigen::Index>(n_kernels));
    Eigen::VectorXd grad_d(static_cast<Eigen::Index>(n_demap));
    auto eval = [&](const Eigen::VectorXd& params, std::span<const std::size_t> idx,
                    Eigen::VectorXd* grad) {
        unpack(params);
        const double loss = bitwise_loss_grad(scratch, scratch_mla, y, bits, idx,
                                              grad ? &grad_k : nullptr, grad ? &grad_d : nullptr);
        if (grad) {
            grad->head(static_cast<Eigen::Index>(n_kernels)) = grad_k;
            grad->tail(static_cast<Eigen::Index>(n_demap)) = grad_d;
        }
        return loss;
    };

    Eigen::VectorXd params(static_cast<Eigen::Index>(n_kernels + n_demap));
    params.head(static_cast<Eigen::Index>(n_kernels)) = Eigen::Map<const Eigen::VectorXd>(
        result.model.kernels.data(), static_cast<Eigen::Index>(n_kernels));
    {
        Eigen::Index at = static_cast<Eigen::Index>(n_kernels);
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) params[at++] = result.demapper->slopes[j][s];
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < segments; ++s) params[at++] = result.demapper->intercepts[j][s];
    }

    auto loop = run_adam(params, train_idx, val_idx, opt, 0xB17E, eval);
    unpack(loop.best);
    result.model = scratch;
    result.demapper = scratch_mla;
    result.train_trace = std::move(loop.train_trace);
    result.val_trace = std::move(loop.val_trace);
    return result;
}

L1PruneResult prune_l1(const VolterraDesign& design, const modem::SymbolFrame& y,
                       const modem::SymbolFrame& x, double lambda, double threshold,
                       const AdamConfig& opt, double split) {
    if (lambda < 0) throw std::invalid_argument("prune_l1: lambda must be >= 0");
    design.validate();
    opt.validate();

    std::vector<std::size_t> train_idx, val_idx;
    split_indices(y.size(), design.linear_memory(), split, train_idx, val_idx);

    L1PruneResult result;
    VolterraModel model = identity_model(design);
    VolterraModel scratch = model;
    auto eval_l1 = [&](const Eigen::VectorXd& params, std::span<const std::size_t> idx,
                       Eigen::VectorXd* grad) {
        std::copy(params.data(), params.data() + params.size(), scratch.kernels.begin());
        double loss = mse_loss_grad(scratch, y, x, idx, grad);
        loss += lambda * params.cwiseAbs().sum();
        if (grad)
            grad->array() += lambda * params.array().sign();
        return loss;
    };

    // phase 1 shares the fit_gd_mse shuffle stream, so lambda = 0 with an
    // empty threshold reproduces the plain GD fit exactly
    Eigen::VectorXd params = Eigen::Map<const Eigen::VectorXd>(
        model.kernels.data(), static_cast<Eigen::Index>(model.kernels.size()));
    auto phase1 = run_adam(params, train_idx, val_idx, opt, 0x6D5E, eval_l1);
    std::copy(phase1.best.data(), phase1.best.data() + phase1.best.size(),
              model.kernels.begin());
    result.train_trace = phase1.train_trace;
    result.val_trace = phase1.val_trace;

    bool any_masked = false;
    for (std::size_t i = 0; i < model.kernels.size(); ++i) {
        if (std::fabs(model.kernels[i]) < threshold) {
            model.mask[i] = 0;
            model.kernels[i] = 0.0;
            any_masked = true;
        }
    }

    // Penalty-free fine-tuning of the survivors; skipped when nothing was
    // shrunk or masked, in which case the result is the plain GD fit.
    if (lambda > 0 || any_masked) {
        VolterraModel ft_scratch = model;
        auto eval_plain = [&](const Eigen::VectorXd& p, std::span<const std::size_t> idx,
                              Eigen::VectorXd* grad) {
            std::copy(p.data(), p.data() + p.size(), ft_scratch.kernels.begin());
            return mse_loss_grad(ft_scratch, y, x, idx, grad);
        };
        Eigen::VectorXd p2 = Eigen::Map<const Eigen::VectorXd>(
            model.kernels.data(), static_cast<Eigen::Index>(model.kernels.size()));
        auto phase2 = run_adam(p2, train_idx, val_idx, opt, 0x1A551, eval_plain);
        std::copy(phase2.best.data(), phase2.best.data() + phase2.best.size(),
                  model.kernels.begin());
        for (std::size_t i = 0; i < model.kernels.size(); ++i)
            if (!model.mask[i]) model.kernels[i] = 0.0;
        result.train_trace.insert(result.train_trace.end(), phase2.train_trace.begin(),
                                  phase2.train_trace.end());
        result.val_trace.insert(result.val_trace.end(), phase2.val_trace.begin(),
                                phase2.val_trace.end());
    }

    result.model = std::move(model);
    result.active = result.model.active_kernels();
    return result;
}

}  // namespace nleq::volterra
