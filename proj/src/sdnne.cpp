// SPDX-License-Identifier: Apache-2.0
#include "nleq/sdnne.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "nleq/common.hpp"

namespace nleq::sdnne {

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "itanh") return Activation::ITanh;
    if (name == "htanh") return Activation::HTanh;
    if (name == "relu") return Activation::Relu;
    if (name == "linear") return Activation::Linear;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::ITanh: return "itanh";
        case Activation::HTanh: return "htanh";
        case Activation::Relu: return "relu";
        case Activation::Linear: return "linear";
    }
    return "??";
}

namespace {

constexpr double kITanhRange = 4.0;  // interpolation covers [-4, 4]

double itanh_eval(double z, int k) {
    if (z <= -kITanhRange) return std::tanh(-kITanhRange);
    if (z >= kITanhRange) return std::tanh(kITanhRange);
    const double h = 2.0 * kITanhRange / (k - 1);
    int i = static_cast<int>((z + kITanhRange) / h);
    if (i > k - 2) i = k - 2;
    const double z0 = -kITanhRange + i * h;
    const double t0 = std::tanh(z0);
    const double t1 = std::tanh(z0 + h);
    return t0 + (t1 - t0) * (z - z0) / h;
}

double itanh_deriv(double z, int k) {
    if (z <= -kITanhRange || z >= kITanhRange) return 0.0;
    const double h = 2.0 * kITanhRange / (k - 1);
    int i = static_cast<int>((z + kITanhRange) / h);
    if (i > k - 2) i = k - 2;
    const double z0 = -kITanhRange + i * h;
    return (std::tanh(z0 + h) - std::tanh(z0)) / h;
}

}  // namespace

double activation_eval(Activation a, double z, int itanh_points) {
    switch (a) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::ITanh: return itanh_eval(z, itanh_points);
        case Activation::HTanh: return z < -1.0 ? -1.0 : (z > 1.0 ? 1.0 : z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Linear: return z;
    }
    return z;
}

double activation_deriv(Activation a, double z, int itanh_points) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::ITanh: return itanh_deriv(z, itanh_points);
        case Activation::HTanh: return (z > -1.0 && z < 1.0) ? 1.0 : 0.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

void MlpDesign::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least two layers");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("mlp: layer sizes must be positive");
    if (activation == Activation::ITanh && itanh_points < 2)
        throw std::invalid_argument("mlp: itanh needs at least 2 interpolation points");
}

std::size_t MlpModel::weight_count() const {
    std::size_t total = 0;
    for (const auto& w : weights) total += static_cast<std::size_t>(w.size());
    return total;
}

std::size_t MlpModel::active_weights() const {
    std::size_t active = 0;
    for (const auto& m : masks) active += static_cast<std::size_t>(m.sum());
    return active;
}

double MlpModel::sparsity() const {
    const std::size_t total = weight_count();
    return total == 0 ? 0.0 : 1.0 - static_cast<double>(active_weights()) / total;
}

MlpModel init_model(const MlpDesign& design, std::uint64_t seed) {
    design.validate();
    MlpModel model;
    model.design = design;
    Rng rng(derive_seed(seed, 0x1417));
    const int d = design.num_layers();
    for (int l = 0; l + 1 < d; ++l) {
        const int rows = design.layer_sizes[l + 1];
        const int cols = design.layer_sizes[l];
        const double bound = std::sqrt(6.0 / (rows + cols));
        Eigen::MatrixXd w(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(Eigen::VectorXd::Zero(rows));
        model.masks.emplace_back(Eigen::MatrixXd::Ones(rows, cols));
    }
    return model;
}

namespace {

struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;   // z per weight layer
    std::vector<Eigen::MatrixXd> post;  // a per layer, post[0] = input
};

void forward_cached(const MlpModel& model, const Eigen::MatrixXd& x, ForwardCache& cache) {
    const auto layers = model.weights.size();
    const Activation act = model.design.activation;
    const int k = model.design.itanh_points;
    cache.pre.resize(layers);
    cache.post.resize(layers + 1);
    cache.post[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        cache.pre[l] = (model.weights[l] * cache.post[l]).colwise() + model.biases[l];
        if (l + 1 < layers)
            cache.post[l + 1] =
                cache.pre[l].unaryExpr([&](double z) { return activation_eval(act, z, k); });
        else
            cache.post[l + 1] = cache.pre[l];  // linear output layer
    }
}

Eigen::MatrixXd activation_deriv_matrix(const MlpModel& model, const Eigen::MatrixXd& pre) {
    const Activation act = model.design.activation;
    const int k = model.design.itanh_points;
    return pre.unaryExpr([&](double z) { return activation_deriv(act, z, k); });
}

// Core backward pass given the output-layer delta (dLoss/d output).
Gradient backward(const MlpModel& model, const ForwardCache& cache, Eigen::MatrixXd delta) {
    const auto layers = model.weights.size();
    Gradient g;
    g.weight_grads.resize(layers);
    g.bias_grads.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        g.weight_grads[l] = (delta * cache.post[l].transpose()).cwiseProduct(model.masks[l]);
        g.bias_grads[l] = delta.rowwise().sum();
        if (l > 0)
            delta = (model.weights[l].transpose() * delta)
                        .cwiseProduct(activation_deriv_matrix(model, cache.pre[l - 1]));
    }
    return g;
}

}  // namespace

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
    if (x.rows() != model.design.inputs())
        throw std::invalid_argument("mlp: window size does not match input layer");
    ForwardCache cache;
    forward_cached(model, x, cache);
    return cache.post.back();
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& window) {
    return forward_batch(model, window).col(0);
}

Eigen::MatrixXd input_jacobian(const MlpModel& model, const Eigen::VectorXd& window) {
    ForwardCache cache;
    forward_cached(model, window, cache);
    const auto layers = model.weights.size();
    const int m = model.design.outputs();
    Eigen::MatrixXd jac(m, model.design.inputs());
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd delta = Eigen::VectorXd::Unit(m, j);
        for (std::size_t l = layers; l-- > 1;) {
            delta = (model.weights[l].transpose() * delta)
                        .cwiseProduct(activation_deriv_matrix(model, cache.pre[l - 1]).col(0));
        }
        jac.row(j) = (model.weights[0].transpose() * delta).transpose();
    }
    return jac;
}

double Gradient::norm() const {
    double sq = 0.0;
    for (const auto& w : weight_grads) sq += w.squaredNorm();
    for (const auto& b : bias_grads) sq += b.squaredNorm();
    return std::sqrt(sq);
}

Gradient backprop_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                           const BitTargets& bits) {
    if (bits.rows() != model.design.outputs() || bits.cols() != x.cols())
        throw std::invalid_argument("backprop: bit targets not aligned with batch");
    ForwardCache cache;
    forward_cached(model, x, cache);
    const Eigen::MatrixXd& llr = cache.post.back();

    const double scale = 1.0 / (static_cast<double>(x.cols()) * llr.rows());
    double loss = 0.0;
    Eigen::MatrixXd delta(llr.rows(), llr.cols());
    for (Eigen::Index c = 0; c < llr.cols(); ++c) {
        for (Eigen::Index r = 0; r < llr.rows(); ++r) {
            const int b = bits(r, c);
            loss += equivocation_loss(b, llr(r, c));
            delta(r, c) = equivocation_loss_dllr(b, llr(r, c)) * scale;
        }
    }
    Gradient g = backward(model, cache, std::move(delta));
    g.loss = loss * scale;
    return g;
}

Gradient backprop_gradient_mse(const MlpModel& model, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& targets) {
    if (targets.rows() != model.design.outputs() || targets.cols() != x.cols())
        throw std::invalid_argument("backprop: targets not aligned with batch");
    ForwardCache cache;
    forward_cached(model, x, cache);
    const Eigen::MatrixXd residual = cache.post.back() - targets;
    const double scale = 1.0 / (static_cast<double>(x.cols()) * targets.rows());
    Gradient g = backward(model, cache, 2.0 * scale * residual);
    g.loss = residual.squaredNorm() * scale;
    return g;
}

Eigen::MatrixXd window_matrix(const modem::SymbolFrame& y, int memory, std::size_t lo,
                              std::size_t hi) {
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    Eigen::MatrixXd x(2 * memory + 1, hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        for (int t = 0; t < 2 * memory + 1; ++t) {
            const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - memory + t;
            x(t, static_cast<Eigen::Index>(i - lo)) =
                (src >= 0 && src < n) ? y.symbols[static_cast<std::size_t>(src)] : 0.0;
        }
    }
    return x;
}

namespace {

struct FlatParams {
    static Eigen::Index dim(const MlpModel& m) {
        Eigen::Index d = 0;
        for (const auto& w : m.weights) d += w.size();
        for (const auto& b : m.biases) d += b.size();
        return d;
    }
    static Eigen::VectorXd pack(const MlpModel& m) {
        Eigen::VectorXd p(dim(m));
        Eigen::Index at = 0;
        for (const auto& w : m.weights) {
            std::copy(w.data(), w.data() + w.size(), p.data() + at);
            at += w.size();
        }
        for (const auto& b : m.biases) {
            std::copy(b.data(), b.data() + b.size(), p.data() + at);
            at += b.size();
        }
        return p;
    }
    static void unpack(const Eigen::VectorXd& p, MlpModel& m) {
        Eigen::Index at = 0;
        for (auto& w : m.weights) {
            std::copy(p.data() + at, p.data() + at + w.size(), w.data());
            at += w.size();
        }
        for (auto& b : m.biases) {
            std::copy(p.data() + at, p.data() + at + b.size(), b.data());
            at += b.size();
        }
    }
    static Eigen::VectorXd pack_grad(const MlpModel& m, const Gradient& g) {
        Eigen::VectorXd p(dim(m));
        Eigen::Index at = 0;
        for (const auto& w : g.weight_grads) {
            std::copy(w.data(), w.data() + w.size(), p.data() + at);
            at += w.size();
        }
        for (const auto& b : g.bias_grads) {
            std::copy(b.data(), b.data() + b.size(), p.data() + at);
            at += b.size();
        }
        return p;
    }
};

void apply_masks(MlpModel& model) {
    for (std::size_t l = 0; l < model.weights.size(); ++l)
        model.weights[l] = model.weights[l].cwiseProduct(model.masks[l]);
}

// Masks the globally smallest-magnitude weights so that `target` entries are
// inactive; masked weights are zeroed in place.
void mask_smallest(MlpModel& model, std::size_t target) {
    std::vector<double> mags;
    mags.reserve(model.weight_count());
    for (const auto& w : model.weights)
        for (Eigen::Index i = 0; i < w.size(); ++i) mags.push_back(std::fabs(w.data()[i]));
    if (target == 0) {
        for (auto& m : model.masks) m.setOnes();
        return;
    }
    if (target >= mags.size()) target = mags.size();
    std::nth_element(mags.begin(), mags.begin() + (target - 1), mags.end());
    const double cut = mags[target - 1];

    // mask |w| <= cut but never more than target entries (ties broken by order)
    std::size_t masked = 0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        auto& w = model.weights[l];
        auto& m = model.masks[l];
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const bool prune = masked < target && std::fabs(w.data()[i]) <= cut;
            m.data()[i] = prune ? 0.0 : 1.0;
            if (prune) {
                w.data()[i] = 0.0;
                ++masked;
            }
        }
    }
}

struct Dataset {
    Eigen::MatrixXd x_train, x_val;
    BitTargets b_train, b_val;        // equivocation objective
    Eigen::MatrixXd t_train, t_val;   // regression objective
    bool regression = false;
};

Dataset make_dataset(const MlpDesign& design, const modem::SymbolFrame& y,
                     const modem::BitFrame* bits, const modem::SymbolFrame* target,
                     double split) {
    if (design.inputs() % 2 == 0)
        throw std::invalid_argument("train: input layer must be odd (symmetric delay line)");
    if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("train: split must be in (0,1)");
    const std::size_t n = y.size();
    if (n < 10) throw std::invalid_argument("train: need at least 10 windows");
    const auto cut = static_cast<std::size_t>(split * static_cast<double>(n));
    if (cut < 1 || cut >= n) throw std::invalid_argument("train: split leaves an empty portion");

    Dataset ds;
    ds.x_train = window_matrix(y, design.memory(), 0, cut);
    ds.x_val = window_matrix(y, design.memory(), cut, n);
    if (bits) {
        if (bits->n != n || bits->m != design.outputs())
            throw std::invalid_argument("train: bit frame not aligned with design");
        ds.b_train.resize(design.outputs(), static_cast<Eigen::Index>(cut));
        ds.b_val.resize(design.outputs(), static_cast<Eigen::Index>(n - cut));
        for (std::size_t i = 0; i < n; ++i)
            for (int j = 0; j < design.outputs(); ++j) {
                if (i < cut)
                    ds.b_train(j, static_cast<Eigen::Index>(i)) = bits->bit(i, j);
                else
                    ds.b_val(j, static_cast<Eigen::Index>(i - cut)) = bits->bit(i, j);
            }
    } else {
        ds.regression = true;
        if (target->size() != n) throw std::invalid_argument("train: target not aligned");
        if (design.outputs() != 1)
            throw std::invalid_argument("train: regression expects a single output unit");
        ds.t_train.resize(1, static_cast<Eigen::Index>(cut));
        ds.t_val.resize(1, static_cast<Eigen::Index>(n - cut));
        for (std::size_t i = 0; i < n; ++i) {
            if (i < cut)
                ds.t_train(0, static_cast<Eigen::Index>(i)) = target->symbols[i];
            else
                ds.t_val(0, static_cast<Eigen::Index>(i - cut)) = target->symbols[i];
        }
    }
    return ds;
}

Gradient eval_batch(const MlpModel& model, const Dataset& ds, const std::vector<std::size_t>& idx,
                    std::size_t lo, std::size_t hi) {
    const auto b = static_cast<Eigen::Index>(hi - lo);
    Eigen::MatrixXd xb(ds.x_train.rows(), b);
    for (std::size_t i = lo; i < hi; ++i)
        xb.col(static_cast<Eigen::Index>(i - lo)) =
            ds.x_train.col(static_cast<Eigen::Index>(idx[i]));
    if (ds.regression) {
        Eigen::MatrixXd tb(1, b);
        for (std::size_t i = lo; i < hi; ++i)
            tb(0, static_cast<Eigen::Index>(i - lo)) = ds.t_train(0, static_cast<Eigen::Index>(idx[i]));
        return backprop_gradient_mse(model, xb, tb);
    }
    BitTargets bb(ds.b_train.rows(), b);
    for (std::size_t i = lo; i < hi; ++i)
        bb.col(static_cast<Eigen::Index>(i - lo)) =
            ds.b_train.col(static_cast<Eigen::Index>(idx[i]));
    return backprop_gradient(model, xb, bb);
}

double eval_validation(const MlpModel& model, const Dataset& ds) {
    // forward-only losses, chunked to bound peak memory
    const Eigen::Index n = ds.x_val.cols();
    const Eigen::Index rows = ds.regression ? ds.t_val.rows() : ds.b_val.rows();
    const Eigen::Index chunk = 8192;
    double loss = 0.0;
    for (Eigen::Index at = 0; at < n; at += chunk) {
        const Eigen::Index b = std::min(chunk, n - at);
        const Eigen::MatrixXd out = forward_batch(model, ds.x_val.middleCols(at, b));
        if (ds.regression) {
            loss += (out - ds.t_val.middleCols(at, b)).squaredNorm();
        } else {
            for (Eigen::Index c = 0; c < b; ++c)
                for (Eigen::Index r = 0; r < out.rows(); ++r)
                    loss += equivocation_loss(ds.b_val(r, at + c), out(r, c));
        }
    }
    return loss / (static_cast<double>(n) * static_cast<double>(rows));
}

struct LoopHooks {
    // called after every optimizer step with the live model and step counter
    std::function<void(MlpModel&, long)> after_step;
    // best-validation tracking enabled only when this returns true
    std::function<bool(long)> track_best = [](long) { return true; };
};

TrainResult run_training(MlpModel model, const Dataset& ds, const AdamConfig& opt,
                         std::uint64_t shuffle_stream, const LoopHooks& hooks) {
    TrainResult result;
    result.model = model;
    if (opt.max_epochs == 0) return result;

    const std::size_t n_train = static_cast<std::size_t>(ds.x_train.cols());
    std::vector<std::size_t> idx(n_train);
    for (std::size_t i = 0; i < n_train; ++i) idx[i] = i;

    Adam adam(FlatParams::dim(model), opt);
    Rng rng(derive_seed(opt.seed, shuffle_stream));
    Eigen::VectorXd params = FlatParams::pack(model);
    Eigen::VectorXd best = params;
    MlpModel best_model = model;
    double best_val = std::numeric_limits<double>::infinity();
    bool have_best = false;
    int stagnant = 0;
    long step = 0;

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        for (std::size_t i = n_train; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < n_train; at += opt.batch_size) {
            const std::size_t hi = std::min(at + static_cast<std::size_t>(opt.batch_size), n_train);
            Gradient g = eval_batch(model, ds, idx, at, hi);
            if (!std::isfinite(g.loss))
                throw std::runtime_error("sdnne: training loss diverged at epoch " +
                                         std::to_string(epoch));
            epoch_loss += g.loss;
            ++batches;
            adam.update(params, FlatParams::pack_grad(model, g));
            FlatParams::unpack(params, model);
            apply_masks(model);
            ++step;
            if (hooks.after_step) {
                hooks.after_step(model, step);
                params = FlatParams::pack(model);  // masks may have changed weights
            }
        }
        result.train_trace.push_back(epoch_loss / static_cast<double>(batches));

        const double val = eval_validation(model, ds);
        result.val_trace.push_back(val);
        if (!std::isfinite(val))
            throw std::runtime_error("sdnne: validation loss diverged at epoch " +
                                     std::to_string(epoch));
        if (hooks.track_best(step)) {
            if (!have_best || val < best_val - 1e-12) {
                best_val = val;
                best_model = model;
                have_best = true;
                stagnant = 0;
            } else if (++stagnant >= opt.patience) {
                break;
            }
        }
    }

    result.model = have_best ? best_model : model;
    return result;
}

}  // namespace

TrainResult train(const MlpDesign& design, const modem::SymbolFrame& y,
                  const modem::BitFrame& bits, const AdamConfig& opt, double split) {
    design.validate();
    opt.validate();
    const Dataset ds = make_dataset(design, y, &bits, nullptr, split);
    return run_training(init_model(design, opt.seed), ds, opt, 0x7A11, LoopHooks{});
}

TrainResult train_regression(const MlpDesign& design, const modem::SymbolFrame& y,
                             const modem::SymbolFrame& target, const AdamConfig& opt,
                             double split) {
    design.validate();
    opt.validate();
    const Dataset ds = make_dataset(design, y, nullptr, &target, split);
    return run_training(init_model(design, opt.seed), ds, opt, 0x7A12, LoopHooks{});
}

void PruneSchedule::validate() const {
    if (!(initial_sparsity >= 0.0 && initial_sparsity <= final_sparsity && final_sparsity < 1.0))
        throw std::invalid_argument("prune: need 0 <= initial <= final < 1");
    if (start_step < 0 || steps < 1 || interval < 1)
        throw std::invalid_argument("prune: schedule steps must be positive");
}

double PruneSchedule::target_at(long t) const {
    double ratio = static_cast<double>(t - start_step) / static_cast<double>(steps * interval);
    ratio = std::clamp(ratio, 0.0, 1.0);
    const double keep = 1.0 - ratio;
    return final_sparsity + (initial_sparsity - final_sparsity) * keep * keep * keep;
}

GradualPruneResult prune_gradual(const MlpModel& model, const modem::SymbolFrame& y,
                                 const modem::BitFrame& bits, const PruneSchedule& schedule,
                                 const AdamConfig& opt, double split) {
    schedule.validate();
    opt.validate();
    const Dataset ds = make_dataset(model.design, y, &bits, nullptr, split);

    const std::size_t n_train = static_cast<std::size_t>(ds.x_train.cols());
    const long steps_per_epoch =
        static_cast<long>((n_train + opt.batch_size - 1) / opt.batch_size);
    const long last_event = schedule.start_step + schedule.steps * schedule.interval;
    if (schedule.final_sparsity > 0.0 &&
        static_cast<long>(opt.max_epochs) * steps_per_epoch < last_event)
        throw std::invalid_argument(
            "prune: schedule needs " + std::to_string(last_event) + " optimizer steps but only " +
            std::to_string(static_cast<long>(opt.max_epochs) * steps_per_epoch) + " are available");

    GradualPruneResult result;
    const std::size_t total_weights = model.weight_count();
    auto& trace = result.sparsity_trace;

    LoopHooks hooks;
    hooks.after_step = [&](MlpModel& live, long t) {
        if (schedule.final_sparsity <= 0.0) return;
        if (t < schedule.start_step || (t - schedule.start_step) % schedule.interval != 0 ||
            t > last_event)
            return;
        const double target = schedule.target_at(t);
        const auto count = static_cast<std::size_t>(
            std::llround(target * static_cast<double>(total_weights)));
        mask_smallest(live, count);
        trace.emplace_back(t, live.sparsity());
    };
    hooks.track_best = [&](long t) { return schedule.final_sparsity <= 0.0 || t >= last_event; };

    TrainResult trained = run_training(model, ds, opt, 0x9A0E, hooks);
    result.model = std::move(trained.model);
    result.train_trace = std::move(trained.train_trace);
    result.val_trace = std::move(trained.val_trace);
    return result;
}

demap::LlrBlock demap_frame(const MlpModel& model, const modem::SymbolFrame& y) {
    if (model.design.inputs() % 2 == 0)
        throw std::invalid_argument("demap_frame: input layer must be odd");
    const int m = model.design.outputs();
    demap::LlrBlock block;
    block.n = y.size();
    block.m = m;
    block.llrs.resize(block.n * static_cast<std::size_t>(m));
    const std::size_t chunk = 8192;
    for (std::size_t at = 0; at < block.n; at += chunk) {
        const std::size_t hi = std::min(at + chunk, block.n);
        const Eigen::MatrixXd out =
            forward_batch(model, window_matrix(y, model.design.memory(), at, hi));
        for (std::size_t i = at; i < hi; ++i)
            for (int j = 0; j < m; ++j)
                block.llr(i, j) = out(j, static_cast<Eigen::Index>(i - at));
    }
    return block;
}

demap::LlrBlock demap_frame(const MlpModel& model, const modem::SymbolFrame& y,
                            const modem::BitFrame& bits) {
    if (bits.n != y.size() || bits.m != model.design.outputs())
        throw std::invalid_argument("demap_frame: bit frame not aligned");
    demap::LlrBlock block = demap_frame(model, y);
    block.bits = bits;
    return block;
}

}  // namespace nleq::sdnne
