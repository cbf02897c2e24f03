// SPDX-License-Identifier: Apache-2.0
#include "nleq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nleq/loss.hpp"

namespace nleq::analysis {

namespace {

// mean over symbols of sum_j log2(1+exp(-s*t_ij)) where t = (1-2b)*llr
double equivocation_sum(const std::vector<double>& t, std::size_t n, double s) {
    double acc = 0.0;
    for (double v : t) acc += softplus(-s * v);
    return acc / (static_cast<double>(n) * std::numbers::ln2);
}

}  // namespace

RateReport achievable_rate(const demap::LlrBlock& block) {
    if (block.n < 1) throw std::invalid_argument("achievable_rate: empty block");
    if (!block.has_bits())
        throw std::invalid_argument("achievable_rate: block carries no reference bits");

    std::vector<double> t(block.llrs.size());
    for (std::size_t i = 0; i < block.n; ++i) {
        for (int j = 0; j < block.m; ++j) {
            const double l = block.llr(i, j);
            if (std::isnan(l)) throw std::invalid_argument("achievable_rate: NaN LLR");
            t[i * block.m + j] = (1.0 - 2.0 * block.bits.bit(i, j)) * l;
        }
    }

    // golden-section search on the convex equivocation sum
    double lo = 1e-6, hi = 100.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = equivocation_sum(t, block.n, x1);
    double f2 = equivocation_sum(t, block.n, x2);
    while (hi - lo > 1e-6) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = equivocation_sum(t, block.n, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = equivocation_sum(t, block.n, x2);
        }
    }
    const double s = 0.5 * (lo + hi);
    const double eq = equivocation_sum(t, block.n, s);

    RateReport report;
    report.n = block.n;
    report.m = block.m;
    report.minimizing_s = s;
    report.rate_bits = std::clamp(static_cast<double>(block.m) - eq, 0.0,
                                  static_cast<double>(block.m));
    report.per_bit_equivocation.assign(block.m, 0.0);
    for (std::size_t i = 0; i < block.n; ++i)
        for (int j = 0; j < block.m; ++j)
            report.per_bit_equivocation[j] +=
                softplus(-s * t[i * block.m + j]) / std::numbers::ln2;
    for (double& v : report.per_bit_equivocation) v /= static_cast<double>(block.n);
    return report;
}

demap::LlrBlock exact_llrs_awgn(const modem::GrayPamMap& map, const modem::SymbolFrame& y,
                                double noise_var) {
    if (!(noise_var > 0)) throw std::invalid_argument("exact_llrs_awgn: noise_var must be positive");
    const int m = map.bits_per_symbol;
    const int levels = map.num_levels();

    demap::LlrBlock block;
    block.n = y.size();
    block.m = m;
    block.llrs.resize(block.n * static_cast<std::size_t>(m));

    std::vector<double> metric(levels);
    for (std::size_t i = 0; i < block.n; ++i) {
        double peak = -std::numeric_limits<double>::infinity();
        for (int v = 0; v < levels; ++v) {
            const double d = y.symbols[i] - map.levels[v];
            metric[v] = -d * d / (2.0 * noise_var);
            peak = std::max(peak, metric[v]);
        }
        for (int j = 0; j < m; ++j) {
            double acc0 = 0.0, acc1 = 0.0;
            for (int v = 0; v < levels; ++v) {
                const double e = std::exp(metric[v] - peak);
                if (map.labels[v][j] == 0)
                    acc0 += e;
                else
                    acc1 += e;
            }
            block.llr(i, j) = std::log(acc0) - std::log(acc1);
        }
    }
    return block;
}

demap::LlrBlock exact_llrs_awgn(const modem::GrayPamMap& map, const modem::SymbolFrame& y,
                                double noise_var, const modem::BitFrame& bits) {
    if (bits.n != y.size() || bits.m != map.bits_per_symbol)
        throw std::invalid_argument("exact_llrs_awgn: bit frame not aligned");
    demap::LlrBlock block = exact_llrs_awgn(map, y, noise_var);
    block.bits = bits;
    return block;
}

namespace {

int multiset_factor(const std::array<int, 3>& t) {
    // product of multiplicity factorials
    if (t[0] == t[1] && t[1] == t[2]) return 6;
    if (t[0] == t[1] || t[1] == t[2]) return 2;
    return 1;
}

}  // namespace

std::vector<ExtractedKernels> extract_kernels(const sdnne::MlpModel& model,
                                              const ExtractionConfig& cfg,
                                              const Eigen::VectorXd* y0_in) {
    if (cfg.orders < 1 || cfg.orders > 3)
        throw std::invalid_argument("extract_kernels: orders must be 1..3");
    const auto act = model.design.activation;
    if (cfg.orders >= 2 && act != sdnne::Activation::Tanh && act != sdnne::Activation::Linear)
        throw std::invalid_argument(
            "extract_kernels: orders >= 2 need an activation that is differentiable "
            "everywhere; expand the tanh-trained model instead");

    const int t = model.design.inputs();
    const int m = model.design.outputs();
    const Eigen::VectorXd y0 = y0_in ? *y0_in : Eigen::VectorXd::Zero(t);
    if (y0.size() != t) throw std::invalid_argument("extract_kernels: y0 size mismatch");

    std::vector<ExtractedKernels> out(m);
    const Eigen::MatrixXd jac0 = sdnne::input_jacobian(model, y0);
    for (int j = 0; j < m; ++j) out[j].h1 = jac0.row(j).transpose();
    if (cfg.orders < 2) return out;

    // Hessian columns from central differences of the exact gradient.
    std::vector<Eigen::MatrixXd> hess(m, Eigen::MatrixXd::Zero(t, t));
    {
        const double h = cfg.h2_step;
        Eigen::VectorXd probe = y0;
        for (int i = 0; i < t; ++i) {
            probe[i] = y0[i] + h;
            const Eigen::MatrixXd jp = sdnne::input_jacobian(model, probe);
            probe[i] = y0[i] - h;
            const Eigen::MatrixXd jm = sdnne::input_jacobian(model, probe);
            probe[i] = y0[i];
            for (int j = 0; j < m; ++j) hess[j].col(i) = (jp.row(j) - jm.row(j)).transpose() / (2.0 * h);
        }
    }
    for (int j = 0; j < m; ++j) {
        const Eigen::MatrixXd sym = 0.5 * (hess[j] + hess[j].transpose());
        Eigen::MatrixXd folded = Eigen::MatrixXd::Zero(t, t);
        for (int a = 0; a < t; ++a) {
            folded(a, a) = 0.5 * sym(a, a);
            for (int b = a + 1; b < t; ++b) folded(a, b) = sym(a, b);
        }
        out[j].h2 = folded;
    }
    if (cfg.orders < 3) return out;

    // Third derivatives: d3f/di dj dk for all k at once from four gradient
    // evaluations per (i, j) pair, with one Richardson refinement in the step.
    auto third_block = [&](int i, int j, double h) {
        Eigen::VectorXd probe = y0;
        auto jac_at = [&](double di, double dj) {
            probe[i] = y0[i] + di;
            probe[j] += dj;  // handles i == j correctly
            const Eigen::MatrixXd r = sdnne::input_jacobian(model, probe);
            probe[i] = y0[i];
            probe[j] = y0[j];
            return r;
        };
        const Eigen::MatrixXd gpp = jac_at(h, h);
        const Eigen::MatrixXd gpm = jac_at(h, -h);
        const Eigen::MatrixXd gmp = jac_at(-h, h);
        const Eigen::MatrixXd gmm = jac_at(-h, -h);
        return ((gpp - gpm - gmp + gmm) / (4.0 * h * h)).eval();
    };

    std::vector<std::array<int, 3>> tuples;
    for (int a = 0; a < t; ++a)
        for (int b = a; b < t; ++b)
            for (int c = b; c < t; ++c) tuples.push_back({a, b, c});
    for (int j = 0; j < m; ++j) {
        out[j].has_h3 = true;
        out[j].h3_index = tuples;
        out[j].h3_value.assign(tuples.size(), 0.0);
    }

    for (int a = 0; a < t; ++a) {
        for (int b = a; b < t; ++b) {
            const Eigen::MatrixXd coarse = third_block(a, b, cfg.h3_step);
            const Eigen::MatrixXd fine = third_block(a, b, cfg.h3_step / 2.0);
            const Eigen::MatrixXd refined = (4.0 * fine - coarse) / 3.0;
            for (int j = 0; j < m; ++j) {
                for (std::size_t q = 0; q < tuples.size(); ++q) {
                    const auto& tu = tuples[q];
                    if (tu[0] == a && tu[1] == b)
                        out[j].h3_value[q] = refined(j, tu[2]) / multiset_factor(tu);
                }
            }
        }
    }
    return out;
}

BigInt activation_patterns(const sdnne::MlpDesign& design) {
    design.validate();
    if (design.num_layers() < 3)
        throw std::invalid_argument("activation_patterns: need at least one hidden layer");

    // Hidden layer l sees an input of effective dimension bounded by the
    // narrowest preceding layer, so its units can realize at most the
    // hyperplane-arrangement count sum_{j<=d} C(n_l, j) sign patterns; the
    // layers multiply.
    const auto& sizes = design.layer_sizes;
    BigInt product = 1;
    int preceding_min = sizes[0];  // min over n_0..n_{l-1}
    for (std::size_t l = 1; l + 1 < sizes.size(); ++l) {
        const int n_l = sizes[l];
        const int j_max = std::min(preceding_min, n_l);
        BigInt layer_sum = 0;
        BigInt binom = 1;  // C(n_l, 0)
        for (int j = 0; j <= j_max; ++j) {
            layer_sum += binom;
            binom = binom * (n_l - j) / (j + 1);
        }
        product *= layer_sum;
        preceding_min = std::min(preceding_min, n_l);
    }
    return product;
}

ComplexityReport multiplier_count(const volterra::VolterraModel& model, bool with_mla,
                                  int m_bits) {
    const auto& design = model.design;
    design.validate();
    ComplexityReport report;
    report.formula = "VNLE";

    // active kernels per order, mask-aware
    std::size_t at = 0;
    int widest_nonlinear = 0;
    const auto counts = volterra::kernel_count(design);
    for (int p = 1; p <= design.order(); ++p) {
        long long active = 0;
        for (long long i = 0; i < counts[p - 1]; ++i, ++at)
            if (model.mask.empty() || model.mask[at]) ++active;
        report.kernels_or_weights += active;
        if (p >= 2 && active > 0) widest_nonlinear = std::max(widest_nonlinear, design.taps(p));
    }
    report.feature_matrix = widest_nonlinear;
    report.demapper = with_mla ? m_bits : 0;
    report.multipliers = report.sum();
    return report;
}

ComplexityReport multiplier_count(const volterra::VolterraDesign& design, bool with_mla,
                                  int m_bits) {
    volterra::VolterraModel full;
    full.design = design;
    full.kernels.assign(volterra::total_kernels(design), 0.0);
    full.mask.assign(full.kernels.size(), 1);
    return multiplier_count(full, with_mla, m_bits);
}

ComplexityReport multiplier_count(const sdnne::MlpModel& model, int lut_points_for_tanh) {
    const auto& design = model.design;
    design.validate();
    ComplexityReport report;

    report.kernels_or_weights = static_cast<long long>(model.active_weights());
    long long hidden_units = 0;
    for (std::size_t l = 1; l + 1 < design.layer_sizes.size(); ++l)
        hidden_units += design.layer_sizes[l];

    switch (design.activation) {
        case sdnne::Activation::Relu:
        case sdnne::Activation::HTanh:
            report.activations = hidden_units;
            report.formula = "SDNNE-ReLU/H-tanh";
            break;
        case sdnne::Activation::ITanh:
            report.activations = static_cast<long long>(design.itanh_points - 1) * hidden_units;
            report.formula = "SDNNE-ITANH(" + std::to_string(design.itanh_points) + ")";
            break;
        case sdnne::Activation::Tanh:
            // no direct hardware mapping; costed as the K-point LUT emulation
            report.activations = static_cast<long long>(lut_points_for_tanh - 1) * hidden_units;
            report.formula = "SDNNE-ITANH(" + std::to_string(lut_points_for_tanh) + ")";
            break;
        case sdnne::Activation::Linear:
            report.activations = 0;
            report.formula = "SDNNE-LINEAR";
            break;
    }
    report.multipliers = report.sum();
    return report;
}

ComplexityReport multiplier_count(const sdnne::MlpDesign& design, int lut_points_for_tanh) {
    sdnne::MlpModel full;
    full.design = design;
    for (int l = 0; l + 1 < design.num_layers(); ++l) {
        full.weights.emplace_back(
            Eigen::MatrixXd::Zero(design.layer_sizes[l + 1], design.layer_sizes[l]));
        full.biases.emplace_back(Eigen::VectorXd::Zero(design.layer_sizes[l + 1]));
        full.masks.emplace_back(
            Eigen::MatrixXd::Ones(design.layer_sizes[l + 1], design.layer_sizes[l]));
    }
    return multiplier_count(full, lut_points_for_tanh);
}

DiscreteChannelOracle discrete_channel_oracle(const std::vector<std::array<double, 2>>& p_by) {
    if (p_by.empty()) throw std::invalid_argument("discrete_channel_oracle: empty table");
    double total = 0.0;
    for (const auto& cell : p_by) {
        if (cell[0] < 0 || cell[1] < 0)
            throw std::invalid_argument("discrete_channel_oracle: negative probability");
        total += cell[0] + cell[1];
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("discrete_channel_oracle: table does not sum to 1");

    DiscreteChannelOracle oracle;
    oracle.posterior_llr.resize(p_by.size());
    for (std::size_t y = 0; y < p_by.size(); ++y) {
        const double p0 = p_by[y][0], p1 = p_by[y][1];
        const double py = p0 + p1;
        if (py == 0) {
            oracle.posterior_llr[y] = 0.0;  // unobservable outcome
            continue;
        }
        if (p0 > 0) oracle.conditional_entropy_bits -= p0 * std::log2(p0 / py);
        if (p1 > 0) oracle.conditional_entropy_bits -= p1 * std::log2(p1 / py);
        oracle.posterior_llr[y] =
            p1 > 0 ? (p0 > 0 ? std::log(p0 / p1) : -std::numeric_limits<double>::infinity())
                   : std::numeric_limits<double>::infinity();
    }
    return oracle;
}

}  // namespace nleq::analysis
