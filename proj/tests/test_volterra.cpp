// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nleq/analysis.hpp"
#include "nleq/channel.hpp"
#include "nleq/common.hpp"
#include "nleq/volterra.hpp"

using namespace nleq;

namespace {

// independent multiset counter, no shared code with the library enumeration
long long count_tuples_brute(int taps, int order, int min_pos = 0) {
    if (order == 0) return 1;
    long long total = 0;
    for (int t = min_pos; t < taps; ++t) total += count_tuples_brute(taps, order - 1, t);
    return total;
}

modem::SymbolFrame gaussian_frame(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
    Rng rng(seed);
    modem::SymbolFrame frame;
    frame.symbols.resize(n);
    for (auto& v : frame.symbols) v = sigma * rng.gaussian();
    return frame;
}

volterra::VolterraModel random_model(const volterra::VolterraDesign& design, std::uint64_t seed,
                                     double scale = 0.3) {
    volterra::VolterraModel model = volterra::identity_model(design);
    Rng rng(seed);
    for (auto& h : model.kernels) h = scale * (2.0 * rng.uniform() - 1.0);
    return model;
}

}  // namespace

TEST_CASE("kernel_count golden values") {
    CHECK(volterra::kernel_count({{17}}) == std::vector<long long>{17});
    CHECK(volterra::kernel_count({{17, 17}}) == std::vector<long long>{17, 153});
    CHECK(volterra::kernel_count({{17, 17, 11}}) == std::vector<long long>{17, 153, 286});
}

TEST_CASE("kernel_count equals brute enumeration for P<=5, T<=21") {
    for (int order = 1; order <= 5; ++order) {
        for (int taps = 1; taps <= 21; taps += 2) {
            std::vector<int> design_taps(order, taps);
            const auto counts = volterra::kernel_count({design_taps});
            for (int p = 1; p <= order; ++p) {
                CHECK(counts[p - 1] == count_tuples_brute(taps, p));
                CHECK(counts[p - 1] ==
                      static_cast<long long>(volterra::enumerate_tuples(taps, p).size()));
            }
        }
    }
}

TEST_CASE("design validation") {
    CHECK_THROWS_AS(volterra::kernel_count({{}}), std::invalid_argument);
    CHECK_THROWS_AS(volterra::kernel_count({{4}}), std::invalid_argument);
    CHECK_THROWS_AS(volterra::kernel_count({{5, 7}}), std::invalid_argument);  // T2 > T1
}

TEST_CASE("features: linear design returns the raw window") {
    modem::SymbolFrame y;
    y.symbols = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto f = volterra::features({{3}}, y, 2);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == 2.0);
    CHECK(f[1] == 3.0);
    CHECK(f[2] == 4.0);
}

TEST_CASE("features: order-2 products in canonical order") {
    // window (2, 3, 5) around k=1
    modem::SymbolFrame y;
    y.symbols = {2.0, 3.0, 5.0};
    const auto f = volterra::features({{3, 3}}, y, 1);
    REQUIRE(f.size() == 9);
    const double expected[6] = {4.0, 6.0, 10.0, 9.0, 15.0, 25.0};
    for (int i = 0; i < 6; ++i) CHECK(f[3 + i] == expected[i]);
}

TEST_CASE("features: zero window gives zero features and edges zero-pad") {
    modem::SymbolFrame y;
    y.symbols = {0.0, 0.0, 0.0};
    CHECK(volterra::features({{3, 3}}, y, 1).cwiseAbs().maxCoeff() == 0.0);

    modem::SymbolFrame z;
    z.symbols = {7.0};
    const auto f = volterra::features({{3}}, z, 0);
    CHECK(f[0] == 0.0);  // left padding
    CHECK(f[1] == 7.0);
    CHECK(f[2] == 0.0);  // right padding
}

TEST_CASE("predict: identity and pure cube") {
    const auto y = gaussian_frame(64, 9);
    const auto identity = volterra::identity_model({{5, 3}});
    const auto out = volterra::predict(identity, y);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(out.symbols[i] == doctest::Approx(y.symbols[i]).epsilon(1e-15));

    volterra::VolterraModel cubic;
    cubic.design = {{1, 1, 1}};
    cubic.kernels = {0.0, 0.0, 1.0};  // h3(0,0,0) = 1
    cubic.mask = {1, 1, 1};
    modem::SymbolFrame twos;
    twos.symbols.assign(8, 2.0);
    const auto cubed = volterra::predict(cubic, twos);
    for (double v : cubed.symbols) CHECK(v == doctest::Approx(8.0));
}

TEST_CASE("predict is linear in the kernels") {
    const volterra::VolterraDesign design{{5, 3, 3}};
    const auto y = gaussian_frame(128, 21);
    const auto ha = random_model(design, 1);
    const auto hb = random_model(design, 2);
    const double alpha = 0.7, beta = -1.3;

    volterra::VolterraModel mix = ha;
    for (std::size_t i = 0; i < mix.kernels.size(); ++i)
        mix.kernels[i] = alpha * ha.kernels[i] + beta * hb.kernels[i];

    const auto pa = volterra::predict(ha, y);
    const auto pb = volterra::predict(hb, y);
    const auto pm = volterra::predict(mix, y);
    for (std::size_t k = 0; k < y.size(); ++k)
        CHECK(pm.symbols[k] ==
              doctest::Approx(alpha * pa.symbols[k] + beta * pb.symbols[k]).epsilon(1e-12));
}

TEST_CASE("canonical folding matches brute-force unfolded evaluation") {
    const volterra::VolterraDesign design{{3, 3}};
    const auto model = random_model(design, 33);
    const auto y = gaussian_frame(32, 34);
    const auto out = volterra::predict(model, y);

    // unfold the order-2 kernels into a symmetric double sum
    const auto tuples = volterra::enumerate_tuples(3, 2);
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        const double w[3] = {y.symbols[k - 1], y.symbols[k], y.symbols[k + 1]};
        double ref = 0.0;
        for (int t = 0; t < 3; ++t) ref += model.kernels[static_cast<std::size_t>(t)] * w[t];
        for (int t1 = 0; t1 < 3; ++t1)
            for (int t2 = 0; t2 < 3; ++t2) {
                const int lo = std::min(t1, t2), hi = std::max(t1, t2);
                for (std::size_t q = 0; q < tuples.size(); ++q)
                    if (tuples[q][0] == lo && tuples[q][1] == hi) {
                        const double unique = model.kernels[3 + q];
                        ref += (lo == hi ? unique : unique / 2.0) * w[t1] * w[t2];
                    }
            }
        CHECK(out.symbols[k] == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("fit_ls recovers a noiseless generator") {
    const volterra::VolterraDesign design{{5, 3}};
    const auto generator = random_model(design, 55);
    const auto y = gaussian_frame(2000, 56);
    const auto x = volterra::predict(generator, y);

    const auto fit = volterra::fit_ls(design, y, x);
    REQUIRE(fit.model.kernels.size() == generator.kernels.size());
    for (std::size_t i = 0; i < generator.kernels.size(); ++i)
        CHECK(std::fabs(fit.model.kernels[i] - generator.kernels[i]) < 1e-8);
    CHECK(fit.rank == static_cast<Eigen::Index>(generator.kernels.size()));
    CHECK(fit.condition > 1.0);

    // prediction self-consistency
    const auto pred = volterra::predict(fit.model, y);
    double mse = 0.0;
    for (std::size_t k = 2; k + 2 < y.size(); ++k) {
        const double d = pred.symbols[k] - x.symbols[k];
        mse += d * d;
    }
    mse /= static_cast<double>(y.size() - 4);
    CHECK(mse < 1e-20);
}

TEST_CASE("fit_ls on the AWGN identity channel finds the center tap") {
    // BPSK keeps the empirical frame power at exactly 1, so the channel's
    // output normalization does not introduce a gain the taps must absorb
    const auto map = modem::build_gray_pam(1);
    const auto bits = modem::random_bits(20000, 1, 17);
    const auto x = modem::map_bits(map, bits);
    channel::WienerHammersteinChannel ch;
    ch.noise_sigma = 0.003;
    ch.seed = 18;
    const auto y = channel::propagate(ch, x);

    const auto fit = volterra::fit_ls({{5}}, y, x);
    // 3 sigma of the tap estimate is ~6.4e-5; allow headroom for the bias
    for (int t = 0; t < 5; ++t) {
        const double target = t == 2 ? 1.0 : 0.0;
        CHECK(std::fabs(fit.model.kernels[static_cast<std::size_t>(t)] - target) < 1e-4);
    }
}

TEST_CASE("fit_ls error paths") {
    const volterra::VolterraDesign design{{5, 5}};
    // too few samples for the kernel count
    auto y = gaussian_frame(12, 3);
    CHECK_THROWS_AS(volterra::fit_ls(design, y, y), std::invalid_argument);

    // constant input makes the linear columns collinear
    modem::SymbolFrame flat;
    flat.symbols.assign(200, 1.0);
    modem::SymbolFrame target = gaussian_frame(200, 4);
    bool threw = false;
    try {
        volterra::fit_ls({{5}}, flat, target);
    } catch (const volterra::RankDeficientError& e) {
        threw = true;
        CHECK(e.rank < 5);
        CHECK(e.condition > 1e12);
    }
    CHECK(threw);
}

TEST_CASE("mse gradient matches central differences") {
    const volterra::VolterraDesign design{{3, 3}};
    auto model = random_model(design, 71);
    const auto y = gaussian_frame(64, 72);
    const auto x = gaussian_frame(64, 73);
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) idx.push_back(k);

    Eigen::VectorXd grad(static_cast<Eigen::Index>(model.kernels.size()));
    volterra::mse_loss_grad(model, y, x, idx, &grad);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < model.kernels.size(); ++i) {
        auto probe = model;
        probe.kernels[i] += eps;
        const double fp = volterra::mse_loss_grad(probe, y, x, idx, nullptr);
        probe.kernels[i] -= 2 * eps;
        const double fm = volterra::mse_loss_grad(probe, y, x, idx, nullptr);
        const double fd = (fp - fm) / (2 * eps);
        CHECK(std::fabs(fd - grad[static_cast<Eigen::Index>(i)]) <=
              1e-5 * std::max(1.0, std::fabs(fd)));
    }
}

TEST_CASE("bitwise gradient matches central differences") {
    const auto map = modem::build_gray_pam(3);
    const volterra::VolterraDesign design{{3, 3}};
    const auto bits = modem::random_bits(48, 3, 81);
    const auto x = modem::map_bits(map, bits);
    channel::WienerHammersteinChannel ch;
    ch.noise_sigma = 0.05;
    ch.seed = 82;
    const auto y = channel::propagate(ch, x);

    auto model = random_model(design, 83, 0.08);
    model.kernels[1] += 1.0;  // keep the equalized signal near the constellation
    const auto mla = demap::make_trained_mla(map, 0.01);

    // keep clear of the piecewise-linear segment boundaries so the finite
    // difference stays within one affine piece
    const auto eq = volterra::predict(model, y);
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        double dist = 1e9;
        for (double b : mla.boundaries) dist = std::min(dist, std::fabs(eq.symbols[k] - b));
        if (dist > 1e-3) idx.push_back(k);
    }
    REQUIRE(idx.size() > 20);

    const auto n_kernels = static_cast<Eigen::Index>(model.kernels.size());
    const auto n_demap = static_cast<Eigen::Index>(2 * 3 * mla.num_segments());
    Eigen::VectorXd gk(n_kernels), gd(n_demap);
    volterra::bitwise_loss_grad(model, mla, y, bits, idx, &gk, &gd);

    const double eps = 1e-7;
    for (Eigen::Index i = 0; i < n_kernels; ++i) {
        auto probe = model;
        probe.kernels[static_cast<std::size_t>(i)] += eps;
        const double fp = volterra::bitwise_loss_grad(probe, mla, y, bits, idx, nullptr, nullptr);
        probe.kernels[static_cast<std::size_t>(i)] -= 2 * eps;
        const double fm = volterra::bitwise_loss_grad(probe, mla, y, bits, idx, nullptr, nullptr);
        const double fd = (fp - fm) / (2 * eps);
        CHECK(std::fabs(fd - gk[i]) <= 1e-5 * std::max(0.1, std::fabs(fd)));
    }
    // demapper parameters: slopes then intercepts
    const int segments = mla.num_segments();
    for (int j = 0; j < 3; ++j) {
        for (int s = 0; s < segments; ++s) {
            auto probe = mla;
            probe.slopes[j][s] += eps;
            const double fp =
                volterra::bitwise_loss_grad(model, probe, y, bits, idx, nullptr, nullptr);
            probe.slopes[j][s] -= 2 * eps;
            const double fm =
                volterra::bitwise_loss_grad(model, probe, y, bits, idx, nullptr, nullptr);
            const double fd = (fp - fm) / (2 * eps);
            CHECK(std::fabs(fd - gd[j * segments + s]) <= 1e-5 * std::max(0.1, std::fabs(fd)));
        }
    }
}

TEST_CASE("fit_gd: zero epochs returns the identity start") {
    const volterra::VolterraDesign design{{5, 3}};
    const auto y = gaussian_frame(512, 91);
    const auto x = gaussian_frame(512, 92);
    AdamConfig opt;
    opt.max_epochs = 0;
    const auto fit = volterra::fit_gd_mse(design, y, x, opt);
    CHECK(fit.model.kernels == volterra::identity_model(design).kernels);
    CHECK(fit.train_trace.empty());
}

TEST_CASE("fit_gd mse reaches the least-squares optimum") {
    const volterra::VolterraDesign design{{5, 3}};
    const auto generator = random_model(design, 101);
    const auto y = gaussian_frame(3000, 102);
    const auto x = volterra::predict(generator, y);

    const auto ls = volterra::fit_ls(design, y, x);

    AdamConfig opt;
    opt.step = 5e-3;
    opt.batch_size = 256;
    opt.max_epochs = 400;
    opt.patience = 400;
    opt.seed = 7;
    const auto gd = volterra::fit_gd_mse(design, y, x, opt);

    std::vector<std::size_t> idx;
    for (std::size_t k = 2; k + 2 < y.size(); ++k) idx.push_back(k);
    const double mse_ls = volterra::mse_loss_grad(ls.model, y, x, idx, nullptr);
    const double mse_gd = volterra::mse_loss_grad(gd.model, y, x, idx, nullptr);
    CHECK(mse_gd - mse_ls <= 1e-4);
}

TEST_CASE("bitwise training does not lose rate against mse training") {
    const auto map = modem::build_gray_pam(3);
    const volterra::VolterraDesign design{{7, 3}};
    const auto bits = modem::random_bits(16000, 3, 111);
    const auto x = modem::map_bits(map, bits);
    auto ch = channel::default_channel(channel::sigma_from_snr(22.0), 112);
    const auto y = channel::propagate(ch, x);

    // fresh evaluation frame
    const auto bits_eval = modem::random_bits(16000, 3, 113);
    ch.seed = 114;
    const auto y_eval = channel::propagate(ch, modem::map_bits(map, bits_eval));

    AdamConfig opt;
    opt.max_epochs = 60;
    opt.seed = 5;

    const auto mse_fit = volterra::fit_gd_mse(design, y, x, opt);
    const auto eq_train = volterra::predict(mse_fit.model, y);
    double residual = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = eq_train.symbols[k] - x.symbols[k];
        residual += d * d;
    }
    residual /= static_cast<double>(y.size());
    const auto fixed = demap::make_fixed_mla(map, residual);
    const auto rate_mse = analysis::achievable_rate(
        demap::demap_max_log(fixed, volterra::predict(mse_fit.model, y_eval), bits_eval));

    volterra::BitwiseInit warm{mse_fit.model, demap::make_trained_mla(map, residual)};
    const auto bw_fit = volterra::fit_gd_bitwise(design, y, bits, map, opt, 0.5, &warm);
    const auto rate_bw = analysis::achievable_rate(demap::demap_max_log(
        *bw_fit.demapper, volterra::predict(bw_fit.model, y_eval), bits_eval));

    CHECK(rate_bw.rate_bits >= rate_mse.rate_bits - 1e-3);
}

TEST_CASE("prune_l1 with zero penalty and threshold equals plain fit_gd") {
    const volterra::VolterraDesign design{{5, 3}};
    const auto generator = random_model(design, 121);
    const auto y = gaussian_frame(1500, 122);
    auto x = volterra::predict(generator, y);

    AdamConfig opt;
    opt.max_epochs = 30;
    opt.seed = 3;
    const auto plain = volterra::fit_gd_mse(design, y, x, opt);
    const auto pruned = volterra::prune_l1(design, y, x, 0.0, 0.0, opt);
    CHECK(pruned.model.kernels == plain.model.kernels);  // bitwise identical
    CHECK(pruned.active == pruned.model.kernels.size());
}

TEST_CASE("prune_l1 recovers a sparse generator") {
    const volterra::VolterraDesign design{{17, 17}};  // 170 kernels
    volterra::VolterraModel generator = volterra::identity_model(design);
    std::fill(generator.kernels.begin(), generator.kernels.end(), 0.0);
    Rng rng(131);
    std::vector<std::size_t> support;
    while (support.size() < 10) {
        const auto pick = static_cast<std::size_t>(rng.below(generator.kernels.size()));
        if (std::find(support.begin(), support.end(), pick) == support.end()) {
            support.push_back(pick);
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            generator.kernels[pick] = sign * (0.15 + 0.35 * rng.uniform());
        }
    }

    const auto y = gaussian_frame(6000, 132);
    const auto x = volterra::predict(generator, y);

    AdamConfig opt;
    opt.step = 3e-3;
    opt.max_epochs = 120;
    opt.patience = 120;
    opt.seed = 9;
    const auto unpruned = volterra::fit_gd_mse(design, y, x, opt);
    const auto pruned = volterra::prune_l1(design, y, x, 1e-3, 0.05, opt);

    CHECK(pruned.active <= 20);
    for (std::size_t i : support) CHECK(pruned.model.mask[i] == 1);

    std::vector<std::size_t> idx;
    for (std::size_t k = 8; k + 8 < y.size(); ++k) idx.push_back(k);
    const double mse_unpruned = volterra::mse_loss_grad(unpruned.model, y, x, idx, nullptr);
    const double mse_pruned = volterra::mse_loss_grad(pruned.model, y, x, idx, nullptr);
    CHECK(mse_pruned <= 2.0 * std::max(mse_unpruned, 1e-9));
}

TEST_CASE("prune_l1 active count is monotone in lambda") {
    const volterra::VolterraDesign design{{5, 5}};
    const auto generator = random_model(design, 141);
    const auto y = gaussian_frame(1200, 142);
    const auto x = volterra::predict(generator, y);

    AdamConfig opt;
    opt.max_epochs = 40;
    opt.patience = 40;
    opt.seed = 2;
    std::size_t last = SIZE_MAX;
    for (double lambda : {0.0, 1e-3, 1e-2, 1e-1}) {
        const auto pruned = volterra::prune_l1(design, y, x, lambda, 0.02, opt);
        CHECK(pruned.active <= last);
        last = pruned.active;
    }
}
