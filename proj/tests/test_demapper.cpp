// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nleq/analysis.hpp"
#include "nleq/channel.hpp"
#include "nleq/common.hpp"
#include "nleq/demapper.hpp"

using namespace nleq;

namespace {

// independent max-log reference: explicit minima over the two label sets
double brute_max_log(const modem::GrayPamMap& map, double noise_var, double y, int j) {
    double d0 = 1e300, d1 = 1e300;
    for (std::size_t v = 0; v < map.levels.size(); ++v) {
        const double d = (y - map.levels[v]) * (y - map.levels[v]);
        if (map.labels[v][j] == 0)
            d0 = std::min(d0, d);
        else
            d1 = std::min(d1, d);
    }
    return (d1 - d0) / (2.0 * noise_var);
}

}  // namespace

TEST_CASE("llr is zero on decision boundaries") {
    const auto map = modem::build_gray_pam(3);
    const auto d = demap::make_fixed_mla(map, 0.01);
    const auto mids = modem::level_midpoints(map);
    for (std::size_t i = 0; i < mids.size(); ++i) {
        // Gray labels of the two adjacent levels differ in exactly one bit
        int flip = -1;
        for (int j = 0; j < 3; ++j)
            if (map.labels[i][j] != map.labels[i + 1][j]) flip = j;
        REQUIRE(flip >= 0);
        CHECK(std::fabs(demap::demap_bit(d, mids[i], flip)) < 1e-12);
    }
}

TEST_CASE("bpsk llr is 2y over sigma squared") {
    const auto map = modem::build_gray_pam(1);
    const double noise_var = 0.137;
    const auto d = demap::make_fixed_mla(map, noise_var);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double y = 3.0 * (2.0 * rng.uniform() - 1.0);
        CHECK(demap::demap_bit(d, y, 0) == doctest::Approx(2.0 * y / noise_var).epsilon(1e-12));
    }
}

TEST_CASE("outermost level has the largest sign-bit confidence") {
    const auto map = modem::build_gray_pam(3);
    const auto d = demap::make_fixed_mla(map, 0.05);
    const double outer = map.levels.back();  // +7/sqrt(21)
    const double llr_outer = demap::demap_bit(d, outer, 0);
    CHECK(llr_outer > 0.0);
    for (double level : map.levels)
        CHECK(std::fabs(demap::demap_bit(d, level, 0)) <= llr_outer + 1e-12);
}

TEST_CASE("fixed max-log equals brute-force minimization") {
    const auto map = modem::build_gray_pam(3);
    const double noise_var = 0.02;
    const auto d = demap::make_fixed_mla(map, noise_var);
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double y = 4.0 * (2.0 * rng.uniform() - 1.0);
        for (int j = 0; j < 3; ++j)
            CHECK(demap::demap_bit(d, y, j) ==
                  doctest::Approx(brute_max_log(map, noise_var, y, j)).epsilon(1e-12));
    }
}

TEST_CASE("joint scaling of signal, constellation and noise leaves llrs invariant") {
    const auto map = modem::build_gray_pam(3);
    const double noise_var = 0.05;
    const double c = 3.7;
    auto scaled_map = map;
    for (double& level : scaled_map.levels) level *= c;

    const auto d = demap::make_fixed_mla(map, noise_var);
    const auto ds = demap::make_fixed_mla(scaled_map, c * c * noise_var);
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const double y = 2.0 * (2.0 * rng.uniform() - 1.0);
        for (int j = 0; j < 3; ++j)
            CHECK(demap::demap_bit(d, y, j) ==
                  doctest::Approx(demap::demap_bit(ds, c * y, j)).epsilon(1e-12));
    }
}

TEST_CASE("hard decisions follow the sign rule") {
    demap::LlrBlock block;
    block.n = 3;
    block.m = 1;
    block.llrs = {3.0, -0.1, 0.0};
    const auto bits = demap::hard_decide(block);
    CHECK(bits.bits[0] == 0);
    CHECK(bits.bits[1] == 1);
    CHECK(bits.bits[2] == 0);  // tie resolves to 0
}

TEST_CASE("hard decisions equal nearest-neighbor slicing") {
    const auto map = modem::build_gray_pam(3);
    const auto d = demap::make_fixed_mla(map, 0.1);
    modem::SymbolFrame y;
    Rng rng(17);
    y.symbols.resize(4000);
    for (auto& v : y.symbols) v = 1.6 * (2.0 * rng.uniform() - 1.0);
    const auto hard = demap::hard_decide(demap::demap_max_log(d, y));
    const auto sliced = modem::slice_bits(map, y);
    CHECK(hard.bits == sliced.bits);
}

TEST_CASE("noiseless end-to-end has zero bit errors") {
    const auto map = modem::build_gray_pam(3);
    const auto bits = modem::random_bits(2048, 3, 23);
    const auto x = modem::map_bits(map, bits);
    const auto d = demap::make_fixed_mla(map, 0.1);
    const auto hard = demap::hard_decide(demap::demap_max_log(d, x));
    CHECK(hard.bits == bits.bits);
}

TEST_CASE("trained-mode init reproduces the fixed demapper") {
    const auto map = modem::build_gray_pam(3);
    const double noise_var = 0.033;
    const auto fixed = demap::make_fixed_mla(map, noise_var);
    const auto trained = demap::make_trained_mla(map, noise_var);
    Rng rng(29);
    for (int i = 0; i < 2000; ++i) {
        const double y = 3.0 * (2.0 * rng.uniform() - 1.0);
        for (int j = 0; j < 3; ++j)
            CHECK(demap::demap_bit(trained, y, j) ==
                  doctest::Approx(demap::demap_bit(fixed, y, j)).epsilon(1e-9));
    }
}

TEST_CASE("fit_slopes with zero epochs returns the initialization") {
    const auto map = modem::build_gray_pam(3);
    const auto init = demap::make_trained_mla(map, 0.01);
    const auto bits = modem::random_bits(1000, 3, 31);
    const auto y = modem::map_bits(map, bits);
    AdamConfig opt;
    opt.max_epochs = 0;
    const auto fit = demap::fit_slopes(init, y, bits, opt);
    CHECK(fit.demapper.slopes == init.slopes);
    CHECK(fit.demapper.intercepts == init.intercepts);
}

TEST_CASE("fit_slopes on awgn stays at the fixed-mode oracle and matches exact rate") {
    const auto map = modem::build_gray_pam(3);
    const double snr_db = 25.0;
    const double sigma = channel::sigma_from_snr(snr_db);
    const auto bits = modem::random_bits(40000, 3, 37);
    const auto x = modem::map_bits(map, bits);

    modem::SymbolFrame y = x;
    Rng rng(38);
    for (auto& v : y.symbols) v += sigma * rng.gaussian();

    // with the noise variance known, training must not drift away from the
    // matched max-log slopes (confident bits carry almost no gradient, and
    // the boundary-active ones are already near their optimum)
    const auto init = demap::make_trained_mla(map, sigma * sigma);
    AdamConfig opt;
    opt.step = 5e-3;
    opt.max_epochs = 80;
    opt.patience = 80;
    opt.seed = 4;
    const auto fit = demap::fit_slopes(init, y, bits, opt);

    const auto reference = demap::make_trained_mla(map, sigma * sigma);
    for (int j = 0; j < 3; ++j)
        for (int s = 0; s < reference.num_segments(); ++s) {
            const double got = std::fabs(fit.demapper.slopes[j][s]);
            const double want = std::fabs(reference.slopes[j][s]);
            CHECK(got / want > 0.9);
            CHECK(got / want < 1.1);
        }

    // achievable rate close to the exact-LLR rate on the same data
    const auto trained_block = demap::demap_max_log(fit.demapper, y, bits);
    const auto exact_block = analysis::exact_llrs_awgn(map, y, sigma * sigma, bits);
    const double rate_trained = analysis::achievable_rate(trained_block).rate_bits;
    const double rate_exact = analysis::achievable_rate(exact_block).rate_bits;
    CHECK(rate_trained >= rate_exact - 0.005);

    // a mis-scaled start must still reach the same achievable rate: the
    // rate's s-search absorbs any global LLR scaling
    const auto coarse = demap::fit_slopes(demap::make_trained_mla(map, 3.0 * sigma * sigma), y,
                                          bits, opt);
    const auto coarse_block = demap::demap_max_log(coarse.demapper, y, bits);
    CHECK(analysis::achievable_rate(coarse_block).rate_bits >= rate_exact - 0.005);
}
