// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "nleq/modem.hpp"

using namespace nleq;

TEST_CASE("gray pam m=1 sign convention") {
    const auto map = modem::build_gray_pam(1);
    REQUIRE(map.levels.size() == 2);
    CHECK(map.levels[0] == doctest::Approx(-1.0));
    CHECK(map.levels[1] == doctest::Approx(1.0));
    // label 1 maps to -1, label 0 to +1
    CHECK(map.labels[0][0] == 1);
    CHECK(map.labels[1][0] == 0);
}

TEST_CASE("gray pam m=3 levels and inner/outer bit") {
    const auto map = modem::build_gray_pam(3);
    const double scale = 1.0 / std::sqrt(21.0);  // (1+9+25+49)/4 = 21
    for (int i = 0; i < 8; ++i)
        CHECK(map.levels[i] == doctest::Approx((2 * i - 7) * scale).epsilon(1e-12));

    // the middle label bit separates {±1, ±3} from {±5, ±7}
    for (int i = 0; i < 8; ++i) {
        const bool inner = std::fabs(map.levels[i]) < 4.0 * scale;
        CHECK((map.labels[i][1] == 1) == inner);
    }
}

TEST_CASE("gray pam invariants for all supported m") {
    for (int m = 1; m <= 6; ++m) {
        const auto map = modem::build_gray_pam(m);
        REQUIRE(map.levels.size() == (1u << m));

        double power = 0.0;
        for (std::size_t i = 0; i < map.levels.size(); ++i) {
            power += map.levels[i] * map.levels[i];
            if (i > 0) {
                CHECK(map.levels[i] > map.levels[i - 1]);
                int flips = 0;
                for (int j = 0; j < m; ++j)
                    flips += map.labels[i][j] != map.labels[i - 1][j];
                CHECK(flips == 1);  // Gray adjacency
            }
        }
        CHECK(std::fabs(power / static_cast<double>(map.levels.size()) - 1.0) <= 1e-12);

        // labels are distinct
        std::set<std::vector<std::uint8_t>> labels(map.labels.begin(), map.labels.end());
        CHECK(labels.size() == map.labels.size());
    }
}

TEST_CASE("gray pam rejects out-of-range m") {
    CHECK_THROWS_AS(modem::build_gray_pam(0), std::invalid_argument);
    CHECK_THROWS_AS(modem::build_gray_pam(7), std::invalid_argument);
}

TEST_CASE("map_bits basics") {
    const auto map1 = modem::build_gray_pam(1);
    modem::BitFrame zero;
    zero.n = 1;
    zero.m = 1;
    zero.bits = {0};
    CHECK(modem::map_bits(map1, zero).symbols[0] == doctest::Approx(1.0));

    // all 3-bit labels hit all 8 levels exactly once
    const auto map3 = modem::build_gray_pam(3);
    modem::BitFrame all;
    all.n = 8;
    all.m = 3;
    all.bits.resize(24);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 3; ++j) all.bit(i, j) = (i >> (2 - j)) & 1;
    const auto symbols = modem::map_bits(map3, all);
    std::set<double> seen(symbols.symbols.begin(), symbols.symbols.end());
    CHECK(seen.size() == 8);

    modem::BitFrame wrong = zero;
    CHECK_THROWS_AS(modem::map_bits(map3, wrong), std::invalid_argument);
}

TEST_CASE("map then slice is the identity for every m") {
    for (int m = 1; m <= 6; ++m) {
        const auto map = modem::build_gray_pam(m);
        const auto frame = modem::random_bits(1u << (m + 2), m, 99);
        const auto symbols = modem::map_bits(map, frame);
        const auto sliced = modem::slice_bits(map, symbols);
        CHECK(sliced.bits == frame.bits);
    }
}

TEST_CASE("random_bits determinism and uniformity") {
    const auto a = modem::random_bits(4, 3, 7);
    const auto b = modem::random_bits(4, 3, 7);
    CHECK(a.bits == b.bits);

    const auto big = modem::random_bits(1000000, 1, 2024);
    double mean = 0.0;
    for (auto bit : big.bits) mean += bit;
    mean /= static_cast<double>(big.bits.size());
    CHECK(std::fabs(mean - 0.5) < 0.002);  // binomial std dev 0.0005

    CHECK_THROWS_AS(modem::random_bits(0, 3, 1), std::invalid_argument);
}

TEST_CASE("lanes give independent streams") {
    const auto xi = modem::random_bits(64, 3, 7, modem::Lane::XI);
    const auto yq = modem::random_bits(64, 3, 7, modem::Lane::YQ);
    CHECK(xi.bits != yq.bits);
}
