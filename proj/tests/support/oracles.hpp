// SPDX-License-Identifier: Apache-2.0
//
// Test-side reference computations, kept independent of the library paths
// they check.
#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <vector>

#include "nleq/analysis.hpp"
#include "nleq/modem.hpp"

namespace oracles {

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;  // for weight function exp(-t^2)
};

// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix
// of the Hermite recurrence.
inline GaussHermite gauss_hermite(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(jacobi);
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    const double total = std::sqrt(std::numbers::pi);
    for (int k = 0; k < n; ++k) {
        gh.nodes[k] = eigen.eigenvalues()(k);
        const double v0 = eigen.eigenvectors()(0, k);
        gh.weights[k] = total * v0 * v0;
    }
    return gh;
}

// Reference a-posteriori LLR computed here from first principles so the
// oracle does not share code with the library path it checks.
inline double reference_awgn_llr(const nleq::modem::GrayPamMap& map, double y, int j,
                                 double noise_var) {
    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < map.levels.size(); ++v) {
        const double d = y - map.levels[v];
        const double w = std::exp(-d * d / (2.0 * noise_var));
        if (map.labels[v][j] == 0)
            num += w;
        else
            den += w;
    }
    return std::log(num) - std::log(den);
}

// Bitwise achievable rate of exact-LLR demapping on the AWGN PAM channel by
// Gauss-Hermite quadrature: R = m - (1/2^m) sum_x sum_j E[log2(1+e^{-(1-2b)l})].
inline double awgn_gmi_quadrature(const nleq::modem::GrayPamMap& map, double noise_var,
                                  int nodes = 64) {
    const GaussHermite gh = gauss_hermite(nodes);
    const double sigma = std::sqrt(noise_var);
    const int m = map.bits_per_symbol;
    const int levels = map.num_levels();

    double equivocation = 0.0;
    for (int v = 0; v < levels; ++v) {
        for (int k = 0; k < nodes; ++k) {
            const double y = map.levels[v] + std::numbers::sqrt2 * sigma * gh.nodes[k];
            double point = 0.0;
            for (int j = 0; j < m; ++j) {
                const double a = map.labels[v][j] == 0 ? 1.0 : -1.0;
                const double llr = reference_awgn_llr(map, y, j, noise_var);
                point += std::log1p(std::exp(-a * llr)) / std::numbers::ln2;
            }
            equivocation += gh.weights[k] / std::sqrt(std::numbers::pi) * point;
        }
    }
    equivocation /= levels;
    return m - equivocation;
}

// Central-difference derivative of a scalar function of one coordinate.
template <typename F>
double central_diff(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles
