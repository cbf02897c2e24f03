// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace nleq {

struct AdamConfig {
    double step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 512;
    int max_epochs = 200;
    int patience = 20;  // early stop after this many stagnant validation epochs
    std::uint64_t seed = 1;

    void validate() const {
        if (!(step > 0)) throw std::invalid_argument("adam: step must be positive");
        if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
            throw std::invalid_argument("adam: moment decays must be in (0,1)");
        if (!(epsilon > 0)) throw std::invalid_argument("adam: epsilon must be positive");
        if (batch_size < 1) throw std::invalid_argument("adam: batch size must be positive");
        if (max_epochs < 0) throw std::invalid_argument("adam: max epochs must be >= 0");
        if (patience < 1) throw std::invalid_argument("adam: patience must be positive");
    }
};

// Adaptive moment estimation over a flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index dim, const AdamConfig& cfg)
        : cfg_(cfg), m_(Eigen::VectorXd::Zero(dim)), v_(Eigen::VectorXd::Zero(dim)) {}

    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
        ++t_;
        m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
        v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        params.array() -= cfg_.step * (m_.array() / bc1) /
                          ((v_.array() / bc2).sqrt() + cfg_.epsilon);
    }

    long steps() const { return t_; }

private:
    AdamConfig cfg_;
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

}  // namespace nleq
