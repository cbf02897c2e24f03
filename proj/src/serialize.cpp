// SPDX-License-Identifier: Apache-2.0
#include "nleq/serialize.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace nleq {

using nlohmann::json;

json volterra_to_json(const volterra::VolterraModel& model) {
    json j;
    j["kind"] = "vnle";
    j["taps_per_order"] = model.design.taps_per_order;
    j["kernels"] = model.kernels;
    j["mask"] = model.mask;
    return j;
}

volterra::VolterraModel volterra_from_json(const json& j) {
    volterra::VolterraModel model;
    model.design.taps_per_order = j.at("taps_per_order").get<std::vector<int>>();
    model.design.validate();
    model.kernels = j.at("kernels").get<std::vector<double>>();
    model.mask = j.at("mask").get<std::vector<std::uint8_t>>();
    if (model.kernels.size() != volterra::total_kernels(model.design) ||
        model.mask.size() != model.kernels.size())
        throw std::invalid_argument("vnle json: kernel vector does not match design");
    return model;
}

json mla_to_json(const demap::MlaDemapper& d) {
    json j;
    j["m"] = d.map.bits_per_symbol;
    j["mode"] = d.mode == demap::MlaDemapper::Mode::Fixed ? "fixed" : "trained";
    j["noise_var"] = d.noise_var;
    if (d.mode == demap::MlaDemapper::Mode::Trained) {
        j["slopes"] = d.slopes;
        j["intercepts"] = d.intercepts;
    }
    return j;
}

demap::MlaDemapper mla_from_json(const json& j) {
    const auto map = modem::build_gray_pam(j.at("m").get<int>());
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "fixed") return demap::make_fixed_mla(map, j.at("noise_var").get<double>());
    if (mode != "trained") throw std::invalid_argument("mla json: unknown mode '" + mode + "'");
    demap::MlaDemapper d = demap::make_trained_mla(map, j.at("noise_var").get<double>());
    d.slopes = j.at("slopes").get<std::vector<std::vector<double>>>();
    d.intercepts = j.at("intercepts").get<std::vector<std::vector<double>>>();
    const auto segments = static_cast<std::size_t>(d.num_segments());
    if (d.slopes.size() != static_cast<std::size_t>(map.bits_per_symbol) ||
        d.intercepts.size() != d.slopes.size())
        throw std::invalid_argument("mla json: slope table shape mismatch");
    for (const auto& row : d.slopes)
        if (row.size() != segments) throw std::invalid_argument("mla json: segment count mismatch");
    return d;
}

json mlp_to_json(const sdnne::MlpModel& model) {
    json j;
    j["kind"] = "sdnne";
    j["layer_sizes"] = model.design.layer_sizes;
    j["activation"] = sdnne::activation_name(model.design.activation);
    j["itanh_points"] = model.design.itanh_points;
    json weights = json::array(), biases = json::array(), masks = json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        std::vector<double> row_major(static_cast<std::size_t>(w.size()));
        std::vector<std::uint8_t> mask_row(static_cast<std::size_t>(w.size()));
        std::size_t at = 0;
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c, ++at) {
                row_major[at] = w(r, c);
                mask_row[at] = model.masks[l](r, c) != 0.0 ? 1 : 0;
            }
        weights.push_back(row_major);
        masks.push_back(mask_row);
        biases.push_back(std::vector<double>(model.biases[l].data(),
                                             model.biases[l].data() + model.biases[l].size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["masks"] = std::move(masks);
    return j;
}

sdnne::MlpModel mlp_from_json(const json& j) {
    sdnne::MlpModel model;
    model.design.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    model.design.activation = sdnne::activation_from_string(j.at("activation").get<std::string>());
    model.design.itanh_points = j.value("itanh_points", 16);
    model.design.validate();

    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
    const auto masks = j.at("masks").get<std::vector<std::vector<std::uint8_t>>>();
    const auto layers = model.design.layer_sizes.size() - 1;
    if (weights.size() != layers || biases.size() != layers || masks.size() != layers)
        throw std::invalid_argument("sdnne json: layer count mismatch");
    for (std::size_t l = 0; l < layers; ++l) {
        const int rows = model.design.layer_sizes[l + 1];
        const int cols = model.design.layer_sizes[l];
        if (weights[l].size() != static_cast<std::size_t>(rows) * cols ||
            masks[l].size() != weights[l].size() ||
            biases[l].size() != static_cast<std::size_t>(rows))
            throw std::invalid_argument("sdnne json: matrix shape mismatch");
        Eigen::MatrixXd w(rows, cols), mk(rows, cols);
        std::size_t at = 0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c, ++at) {
                w(r, c) = weights[l][at];
                mk(r, c) = masks[l][at] ? 1.0 : 0.0;
            }
        model.weights.push_back(std::move(w));
        model.masks.push_back(std::move(mk));
        model.biases.push_back(
            Eigen::Map<const Eigen::VectorXd>(biases[l].data(), static_cast<Eigen::Index>(rows)));
    }
    return model;
}

json rate_report_to_json(const analysis::RateReport& r) {
    json j;
    j["rate_bits"] = r.rate_bits;
    j["minimizing_s"] = r.minimizing_s;
    j["n"] = r.n;
    j["m"] = r.m;
    j["per_bit_equivocation"] = r.per_bit_equivocation;
    return j;
}

json complexity_report_to_json(const analysis::ComplexityReport& r) {
    json j;
    j["multipliers"] = r.multipliers;
    j["kernels_or_weights"] = r.kernels_or_weights;
    j["feature_matrix"] = r.feature_matrix;
    j["activations"] = r.activations;
    j["demapper"] = r.demapper;
    j["formula"] = r.formula;
    return j;
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

json load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    json j;
    is >> j;
    return j;
}

}  // namespace nleq
