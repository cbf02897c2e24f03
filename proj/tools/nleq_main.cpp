// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synthetic capture generation, equalizer training
// and evaluation, kernel expansion, complexity accounting, pruning and full
// sweeps. Exit codes: 0 success, 2 usage/config error, 1 runtime error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "nleq/analysis.hpp"
#include "nleq/capture.hpp"
#include "nleq/channel.hpp"
#include "nleq/common.hpp"
#include "nleq/harness.hpp"
#include "nleq/serialize.hpp"

namespace {

using nleq::AdamConfig;
using nleq::harness::ConfigError;
using nlohmann::json;

struct GlobalArgs {
    std::uint64_t seed = 1;
    std::string out;
    int threads = 1;
};

struct TrainArgs {
    std::string capture;
    int lane = 0;
    std::string equalizer = "vnle";
    std::string design;
    std::string objective = "mse";
    std::string activation = "tanh";
    int itanh_points = 16;
    double split = 0.5;
    AdamConfig adam;
};

nleq::channel::CaptureLane load_lane(const std::string& path, int lane) {
    const auto cap = nleq::channel::load_capture(path);
    if (lane < 0 || static_cast<std::size_t>(lane) >= cap.lanes.size())
        throw ConfigError("capture has " + std::to_string(cap.lanes.size()) +
                          " lanes, lane " + std::to_string(lane) + " requested");
    return cap.lanes[static_cast<std::size_t>(lane)];
}

json train_equalizer(const TrainArgs& args) {
    const auto lane = load_lane(args.capture, args.lane);
    const auto map = nleq::modem::build_gray_pam(lane.bits.m);
    const auto cut = static_cast<std::size_t>(args.split * static_cast<double>(lane.y.size()));

    if (args.equalizer == "sdnne") {
        nleq::sdnne::MlpDesign design;
        design.layer_sizes = nleq::harness::parse_mlp_design(args.design);
        design.activation = nleq::sdnne::activation_from_string(args.activation);
        design.itanh_points = args.itanh_points;
        const bool itanh_twin = design.activation == nleq::sdnne::Activation::ITanh;
        if (itanh_twin) design.activation = nleq::sdnne::Activation::Tanh;
        auto trained = nleq::sdnne::train(design, lane.y, lane.bits, args.adam, args.split);
        if (itanh_twin) trained.model.design.activation = nleq::sdnne::Activation::ITanh;
        return nleq::mlp_to_json(trained.model);
    }
    if (args.equalizer != "le" && args.equalizer != "vnle")
        throw ConfigError("unknown equalizer kind '" + args.equalizer + "'");

    nleq::volterra::VolterraDesign design;
    design.taps_per_order = args.equalizer == "le"
                                ? std::vector<int>{args.design.empty()
                                                       ? 17
                                                       : nleq::harness::parse_vnle_design(
                                                             args.design)[0]}
                                : nleq::harness::parse_vnle_design(args.design);

    nleq::volterra::VolterraModel model;
    std::optional<nleq::demap::MlaDemapper> demapper;
    if (args.objective == "ls" || args.equalizer == "le") {
        nleq::modem::SymbolFrame y_tr, x_tr;
        y_tr.symbols.assign(lane.y.symbols.begin(), lane.y.symbols.begin() + cut);
        nleq::modem::BitFrame bits_tr = lane.bits;
        bits_tr.n = cut;
        bits_tr.bits.assign(lane.bits.bits.begin(),
                            lane.bits.bits.begin() + cut * static_cast<std::size_t>(lane.bits.m));
        x_tr = nleq::modem::map_bits(map, bits_tr);
        model = nleq::volterra::fit_ls(design, y_tr, x_tr).model;
    } else if (args.objective == "mse") {
        const auto x = nleq::modem::map_bits(map, lane.bits);
        model = nleq::volterra::fit_gd_mse(design, lane.y, x, args.adam, args.split).model;
    } else if (args.objective == "bitwise") {
        auto fit = nleq::volterra::fit_gd_bitwise(design, lane.y, lane.bits, map, args.adam,
                                                  args.split);
        model = std::move(fit.model);
        demapper = std::move(fit.demapper);
    } else {
        throw ConfigError("unknown objective '" + args.objective + "'");
    }

    if (!demapper) {
        const auto x = nleq::modem::map_bits(map, lane.bits);
        const auto eq = nleq::volterra::predict(model, lane.y);
        double mse = 0.0;
        for (std::size_t i = cut; i < lane.y.size(); ++i) {
            const double d = eq.symbols[i] - x.symbols[i];
            mse += d * d;
        }
        mse /= static_cast<double>(lane.y.size() - cut);
        demapper = nleq::demap::make_fixed_mla(map, std::max(mse, 1e-9));
    }
    json j = nleq::volterra_to_json(model);
    j["demapper"] = nleq::mla_to_json(*demapper);
    return j;
}

json evaluate_model(const std::string& model_path, const std::string& capture_path, int lane_id) {
    const json j = nleq::load_json(model_path);
    const auto lane = load_lane(capture_path, lane_id);
    const std::string kind = j.value("kind", "");
    nleq::demap::LlrBlock block;
    if (kind == "vnle") {
        const auto model = nleq::volterra_from_json(j);
        if (!j.contains("demapper")) throw ConfigError("vnle model file lacks a demapper");
        const auto demapper = nleq::mla_from_json(j.at("demapper"));
        const auto eq = nleq::volterra::predict(model, lane.y);
        block = nleq::demap::demap_max_log(demapper, eq, lane.bits);
    } else if (kind == "sdnne") {
        const auto model = nleq::mlp_from_json(j);
        block = nleq::sdnne::demap_frame(model, lane.y, lane.bits);
    } else {
        throw ConfigError("model file has unknown kind '" + kind + "'");
    }
    return nleq::rate_report_to_json(nleq::analysis::achievable_rate(block));
}

void write_kernel_csvs(const std::vector<nleq::analysis::ExtractedKernels>& kernels, int memory,
                       const std::filesystem::path& dir, int orders) {
    std::filesystem::create_directories(dir);
    char buf[48];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return std::string(buf);
    };
    {
        std::ofstream os(dir / "kernels_order1.csv");
        os << "bit,offset,value\n";
        for (std::size_t j = 0; j < kernels.size(); ++j)
            for (int t = 0; t < kernels[j].h1.size(); ++t)
                os << j << ',' << t - memory << ',' << fmt(kernels[j].h1[t]) << "\n";
    }
    if (orders >= 2) {
        std::ofstream os(dir / "kernels_order2.csv");
        os << "bit,o1,o2,value\n";
        for (std::size_t j = 0; j < kernels.size(); ++j)
            for (int a = 0; a < kernels[j].h2.rows(); ++a)
                for (int b = a; b < kernels[j].h2.cols(); ++b)
                    os << j << ',' << a - memory << ',' << b - memory << ','
                       << fmt(kernels[j].h2(a, b)) << "\n";
    }
    if (orders >= 3) {
        std::ofstream os(dir / "kernels_order3.csv");
        os << "bit,o1,o2,o3,value\n";
        for (std::size_t j = 0; j < kernels.size(); ++j)
            for (std::size_t q = 0; q < kernels[j].h3_index.size(); ++q) {
                const auto& tu = kernels[j].h3_index[q];
                os << j << ',' << tu[0] - memory << ',' << tu[1] - memory << ','
                   << tu[2] - memory << ',' << fmt(kernels[j].h3_value[q]) << "\n";
            }
    }
}

int run(int argc, char** argv) {
    CLI::App app{"nonlinear equalization and soft demapping toolkit"};
    app.require_subcommand(1);
    GlobalArgs global;
    app.add_option("--seed", global.seed, "base seed for all derived random streams");
    app.add_option("--out", global.out, "output file or directory");
    app.add_option("--threads", global.threads, "worker threads (sweep points only)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "write a synthetic capture file");
    simulate->fallthrough();
    std::size_t sim_n = 66444;
    int sim_m = 3, sim_lanes = 1;
    double sim_snr = 25.0, sim_osnr = 0.0, sim_rate = 92.0;
    bool sim_awgn = false;
    simulate->add_option("--n", sim_n, "symbols per lane");
    simulate->add_option("--m", sim_m, "bits per symbol");
    simulate->add_option("--snr-db", sim_snr, "electrical SNR per real dimension");
    simulate->add_option("--osnr-db", sim_osnr, "OSNR in dB (overrides --snr-db)");
    simulate->add_option("--rate-ghz", sim_rate, "symbol rate for OSNR conversion");
    simulate->add_option("--lanes", sim_lanes, "number of lanes (1..4)");
    simulate->add_flag("--awgn", sim_awgn, "disable the component-distortion model");

    // train
    auto* train = app.add_subcommand("train", "fit one equalizer on a capture");
    train->fallthrough();
    TrainArgs train_args;
    train->add_option("--capture", train_args.capture, "capture file")->required();
    train->add_option("--lane", train_args.lane, "lane index");
    train->add_option("--equalizer", train_args.equalizer, "le | vnle | sdnne");
    train->add_option("--design", train_args.design, "17:17:11 or 17|16|10|3");
    train->add_option("--objective", train_args.objective, "ls | mse | bitwise");
    train->add_option("--activation", train_args.activation, "tanh|itanh|htanh|relu");
    train->add_option("--itanh-points", train_args.itanh_points, "LUT size for itanh");
    train->add_option("--split", train_args.split, "training fraction");
    train->add_option("--lr", train_args.adam.step, "ADAM step size");
    train->add_option("--batch", train_args.adam.batch_size, "minibatch size");
    train->add_option("--epochs", train_args.adam.max_epochs, "max training epochs");
    train->add_option("--patience", train_args.adam.patience, "early-stop patience");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "achievable rate of a saved model");
    evaluate->fallthrough();
    std::string eval_model, eval_capture;
    int eval_lane = 0;
    evaluate->add_option("--model", eval_model, "model json")->required();
    evaluate->add_option("--capture", eval_capture, "capture file")->required();
    evaluate->add_option("--lane", eval_lane, "lane index");

    // expand-kernels
    auto* expand = app.add_subcommand("expand-kernels", "Volterra kernels of a saved network");
    expand->fallthrough();
    std::string expand_model;
    int expand_orders = 3;
    expand->add_option("--model", expand_model, "sdnne model json")->required();
    expand->add_option("--orders", expand_orders, "highest kernel order (1..3)");

    // complexity
    auto* complexity = app.add_subcommand("complexity", "hardware multiplier count");
    complexity->fallthrough();
    std::string cx_vnle, cx_sdnne, cx_activation = "htanh";
    bool cx_with_mla = false;
    int cx_m = 3, cx_k = 16;
    complexity->add_option("--vnle", cx_vnle, "VNLE design, e.g. 17:17:11");
    complexity->add_option("--sdnne", cx_sdnne, "SDNNE design, e.g. 17|16|10|3");
    complexity->add_flag("--with-mla", cx_with_mla, "include the max-log demapper");
    complexity->add_option("--m", cx_m, "bits per symbol for the demapper term");
    complexity->add_option("--activation", cx_activation, "sdnne activation");
    complexity->add_option("--k", cx_k, "interpolation points for itanh");

    // prune
    auto* prune = app.add_subcommand("prune", "sparsify an equalizer");
    prune->fallthrough();
    TrainArgs prune_args;
    double prune_lambda = 1e-4, prune_threshold = 1e-3, prune_sparsity = 0.2;
    prune->add_option("--capture", prune_args.capture, "capture file")->required();
    prune->add_option("--lane", prune_args.lane, "lane index");
    prune->add_option("--equalizer", prune_args.equalizer, "vnle | sdnne");
    prune->add_option("--design", prune_args.design, "equalizer design")->required();
    prune->add_option("--activation", prune_args.activation, "sdnne activation");
    prune->add_option("--lambda", prune_lambda, "L1 weight (vnle)");
    prune->add_option("--threshold", prune_threshold, "magnitude cut (vnle)");
    prune->add_option("--sparsity", prune_sparsity, "final sparsity (sdnne)");
    prune->add_option("--split", prune_args.split, "training fraction");
    prune->add_option("--lr", prune_args.adam.step, "ADAM step size");
    prune->add_option("--batch", prune_args.adam.batch_size, "minibatch size");
    prune->add_option("--epochs", prune_args.adam.max_epochs, "max training epochs");
    prune->add_option("--patience", prune_args.adam.patience, "early-stop patience");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a configured experiment sweep");
    sweep->fallthrough();
    std::string sweep_config;
    sweep->add_option("config", sweep_config, "TOML experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and usage hint
        return 2;
    }

    if (*simulate) {
        if (global.out.empty()) throw ConfigError("simulate needs --out");
        if (sim_lanes < 1 || sim_lanes > 4) throw ConfigError("lanes must be 1..4");
        double snr = sim_snr;
        if (sim_osnr > 0) snr = nleq::channel::osnr_to_snr(sim_osnr, sim_rate);
        nleq::channel::CaptureFile cap;
        for (int l = 0; l < sim_lanes; ++l) {
            nleq::channel::CaptureLane lane;
            lane.lane = nleq::modem::lane_from_index(l);
            lane.bits = nleq::modem::random_bits(sim_n, sim_m,
                                                 nleq::derive_seed(global.seed, 100 + l),
                                                 lane.lane);
            const auto map = nleq::modem::build_gray_pam(sim_m);
            const auto x = nleq::modem::map_bits(map, lane.bits);
            auto ch = sim_awgn ? nleq::channel::WienerHammersteinChannel{}
                               : nleq::channel::default_channel();
            ch.noise_sigma = nleq::channel::sigma_from_snr(snr);
            ch.seed = nleq::derive_seed(global.seed, 200 + l);
            lane.y = nleq::channel::propagate(ch, x);
            cap.lanes.push_back(std::move(lane));
        }
        const std::filesystem::path path(global.out);
        if (path.extension() == ".csv")
            nleq::channel::save_capture_csv(cap, path);
        else
            nleq::channel::save_capture(cap, path);
        std::cout << "wrote " << path.string() << " (" << sim_lanes << " lane(s), " << sim_n
                  << " symbols, snr " << snr << " dB)\n";
        return 0;
    }

    if (*train) {
        if (global.out.empty()) throw ConfigError("train needs --out");
        train_args.adam.seed = global.seed;
        const json model = train_equalizer(train_args);
        nleq::save_json(model, global.out);
        std::cout << "wrote " << global.out << "\n";
        return 0;
    }

    if (*evaluate) {
        const json report = evaluate_model(eval_model, eval_capture, eval_lane);
        if (!global.out.empty()) nleq::save_json(report, global.out);
        std::cout << report.dump(2) << "\n";
        return 0;
    }

    if (*expand) {
        if (global.out.empty()) throw ConfigError("expand-kernels needs --out");
        const json j = nleq::load_json(expand_model);
        if (j.value("kind", "") != "sdnne")
            throw ConfigError("expand-kernels expects an sdnne model file");
        auto model = nleq::mlp_from_json(j);
        if (model.design.activation == nleq::sdnne::Activation::ITanh && expand_orders >= 2)
            model.design.activation = nleq::sdnne::Activation::Tanh;  // expand the smooth twin
        nleq::analysis::ExtractionConfig cfg;
        cfg.orders = expand_orders;
        const auto kernels = nleq::analysis::extract_kernels(model, cfg);
        write_kernel_csvs(kernels, model.design.memory(), global.out, expand_orders);
        std::cout << "wrote kernel CSVs to " << global.out << "\n";
        return 0;
    }

    if (*complexity) {
        nleq::analysis::ComplexityReport report;
        if (!cx_vnle.empty()) {
            nleq::volterra::VolterraDesign design{nleq::harness::parse_vnle_design(cx_vnle)};
            report = nleq::analysis::multiplier_count(design, cx_with_mla, cx_m);
        } else if (!cx_sdnne.empty()) {
            nleq::sdnne::MlpDesign design;
            design.layer_sizes = nleq::harness::parse_mlp_design(cx_sdnne);
            design.activation = nleq::sdnne::activation_from_string(cx_activation);
            design.itanh_points = cx_k;
            report = nleq::analysis::multiplier_count(design, cx_k);
        } else {
            throw ConfigError("complexity needs --vnle or --sdnne");
        }
        std::cout << report.multipliers << "\n";
        std::cout << "  formula:        " << report.formula << "\n";
        std::cout << "  kernels/weights " << report.kernels_or_weights << "\n";
        std::cout << "  feature matrix  " << report.feature_matrix << "\n";
        std::cout << "  activations     " << report.activations << "\n";
        std::cout << "  demapper        " << report.demapper << "\n";
        return 0;
    }

    if (*prune) {
        if (global.out.empty()) throw ConfigError("prune needs --out");
        prune_args.adam.seed = global.seed;
        const auto lane = load_lane(prune_args.capture, prune_args.lane);
        const auto map = nleq::modem::build_gray_pam(lane.bits.m);
        if (prune_args.equalizer == "vnle") {
            nleq::volterra::VolterraDesign design{
                nleq::harness::parse_vnle_design(prune_args.design)};
            const auto x = nleq::modem::map_bits(map, lane.bits);
            auto pruned = nleq::volterra::prune_l1(design, lane.y, x, prune_lambda,
                                                   prune_threshold, prune_args.adam,
                                                   prune_args.split);
            std::cout << "active kernels: " << pruned.active << " / "
                      << pruned.model.kernels.size() << "\n";
            const auto eq = nleq::volterra::predict(pruned.model, lane.y);
            double mse = 0.0;
            for (std::size_t i = 0; i < lane.y.size(); ++i) {
                const double d = eq.symbols[i] - x.symbols[i];
                mse += d * d;
            }
            auto demapper = nleq::demap::make_fixed_mla(
                map, std::max(mse / static_cast<double>(lane.y.size()), 1e-9));
            json j = nleq::volterra_to_json(pruned.model);
            j["demapper"] = nleq::mla_to_json(demapper);
            nleq::save_json(j, global.out);
        } else if (prune_args.equalizer == "sdnne") {
            nleq::sdnne::MlpDesign design;
            design.layer_sizes = nleq::harness::parse_mlp_design(prune_args.design);
            design.activation = nleq::sdnne::activation_from_string(prune_args.activation);
            auto trained =
                nleq::sdnne::train(design, lane.y, lane.bits, prune_args.adam, prune_args.split);
            nleq::sdnne::PruneSchedule schedule;
            schedule.final_sparsity = prune_sparsity;
            const auto cut =
                static_cast<std::size_t>(prune_args.split * static_cast<double>(lane.y.size()));
            const long steps_per_epoch = static_cast<long>(
                (cut + prune_args.adam.batch_size - 1) / prune_args.adam.batch_size);
            schedule.start_step = steps_per_epoch;
            schedule.steps = 8;
            schedule.interval = std::max<long>(steps_per_epoch / 4, 1);
            auto pruned = nleq::sdnne::prune_gradual(trained.model, lane.y, lane.bits, schedule,
                                                     prune_args.adam, prune_args.split);
            std::cout << "sparsity: " << pruned.model.sparsity() << " (active "
                      << pruned.model.active_weights() << " / " << pruned.model.weight_count()
                      << " weights)\n";
            nleq::save_json(nleq::mlp_to_json(pruned.model), global.out);
        } else {
            throw ConfigError("prune supports vnle or sdnne");
        }
        std::cout << "wrote " << global.out << "\n";
        return 0;
    }

    if (*sweep) {
        auto cfg = nleq::harness::config_from_toml(sweep_config);
        if (app.count("--seed")) cfg.seed = global.seed;
        const auto result = nleq::harness::run_sweep(cfg, global.threads, &std::cerr);
        const std::filesystem::path dir = global.out.empty() ? "out" : global.out;
        nleq::harness::emit_reports(result, dir);
        std::cout << "wrote reports to " << dir.string() << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
