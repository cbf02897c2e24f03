// SPDX-License-Identifier: Apache-2.0
#include "nleq/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "nleq/capture.hpp"
#include "nleq/common.hpp"
#include "nleq/serialize.hpp"
#include "nleq/toml_lite.hpp"

namespace nleq::harness {

using nlohmann::json;

std::vector<int> parse_vnle_design(const std::string& text) {
    std::vector<int> taps;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        try {
            taps.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("bad VNLE design '" + text + "' (expected e.g. 17:17:11)");
        }
    }
    if (taps.empty()) throw ConfigError("empty VNLE design");
    volterra::VolterraDesign design{taps};
    try {
        design.validate();
    } catch (const std::exception& e) {
        throw ConfigError("bad VNLE design '" + text + "': " + e.what());
    }
    return taps;
}

std::vector<int> parse_mlp_design(const std::string& text) {
    std::vector<int> sizes;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '|')) {
        try {
            sizes.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("bad SDNNE design '" + text + "' (expected e.g. 17|16|10|3)");
        }
    }
    if (sizes.size() < 2) throw ConfigError("SDNNE design needs at least two layers");
    return sizes;
}

std::string EqualizerSpec::display_name() const {
    if (!name.empty()) return name;
    std::string out;
    switch (kind) {
        case Kind::LE:
            out = "le-" + std::to_string(taps.front());
            break;
        case Kind::VNLE: {
            out = "vnle-";
            for (std::size_t i = 0; i < taps.size(); ++i)
                out += (i ? ":" : "") + std::to_string(taps[i]);
            out += "-" + objective;
            if (prune_lambda > 0 || prune_threshold > 0) out += "-l1";
            break;
        }
        case Kind::SDNNE: {
            out = "sdnne-";
            for (std::size_t i = 0; i < layer_sizes.size(); ++i)
                out += (i ? "|" : "") + std::to_string(layer_sizes[i]);
            out += std::string("-") + sdnne::activation_name(activation);
            if (prune_sparsity > 0) out += "-pruned";
            break;
        }
    }
    return out;
}

void ExperimentConfig::validate() const {
    chan.validate();
    if (m < 1 || m > 6) throw ConfigError("config: m must be in [1,6]");
    if (frame_length < 64) throw ConfigError("config: frame_length too short");
    if (!(split > 0.0 && split < 1.0)) throw ConfigError("config: split must be in (0,1)");
    if (eval_frames < 1) throw ConfigError("config: eval_frames must be >= 1");
    if (sweep_points.empty()) throw ConfigError("config: sweep must be nonempty");
    if (equalizers.empty()) throw ConfigError("config: need at least one equalizer");
    if (!(symbol_rate_ghz > 0)) throw ConfigError("config: symbol_rate_ghz must be positive");
    try {
        adam.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& eq : equalizers) {
        if (eq.kind == EqualizerSpec::Kind::SDNNE) {
            if (eq.layer_sizes.back() != m)
                throw ConfigError("config: SDNNE '" + eq.display_name() +
                                  "' output layer must equal m");
            if (eq.layer_sizes.front() % 2 == 0)
                throw ConfigError("config: SDNNE input layer must be odd");
        } else if (eq.objective != "ls" && eq.objective != "mse" && eq.objective != "bitwise") {
            throw ConfigError("config: unknown objective '" + eq.objective + "'");
        }
    }
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_toml(const std::filesystem::path& path) {
    json doc;
    try {
        doc = toml::parse_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    ExperimentConfig cfg;
    const json exp = doc.value("experiment", json::object());
    cfg.m = get_or(exp, "m", 3);
    cfg.frame_length = get_or(exp, "frame_length", std::size_t{66444});
    cfg.split = get_or(exp, "split", 0.5);
    cfg.eval_frames = get_or(exp, "eval_frames", 6);
    cfg.seed = get_or(exp, "seed", std::uint64_t{1});
    cfg.symbol_rate_ghz = get_or(exp, "symbol_rate_ghz", 92.0);
    if (exp.contains("sweep")) cfg.sweep_points = exp.at("sweep").get<std::vector<double>>();
    const std::string unit = get_or<std::string>(exp, "sweep_unit", "snr_db");
    if (unit == "osnr_db")
        cfg.sweep_is_osnr = true;
    else if (unit != "snr_db")
        throw ConfigError("config: sweep_unit must be 'snr_db' or 'osnr_db'");

    if (doc.contains("channel")) {
        const json& ch = doc.at("channel");
        if (ch.contains("pre_fir"))
            cfg.chan.pre_fir.taps = ch.at("pre_fir").get<std::vector<double>>();
        cfg.chan.pre_fir.center = get_or(ch, "pre_center", cfg.chan.pre_fir.center);
        if (ch.contains("post_fir"))
            cfg.chan.post_fir.taps = ch.at("post_fir").get<std::vector<double>>();
        cfg.chan.post_fir.center = get_or(ch, "post_center", cfg.chan.post_fir.center);
        if (ch.contains("poly")) {
            const auto poly = ch.at("poly").get<std::vector<double>>();
            if (poly.size() != 5) throw ConfigError("config: poly needs 5 coefficients");
            std::copy(poly.begin(), poly.end(), cfg.chan.poly.begin());
        }
        if (get_or(ch, "awgn_only", false)) {
            cfg.chan.pre_fir = {{1.0}, 0};
            cfg.chan.poly = {1.0, 0.0, 0.0, 0.0, 0.0};
            cfg.chan.post_fir = {{1.0}, 0};
        }
    }

    if (doc.contains("training")) {
        const json& tr = doc.at("training");
        cfg.adam.step = get_or(tr, "step", cfg.adam.step);
        cfg.adam.batch_size = get_or(tr, "batch_size", cfg.adam.batch_size);
        cfg.adam.max_epochs = get_or(tr, "max_epochs", cfg.adam.max_epochs);
        cfg.adam.patience = get_or(tr, "patience", cfg.adam.patience);
    }

    if (doc.contains("equalizer")) {
        for (const json& e : doc.at("equalizer")) {
            EqualizerSpec spec;
            const std::string kind = get_or<std::string>(e, "kind", "");
            if (kind == "le") {
                spec.kind = EqualizerSpec::Kind::LE;
                spec.taps = {get_or(e, "taps", 17)};
                spec.objective = "ls";
            } else if (kind == "vnle") {
                spec.kind = EqualizerSpec::Kind::VNLE;
                spec.taps = parse_vnle_design(get_or<std::string>(e, "design", "17:17:11"));
                spec.objective = get_or<std::string>(e, "objective", "mse");
                spec.prune_lambda = get_or(e, "prune_lambda", 0.0);
                spec.prune_threshold = get_or(e, "prune_threshold", 0.0);
            } else if (kind == "sdnne") {
                spec.kind = EqualizerSpec::Kind::SDNNE;
                spec.layer_sizes = parse_mlp_design(get_or<std::string>(e, "design", "17|16|10|3"));
                spec.activation =
                    sdnne::activation_from_string(get_or<std::string>(e, "activation", "tanh"));
                spec.itanh_points = get_or(e, "itanh_points", 16);
                spec.prune_sparsity = get_or(e, "prune_sparsity", 0.0);
            } else {
                throw ConfigError("config: equalizer kind must be le/vnle/sdnne");
            }
            spec.name = get_or<std::string>(e, "name", "");
            cfg.equalizers.push_back(std::move(spec));
        }
    }

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

namespace {

struct PointData {
    modem::GrayPamMap map;
    // frame 0 is the training frame; 1.. are evaluation frames
    std::vector<modem::BitFrame> bits;
    std::vector<modem::SymbolFrame> clean;
    std::vector<modem::SymbolFrame> received;
    std::size_t cut = 0;  // start of the held-out portion within each frame
};

PointData make_point_data(const ExperimentConfig& cfg, std::size_t point, double sigma) {
    PointData data;
    data.map = modem::build_gray_pam(cfg.m);
    const int frames = cfg.eval_frames + 1;
    data.cut = static_cast<std::size_t>(cfg.split * static_cast<double>(cfg.frame_length));
    for (int f = 0; f < frames; ++f) {
        const std::uint64_t stream = point * 1024 + static_cast<std::uint64_t>(f);
        modem::BitFrame bits =
            modem::random_bits(cfg.frame_length, cfg.m, derive_seed(cfg.seed, stream));
        modem::SymbolFrame x = modem::map_bits(data.map, bits);
        channel::WienerHammersteinChannel ch = cfg.chan;
        ch.noise_sigma = sigma;
        ch.seed = derive_seed(cfg.seed, stream + 512);
        data.received.push_back(channel::propagate(ch, x));
        data.clean.push_back(std::move(x));
        data.bits.push_back(std::move(bits));
    }
    return data;
}

modem::SymbolFrame head(const modem::SymbolFrame& frame, std::size_t count) {
    modem::SymbolFrame out;
    out.source = frame.source;
    out.symbols.assign(frame.symbols.begin(), frame.symbols.begin() + count);
    return out;
}

// Rows [lo, n) of a frame-aligned LLR block.
void append_tail(const demap::LlrBlock& block, std::size_t lo, demap::LlrBlock& sink) {
    sink.m = block.m;
    if (sink.bits.m == 0) {
        sink.bits.m = block.m;
        sink.bits.lane = block.bits.lane;
    }
    for (std::size_t i = lo; i < block.n; ++i) {
        for (int j = 0; j < block.m; ++j) {
            sink.llrs.push_back(block.llr(i, j));
            sink.bits.bits.push_back(block.bits.bit(i, j));
        }
    }
    sink.n = sink.llrs.size() / static_cast<std::size_t>(sink.m);
    sink.bits.n = sink.n;
}

double residual_mse(const modem::SymbolFrame& a, const modem::SymbolFrame& b, std::size_t lo,
                    std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double d = a.symbols[i] - b.symbols[i];
        acc += d * d;
    }
    return acc / static_cast<double>(hi - lo);
}

std::vector<KernelRow1> vnle_kernels1(const volterra::VolterraModel& model) {
    std::vector<KernelRow1> rows;
    const int t1 = model.design.taps(1);
    const int m1 = model.design.memory(1);
    for (int t = 0; t < t1; ++t)
        if (model.mask.empty() || model.mask[static_cast<std::size_t>(t)])
            rows.push_back({-1, t - m1, model.kernels[static_cast<std::size_t>(t)]});
    return rows;
}

std::vector<KernelRow3> vnle_kernels3(const volterra::VolterraModel& model) {
    std::vector<KernelRow3> rows;
    if (model.design.order() < 3) return rows;
    const auto counts = volterra::kernel_count(model.design);
    std::size_t at = static_cast<std::size_t>(counts[0] + counts[1]);
    const int m3 = model.design.memory(3);
    for (const auto& tuple : volterra::enumerate_tuples(model.design.taps(3), 3)) {
        if (model.mask.empty() || model.mask[at])
            rows.push_back(
                {-1, tuple[0] - m3, tuple[1] - m3, tuple[2] - m3, model.kernels[at]});
        ++at;
    }
    return rows;
}

void sdnne_kernel_rows(const sdnne::MlpModel& model, EqualizerResult& out) {
    const int mem = model.design.memory();
    const bool expandable = model.design.activation == sdnne::Activation::Tanh ||
                            model.design.activation == sdnne::Activation::Linear;
    analysis::ExtractionConfig cfg;
    cfg.orders = expandable ? 3 : 1;
    const auto kernels = analysis::extract_kernels(model, cfg);
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        for (int t = 0; t < kernels[j].h1.size(); ++t)
            out.kernels1.push_back({static_cast<int>(j), t - mem, kernels[j].h1[t]});
        if (kernels[j].has_h3)
            for (std::size_t q = 0; q < kernels[j].h3_index.size(); ++q) {
                const auto& tu = kernels[j].h3_index[q];
                out.kernels3.push_back({static_cast<int>(j), tu[0] - mem, tu[1] - mem,
                                        tu[2] - mem, kernels[j].h3_value[q]});
            }
    }
}

EqualizerResult run_volterra_like(const ExperimentConfig& cfg, const EqualizerSpec& spec,
                                  const PointData& data) {
    EqualizerResult result;
    result.name = spec.display_name();

    const volterra::VolterraDesign design{spec.taps};
    volterra::VolterraModel model;
    std::optional<demap::MlaDemapper> demapper;

    const modem::SymbolFrame& y0 = data.received[0];
    const modem::SymbolFrame& x0 = data.clean[0];

    if (spec.prune_lambda > 0 || spec.prune_threshold > 0) {
        auto pruned = volterra::prune_l1(design, y0, x0, spec.prune_lambda, spec.prune_threshold,
                                         cfg.adam, cfg.split);
        model = std::move(pruned.model);
        result.train_trace = std::move(pruned.train_trace);
        result.val_trace = std::move(pruned.val_trace);
    } else if (spec.objective == "ls") {
        // identification on the training split only
        auto fit = volterra::fit_ls(design, head(y0, data.cut), head(x0, data.cut));
        model = std::move(fit.model);
    } else if (spec.objective == "mse") {
        auto fit = volterra::fit_gd_mse(design, y0, x0, cfg.adam, cfg.split);
        model = std::move(fit.model);
        result.train_trace = std::move(fit.train_trace);
        result.val_trace = std::move(fit.val_trace);
    } else {  // bitwise: warm-start from the MSE solution, then joint refinement
        auto warm_fit = volterra::fit_gd_mse(design, y0, x0, cfg.adam, cfg.split);
        const modem::SymbolFrame warm_eq = volterra::predict(warm_fit.model, y0);
        const double nv =
            std::max(residual_mse(warm_eq, x0, data.cut, y0.size()), 1e-9);
        volterra::BitwiseInit init{std::move(warm_fit.model),
                                   demap::make_trained_mla(data.map, nv)};
        auto fit = volterra::fit_gd_bitwise(design, y0, data.bits[0], data.map, cfg.adam,
                                            cfg.split, &init);
        model = std::move(fit.model);
        demapper = std::move(fit.demapper);
        result.train_trace = std::move(fit.train_trace);
        result.val_trace = std::move(fit.val_trace);
    }

    if (!demapper) {
        const modem::SymbolFrame eq0 = volterra::predict(model, y0);
        const double nv = std::max(residual_mse(eq0, x0, data.cut, y0.size()), 1e-9);
        demapper = demap::make_fixed_mla(data.map, nv);
    }

    demap::LlrBlock eval;
    for (std::size_t f = 1; f < data.received.size(); ++f) {
        const modem::SymbolFrame eq = volterra::predict(model, data.received[f]);
        const demap::LlrBlock block = demap::demap_max_log(*demapper, eq, data.bits[f]);
        append_tail(block, data.cut, eval);
    }
    result.rate = analysis::achievable_rate(eval);
    result.complexity = analysis::multiplier_count(model, true, cfg.m);
    result.kernels1 = vnle_kernels1(model);
    result.kernels3 = vnle_kernels3(model);
    return result;
}

EqualizerResult run_sdnne(const ExperimentConfig& cfg, const EqualizerSpec& spec,
                          const PointData& data) {
    EqualizerResult result;
    result.name = spec.display_name();

    sdnne::MlpDesign design;
    design.layer_sizes = spec.layer_sizes;
    design.itanh_points = spec.itanh_points;
    // the interpolated-tanh variant reuses tanh-trained parameters
    design.activation = spec.activation == sdnne::Activation::ITanh ? sdnne::Activation::Tanh
                                                                    : spec.activation;

    auto trained = sdnne::train(design, data.received[0], data.bits[0], cfg.adam, cfg.split);
    result.train_trace = std::move(trained.train_trace);
    result.val_trace = std::move(trained.val_trace);
    sdnne::MlpModel model = std::move(trained.model);

    if (spec.prune_sparsity > 0) {
        sdnne::PruneSchedule schedule;
        schedule.final_sparsity = spec.prune_sparsity;
        const long steps_per_epoch =
            static_cast<long>((data.cut + cfg.adam.batch_size - 1) / cfg.adam.batch_size);
        schedule.start_step = steps_per_epoch;
        schedule.steps = 8;
        schedule.interval = std::max<long>(steps_per_epoch / 4, 1);
        auto pruned = sdnne::prune_gradual(model, data.received[0], data.bits[0], schedule,
                                           cfg.adam, cfg.split);
        model = std::move(pruned.model);
        result.train_trace.insert(result.train_trace.end(), pruned.train_trace.begin(),
                                  pruned.train_trace.end());
        result.val_trace.insert(result.val_trace.end(), pruned.val_trace.begin(),
                                pruned.val_trace.end());
    }

    model.design.activation = spec.activation;  // itanh evaluation twin

    demap::LlrBlock eval;
    for (std::size_t f = 1; f < data.received.size(); ++f) {
        const demap::LlrBlock block = sdnne::demap_frame(model, data.received[f], data.bits[f]);
        append_tail(block, data.cut, eval);
    }
    result.rate = analysis::achievable_rate(eval);
    result.complexity = analysis::multiplier_count(model, spec.itanh_points);
    sdnne_kernel_rows(model, result);
    return result;
}

PointResult run_point(const ExperimentConfig& cfg, std::size_t point, std::ostream* log,
                      std::mutex* log_mutex) {
    PointResult result;
    result.sweep_value = cfg.sweep_points[point];
    result.snr_db = cfg.sweep_is_osnr
                        ? channel::osnr_to_snr(result.sweep_value, cfg.symbol_rate_ghz)
                        : result.sweep_value;
    result.noise_sigma = channel::sigma_from_snr(result.snr_db);

    const PointData data = make_point_data(cfg, point, result.noise_sigma);

    for (const auto& spec : cfg.equalizers) {
        EqualizerResult eq;
        try {
            eq = spec.kind == EqualizerSpec::Kind::SDNNE ? run_sdnne(cfg, spec, data)
                                                         : run_volterra_like(cfg, spec, data);
        } catch (const std::exception& e) {
            eq.name = spec.display_name();
            eq.failed = true;
            eq.error = e.what();
        }
        if (log) {
            std::lock_guard<std::mutex> guard(*log_mutex);
            *log << "[point " << point + 1 << "/" << cfg.sweep_points.size() << " snr "
                 << result.snr_db << " dB] " << eq.name << ": "
                 << (eq.failed ? "FAILED " + eq.error
                               : "rate " + std::to_string(eq.rate.rate_bits) + " bits, " +
                                     std::to_string(eq.complexity.multipliers) + " muls")
                 << std::endl;
        }
        result.equalizers.push_back(std::move(eq));
    }

    // gains relative to the first successful LE baseline, regardless of the
    // order the specs were listed in
    std::optional<double> le_rate;
    for (std::size_t i = 0; i < cfg.equalizers.size(); ++i)
        if (cfg.equalizers[i].kind == EqualizerSpec::Kind::LE &&
            !result.equalizers[i].failed) {
            le_rate = result.equalizers[i].rate.rate_bits;
            break;
        }
    if (le_rate)
        for (std::size_t i = 0; i < cfg.equalizers.size(); ++i)
            if (cfg.equalizers[i].kind != EqualizerSpec::Kind::LE &&
                !result.equalizers[i].failed)
                result.equalizers[i].gain_vs_le = result.equalizers[i].rate.rate_bits - *le_rate;
    return result;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, int threads, std::ostream* log) {
    cfg.validate();
    SweepResult result;
    result.config = cfg;
    result.points.resize(cfg.sweep_points.size());

    std::mutex log_mutex;
    if (threads <= 1 || cfg.sweep_points.size() == 1) {
        for (std::size_t p = 0; p < cfg.sweep_points.size(); ++p)
            result.points[p] = run_point(cfg, p, log, &log_mutex);
        return result;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t p = next.fetch_add(1);
            if (p >= cfg.sweep_points.size()) break;
            result.points[p] = run_point(cfg, p, log, &log_mutex);
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(cfg.sweep_points.size()));
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return result;
}

namespace {

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["m"] = cfg.m;
    j["frame_length"] = cfg.frame_length;
    j["split"] = cfg.split;
    j["eval_frames"] = cfg.eval_frames;
    j["seed"] = cfg.seed;
    j["sweep"] = cfg.sweep_points;
    j["sweep_unit"] = cfg.sweep_is_osnr ? "osnr_db" : "snr_db";
    j["symbol_rate_ghz"] = cfg.symbol_rate_ghz;
    j["channel"] = {{"pre_fir", cfg.chan.pre_fir.taps},
                    {"pre_center", cfg.chan.pre_fir.center},
                    {"poly", cfg.chan.poly},
                    {"post_fir", cfg.chan.post_fir.taps},
                    {"post_center", cfg.chan.post_fir.center}};
    j["training"] = {{"step", cfg.adam.step},
                     {"batch_size", cfg.adam.batch_size},
                     {"max_epochs", cfg.adam.max_epochs},
                     {"patience", cfg.adam.patience}};
    // both training-cost views: the offline fit fraction and the nominal
    // in-service pilot overhead
    j["training_fraction_first_frame"] = cfg.split;
    j["deployed_training_overhead"] = 0.01;
    json eqs = json::array();
    for (const auto& eq : cfg.equalizers) eqs.push_back(eq.display_name());
    j["equalizers"] = eqs;
    return j;
}

}  // namespace

void emit_reports(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error(std::string("cannot write ") + (dir / name).string());
        return os;
    };

    {
        auto os = open("rate_vs_snr.csv");
        os << "equalizer,sweep_value,snr_db,rate_bits,minimizing_s\n";
        for (const auto& point : result.points)
            for (const auto& eq : point.equalizers) {
                if (eq.failed) continue;
                os << eq.name << ',' << fmt9(point.sweep_value) << ',' << fmt9(point.snr_db)
                   << ',' << fmt9(eq.rate.rate_bits) << ',' << fmt9(eq.rate.minimizing_s) << "\n";
            }
    }
    {
        auto os = open("gain_vs_snr.csv");
        os << "equalizer,sweep_value,snr_db,gain_bits\n";
        for (const auto& point : result.points)
            for (const auto& eq : point.equalizers) {
                if (eq.failed || !eq.gain_vs_le) continue;
                os << eq.name << ',' << fmt9(point.sweep_value) << ',' << fmt9(point.snr_db)
                   << ',' << fmt9(*eq.gain_vs_le) << "\n";
            }
    }
    {
        auto os = open("rate_vs_multipliers.csv");
        os << "equalizer,sweep_value,snr_db,multipliers,rate_bits\n";
        for (const auto& point : result.points)
            for (const auto& eq : point.equalizers) {
                if (eq.failed) continue;
                os << eq.name << ',' << fmt9(point.sweep_value) << ',' << fmt9(point.snr_db)
                   << ',' << eq.complexity.multipliers << ',' << fmt9(eq.rate.rate_bits) << "\n";
            }
    }
    {
        auto os = open("kernels_order1.csv");
        os << "equalizer,sweep_value,bit,offset,value\n";
        for (const auto& point : result.points)
            for (const auto& eq : point.equalizers)
                for (const auto& row : eq.kernels1)
                    os << eq.name << ',' << fmt9(point.sweep_value) << ',' << row.bit << ','
                       << row.offset << ',' << fmt9(row.value) << "\n";
    }
    {
        auto os = open("kernels_order3.csv");
        os << "equalizer,sweep_value,bit,o1,o2,o3,value\n";
        for (const auto& point : result.points)
            for (const auto& eq : point.equalizers)
                for (const auto& row : eq.kernels3)
                    os << eq.name << ',' << fmt9(point.sweep_value) << ',' << row.bit << ','
                       << row.o1 << ',' << row.o2 << ',' << row.o3 << ',' << fmt9(row.value)
                       << "\n";
    }

    json summary;
    summary["config"] = config_to_json(result.config);
    json points = json::array();
    for (const auto& point : result.points) {
        json pj;
        pj["sweep_value"] = point.sweep_value;
        pj["snr_db"] = point.snr_db;
        pj["noise_sigma"] = point.noise_sigma;
        json eqs = json::array();
        for (const auto& eq : point.equalizers) {
            json ej;
            ej["name"] = eq.name;
            ej["failed"] = eq.failed;
            if (eq.failed) {
                ej["error"] = eq.error;
            } else {
                ej["rate"] = rate_report_to_json(eq.rate);
                ej["complexity"] = complexity_report_to_json(eq.complexity);
                if (eq.gain_vs_le) ej["gain_vs_le"] = *eq.gain_vs_le;
                ej["train_trace"] = eq.train_trace;
                ej["val_trace"] = eq.val_trace;
            }
            eqs.push_back(std::move(ej));
        }
        pj["equalizers"] = std::move(eqs);
        points.push_back(std::move(pj));
    }
    summary["points"] = std::move(points);
    save_json(summary, dir / "summary.json");
}

}  // namespace nleq::harness
