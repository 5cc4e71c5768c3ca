// SPDX-License-Identifier: Apache-2.0
//
// `tsd` command-line front end: ingest, train, eval, gridsearch, ablate,
// saliency. Every artifact-producing command writes exactly one manifest
// alongside its outputs. Exit codes: 0 success, 2 usage/config/schema
// errors, 3 numeric failures.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsd/data.hpp"
#include "tsd/errors.hpp"
#include "tsd/model.hpp"
#include "tsd/reference.hpp"
#include "tsd/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

const std::vector<std::size_t> kStandardHorizons = {24,  36,  48,  60,  96, 168,
                                                    192, 288, 336, 672, 720};

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw tsd::ConfigError("cannot write " + path.string());
    os << text;
}

// One manifest per output directory; it records everything needed to re-run
// the command identically (the timestamp is informational only).
void write_manifest(const fs::path& out_dir, json manifest) {
    manifest["tool_version"] = kToolVersion;
    manifest["timestamp"] = iso_timestamp();
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

json dataset_entry(const std::string& path) {
    return json{{"path", path}, {"checksum_fnv1a64", tsd::file_checksum(path)}};
}

fs::path require_out_dir(const std::string& out) {
    if (out.empty()) throw tsd::UsageError("--out directory is required");
    fs::path p(out);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw tsd::ConfigError("cannot create output directory " + out);
    return p;
}

// Metric CSVs must be byte-identical across identical-seed re-runs, so wall
// time is recorded in the manifest and zeroed in the CSV artifact.
std::vector<tsd::MetricReport> scrubbed(std::vector<tsd::MetricReport> rows) {
    for (auto& r : rows) r.wall_seconds = 0.0;
    return rows;
}

json config_to_json(const tsd::TSDConfig& c, const tsd::TrainSettings& s) {
    return json{{"lookback", c.lookback},
                {"horizon", c.horizon},
                {"n_channels", c.n_channels},
                {"n_targets", c.n_targets},
                {"d_model", c.d_model},
                {"n_heads", c.n_heads},
                {"n_blocks", c.n_blocks},
                {"dropout", c.dropout},
                {"pooling", tsd::to_string(c.pooling)},
                {"ffn_dim", c.ffn_dim},
                {"base_channels", c.base_channels},
                {"residual_attention", c.residual_attention},
                {"loss", tsd::to_string(s.loss_kind)},
                {"learning_rate", s.learning_rate},
                {"weight_decay", s.weight_decay},
                {"scheduler_gamma", s.scheduler_gamma},
                {"scheduler_step", s.scheduler_step},
                {"epochs", s.epochs},
                {"batch_size", s.batch_size},
                {"seed", s.seed},
                {"repeats", s.repeats}};
}

// Flat-JSON run configuration; unknown keys are rejected by name.
void apply_config_file(const std::string& path, tsd::TSDConfig& cfg,
                       tsd::TrainSettings& settings) {
    std::ifstream is(path);
    if (!is) throw tsd::ConfigError("cannot open config file " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw tsd::ConfigError("config file " + path + " is not valid JSON: " +
                               e.what());
    }
    if (!j.is_object())
        throw tsd::ConfigError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "lookback") cfg.lookback = value.get<std::size_t>();
        else if (key == "horizon") cfg.horizon = value.get<std::size_t>();
        else if (key == "n_channels") cfg.n_channels = value.get<std::size_t>();
        else if (key == "n_targets") cfg.n_targets = value.get<std::size_t>();
        else if (key == "d_model") cfg.d_model = value.get<std::size_t>();
        else if (key == "n_heads") cfg.n_heads = value.get<std::size_t>();
        else if (key == "n_blocks") cfg.n_blocks = value.get<std::size_t>();
        else if (key == "dropout") cfg.dropout = value.get<double>();
        else if (key == "pooling")
            cfg.pooling = tsd::pooling_from_string(value.get<std::string>());
        else if (key == "ffn_dim") cfg.ffn_dim = value.get<std::size_t>();
        else if (key == "base_channels") cfg.base_channels = value.get<std::size_t>();
        else if (key == "residual_attention")
            cfg.residual_attention = value.get<bool>();
        else if (key == "loss")
            settings.loss_kind = tsd::loss_from_string(value.get<std::string>());
        else if (key == "learning_rate") settings.learning_rate = value.get<double>();
        else if (key == "weight_decay") settings.weight_decay = value.get<double>();
        else if (key == "scheduler_gamma")
            settings.scheduler_gamma = value.get<double>();
        else if (key == "scheduler_step")
            settings.scheduler_step = value.get<std::size_t>();
        else if (key == "epochs") settings.epochs = value.get<std::size_t>();
        else if (key == "batch_size") settings.batch_size = value.get<std::size_t>();
        else if (key == "seed") settings.seed = value.get<std::uint64_t>();
        else if (key == "repeats") settings.repeats = value.get<std::size_t>();
        else
            throw tsd::ConfigError("unknown config key \"" + key + "\" in " + path);
    }
}

tsd::TimeSeriesFrame load_any(const std::string& path, tsd::DatasetKind kind) {
    if (fs::path(path).extension() == ".tsdf") return tsd::load_frame_cache(path);
    return tsd::load_csv(path, kind);
}

void check_horizon(std::size_t horizon, bool allow_any) {
    if (allow_any) {
        if (horizon == 0) throw tsd::ConfigError("horizon must be positive");
        return;
    }
    for (std::size_t h : kStandardHorizons)
        if (h == horizon) return;
    std::ostringstream os;
    os << "horizon " << horizon << " is not in the standard set {";
    for (std::size_t i = 0; i < kStandardHorizons.size(); ++i)
        os << (i ? "," : "") << kStandardHorizons[i];
    os << "}; pass --allow-any-horizon to override";
    throw tsd::ConfigError(os.str());
}

std::string epoch_log_csv(const std::vector<tsd::EpochLogRow>& log) {
    std::ostringstream os;
    os << "epoch,lr,train_loss,val_mse,val_mae\n";
    char buf[128];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", r.epoch,
                      r.lr, r.train_loss, r.val_mse, r.val_mae);
        os << buf;
    }
    return os.str();
}

struct DataArgs {
    std::string data;
    std::string kind = "etth1";
    std::string mode = "multivariate";
};

void add_data_flags(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--data", a.data, "dataset CSV (or .tsdf cache) path")
        ->required();
    cmd->add_option("--kind", a.kind,
                    "dataset kind: etth1|etth2|ettm1|ili|exchange");
    cmd->add_option("--mode", a.mode, "series mode: multivariate|univariate "
                                      "(multi|uni accepted)");
}

tsd::DataBundle build_bundle(const DataArgs& a, const tsd::TSDConfig& cfg) {
    const auto kind = tsd::dataset_kind_from_string(a.kind);
    const auto mode = tsd::mode_from_string(a.mode);
    const auto frame = load_any(a.data, kind);
    return tsd::make_bundle(frame, tsd::to_string(kind), mode, cfg.lookback,
                            cfg.horizon, tsd::season_of(kind));
}

// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& data, const std::string& kind_str,
               std::string cache_dir, const std::string& out) {
    const auto kind = tsd::dataset_kind_from_string(kind_str);
    const auto frame = tsd::load_csv(data, kind);
    // Boundary arithmetic only; tiny files are still ingestable even though
    // they admit no training windows.
    const std::size_t T = frame.rows();
    const std::size_t train_end = 7 * T / 10, val_end = 8 * T / 10;

    if (cache_dir.empty()) {
        if (const char* env = std::getenv("TSD_CACHE_DIR")) cache_dir = env;
    }
    const fs::path out_dir = require_out_dir(out.empty() ? cache_dir : out);
    if (cache_dir.empty()) cache_dir = out_dir.string();
    fs::create_directories(cache_dir);
    const fs::path cache_path = fs::path(cache_dir) / (kind_str + ".tsdf");
    tsd::save_frame_cache(frame, cache_path.string());

    std::cout << "T=" << frame.rows() << ", C=" << frame.channels()
              << ", target=" << frame.channel_names[frame.target_index] << "\n"
              << "split: train=[0," << train_end << ") val=[" << train_end << ","
              << val_end << ") test=[" << val_end << "," << T << ")\n";
    for (const auto& w : frame.gap_warnings) std::cout << "warning: " << w << "\n";

    write_manifest(out_dir, json{{"command", "ingest"},
                                 {"kind", kind_str},
                                 {"dataset", dataset_entry(data)},
                                 {"cache_file", cache_path.string()},
                                 {"output_dir", out_dir.string()},
                                 {"rows", frame.rows()},
                                 {"channels", frame.channels()},
                                 {"gap_warnings", frame.gap_warnings.size()}});
    return 0;
}

int cmd_train(const std::string& config_path, const DataArgs& dargs,
              long long horizon, long long lookback, long long seed,
              bool allow_any_horizon, const std::string& out) {
    tsd::TSDConfig cfg;
    tsd::TrainSettings settings;
    if (!config_path.empty()) apply_config_file(config_path, cfg, settings);
    if (horizon >= 0) cfg.horizon = static_cast<std::size_t>(horizon);
    if (lookback >= 0) cfg.lookback = static_cast<std::size_t>(lookback);
    if (seed >= 0) settings.seed = static_cast<std::uint64_t>(seed);
    check_horizon(cfg.horizon, allow_any_horizon);

    const auto bundle = build_bundle(dargs, cfg);
    cfg.n_channels = bundle.input_channels();
    cfg.n_targets = bundle.target_channels();
    cfg.validate();
    settings.validate();

    const fs::path out_dir = require_out_dir(out);
    const auto result = tsd::train(cfg, settings, bundle);
    result.model->save((out_dir / "checkpoint.tsd").string());
    write_text(out_dir / "epochs.csv", epoch_log_csv(result.log));
    tsd::write_reports_csv((out_dir / "report.csv").string(),
                           scrubbed({result.report}));
    write_manifest(out_dir,
                   json{{"command", "train"},
                        {"dataset", dataset_entry(dargs.data)},
                        {"kind", dargs.kind},
                        {"mode", dargs.mode},
                        {"config", config_to_json(cfg, settings)},
                        {"config_hash", cfg.hash()},
                        {"output_dir", out_dir.string()},
                        {"wall_seconds", result.report.wall_seconds},
                        {"best_val_loss", result.best_val_loss}});
    std::cout << "test mse=" << result.report.mse
              << " mae=" << result.report.mae << " (" << settings.repeats
              << " repeat" << (settings.repeats == 1 ? "" : "s") << ")\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const DataArgs& dargs,
             const std::string& out) {
    auto model = tsd::TSDModel::load(checkpoint);
    tsd::TSDConfig cfg = model.config();
    DataArgs args = dargs;
    const auto bundle = build_bundle(args, cfg);
    if (bundle.input_channels() != cfg.n_channels ||
        bundle.target_channels() != cfg.n_targets)
        throw tsd::DimensionError(
            "checkpoint expects " + std::to_string(cfg.n_channels) + "->" +
            std::to_string(cfg.n_targets) + " channels but data provides " +
            std::to_string(bundle.input_channels()) + "->" +
            std::to_string(bundle.target_channels()));

    const fs::path out_dir = require_out_dir(out);
    auto report = tsd::evaluate(model, bundle);
    report.dataset = bundle.dataset_name;
    report.mode = tsd::to_string(bundle.mode);
    tsd::write_reports_csv((out_dir / "report.csv").string(), scrubbed({report}));

    // Comparison table: this run plus the static reference rows for the task.
    std::ostringstream cmp;
    cmp << "dataset,mode,horizon,model,mse,mae,source\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g", report.mse, report.mae);
    cmp << report.dataset << "," << report.mode << "," << report.horizon
        << ",this-run," << buf << ",local\n";
    for (const auto& r :
         tsd::reference_rows_for(report.dataset, report.mode, report.horizon)) {
        std::snprintf(buf, sizeof(buf), "%g,%g", r.mse, r.mae);
        cmp << r.dataset << "," << r.mode << "," << r.horizon << "," << r.model
            << "," << buf << "," << r.source << "\n";
    }
    write_text(out_dir / "comparison.csv", cmp.str());

    write_manifest(out_dir, json{{"command", "eval"},
                                 {"checkpoint", dataset_entry(checkpoint)},
                                 {"dataset", dataset_entry(args.data)},
                                 {"kind", args.kind},
                                 {"mode", args.mode},
                                 {"config_hash", cfg.hash()},
                                 {"output_dir", out_dir.string()}});
    std::cout << "mse=" << report.mse << " mae=" << report.mae << "\n";
    return 0;
}

int cmd_gridsearch(const std::string& config_path, const std::string& grid_path,
                   const DataArgs& dargs, long long horizon, std::size_t budget,
                   std::size_t workers, const std::string& out) {
    tsd::TSDConfig cfg;
    tsd::TrainSettings settings;
    if (!config_path.empty()) apply_config_file(config_path, cfg, settings);
    if (horizon >= 0) cfg.horizon = static_cast<std::size_t>(horizon);

    tsd::GridSpec grid;
    if (grid_path.empty()) {
        grid = tsd::default_grid();
    } else {
        std::ifstream is(grid_path);
        if (!is) throw tsd::ConfigError("cannot open grid file " + grid_path);
        json j;
        try {
            is >> j;
        } catch (const json::exception& e) {
            throw tsd::ConfigError("grid file is not valid JSON: " +
                                   std::string(e.what()));
        }
        if (!j.is_object() || j.empty())
            throw tsd::ConfigError("grid file must hold a non-empty JSON object");
        for (const auto& [axis, values] : j.items()) {
            if (!values.is_array() || values.empty())
                throw tsd::ConfigError("grid axis \"" + axis +
                                       "\" must be a non-empty array");
            grid.axes.emplace_back(axis, values.get<std::vector<double>>());
        }
    }
    grid.budget = budget;

    const auto bundle = build_bundle(dargs, cfg);
    cfg.n_channels = bundle.input_channels();
    cfg.n_targets = bundle.target_channels();

    const fs::path out_dir = require_out_dir(out);
    const auto trials = tsd::grid_search(cfg, settings, grid, bundle, workers);

    std::ostringstream os;
    os << "rank,trial_index,val_loss,val_mse,val_mae,param_count,config_hash\n";
    char buf[160];
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.10g,%.10g,%.10g,%zu,%s\n",
                      i + 1, t.index, t.val_loss, t.val_report.mse,
                      t.val_report.mae, t.param_count, t.config.hash().c_str());
        os << buf;
    }
    write_text(out_dir / "grid.csv", os.str());

    json axes = json::object();
    for (const auto& [name, values] : grid.axes) axes[name] = values;
    write_manifest(out_dir, json{{"command", "gridsearch"},
                                 {"dataset", dataset_entry(dargs.data)},
                                 {"kind", dargs.kind},
                                 {"mode", dargs.mode},
                                 {"config", config_to_json(cfg, settings)},
                                 {"grid", axes},
                                 {"budget", budget},
                                 {"workers", workers},
                                 {"output_dir", out_dir.string()}});
    std::cout << trials.size() << " trials ranked; best val_loss="
              << (trials.empty() ? 0.0 : trials.front().val_loss) << "\n";
    return 0;
}

int cmd_ablate(const std::string& which, const std::string& config_path,
               const DataArgs& dargs, const std::string& horizons_arg,
               const std::string& out) {
    tsd::TSDConfig cfg;
    tsd::TrainSettings settings;
    if (!config_path.empty()) apply_config_file(config_path, cfg, settings);

    std::vector<std::size_t> horizons;
    {
        std::istringstream is(horizons_arg);
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) horizons.push_back(std::stoul(tok));
    }
    if (horizons.empty()) horizons.push_back(cfg.horizon);

    std::vector<tsd::DataBundle> tasks;
    for (std::size_t h : horizons) {
        tsd::TSDConfig c = cfg;
        c.horizon = h;
        tasks.push_back(build_bundle(dargs, c));
    }
    cfg.n_channels = tasks.front().input_channels();
    cfg.n_targets = tasks.front().target_channels();

    const fs::path out_dir = require_out_dir(out);
    std::ostringstream os;
    os << "dataset,mode,horizon,variant,mse,mae,repeats,seed,config_hash\n";
    char buf[200];
    auto emit = [&](const tsd::MetricReport& r, const std::string& variant) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%s,%.10g,%.10g,%zu,%llu,%s\n",
                      r.dataset.c_str(), r.mode.c_str(), r.horizon,
                      variant.c_str(), r.mse, r.mae, r.repeats,
                      static_cast<unsigned long long>(r.seed),
                      r.config_hash.c_str());
        os << buf;
    };
    if (which == "pooling") {
        const auto pairs = tsd::ablate_pooling(cfg, settings, tasks);
        for (const auto& p : pairs) {
            emit(p.max_pool, "maxpool");
            emit(p.average_pool, "averagepool");
        }
    } else if (which == "blocks") {
        const auto per_task = tsd::ablate_blocks(cfg, settings, tasks);
        for (const auto& trials : per_task)
            for (const auto& t : trials)
                emit(t.report, std::to_string(t.n_blocks) + "blocks");
    } else {
        throw tsd::UsageError("--which must be pooling or blocks, got " + which);
    }
    write_text(out_dir / "ablation.csv", os.str());

    json hz = json::array();
    for (std::size_t h : horizons) hz.push_back(h);
    write_manifest(out_dir, json{{"command", "ablate"},
                                 {"which", which},
                                 {"dataset", dataset_entry(dargs.data)},
                                 {"kind", dargs.kind},
                                 {"mode", dargs.mode},
                                 {"horizons", hz},
                                 {"config", config_to_json(cfg, settings)},
                                 {"output_dir", out_dir.string()}});
    return 0;
}

int cmd_saliency(const std::string& checkpoint, const DataArgs& dargs,
                 long long window_index, const std::string& out) {
    auto model = tsd::TSDModel::load(checkpoint);
    const auto bundle = build_bundle(dargs, model.config());
    if (window_index < 0 ||
        static_cast<std::size_t>(window_index) >= bundle.test.size())
        throw tsd::UsageError("--window-index " + std::to_string(window_index) +
                              " out of range; test partition has " +
                              std::to_string(bundle.test.size()) + " windows");

    const auto maps = model.extract_saliency(
        bundle.test[static_cast<std::size_t>(window_index)].inputs);

    const fs::path out_dir = require_out_dir(out);
    std::ostringstream combined;
    combined << "level,path,channel,token,stride,value\n";
    char buf[128];
    for (const auto& m : maps) {
        const std::string path_name = m.down_path ? "down" : "up";
        std::ostringstream os;
        os << "token,stride,channel_mean_abs\n";
        const auto means = m.channel_mean();
        for (std::size_t t = 0; t < m.tokens; ++t) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.10g\n", t, m.token_stride,
                          means[t]);
            os << buf;
        }
        write_text(out_dir / ("saliency_" + path_name + "_" +
                              std::to_string(m.level) + ".csv"),
                   os.str());
        for (std::size_t c = 0; c < m.channels; ++c)
            for (std::size_t t = 0; t < m.tokens; ++t) {
                std::snprintf(buf, sizeof(buf), "%zu,%s,%zu,%zu,%zu,%.10g\n",
                              m.level, path_name.c_str(), c, t, m.token_stride,
                              m.value(c, t));
                combined << buf;
            }
    }
    write_text(out_dir / "saliency_long.csv", combined.str());

    write_manifest(out_dir, json{{"command", "saliency"},
                                 {"checkpoint", dataset_entry(checkpoint)},
                                 {"dataset", dataset_entry(dargs.data)},
                                 {"kind", dargs.kind},
                                 {"mode", dargs.mode},
                                 {"window_index", window_index},
                                 {"blocks", maps.size()},
                                 {"output_dir", out_dir.string()}});
    std::cout << maps.size() << " saliency maps written\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal saliency forecasting toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // ingest
    std::string in_data, in_kind = "etth1", in_cache, in_out;
    auto* ingest = app.add_subcommand("ingest", "parse a CSV and cache it");
    ingest->add_option("--data", in_data)->required();
    ingest->add_option("--kind", in_kind);
    ingest->add_option("--cache", in_cache, "cache directory (default: TSD_CACHE_DIR)");
    ingest->add_option("--out", in_out, "manifest/output directory");

    // train
    DataArgs tr_data;
    std::string tr_config, tr_out;
    long long tr_horizon = -1, tr_lookback = -1, tr_seed = -1;
    bool tr_any_h = false;
    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_data_flags(train, tr_data);
    train->add_option("--config", tr_config, "flat JSON config file");
    train->add_option("--horizon", tr_horizon);
    train->add_option("--lookback", tr_lookback);
    train->add_option("--seed", tr_seed);
    train->add_flag("--allow-any-horizon", tr_any_h);
    train->add_option("--out", tr_out)->required();

    // eval
    DataArgs ev_data;
    std::string ev_checkpoint, ev_out;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", ev_checkpoint)->required();
    add_data_flags(eval, ev_data);
    eval->add_option("--out", ev_out)->required();

    // gridsearch
    DataArgs gs_data;
    std::string gs_config, gs_grid, gs_out;
    long long gs_horizon = -1;
    std::size_t gs_budget = 8, gs_workers = 1;
    auto* grid = app.add_subcommand("gridsearch", "bounded hyperparameter search");
    add_data_flags(grid, gs_data);
    grid->add_option("--config", gs_config);
    grid->add_option("--grid", gs_grid, "JSON object: axis -> value array");
    grid->add_option("--horizon", gs_horizon);
    grid->add_option("--budget", gs_budget);
    grid->add_option("--workers", gs_workers);
    grid->add_option("--out", gs_out)->required();

    // ablate
    DataArgs ab_data;
    std::string ab_which, ab_config, ab_horizons, ab_out;
    auto* ablate = app.add_subcommand("ablate", "pooling or block-count ablation");
    ablate->add_option("--which", ab_which, "pooling|blocks")->required();
    add_data_flags(ablate, ab_data);
    ablate->add_option("--config", ab_config);
    ablate->add_option("--horizons", ab_horizons, "comma-separated horizon list");
    ablate->add_option("--out", ab_out)->required();

    // saliency
    DataArgs sa_data;
    std::string sa_checkpoint, sa_out;
    long long sa_index = 0;
    auto* saliency = app.add_subcommand("saliency", "export per-block saliency maps");
    saliency->add_option("--checkpoint", sa_checkpoint)->required();
    add_data_flags(saliency, sa_data);
    saliency->add_option("--window-index", sa_index);
    saliency->add_option("--out", sa_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(in_data, in_kind, in_cache, in_out);
        if (train->parsed())
            return cmd_train(tr_config, tr_data, tr_horizon, tr_lookback, tr_seed,
                             tr_any_h, tr_out);
        if (eval->parsed()) return cmd_eval(ev_checkpoint, ev_data, ev_out);
        if (grid->parsed())
            return cmd_gridsearch(gs_config, gs_grid, gs_data, gs_horizon,
                                  gs_budget, gs_workers, gs_out);
        if (ablate->parsed())
            return cmd_ablate(ab_which, ab_config, ab_data, ab_horizons, ab_out);
        if (saliency->parsed())
            return cmd_saliency(sa_checkpoint, sa_data, sa_index, sa_out);
    } catch (const tsd::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
