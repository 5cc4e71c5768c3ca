// SPDX-License-Identifier: Apache-2.0
#include "tsd/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "tsd/rng.hpp"

namespace tsd {

LossKind loss_from_string(const std::string& s) {
    if (s == "mse") return LossKind::kMse;
    if (s == "mae") return LossKind::kMae;
    throw ConfigError("unknown loss '" + s + "' (expected mse|mae)");
}

std::string to_string(LossKind k) { return k == LossKind::kMse ? "mse" : "mae"; }

void TrainSettings::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (scheduler_gamma <= 0.0 || scheduler_gamma > 1.0)
        throw ConfigError("scheduler_gamma must be in (0,1]");
    if (scheduler_step < 1) throw ConfigError("scheduler_step must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

std::string TrainSettings::hash() const {
    std::ostringstream os;
    os << to_string(loss_kind) << ";" << learning_rate << ";" << weight_decay << ";"
       << scheduler_gamma << ";" << scheduler_step << ";" << epochs << ";"
       << batch_size << ";" << seed << ";" << repeats;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

Tensor mse(const Tensor& pred, const Tensor& truth) {
    if (pred.shape() != truth.shape())
        throw DimensionError("mse: shape mismatch " + shape_str(pred.shape()) +
                             " vs " + shape_str(truth.shape()));
    Tensor d = sub(pred, truth);
    return mean(mul(d, d));
}

Tensor mae(const Tensor& pred, const Tensor& truth) {
    if (pred.shape() != truth.shape())
        throw DimensionError("mae: shape mismatch " + shape_str(pred.shape()) +
                             " vs " + shape_str(truth.shape()));
    return mean(abs_val(sub(pred, truth)));
}

double lr_at(std::size_t epoch, double base_lr, double gamma, std::size_t step) {
    return base_lr * std::pow(gamma, static_cast<double>(epoch / step));
}

AdamW::AdamW(std::vector<Parameter>& params, double weight_decay, double beta1,
             double beta2, double eps)
    : params_(&params), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.emplace_back(p.tensor.numel(), 0.0);
        v_.emplace_back(p.tensor.numel(), 0.0);
    }
}

void AdamW::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_->size(); ++i) {
        auto& p = (*params_)[i].tensor;
        if (!p.has_grad())
            throw UsageError("AdamW: parameter '" + (*params_)[i].name +
                             "' has no gradient");
        auto& data = p.data();
        const auto& grad = p.grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < data.size(); ++j) {
            // decoupled decay, applied before the moment update
            data[j] -= lr * weight_decay_ * data[j];
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * grad[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * grad[j] * grad[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            data[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

DataBundle make_bundle(const TimeSeriesFrame& frame, const std::string& name,
                       SeriesMode mode, std::size_t lookback, std::size_t horizon,
                       std::size_t season) {
    SplitSpec sp = split(frame, lookback, horizon);
    Standardizer st = Standardizer::fit(frame, sp);
    TimeSeriesFrame z = st.transform(frame);
    DataBundle b;
    b.dataset_name = name;
    b.mode = mode;
    b.lookback = lookback;
    b.horizon = horizon;
    b.season = season;
    b.train = make_windows(z, sp, Partition::kTrain, lookback, horizon, mode);
    b.val = make_windows(z, sp, Partition::kVal, lookback, horizon, mode);
    b.test = make_windows(z, sp, Partition::kTest, lookback, horizon, mode);
    return b;
}

// ---------------------------------------------------------------------------
// Report CSV
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
}

}  // namespace

std::string reports_to_csv(const std::vector<MetricReport>& rows) {
    std::ostringstream os;
    os << "dataset,mode,horizon,mse,mae,repeats,seed,config_hash,wall_seconds\n";
    for (const auto& r : rows)
        os << r.dataset << "," << r.mode << "," << r.horizon << ","
           << fmt_double(r.mse) << "," << fmt_double(r.mae) << "," << r.repeats
           << "," << r.seed << "," << r.config_hash << ","
           << fmt_double(r.wall_seconds) << "\n";
    return os.str();
}

void write_reports_csv(const std::string& path,
                       const std::vector<MetricReport>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot open report for writing: " + path);
    os << reports_to_csv(rows);
}

// ---------------------------------------------------------------------------
// Training and evaluation
// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> eval_metrics(const TSDModel& model,
                                       const std::vector<WindowSample>& windows) {
    double se = 0.0, ae = 0.0;
    std::size_t n = 0;
    for (const auto& w : windows) {
        Tensor pred = model.forward(w.inputs);
        for (std::size_t i = 0; i < pred.numel(); ++i) {
            const double d = pred.data()[i] - w.targets.data()[i];
            se += d * d;
            ae += std::abs(d);
        }
        n += pred.numel();
    }
    return {se / static_cast<double>(n), ae / static_cast<double>(n)};
}

double loss_of(LossKind k, double mse_v, double mae_v) {
    return k == LossKind::kMse ? mse_v : mae_v;
}

}  // namespace

MetricReport evaluate(const TSDModel& model, const DataBundle& data,
                      Partition partition) {
    const auto& windows = partition == Partition::kTrain ? data.train
                          : partition == Partition::kVal ? data.val
                                                         : data.test;
    if (windows.empty()) throw ConfigError("evaluate: empty partition");
    if (model.config().horizon != data.horizon)
        throw DimensionError("evaluate: model horizon " +
                             std::to_string(model.config().horizon) +
                             " vs data horizon " + std::to_string(data.horizon));
    const auto t0 = std::chrono::steady_clock::now();
    auto [mse_v, mae_v] = eval_metrics(model, windows);
    MetricReport r;
    r.dataset = data.dataset_name;
    r.mode = to_string(data.mode);
    r.horizon = data.horizon;
    r.mse = mse_v;
    r.mae = mae_v;
    r.config_hash = model.config().hash();
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

TrainResult train(const TSDConfig& cfg, const TrainSettings& settings,
                  const DataBundle& data) {
    cfg.validate();
    settings.validate();
    if (data.train.empty() || data.val.empty() || data.test.empty())
        throw ConfigError("train: all three partitions need at least one window");
    if (data.input_channels() != cfg.n_channels)
        throw DimensionError("train: data has " +
                             std::to_string(data.input_channels()) +
                             " input channels, config expects " +
                             std::to_string(cfg.n_channels));
    if (data.target_channels() != cfg.n_targets || data.horizon != cfg.horizon)
        throw DimensionError("train: target shape mismatch with config");

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result;
    double test_mse_acc = 0.0, test_mae_acc = 0.0;
    double val_mse_kept = 0.0, val_mae_kept = 0.0;

    for (std::size_t rep = 0; rep < settings.repeats; ++rep) {
        const std::uint64_t rep_seed = settings.seed + rep;
        auto model = std::make_unique<TSDModel>(cfg, rep_seed);
        Rng shuffle_rng = Rng(rep_seed).fork(1);
        Rng dropout_rng = Rng(rep_seed).fork(2);
        AdamW opt(model->parameters(), settings.weight_decay);

        std::vector<std::size_t> order(data.train.size());
        std::iota(order.begin(), order.end(), 0);

        std::vector<double> best_snapshot;
        double best_val = std::numeric_limits<double>::infinity();
        double best_val_mse = 0.0, best_val_mae = 0.0;

        {
            auto [m0, a0] = eval_metrics(*model, data.val);
            if (rep == 0)
                result.untrained_val_loss = loss_of(settings.loss_kind, m0, a0);
        }

        for (std::size_t epoch = 0; epoch < settings.epochs; ++epoch) {
            const double lr = lr_at(epoch, settings.learning_rate,
                                    settings.scheduler_gamma, settings.scheduler_step);
            shuffle(order.begin(), order.end(), shuffle_rng);
            double epoch_loss = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t start = 0; start < order.size();
                 start += settings.batch_size) {
                const std::size_t end =
                    std::min(order.size(), start + settings.batch_size);
                Tensor loss;
                for (std::size_t i = start; i < end; ++i) {
                    const auto& w = data.train[order[i]];
                    Tensor pred = model->forward(w.inputs, true, dropout_rng);
                    Tensor l = settings.loss_kind == LossKind::kMse
                                   ? mse(pred, w.targets)
                                   : mae(pred, w.targets);
                    loss = i == start ? l : add(loss, l);
                }
                loss = scale(loss, 1.0 / static_cast<double>(end - start));
                const double lv = loss.item();
                if (!std::isfinite(lv))
                    throw NumericError("non-finite loss at epoch " +
                                       std::to_string(epoch) + ", step " +
                                       std::to_string(opt.steps_taken()));
                model->zero_grads();
                loss.backward();
                opt.step(lr);
                epoch_loss += lv;
                ++n_batches;
            }
            auto [vm, va] = eval_metrics(*model, data.val);
            const double vl = loss_of(settings.loss_kind, vm, va);
            if (vl < best_val) {
                best_val = vl;
                best_val_mse = vm;
                best_val_mae = va;
                best_snapshot.clear();
                for (const auto& p : model->parameters())
                    best_snapshot.insert(best_snapshot.end(),
                                         p.tensor.data().begin(),
                                         p.tensor.data().end());
            }
            if (rep == 0)
                result.log.push_back({epoch, lr,
                                      epoch_loss / static_cast<double>(n_batches),
                                      vm, va});
        }

        // restore the best-validation checkpoint
        std::size_t off = 0;
        for (auto& p : model->parameters()) {
            std::copy(best_snapshot.begin() + static_cast<std::ptrdiff_t>(off),
                      best_snapshot.begin() +
                          static_cast<std::ptrdiff_t>(off + p.tensor.numel()),
                      p.tensor.data().begin());
            off += p.tensor.numel();
        }

        auto [tm, ta] = eval_metrics(*model, data.test);
        test_mse_acc += tm;
        test_mae_acc += ta;
        if (rep == 0) {
            result.model = std::move(model);
            result.best_val_loss = best_val;
            val_mse_kept = best_val_mse;
            val_mae_kept = best_val_mae;
        }
    }

    const double reps = static_cast<double>(settings.repeats);
    MetricReport r;
    r.dataset = data.dataset_name;
    r.mode = to_string(data.mode);
    r.horizon = data.horizon;
    r.mse = test_mse_acc / reps;
    r.mae = test_mae_acc / reps;
    r.repeats = settings.repeats;
    r.seed = settings.seed;
    r.config_hash = cfg.hash();
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.report = r;
    result.val_report = r;
    result.val_report.mse = val_mse_kept;
    result.val_report.mae = val_mae_kept;
    result.val_report.wall_seconds = 0.0;
    return result;
}

// ---------------------------------------------------------------------------
// Naive baselines
// ---------------------------------------------------------------------------

BaselineReports naive_baselines(const DataBundle& data) {
    if (data.test.empty()) throw ConfigError("naive_baselines: empty test partition");
    const std::size_t H = data.horizon, tau = data.lookback;
    const bool fallback = tau < data.season;

    double p_se = 0.0, p_ae = 0.0, s_se = 0.0, s_ae = 0.0;
    std::size_t n = 0;
    for (const auto& w : data.test) {
        const std::size_t C = w.targets.extent(0);
        for (std::size_t c = 0; c < C; ++c) {
            const double last = w.inputs.at(c, tau - 1);
            for (std::size_t h = 0; h < H; ++h) {
                const double truth = w.targets.at(c, h);
                const double dp = last - truth;
                p_se += dp * dp;
                p_ae += std::abs(dp);
                // seasonal-naive: the value one season before the forecast step
                double sv = last;
                if (!fallback) {
                    // forecast step tau+h reads back season steps repeatedly
                    std::size_t back = data.season;
                    while (back <= h) back += data.season;
                    sv = w.inputs.at(c, tau + h - back);
                }
                const double ds = sv - truth;
                s_se += ds * ds;
                s_ae += std::abs(ds);
            }
        }
        n += w.targets.numel();
    }
    const double dn = static_cast<double>(n);
    BaselineReports out;
    out.seasonal_fell_back = fallback;
    out.persistence = {data.dataset_name, to_string(data.mode), H,
                       p_se / dn, p_ae / dn, 1, 0, "persistence", 0.0};
    out.seasonal_naive = {data.dataset_name, to_string(data.mode), H,
                          s_se / dn, s_ae / dn, 1, 0,
                          fallback ? "persistence-fallback" : "seasonal-naive", 0.0};
    return out;
}

// ---------------------------------------------------------------------------
// Grid search and ablations
// ---------------------------------------------------------------------------

GridSpec default_grid() {
    GridSpec g;
    g.axes = {
        {"d_model", {512, 1024, 1280, 1536}},
        {"n_heads", {8, 16, 32}},
        {"n_blocks", {3, 4, 5}},
        {"dropout", {0.05, 0.1, 0.2, 0.3}},
        {"learning_rate", {1e-5, 2e-5, 1e-6, 5e-6, 1e-7}},
        {"scheduler_gamma", {0.97, 0.95, 0.87, 0.85}},
        {"scheduler_step", {2, 5, 8}},
        {"epochs", {15, 20, 25, 30, 35}},
        // extended axis, value unstated in the search ranges
        {"weight_decay", {1e-4}},
    };
    g.budget = 8;
    return g;
}

namespace {

void apply_axis(TSDConfig& cfg, TrainSettings& st, const std::string& name,
                double value) {
    const auto as_size = [&] { return static_cast<std::size_t>(value); };
    if (name == "d_model") cfg.d_model = as_size();
    else if (name == "n_heads") cfg.n_heads = as_size();
    else if (name == "n_blocks") cfg.n_blocks = as_size();
    else if (name == "dropout") cfg.dropout = value;
    else if (name == "ffn_dim") cfg.ffn_dim = as_size();
    else if (name == "base_channels") cfg.base_channels = as_size();
    else if (name == "learning_rate") st.learning_rate = value;
    else if (name == "weight_decay") st.weight_decay = value;
    else if (name == "scheduler_gamma") st.scheduler_gamma = value;
    else if (name == "scheduler_step") st.scheduler_step = as_size();
    else if (name == "epochs") st.epochs = as_size();
    else if (name == "batch_size") st.batch_size = as_size();
    else throw ConfigError("unknown grid axis '" + name + "'");
}

}  // namespace

std::vector<GridTrial> grid_search(const TSDConfig& base_cfg,
                                   const TrainSettings& base_settings,
                                   const GridSpec& grid, const DataBundle& data,
                                   std::size_t workers) {
    if (grid.budget < 1) throw ConfigError("grid budget must be >= 1");
    if (grid.axes.empty()) throw ConfigError("empty grid");
    for (const auto& [name, values] : grid.axes)
        if (values.empty()) throw ConfigError("grid axis '" + name + "' is empty");

    // Cartesian enumeration in declared axis order, truncated at budget.
    std::size_t total = 1;
    for (const auto& [name, values] : grid.axes) total *= values.size();
    const std::size_t n_trials = std::min(total, grid.budget);

    std::vector<GridTrial> trials(n_trials);
    for (std::size_t idx = 0; idx < n_trials; ++idx) {
        TSDConfig cfg = base_cfg;
        TrainSettings st = base_settings;
        std::size_t rem = idx;
        for (auto it = grid.axes.rbegin(); it != grid.axes.rend(); ++it) {
            const auto& [name, values] = *it;
            apply_axis(cfg, st, name, values[rem % values.size()]);
            rem /= values.size();
        }
        trials[idx].index = idx;
        trials[idx].config = cfg;
        trials[idx].settings = st;
    }

    auto run_trial = [&data](GridTrial& t) {
        TrainResult r = train(t.config, t.settings, data);
        t.val_report = r.val_report;
        t.val_loss = t.settings.loss_kind == LossKind::kMse ? r.val_report.mse
                                                            : r.val_report.mae;
        t.param_count = parameter_count(t.config);
    };

    if (workers <= 1) {
        for (auto& t : trials) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex mu;
        for (std::size_t w = 0; w < std::min(workers, trials.size()); ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard<std::mutex> lock(mu);
                        if (next >= trials.size()) return;
                        i = next++;
                    }
                    run_trial(trials[i]);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::sort(trials.begin(), trials.end(), [](const GridTrial& a, const GridTrial& b) {
        if (a.val_loss != b.val_loss) return a.val_loss < b.val_loss;
        if (a.param_count != b.param_count) return a.param_count < b.param_count;
        return a.config.hash() < b.config.hash();
    });
    return trials;
}

std::vector<PoolingPair> ablate_pooling(const TSDConfig& cfg,
                                        const TrainSettings& settings,
                                        const std::vector<DataBundle>& tasks) {
    std::vector<PoolingPair> out;
    for (const auto& task : tasks) {
        TSDConfig c = cfg;
        c.horizon = task.horizon;
        c.n_channels = task.input_channels();
        c.n_targets = task.target_channels();
        c.lookback = task.lookback;
        PoolingPair pair;
        c.pooling = Pooling::kMax;
        pair.max_pool = train(c, settings, task).report;
        c.pooling = Pooling::kAverage;
        pair.average_pool = train(c, settings, task).report;
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<std::vector<BlockTrial>> ablate_blocks(
    const TSDConfig& cfg, const TrainSettings& settings,
    const std::vector<DataBundle>& tasks,
    const std::vector<std::size_t>& block_counts) {
    std::vector<std::vector<BlockTrial>> out;
    for (const auto& task : tasks) {
        std::vector<BlockTrial> row;
        for (std::size_t L : block_counts) {
            TSDConfig c = cfg;
            c.horizon = task.horizon;
            c.n_channels = task.input_channels();
            c.n_targets = task.target_channels();
            c.lookback = task.lookback;
            c.n_blocks = L;
            BlockTrial t;
            t.n_blocks = L;
            t.param_count = parameter_count(c);
            t.report = train(c, settings, task).report;
            row.push_back(std::move(t));
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace tsd
