// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tsd/data.hpp"
#include "tsd/model.hpp"

namespace tsd {

enum class LossKind { kMse, kMae };

LossKind loss_from_string(const std::string& s);
std::string to_string(LossKind k);

struct TrainSettings {
    LossKind loss_kind = LossKind::kMse;
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double scheduler_gamma = 0.95;
    std::size_t scheduler_step = 2;  // epochs per decay
    std::size_t epochs = 15;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
    std::size_t repeats = 1;

    void validate() const;
    std::string hash() const;
};

// Differentiable mean losses over all elements.
Tensor mse(const Tensor& pred, const Tensor& truth);
Tensor mae(const Tensor& pred, const Tensor& truth);

// base_lr * gamma^floor(epoch / step)
double lr_at(std::size_t epoch, double base_lr, double gamma, std::size_t step);

// AdamW with decoupled weight decay: the decay shrink is applied to the
// parameter directly and never enters the moment buffers.
class AdamW {
public:
    AdamW(std::vector<Parameter>& params, double weight_decay,
          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(double lr);
    std::size_t steps_taken() const { return t_; }

private:
    std::vector<Parameter>* params_;
    double weight_decay_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// Windows for all three partitions of one (dataset, horizon, mode) task,
// already standardized.
struct DataBundle {
    std::string dataset_name;
    SeriesMode mode = SeriesMode::kMultivariate;
    std::size_t lookback = 96;
    std::size_t horizon = 24;
    std::size_t season = 24;
    std::vector<WindowSample> train, val, test;

    std::size_t input_channels() const {
        return train.empty() ? 0 : train.front().inputs.extent(0);
    }
    std::size_t target_channels() const {
        return train.empty() ? 0 : train.front().targets.extent(0);
    }
};

DataBundle make_bundle(const TimeSeriesFrame& frame, const std::string& name,
                       SeriesMode mode, std::size_t lookback, std::size_t horizon,
                       std::size_t season);

struct MetricReport {
    std::string dataset;
    std::string mode;
    std::size_t horizon = 0;
    double mse = 0.0;
    double mae = 0.0;
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    std::string config_hash;
    double wall_seconds = 0.0;
};

// CSV: dataset,mode,horizon,mse,mae,repeats,seed,config_hash,wall_seconds
std::string reports_to_csv(const std::vector<MetricReport>& rows);
void write_reports_csv(const std::string& path, const std::vector<MetricReport>& rows);

struct EpochLogRow {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_mse = 0.0;
    double val_mae = 0.0;
};

struct TrainResult {
    std::unique_ptr<TSDModel> model;  // best-validation checkpoint, first repeat
    MetricReport report;              // test metrics averaged over repeats
    MetricReport val_report;          // validation metrics of the kept checkpoint
    std::vector<EpochLogRow> log;     // first repeat
    double untrained_val_loss = 0.0;
    double best_val_loss = 0.0;
};

TrainResult train(const TSDConfig& cfg, const TrainSettings& settings,
                  const DataBundle& data);

MetricReport evaluate(const TSDModel& model, const DataBundle& data,
                      Partition partition = Partition::kTest);

// Persistence repeats the last observed value; seasonal-naive copies the last
// full season (falls back to persistence when tau < season).
struct BaselineReports {
    MetricReport persistence;
    MetricReport seasonal_naive;
    bool seasonal_fell_back = false;
};

BaselineReports naive_baselines(const DataBundle& data);

struct GridSpec {
    // axis name -> candidate values, in the order axes are enumerated
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::size_t budget = 1;
};

// Bounded defaults drawn from the documented search ranges.
GridSpec default_grid();

struct GridTrial {
    std::size_t index = 0;
    TSDConfig config;
    TSDConfig base;  // unused fields retained for reproducibility
    TrainSettings settings;
    MetricReport val_report;
    double val_loss = 0.0;
    std::size_t param_count = 0;
};

// Cartesian enumeration truncated at budget, trained, ranked by validation
// loss of settings.loss_kind; ties break to fewer parameters, then config
// hash. Trials may run on `workers` threads; the ranking is deterministic.
std::vector<GridTrial> grid_search(const TSDConfig& base_cfg,
                                   const TrainSettings& base_settings,
                                   const GridSpec& grid, const DataBundle& data,
                                   std::size_t workers = 1);

struct PoolingPair {
    MetricReport max_pool;
    MetricReport average_pool;
};

std::vector<PoolingPair> ablate_pooling(const TSDConfig& cfg,
                                        const TrainSettings& settings,
                                        const std::vector<DataBundle>& tasks);

struct BlockTrial {
    std::size_t n_blocks = 0;
    std::size_t param_count = 0;
    MetricReport report;
};

std::vector<std::vector<BlockTrial>> ablate_blocks(
    const TSDConfig& cfg, const TrainSettings& settings,
    const std::vector<DataBundle>& tasks,
    const std::vector<std::size_t>& block_counts = {3, 4, 5});

}  // namespace tsd
