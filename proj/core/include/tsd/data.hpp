// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsd/tensor.hpp"

namespace tsd {

enum class DatasetKind { kEtth1, kEtth2, kEttm1, kIli, kExchange };

DatasetKind dataset_kind_from_string(const std::string& s);
std::string to_string(DatasetKind k);

// Seasonal period for the naive baseline, in rows of the native granularity.
std::size_t season_of(DatasetKind k);

// Timestamped multivariate series. Values are row-major [T, C].
struct TimeSeriesFrame {
    std::vector<std::int64_t> timestamps;  // epoch seconds, strictly increasing
    std::vector<double> values;            // T*C
    std::vector<std::string> channel_names;
    std::size_t target_index = 0;
    std::vector<std::string> gap_warnings;  // uneven spacing, reported not fixed

    std::size_t rows() const { return timestamps.size(); }
    std::size_t channels() const { return channel_names.size(); }
    double at(std::size_t t, std::size_t c) const { return values[t * channels() + c]; }
    double& at(std::size_t t, std::size_t c) { return values[t * channels() + c]; }
};

enum class Partition { kTrain, kVal, kTest };
enum class SeriesMode { kMultivariate, kUnivariate };

SeriesMode mode_from_string(const std::string& s);
std::string to_string(SeriesMode m);

// 7:1:2 boundaries: train covers [0, train_end), validation [train_end,
// val_end), test [val_end, T).
struct SplitSpec {
    std::size_t train_end = 0;
    std::size_t val_end = 0;
    std::size_t total = 0;

    std::pair<std::size_t, std::size_t> range(Partition p) const;
};

struct WindowSample {
    Tensor inputs;        // [C_in, tau], ends at origin_index
    Tensor targets;       // [n_targets, H], covers (origin_index, origin_index+H]
    std::size_t origin_index = 0;
};

// Per-channel z-score fitted on the training partition only.
class Standardizer {
public:
    static Standardizer fit(const TimeSeriesFrame& frame, const SplitSpec& split);

    TimeSeriesFrame transform(const TimeSeriesFrame& frame) const;
    double transform_value(double v, std::size_t channel) const;
    double inverse_value(double v, std::size_t channel) const;

    const std::vector<double>& means() const { return mean_; }
    const std::vector<double>& stds() const { return std_; }

private:
    std::vector<double> mean_, std_;
};

// CSV ingestion. First column must be "date"; accepted timestamp formats are
// "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DD" and "YYYY/M/D". ETT kinds expect 7
// value columns with target "OT"; ILI 7 with target last; Exchange 8 with
// target last.
TimeSeriesFrame load_csv(const std::string& path, DatasetKind kind);

SplitSpec split(const TimeSeriesFrame& frame, std::size_t lookback,
                std::size_t horizon);

// Sliding-window cutter. Window origins stay inside the partition; the
// lookback context may reach back into the preceding partition, targets
// never may.
std::vector<WindowSample> make_windows(const TimeSeriesFrame& frame,
                                       const SplitSpec& split, Partition partition,
                                       std::size_t lookback, std::size_t horizon,
                                       SeriesMode mode,
                                       std::size_t stride = 1);

// Columnar binary cache of a frame; byte-deterministic for identical frames.
void save_frame_cache(const TimeSeriesFrame& frame, const std::string& path);
TimeSeriesFrame load_frame_cache(const std::string& path);

// FNV-1a 64 over a file's bytes, hex-encoded; used for manifest checksums.
std::string file_checksum(const std::string& path);

}  // namespace tsd
