// SPDX-License-Identifier: Apache-2.0
#include "tsd/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tsd/errors.hpp"

namespace tsd {

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "etth1") return DatasetKind::kEtth1;
    if (s == "etth2") return DatasetKind::kEtth2;
    if (s == "ettm1") return DatasetKind::kEttm1;
    if (s == "ili") return DatasetKind::kIli;
    if (s == "exchange") return DatasetKind::kExchange;
    throw ConfigError("unknown dataset kind '" + s +
                      "' (expected etth1|etth2|ettm1|ili|exchange)");
}

std::string to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::kEtth1: return "etth1";
        case DatasetKind::kEtth2: return "etth2";
        case DatasetKind::kEttm1: return "ettm1";
        case DatasetKind::kIli: return "ili";
        case DatasetKind::kExchange: return "exchange";
    }
    return "?";
}

std::size_t season_of(DatasetKind k) {
    switch (k) {
        case DatasetKind::kEtth1:
        case DatasetKind::kEtth2: return 24;   // hourly, daily cycle
        case DatasetKind::kEttm1: return 96;   // 15-minute, daily cycle
        case DatasetKind::kIli: return 52;     // weekly, yearly cycle
        case DatasetKind::kExchange: return 7; // daily, weekly cycle
    }
    return 1;
}

SeriesMode mode_from_string(const std::string& s) {
    if (s == "multi" || s == "multivariate") return SeriesMode::kMultivariate;
    if (s == "uni" || s == "univariate") return SeriesMode::kUnivariate;
    throw ConfigError("unknown mode '" + s + "' (expected multi|uni)");
}

std::string to_string(SeriesMode m) {
    return m == SeriesMode::kMultivariate ? "multivariate" : "univariate";
}

std::pair<std::size_t, std::size_t> SplitSpec::range(Partition p) const {
    switch (p) {
        case Partition::kTrain: return {0, train_end};
        case Partition::kVal: return {train_end, val_end};
        case Partition::kTest: return {val_end, total};
    }
    return {0, 0};
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace {

// Howard Hinnant's civil-date algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
           719468;
}

std::int64_t parse_timestamp(const std::string& s, std::size_t row) {
    int y, mo, d, h, mi, se;
    if (std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &se) == 6)
        return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &mo, &d) == 3 &&
        s.find(':') == std::string::npos)
        return days_from_civil(y, mo, d) * 86400;
    if (std::sscanf(s.c_str(), "%d/%d/%d", &y, &mo, &d) == 3)
        return days_from_civil(y, mo, d) * 86400;
    throw SchemaError("row " + std::to_string(row) + ": unparsable date '" + s + "'");
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n'))
        s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

}  // namespace

TimeSeriesFrame load_csv(const std::string& path, DatasetKind kind) {
    std::ifstream is(path);
    if (!is) throw SchemaError("cannot open data file: " + path);

    std::string line;
    if (!std::getline(is, line)) throw SchemaError("empty file: " + path);
    auto header = split_line(line);
    for (auto& h : header) h = trim(h);
    if (header.empty() || header[0] != "date")
        throw SchemaError("first column must be named 'date', found '" +
                          (header.empty() ? "" : header[0]) + "'");

    const std::size_t expected_cols =
        kind == DatasetKind::kExchange ? 8 : 7;
    const std::size_t C = header.size() - 1;
    if (C != expected_cols)
        throw SchemaError(to_string(kind) + " expects " +
                          std::to_string(expected_cols) + " value columns, found " +
                          std::to_string(C));

    TimeSeriesFrame frame;
    frame.channel_names.assign(header.begin() + 1, header.end());
    if (kind == DatasetKind::kEtth1 || kind == DatasetKind::kEtth2 ||
        kind == DatasetKind::kEttm1) {
        auto it = std::find(frame.channel_names.begin(), frame.channel_names.end(),
                            "OT");
        if (it == frame.channel_names.end())
            throw SchemaError("ETT data requires an 'OT' target column");
        frame.target_index =
            static_cast<std::size_t>(it - frame.channel_names.begin());
    } else {
        frame.target_index = C - 1;
    }

    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto cells = split_line(trimmed);
        if (cells.size() != C + 1)
            throw SchemaError("row " + std::to_string(row) + ": expected " +
                              std::to_string(C + 1) + " cells, found " +
                              std::to_string(cells.size()));
        frame.timestamps.push_back(parse_timestamp(trim(cells[0]), row));
        for (std::size_t c = 0; c < C; ++c) {
            const std::string cell = trim(cells[c + 1]);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw SchemaError("row " + std::to_string(row) + ", column '" +
                                  frame.channel_names[c] + "': unparsable cell '" +
                                  cell + "'");
            frame.values.push_back(v);
        }
    }
    if (frame.rows() == 0) throw SchemaError("no data rows in " + path);

    for (std::size_t t = 1; t < frame.rows(); ++t)
        if (frame.timestamps[t] <= frame.timestamps[t - 1])
            throw SchemaError("timestamps not strictly increasing at row " +
                              std::to_string(t + 2));
    if (frame.rows() > 2) {
        const std::int64_t step = frame.timestamps[1] - frame.timestamps[0];
        for (std::size_t t = 1; t < frame.rows(); ++t) {
            const std::int64_t d = frame.timestamps[t] - frame.timestamps[t - 1];
            if (d != step)
                frame.gap_warnings.push_back(
                    "gap of " + std::to_string(d) + "s (expected " +
                    std::to_string(step) + "s) before row " + std::to_string(t + 2));
        }
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Split / standardize / windows
// ---------------------------------------------------------------------------

namespace {

// Admissible origin range for (partition, tau, H): the input window ends at
// the origin inside the partition, the target window must fit inside it.
// Returns {lo, hi} inclusive, or lo > hi when empty.
std::pair<std::size_t, std::size_t> origin_range(std::size_t p0, std::size_t p1,
                                                 std::size_t tau, std::size_t H) {
    const std::size_t lo = std::max(tau - 1, p0);
    if (p1 < H + 1) return {1, 0};
    const std::size_t hi = p1 - 1 - H;
    return {lo, hi};
}

}  // namespace

SplitSpec split(const TimeSeriesFrame& frame, std::size_t lookback,
                std::size_t horizon) {
    const std::size_t T = frame.rows();
    SplitSpec s;
    s.total = T;
    s.train_end = 7 * T / 10;
    s.val_end = 8 * T / 10;
    if (!(0 < s.train_end && s.train_end < s.val_end && s.val_end < T))
        throw ConfigError("series too short to split 7:1:2, T=" + std::to_string(T));
    for (Partition p : {Partition::kTrain, Partition::kVal, Partition::kTest}) {
        auto [p0, p1] = s.range(p);
        auto [lo, hi] = origin_range(p0, p1, lookback, horizon);
        if (lo > hi)
            throw ConfigError("partition [" + std::to_string(p0) + "," +
                              std::to_string(p1) + ") admits no window with tau=" +
                              std::to_string(lookback) + " H=" +
                              std::to_string(horizon));
    }
    return s;
}

Standardizer Standardizer::fit(const TimeSeriesFrame& frame, const SplitSpec& split) {
    if (split.train_end == 0) throw ConfigError("empty training partition");
    const std::size_t C = frame.channels(), n = split.train_end;
    Standardizer st;
    st.mean_.assign(C, 0.0);
    st.std_.assign(C, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < C; ++c) st.mean_[c] += frame.at(t, c);
    for (auto& m : st.mean_) m /= static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < C; ++c) {
            const double d = frame.at(t, c) - st.mean_[c];
            st.std_[c] += d * d;
        }
    for (std::size_t c = 0; c < C; ++c) {
        st.std_[c] = std::sqrt(st.std_[c] / static_cast<double>(n));
        if (st.std_[c] <= 0.0)
            throw ConfigError("channel '" + frame.channel_names[c] +
                              "' is constant on the training partition");
    }
    return st;
}

TimeSeriesFrame Standardizer::transform(const TimeSeriesFrame& frame) const {
    if (frame.channels() != mean_.size())
        throw DimensionError("standardizer fitted on " +
                             std::to_string(mean_.size()) + " channels, frame has " +
                             std::to_string(frame.channels()));
    TimeSeriesFrame out = frame;
    const std::size_t C = frame.channels();
    for (std::size_t t = 0; t < frame.rows(); ++t)
        for (std::size_t c = 0; c < C; ++c)
            out.at(t, c) = (frame.at(t, c) - mean_[c]) / std_[c];
    return out;
}

double Standardizer::transform_value(double v, std::size_t channel) const {
    return (v - mean_.at(channel)) / std_.at(channel);
}

double Standardizer::inverse_value(double v, std::size_t channel) const {
    return v * std_.at(channel) + mean_.at(channel);
}

std::vector<WindowSample> make_windows(const TimeSeriesFrame& frame,
                                       const SplitSpec& split, Partition partition,
                                       std::size_t lookback, std::size_t horizon,
                                       SeriesMode mode, std::size_t stride) {
    if (stride < 1) throw ParameterError("window stride must be >= 1");
    auto [p0, p1] = split.range(partition);
    auto [lo, hi] = origin_range(p0, p1, lookback, horizon);
    if (lo > hi)
        throw ConfigError(
            "no admissible window origin: partition [" + std::to_string(p0) + "," +
            std::to_string(p1) + "), need origin in [max(tau-1," +
            std::to_string(p0) + "), " + std::to_string(p1) + "-1-H]");

    const bool uni = mode == SeriesMode::kUnivariate;
    const std::size_t C = frame.channels();
    const std::size_t cin = uni ? 1 : C;
    const std::size_t ctgt = uni ? 1 : C;

    std::vector<WindowSample> out;
    for (std::size_t o = lo; o <= hi; o += stride) {
        WindowSample s;
        s.origin_index = o;
        s.inputs = Tensor({cin, lookback});
        s.targets = Tensor({ctgt, horizon});
        for (std::size_t j = 0; j < lookback; ++j) {
            const std::size_t t = o + 1 - lookback + j;
            if (uni) s.inputs.at(0, j) = frame.at(t, frame.target_index);
            else
                for (std::size_t c = 0; c < C; ++c) s.inputs.at(c, j) = frame.at(t, c);
        }
        for (std::size_t j = 0; j < horizon; ++j) {
            const std::size_t t = o + 1 + j;
            if (uni) s.targets.at(0, j) = frame.at(t, frame.target_index);
            else
                for (std::size_t c = 0; c < C; ++c) s.targets.at(c, j) = frame.at(t, c);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frame cache and checksums
// ---------------------------------------------------------------------------

namespace {

constexpr char kFrameMagic[4] = {'T', 'S', 'D', 'F'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw SchemaError("frame cache truncated");
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const auto n = get<std::uint32_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw SchemaError("frame cache truncated");
    return s;
}

}  // namespace

void save_frame_cache(const TimeSeriesFrame& frame, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SchemaError("cannot open cache for writing: " + path);
    os.write(kFrameMagic, 4);
    put(os, std::uint32_t{1});
    put(os, static_cast<std::uint64_t>(frame.rows()));
    put(os, static_cast<std::uint64_t>(frame.channels()));
    put(os, static_cast<std::uint64_t>(frame.target_index));
    for (const auto& n : frame.channel_names) put_string(os, n);
    os.write(reinterpret_cast<const char*>(frame.timestamps.data()),
             static_cast<std::streamsize>(frame.timestamps.size() * 8));
    os.write(reinterpret_cast<const char*>(frame.values.data()),
             static_cast<std::streamsize>(frame.values.size() * 8));
    put(os, static_cast<std::uint32_t>(frame.gap_warnings.size()));
    for (const auto& w : frame.gap_warnings) put_string(os, w);
    if (!os) throw SchemaError("failed writing cache: " + path);
}

TimeSeriesFrame load_frame_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open cache: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kFrameMagic, 4) != 0)
        throw SchemaError("bad frame cache magic in " + path);
    if (get<std::uint32_t>(is) != 1)
        throw SchemaError("unsupported frame cache version");
    TimeSeriesFrame f;
    const auto T = get<std::uint64_t>(is);
    const auto C = get<std::uint64_t>(is);
    f.target_index = get<std::uint64_t>(is);
    f.channel_names.resize(C);
    for (auto& n : f.channel_names) n = get_string(is);
    f.timestamps.resize(T);
    is.read(reinterpret_cast<char*>(f.timestamps.data()),
            static_cast<std::streamsize>(T * 8));
    f.values.resize(T * C);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(T * C * 8));
    const auto nw = get<std::uint32_t>(is);
    f.gap_warnings.resize(nw);
    for (auto& w : f.gap_warnings) w = get_string(is);
    if (!is) throw SchemaError("frame cache truncated: " + path);
    return f;
}

std::string file_checksum(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SchemaError("cannot open for checksum: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!is) break;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

}  // namespace tsd
