// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tsd/data.hpp"
#include "tsd/rng.hpp"

namespace fs = std::filesystem;
using tsd::Partition;
using tsd::SeriesMode;
using tsd::TimeSeriesFrame;

namespace {

std::string temp_file(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
}

// Hourly ETT-shaped frame with a deterministic signal.
TimeSeriesFrame synthetic_frame(std::size_t T, std::size_t C = 7,
                                std::uint64_t seed = 99) {
    TimeSeriesFrame f;
    f.channel_names.resize(C);
    for (std::size_t c = 0; c < C; ++c)
        f.channel_names[c] = "ch" + std::to_string(c);
    f.target_index = C - 1;
    tsd::Rng rng(seed);
    f.values.resize(T * C);
    f.timestamps.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        f.timestamps[t] = 1467331200 + static_cast<std::int64_t>(t) * 3600;
        for (std::size_t c = 0; c < C; ++c)
            f.at(t, c) = std::sin(0.26 * static_cast<double>(t) +
                                  static_cast<double>(c)) +
                         0.1 * rng.normal();
    }
    return f;
}

std::string synthetic_csv(std::size_t rows) {
    std::string out = "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n";
    char buf[160];
    for (std::size_t t = 0; t < rows; ++t) {
        std::snprintf(buf, sizeof(buf),
                      "2016-07-%02zu %02zu:00:00,%g,%g,%g,%g,%g,%g,%g\n",
                      1 + t / 24, t % 24, 1.0 + t, 2.0 + t, 3.0 + t, 4.0 + t,
                      5.0 + t, 6.0 + t, 0.5 * t);
        out += buf;
    }
    return out;
}

}  // namespace

TEST_CASE("split boundaries follow 7:1:2 integer arithmetic") {
    auto f100 = synthetic_frame(100);
    auto s = tsd::split(f100, 10, 5);
    CHECK(s.train_end == 70);
    CHECK(s.val_end == 80);
    CHECK(s.total == 100);
    CHECK(s.range(Partition::kTrain) == std::pair<std::size_t, std::size_t>{0, 70});
    CHECK(s.range(Partition::kVal) == std::pair<std::size_t, std::size_t>{70, 80});
    CHECK(s.range(Partition::kTest) == std::pair<std::size_t, std::size_t>{80, 100});

    auto big = synthetic_frame(17420, 2);
    auto sb = tsd::split(big, 96, 24);
    CHECK(sb.train_end == 12194);
    CHECK(sb.val_end == 13936);

    auto tiny = synthetic_frame(5);
    CHECK_THROWS_AS(tsd::split(tiny, 2, 1), tsd::ConfigError);
}

TEST_CASE("window enumeration matches the brute-force origin oracle") {
    tsd::Rng rng(31);
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t T = 60 + rng.next_below(200);
        const std::size_t tau = 2 + rng.next_below(30);
        const std::size_t H = 1 + rng.next_below(20);
        const std::size_t stride = 1 + rng.next_below(3);
        auto frame = synthetic_frame(T, 3, 7 + iter);
        tsd::SplitSpec sp;
        sp.total = T;
        sp.train_end = 7 * T / 10;
        sp.val_end = 8 * T / 10;
        for (Partition p : {Partition::kTrain, Partition::kVal, Partition::kTest}) {
            auto [p0, p1] = sp.range(p);
            const std::size_t want =
                oracle::count_origins(p0, p1, tau, H, stride);
            if (want == 0) {
                CHECK_THROWS_AS(tsd::make_windows(frame, sp, p, tau, H,
                                                  SeriesMode::kMultivariate,
                                                  stride),
                                tsd::ConfigError);
                continue;
            }
            auto ws = tsd::make_windows(frame, sp, p, tau, H,
                                        SeriesMode::kMultivariate, stride);
            CHECK(ws.size() == want);
            for (const auto& w : ws) {
                CHECK(w.origin_index >= p0);
                CHECK(w.origin_index < p1);
                CHECK(w.origin_index + H < p1 + 1);
                CHECK(w.origin_index + 1 >= tau);
            }
        }
    }
}

TEST_CASE("window contents end at the origin and targets follow it") {
    auto frame = synthetic_frame(100, 2);
    auto sp = tsd::split(frame, 8, 4);
    auto ws = tsd::make_windows(frame, sp, Partition::kVal, 8, 4,
                                SeriesMode::kMultivariate);
    REQUIRE(!ws.empty());
    const auto& w = ws.front();
    const std::size_t o = w.origin_index;
    CHECK(w.inputs.shape() == tsd::Shape{2, 8});
    CHECK(w.targets.shape() == tsd::Shape{2, 4});
    CHECK(w.inputs.at(0, 7) == frame.at(o, 0));
    CHECK(w.inputs.at(1, 0) == frame.at(o - 7, 1));
    CHECK(w.targets.at(0, 0) == frame.at(o + 1, 0));
    CHECK(w.targets.at(1, 3) == frame.at(o + 4, 1));
}

TEST_CASE("univariate windows select only the target channel") {
    auto frame = synthetic_frame(120, 5);
    frame.target_index = 2;
    auto sp = tsd::split(frame, 6, 3);
    auto ws = tsd::make_windows(frame, sp, Partition::kTrain, 6, 3,
                                SeriesMode::kUnivariate);
    REQUIRE(!ws.empty());
    for (const auto& w : ws) {
        CHECK(w.inputs.shape() == tsd::Shape{1, 6});
        CHECK(w.targets.shape() == tsd::Shape{1, 3});
        CHECK(w.inputs.at(0, 5) == frame.at(w.origin_index, 2));
        CHECK(w.targets.at(0, 0) == frame.at(w.origin_index + 1, 2));
    }
}

TEST_CASE("no validation or test target ever falls in the training range") {
    tsd::Rng rng(32);
    for (int iter = 0; iter < 30; ++iter) {
        const std::size_t T = 80 + rng.next_below(150);
        const std::size_t tau = 2 + rng.next_below(20);
        const std::size_t H = 1 + rng.next_below(15);
        auto frame = synthetic_frame(T, 2, 100 + iter);
        tsd::SplitSpec sp;
        sp.total = T;
        sp.train_end = 7 * T / 10;
        sp.val_end = 8 * T / 10;
        for (Partition p : {Partition::kVal, Partition::kTest}) {
            auto [p0, p1] = sp.range(p);
            std::vector<tsd::WindowSample> ws;
            try {
                ws = tsd::make_windows(frame, sp, p, tau, H,
                                       SeriesMode::kMultivariate);
            } catch (const tsd::ConfigError&) {
                continue;
            }
            for (const auto& w : ws)
                for (std::size_t j = 1; j <= H; ++j) {
                    CHECK(w.origin_index + j >= p0 + 1);
                    CHECK(w.origin_index + j < p1);
                }
        }
    }
}

TEST_CASE("standardizer fits on train rows only") {
    auto frame = synthetic_frame(200, 3);
    auto sp = tsd::split(frame, 4, 2);
    auto st = tsd::Standardizer::fit(frame, sp);
    auto z = st.transform(frame);

    for (std::size_t c = 0; c < 3; ++c) {
        double mu = 0;
        for (std::size_t t = 0; t < sp.train_end; ++t) mu += z.at(t, c);
        mu /= static_cast<double>(sp.train_end);
        double var = 0;
        for (std::size_t t = 0; t < sp.train_end; ++t) {
            const double d = z.at(t, c) - mu;
            var += d * d;
        }
        var /= static_cast<double>(sp.train_end);
        CHECK(std::abs(mu) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(st.inverse_value(st.transform_value(frame.at(5, c), c), c) ==
              doctest::Approx(frame.at(5, c)).epsilon(1e-12));
    }

    // leakage guard: statistics must not change when val/test rows change
    auto mutated = frame;
    for (std::size_t t = sp.train_end; t < frame.rows(); ++t)
        for (std::size_t c = 0; c < 3; ++c) mutated.at(t, c) += 1000.0;
    auto st2 = tsd::Standardizer::fit(mutated, sp);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(st2.means()[c] == st.means()[c]);
        CHECK(st2.stds()[c] == st.stds()[c]);
    }

    auto flat = synthetic_frame(100, 2);
    for (std::size_t t = 0; t < flat.rows(); ++t) flat.at(t, 0) = 3.0;
    CHECK_THROWS_WITH_AS(tsd::Standardizer::fit(flat, tsd::split(flat, 4, 2)),
                         doctest::Contains("constant"), tsd::ConfigError);
}

TEST_CASE("csv loader accepts the published layouts") {
    const auto path = temp_file("tsd_test_ok.csv");
    write_file(path, synthetic_csv(48));
    auto f = tsd::load_csv(path, tsd::DatasetKind::kEtth1);
    CHECK(f.rows() == 48);
    CHECK(f.channels() == 7);
    CHECK(f.channel_names[6] == "OT");
    CHECK(f.target_index == 6);
    CHECK(f.at(0, 0) == 1.0);
    CHECK(f.at(47, 6) == 0.5 * 47);
    CHECK(f.timestamps[1] - f.timestamps[0] == 3600);
    CHECK(f.gap_warnings.empty());
    fs::remove(path);
}

TEST_CASE("csv loader reports schema violations precisely") {
    const auto path = temp_file("tsd_test_bad.csv");

    write_file(path, "time,a,b,c,d,e,f,OT\n");
    CHECK_THROWS_WITH_AS(tsd::load_csv(path, tsd::DatasetKind::kEtth1),
                         doctest::Contains("date"), tsd::SchemaError);

    write_file(path, "date,a,b\n2016-07-01,1,2\n");
    CHECK_THROWS_AS(tsd::load_csv(path, tsd::DatasetKind::kEtth1),
                    tsd::SchemaError);

    write_file(path, "date,a,b,c,d,e,f,g\n2016-07-01,1,2,3,4,5,6,7\n");
    CHECK_THROWS_WITH_AS(tsd::load_csv(path, tsd::DatasetKind::kEtth1),
                         doctest::Contains("OT"), tsd::SchemaError);

    std::string bad_cell = synthetic_csv(3);
    bad_cell += "2016-07-01 03:00:00,1,2,3,4,5,oops,6\n";
    write_file(path, bad_cell);
    CHECK_THROWS_WITH_AS(tsd::load_csv(path, tsd::DatasetKind::kEtth1),
                         doctest::Contains("LULL"), tsd::SchemaError);

    std::string dup = synthetic_csv(2);
    dup += "2016-07-01 01:00:00,1,2,3,4,5,6,7\n";
    write_file(path, dup);
    CHECK_THROWS_WITH_AS(tsd::load_csv(path, tsd::DatasetKind::kEtth1),
                         doctest::Contains("increasing"), tsd::SchemaError);

    CHECK_THROWS_AS(tsd::load_csv(temp_file("does_not_exist.csv"),
                                  tsd::DatasetKind::kEtth1),
                    tsd::SchemaError);
    fs::remove(path);
}

TEST_CASE("csv loader flags gaps without repairing them") {
    const auto path = temp_file("tsd_test_gap.csv");
    std::string csv = "date,HUFL,HULL,MUFL,MULL,LUFL,LULL,OT\n";
    csv += "2016-07-01 00:00:00,1,1,1,1,1,1,1\n";
    csv += "2016-07-01 01:00:00,2,2,2,2,2,2,2\n";
    csv += "2016-07-01 03:00:00,3,3,3,3,3,3,3\n";  // two-hour jump
    write_file(path, csv);
    auto f = tsd::load_csv(path, tsd::DatasetKind::kEtth1);
    CHECK(f.rows() == 3);
    REQUIRE(f.gap_warnings.size() == 1);
    CHECK(f.gap_warnings[0].find("7200") != std::string::npos);
    fs::remove(path);
}

TEST_CASE("dataset kinds, seasons, date-only formats") {
    CHECK(tsd::season_of(tsd::DatasetKind::kEtth1) == 24);
    CHECK(tsd::season_of(tsd::DatasetKind::kEtth2) == 24);
    CHECK(tsd::season_of(tsd::DatasetKind::kEttm1) == 96);
    CHECK(tsd::season_of(tsd::DatasetKind::kIli) == 52);
    CHECK(tsd::season_of(tsd::DatasetKind::kExchange) == 7);
    CHECK_THROWS_AS(tsd::dataset_kind_from_string("etth3"), tsd::ConfigError);

    const auto path = temp_file("tsd_test_daily.csv");
    std::string csv = "date,c1,c2,c3,c4,c5,c6,c7,c8\n";
    csv += "1990/1/1,1,2,3,4,5,6,7,8\n";
    csv += "1990/1/2,2,3,4,5,6,7,8,9\n";
    write_file(path, csv);
    auto f = tsd::load_csv(path, tsd::DatasetKind::kExchange);
    CHECK(f.channels() == 8);
    CHECK(f.target_index == 7);
    CHECK(f.timestamps[1] - f.timestamps[0] == 86400);
    fs::remove(path);
}

TEST_CASE("frame cache round-trips and is byte-deterministic") {
    auto frame = synthetic_frame(64, 4);
    frame.gap_warnings.push_back("synthetic warning");
    const auto p1 = temp_file("tsd_cache_a.tsdf");
    const auto p2 = temp_file("tsd_cache_b.tsdf");
    tsd::save_frame_cache(frame, p1);
    tsd::save_frame_cache(frame, p2);
    CHECK(tsd::file_checksum(p1) == tsd::file_checksum(p2));

    auto back = tsd::load_frame_cache(p1);
    CHECK(back.rows() == frame.rows());
    CHECK(back.channel_names == frame.channel_names);
    CHECK(back.target_index == frame.target_index);
    CHECK(back.timestamps == frame.timestamps);
    CHECK(back.values == frame.values);
    CHECK(back.gap_warnings == frame.gap_warnings);

    // corrupt magic
    {
        std::fstream f(p2, std::ios::in | std::ios::out | std::ios::binary);
        f.write("ZZZZ", 4);
    }
    CHECK_THROWS_WITH_AS(tsd::load_frame_cache(p2), doctest::Contains("magic"),
                         tsd::SchemaError);
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("file checksum is content-sensitive") {
    const auto p = temp_file("tsd_checksum.txt");
    write_file(p, "alpha");
    const auto a = tsd::file_checksum(p);
    CHECK(a.size() == 16);
    write_file(p, "alphb");
    CHECK(tsd::file_checksum(p) != a);
    fs::remove(p);
}
