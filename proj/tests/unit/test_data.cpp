// Copyright 2026 The EPF Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "epf/csv.hpp"
#include "epf/data.hpp"
#include "epf/error.hpp"
#include "epf/rng.hpp"
#include "support.hpp"

using namespace epf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("epf_test_data_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CsvSources only_prices(const fs::path& path) {
  CsvSources s;
  s.prices = path;
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Hourly rows for consecutive days: price = 10 d + h + 0.25, load = 100 + h.
std::string price_csv(int days, const std::string& start = "2024-03-04") {
  std::string s = "date,hour_ending,price,load\n";
  const Date d0 = parse_date(start);
  for (int d = 0; d < days; ++d) {
    for (int h = 1; h <= 24; ++h) {
      s += format_date(d0 + std::chrono::days{d}) + "," + std::to_string(h) + "," +
           format_double(10.0 * d + h + 0.25) + "," + format_double(100.0 + h) + "\n";
    }
  }
  return s;
}

// In-memory table: `days` complete days, one feature.
RawTable fixture(std::size_t days, std::uint64_t seed) {
  SeededRng rng(seed);
  RawTable t;
  t.feature_names = {"load"};
  const Date d0 = parse_date("2024-05-01");
  for (std::size_t d = 0; d < days; ++d) {
    for (int h = 1; h <= 24; ++h) {
      t.records.push_back({d0 + std::chrono::days{d}, h, rng.uniform(-50.0, 150.0), {rng.normal(0.0, 3.0)}});
    }
  }
  return t;
}

std::size_t index_of(const RawTable& t, Date d, int h) {
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    if (t.records[i].date == d && t.records[i].hour_ending == h) return i;
  }
  FAIL("record not found");
  return 0;
}

void check_complete_days(const RawTable& t) {
  std::map<Date, std::set<int>> hours;
  for (const auto& r : t.records) {
    CHECK(hours[r.date].insert(r.hour_ending).second);
    CHECK(r.price.has_value());
    for (const auto& f : r.features) CHECK(f.has_value());
  }
  for (const auto& [d, hs] : hours) {
    CHECK(hs.size() == 24);
    CHECK(*hs.begin() == 1);
    CHECK(*hs.rbegin() == 24);
  }
}

}  // namespace

TEST_CASE("ingest_csv: well-formed two-day file") {
  const fs::path dir = scratch_dir("ingest");
  write_text(dir / "prices.csv", price_csv(2));
  const RawTable t = ingest_csv(only_prices(dir / "prices.csv"));
  CHECK(t.records.size() == 48);
  CHECK(t.feature_names == std::vector<std::string>{"load"});
  CHECK(t.records[0].hour_ending == 1);
  CHECK(*t.records[47].price == 10.0 + 24.0 + 0.25);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    const auto& a = t.records[i - 1];
    const auto& b = t.records[i];
    CHECK((a.date < b.date || (a.date == b.date && a.hour_ending < b.hour_ending)));
  }
}

TEST_CASE("ingest_csv: errors") {
  const fs::path dir = scratch_dir("errors");

  write_text(dir / "bad_hour.csv", "date,hour_ending,price\n2024-01-01,1,3\n2024-01-01,26,4\n");
  try {
    ingest_csv(only_prices(dir / "bad_hour.csv"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad_hour.csv:3") != std::string::npos);
  }

  write_text(dir / "garbage.csv", "date,hour_ending,price\n2024-01-01,1,abc\n");
  CHECK_THROWS_AS(ingest_csv(only_prices(dir / "garbage.csv")), ParseError);

  write_text(dir / "dup.csv", "date,hour_ending,price\n2024-01-01,1,3\n2024-01-01,1,4\n");
  CHECK_THROWS_AS(ingest_csv(only_prices(dir / "dup.csv")), DataError);

  try {
    ingest_csv(only_prices(dir / "nope.csv"));
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
  }
}

TEST_CASE("ingest_csv: joins weather and fuel mix on date and hour") {
  const fs::path dir = scratch_dir("join");
  write_text(dir / "prices.csv", price_csv(2));
  write_text(dir / "weather.csv", "date,temp_mean\n2024-03-04,11.5\n2024-03-05,12.5\n");
  std::string mix = "date,hour_ending,solar\n";
  for (int d = 0; d < 2; ++d) {
    for (int h = 1; h <= 24; ++h) {
      if (d == 1 && h == 7) continue;  // one missing hour
      mix += std::string(d == 0 ? "2024-03-04" : "2024-03-05") + "," + std::to_string(h) + "," +
             std::to_string(h) + "\n";
    }
  }
  write_text(dir / "mix.csv", mix);
  const RawTable t = ingest_csv(CsvSources{dir / "prices.csv", dir / "weather.csv", dir / "mix.csv"});
  CHECK(t.feature_names == std::vector<std::string>{"load", "temp_mean", "solar"});
  CHECK(t.records.size() == 48);
  const Date d1 = parse_date("2024-03-05");
  const RawRecord& gap = t.records[index_of(t, d1, 7)];
  CHECK(!gap.features[2].has_value());
  CHECK(*gap.features[1] == 12.5);
  CHECK(*t.records[index_of(t, d1, 8)].features[2] == 8.0);

  // The gap is filled later as the mean of its neighbours.
  const RawTable clean = clean_hours(t);
  CHECK(*clean.records[index_of(clean, d1, 7)].features[2] == 7.0);

  // Column selection keeps only the requested features.
  CsvSchema schema;
  schema.feature_columns = {"solar"};
  const RawTable only = ingest_csv(CsvSources{dir / "prices.csv", dir / "weather.csv", dir / "mix.csv"}, schema);
  CHECK(only.feature_names == std::vector<std::string>{"solar"});
}

TEST_CASE("clean_hours: hour 25 removed and complete days untouched") {
  RawTable t = fixture(4, 1);
  const RawTable reference = clean_hours(t);
  CHECK(reference.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(*reference.records[i].price) ==
          std::bit_cast<std::uint64_t>(*t.records[i].price));
    CHECK(reference.records[i].features == t.records[i].features);
  }

  t.records.push_back({t.records[30].date, 25, 99.0, {1.0}});
  CleanReport rep;
  const RawTable clean = clean_hours(t, &rep);
  CHECK(rep.hour25_rows_removed == 1);
  CHECK(clean.records.size() == 96);
  for (const auto& r : clean.records) CHECK(r.hour_ending != 25);
  check_complete_days(clean);
}

TEST_CASE("clean_hours: a single missing hour is the exact mean of its neighbours") {
  SeededRng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    RawTable t = fixture(3, 100 + std::uint64_t(trial));
    // Any hour of the middle day, including hours 1 and 24 that borrow from adjacent days.
    const int h = 1 + int(rng.below(24));
    const Date mid = t.records[24].date;
    const std::size_t at = index_of(t, mid, h);
    const std::size_t before = at - 1, after = at + 1;
    const double a = *t.records[before].price, b = *t.records[after].price;
    const double fa = *t.records[before].features[0], fb = *t.records[after].features[0];
    const bool drop_row = trial % 2 == 0;
    if (drop_row) {
      t.records.erase(t.records.begin() + std::ptrdiff_t(at));
    } else {
      t.records[at].price.reset();
      t.records[at].features[0].reset();
    }
    const RawTable clean = clean_hours(t);
    REQUIRE(clean.records.size() == 72);
    const RawRecord& r = clean.records[index_of(clean, mid, h)];
    CHECK(std::bit_cast<std::uint64_t>(*r.price) == std::bit_cast<std::uint64_t>((a + b) / 2.0));
    CHECK(std::bit_cast<std::uint64_t>(*r.features[0]) == std::bit_cast<std::uint64_t>((fa + fb) / 2.0));
    check_complete_days(clean);
  }
}

TEST_CASE("clean_hours: hour 24 filled from the next day's hour 1") {
  RawTable t = fixture(2, 3);
  const Date d0 = t.records[0].date;
  t.records[index_of(t, d0, 23)].price = 40.0;
  t.records[index_of(t, d0 + std::chrono::days{1}, 1)].price = 50.0;
  t.records[index_of(t, d0, 24)].price.reset();
  const RawTable clean = clean_hours(t);
  CHECK(*clean.records[index_of(clean, d0, 24)].price == 45.0);
}

TEST_CASE("clean_hours: two-hour gaps interpolate linearly, longer gaps drop the day") {
  RawTable t = fixture(3, 4);
  const Date mid = t.records[24].date;
  const std::size_t a = index_of(t, mid, 9);
  t.records[a].price = 10.0;
  t.records[a + 3].price = 16.0;
  t.records[a + 1].price.reset();
  t.records[a + 2].price.reset();
  CleanReport rep;
  RawTable clean = clean_hours(t, &rep);
  CHECK(rep.values_filled == 2);
  CHECK(*clean.records[index_of(clean, mid, 10)].price == 12.0);
  CHECK(*clean.records[index_of(clean, mid, 11)].price == 14.0);

  t.records[a + 3].price.reset();
  rep = {};
  clean = clean_hours(t, &rep);
  REQUIRE(rep.dropped_days.size() == 1);
  CHECK(rep.dropped_days[0].first == mid);
  CHECK(clean.records.size() == 48);
  check_complete_days(clean);
}

TEST_CASE("clean_hours: missing hours at the dataset boundary drop the day") {
  RawTable t = fixture(3, 5);
  t.records.front().price.reset();
  t.records.back().features[0].reset();
  CleanReport rep;
  const RawTable clean = clean_hours(t, &rep);
  CHECK(rep.dropped_days.size() == 2);
  CHECK(clean.records.size() == 24);
  check_complete_days(clean);
}

TEST_CASE("clean_hours: random damage always leaves complete days") {
  SeededRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    RawTable t = fixture(6, 200 + std::uint64_t(trial));
    for (int k = 0; k < 8; ++k) {
      const std::size_t i = rng.below(t.records.size());
      if (rng.uniform() < 0.5) {
        t.records[i].price.reset();
      } else {
        t.records[i].features[0].reset();
      }
    }
    for (int k = 0; k < 3; ++k) {
      const std::size_t i = rng.below(t.records.size());
      t.records.push_back({t.records[i].date, 25, 1.0, {1.0}});
    }
    check_complete_days(clean_hours(t));
  }
}

TEST_CASE("engineer_temporal") {
  const Tensor2 mon = engineer_temporal(parse_date("2024-01-01"));  // Monday
  CHECK(mon.rows() == kTemporalFeatureCount);
  CHECK(mon(0, 0) == 0.0);
  CHECK(mon(1, 0) == 1.0);
  CHECK(std::abs(mon(0, 6) - 1.0) < 1e-12);
  CHECK(std::abs(mon(1, 6)) < 1e-12);
  CHECK(mon(6, 0) == 0.0);
  CHECK(engineer_temporal(parse_date("2024-01-06"))(6, 3) == 1.0);  // Saturday
  CHECK(engineer_temporal(parse_date("2024-01-07"))(6, 3) == 1.0);  // Sunday
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    CHECK(std::abs(mon(0, t) - std::sin(2.0 * std::numbers::pi * double(t) / 24.0)) < 1e-15);
  }
}

TEST_CASE("build_feature_days: layout and price lag") {
  const RawTable t = clean_hours(fixture(4, 7));
  const DayTable lagged = build_feature_days(t);
  REQUIRE(lagged.days.size() == 3);  // first day has no lag
  const auto& names = *lagged.days[0].names;
  CHECK(names.size() == 1 + 1 + kTemporalFeatureCount);
  CHECK(names[0] == "load");
  CHECK(names[1] == "price_lag1");
  for (std::size_t h = 0; h < kHoursPerDay; ++h) {
    CHECK(lagged.days[1].x(1, h) == lagged.prices[0].y[h]);
    CHECK(lagged.days[0].x(0, h) == *t.records[24 + h].features[0]);
  }
  // No feature row carries the same day's realized price.
  for (std::size_t d = 0; d < lagged.days.size(); ++d) {
    for (std::size_t r = 0; r < names.size(); ++r) {
      bool same = true;
      for (std::size_t h = 0; h < kHoursPerDay; ++h) same &= lagged.days[d].x(r, h) == lagged.prices[d].y[h];
      CHECK(!same);
    }
  }

  FeatureOptions plain;
  plain.include_price_lag = false;
  plain.include_temporal = false;
  const DayTable bare = build_feature_days(t, plain);
  CHECK(bare.days.size() == 4);
  CHECK(bare.days[0].feature_count() == 1);

  plain.exclude = {"load"};
  CHECK_THROWS_AS(build_feature_days(t, plain), DataError);
}

TEST_CASE("normalization") {
  SeededRng rng(8);
  auto days = test::random_window(rng, 20, 4, -30.0, 70.0);
  for (auto& d : days) {
    for (std::size_t h = 0; h < kHoursPerDay; ++h) d.x(2, h) = 3.5;  // constant row
  }
  std::vector<PriceDay> prices;
  for (const auto& d : days) prices.push_back({d.date, test::random_prices(rng, 10.0, 90.0)});

  const std::span<const FeatureDay> train(days.data(), 14);
  const std::span<const PriceDay> train_prices(prices.data(), 14);
  const NormStats stats = fit_normalize(train, train_prices);
  CHECK(stats.feature_names == std::vector<std::string>{"f0", "f1", "f3"});
  CHECK(stats.dropped == std::vector<std::string>{"f2"});

  const auto norm = apply_normalize(days, stats);
  CHECK(norm[0].feature_count() == 3);
  // Training statistics: training rows are centred, test rows are not re-centred.
  for (std::size_t r = 0; r < 3; ++r) {
    double train_sum = 0.0, train_sq = 0.0;
    for (std::size_t d = 0; d < 14; ++d) {
      for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        train_sum += norm[d].x(r, h);
        train_sq += norm[d].x(r, h) * norm[d].x(r, h);
      }
    }
    CHECK(std::abs(train_sum / (14.0 * 24.0)) < 1e-12);
    CHECK(std::abs(train_sq / (14.0 * 24.0) - 1.0) < 1e-12);
  }
  const std::size_t src = 3;  // f3 is the third retained row
  CHECK(norm[17].x(2, 5) == (days[17].x(src, 5) - stats.mean[2]) / stats.sd[2]);

  const auto np = normalize_prices(prices, stats);
  const auto back = denormalize_prices(np, stats);
  for (std::size_t d = 0; d < prices.size(); ++d) {
    CHECK(np[d].normalized);
    CHECK(!back[d].normalized);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      CHECK(std::abs(back[d].y[h] - prices[d].y[h]) <= 1e-10 * std::abs(prices[d].y[h]));
    }
  }
  CHECK_THROWS_AS(normalize_prices(np, stats), DataError);
  CHECK_THROWS_AS(denormalize_prices(prices, stats), DataError);
}

TEST_CASE("build_windows: counts and contents") {
  SeededRng rng(9);
  const auto days = test::random_window(rng, 10, 2);
  std::vector<PriceDay> prices;
  for (const auto& d : days) prices.push_back({d.date, test::random_prices(rng)});

  // Predictable days within one set = total - (N + 1) + 1.
  for (std::size_t n : {0u, 1u, 3u, 7u, 9u}) {
    const auto s = build_windows(days, prices, {n, false});
    CHECK(s.size() == days.size() - (n + 1) + 1);
  }
  CHECK(build_windows(days, prices, {10, false}).empty());

  const auto s7 = build_windows(days, prices, {7, false});
  for (std::size_t i = 0; i < s7.size(); ++i) {
    const auto& s = s7[i];
    CHECK(s.window.size() == 8);
    CHECK(s.window.back().date == s.target_date());
    for (std::size_t k = 1; k < s.window.size(); ++k) {
      CHECK(s.window[k].date == s.window[k - 1].date + std::chrono::days{1});
    }
    if (i > 0) CHECK(s.target_date() > s7[i - 1].target_date());
  }

  const auto ex = build_windows(days, prices, {7, true});
  CHECK(ex.size() == 3);
  CHECK(ex[0].window.size() == 7);
  CHECK(ex[0].window.back().date + std::chrono::days{1} == ex[0].target_date());

  const auto zero = build_windows(days, prices, {0, false});
  CHECK(zero[4].window.size() == 1);
  CHECK(zero[4].window[0].date == zero[4].target_date());
  CHECK_THROWS_AS(build_windows(days, prices, {0, true}), ConfigError);

  // Samples past first_target borrow history from the preceding days.
  const auto tail = build_windows(days, prices, {3, false}, 5);
  CHECK(tail.size() == 5);
  CHECK(tail[0].target_date() == days[5].date);
  CHECK(tail[0].window.front().date == days[2].date);
}

TEST_CASE("build_windows: a date gap names the missing day") {
  SeededRng rng(10);
  auto days = test::random_window(rng, 6, 2);
  std::vector<PriceDay> prices;
  for (const auto& d : days) prices.push_back({d.date, test::random_prices(rng)});
  days.erase(days.begin() + 3);
  prices.erase(prices.begin() + 3);
  try {
    build_windows(days, prices, {2, false});
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2024-01-04") != std::string::npos);
  }
}

TEST_CASE("write_csv round-trips through ingest_csv") {
  const fs::path dir = scratch_dir("roundtrip");
  const RawTable t = fixture(2, 11);
  write_csv(t, dir / "out.csv");
  const RawTable back = ingest_csv(only_prices(dir / "out.csv"));
  REQUIRE(back.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    CHECK(*back.records[i].price == *t.records[i].price);
    CHECK(back.records[i].features == t.records[i].features);
  }
}
