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

#include "epf/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/log.hpp"

namespace epf {

namespace {

using std::chrono::days;

struct HourKey {
  Date date;
  int hour;
  auto operator<=>(const HourKey&) const = default;
};

bool keep_column(const CsvSchema& schema, const std::string& name) {
  if (schema.feature_columns.empty()) return true;
  return std::find(schema.feature_columns.begin(), schema.feature_columns.end(), name) !=
         schema.feature_columns.end();
}

int parse_hour(const CsvFile& f, const CsvRow& row, std::size_t col) {
  const int h = parse_int(row.cells[col], f.where(row));
  if (h < 1 || h > 25) {
    throw ParseError(f.where(row) + ": hour_ending " + std::to_string(h) + " outside [1, 25]");
  }
  return h;
}

std::size_t require_column(const CsvFile& f, const std::string& name) {
  auto c = f.column(name);
  if (!c) throw ParseError(f.path.string() + ": missing column '" + name + "'");
  return *c;
}

// Feature columns of a side file, honoring the schema selection.
std::vector<std::size_t> feature_columns(const CsvFile& f, const CsvSchema& schema,
                                         std::initializer_list<std::size_t> keys,
                                         std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < f.header.size(); ++c) {
    if (std::find(keys.begin(), keys.end(), c) != keys.end()) continue;
    const std::string& name = f.header[c];
    if (!keep_column(schema, name)) {
      log_warning(f.path.string() + ": ignoring column '" + name + "'");
      continue;
    }
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw ParseError(f.path.string() + ": column '" + name + "' already provided by another source");
    }
    names.push_back(name);
    cols.push_back(c);
  }
  return cols;
}

}  // namespace

RawTable ingest_csv(const CsvSources& sources, const CsvSchema& schema) {
  if (!std::filesystem::exists(sources.prices)) {
    throw DataError("price file '" + sources.prices.string() + "' does not exist");
  }
  RawTable table;
  const CsvFile prices = read_csv(sources.prices);
  const std::size_t date_col = require_column(prices, schema.date_column);
  const std::size_t hour_col = require_column(prices, schema.hour_column);
  const std::size_t price_col = require_column(prices, schema.price_column);
  const auto price_features =
      feature_columns(prices, schema, {date_col, hour_col, price_col}, table.feature_names);

  std::map<HourKey, std::size_t> index;
  for (const CsvRow& row : prices.rows) {
    RawRecord rec;
    try {
      rec.date = parse_date(row.cells[date_col]);
    } catch (const ParseError& e) {
      throw ParseError(prices.where(row) + ": " + e.what());
    }
    rec.hour_ending = parse_hour(prices, row, hour_col);
    rec.price = parse_optional_double(row.cells[price_col], prices.where(row));
    for (std::size_t c : price_features) {
      rec.features.push_back(parse_optional_double(row.cells[c], prices.where(row)));
    }
    const HourKey key{rec.date, rec.hour_ending};
    if (index.contains(key)) {
      throw DataError(prices.where(row) + ": duplicate record for " + format_date(rec.date) +
                      " hour " + std::to_string(rec.hour_ending));
    }
    index.emplace(key, table.records.size());
    table.records.push_back(std::move(rec));
  }

  const auto join = [&](const CsvFile& f, bool hourly) {
    const std::size_t d_col = require_column(f, schema.date_column);
    const std::size_t h_col = hourly ? require_column(f, schema.hour_column) : d_col;
    const std::size_t before = table.feature_names.size();
    const auto cols = hourly ? feature_columns(f, schema, {d_col, h_col}, table.feature_names)
                             : feature_columns(f, schema, {d_col}, table.feature_names);
    for (auto& rec : table.records) rec.features.resize(table.feature_names.size());

    std::set<HourKey> seen;
    std::map<Date, std::vector<std::size_t>> by_date;
    for (std::size_t r = 0; r < table.records.size(); ++r) by_date[table.records[r].date].push_back(r);
    for (const CsvRow& row : f.rows) {
      Date date;
      try {
        date = parse_date(row.cells[d_col]);
      } catch (const ParseError& e) {
        throw ParseError(f.where(row) + ": " + e.what());
      }
      const int hour = hourly ? parse_hour(f, row, h_col) : 0;
      if (!seen.insert({date, hour}).second) {
        throw DataError(f.where(row) + ": duplicate record for " + format_date(date) +
                        (hourly ? " hour " + std::to_string(hour) : std::string()));
      }
      std::vector<std::optional<double>> values;
      for (std::size_t c : cols) values.push_back(parse_optional_double(row.cells[c], f.where(row)));
      const auto apply = [&](RawRecord& rec) {
        for (std::size_t k = 0; k < values.size(); ++k) rec.features[before + k] = values[k];
      };
      if (hourly) {
        auto it = index.find({date, hour});
        if (it != index.end()) apply(table.records[it->second]);
      } else {
        auto it = by_date.find(date);
        if (it != by_date.end()) {
          for (std::size_t r : it->second) apply(table.records[r]);
        }
      }
    }
  };
  if (sources.weather) join(read_csv(*sources.weather), /*hourly=*/false);
  if (sources.fuel_mix) join(read_csv(*sources.fuel_mix), /*hourly=*/true);

  std::stable_sort(table.records.begin(), table.records.end(), [](const RawRecord& a, const RawRecord& b) {
    return HourKey{a.date, a.hour_ending} < HourKey{b.date, b.hour_ending};
  });
  return table;
}

RawTable clean_hours(const RawTable& table, CleanReport* report) {
  CleanReport local;
  CleanReport& rep = report ? *report : local;
  const std::size_t n_features = table.feature_names.size();
  const std::size_t n_cols = n_features + 1;  // column 0 is the price

  // Hourly grid over the distinct dates present, 24 slots per day.
  std::map<Date, std::array<const RawRecord*, kHoursPerDay>> by_day;
  for (const RawRecord& rec : table.records) {
    if (rec.hour_ending == 25) {
      ++rep.hour25_rows_removed;
      continue;
    }
    if (rec.hour_ending < 1 || rec.hour_ending > 25) {
      throw DataError("clean_hours: hour_ending " + std::to_string(rec.hour_ending) + " on " +
                      format_date(rec.date));
    }
    auto [it, inserted] = by_day.try_emplace(rec.date);
    if (inserted) it->second.fill(nullptr);
    it->second[rec.hour_ending - 1] = &rec;
  }
  if (rep.hour25_rows_removed > 0) {
    log_info("clean_hours: removed " + std::to_string(rep.hour25_rows_removed) + " hour-25 rows");
  }

  std::vector<Date> dates;
  for (const auto& [d, _] : by_day) dates.push_back(d);
  const std::size_t slots = dates.size() * kHoursPerDay;

  // values[col][slot]
  std::vector<std::vector<std::optional<double>>> values(n_cols, std::vector<std::optional<double>>(slots));
  for (std::size_t di = 0; di < dates.size(); ++di) {
    const auto& hours = by_day[dates[di]];
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      const RawRecord* rec = hours[h];
      if (rec == nullptr) continue;
      const std::size_t slot = di * kHoursPerDay + h;
      values[0][slot] = rec->price;
      for (std::size_t f = 0; f < n_features && f < rec->features.size(); ++f) {
        values[f + 1][slot] = rec->features[f];
      }
    }
  }

  // Slot s and s+1 are adjacent unless they straddle two non-consecutive dates.
  const auto adjacent = [&](std::size_t s) {
    if ((s + 1) % kHoursPerDay != 0) return true;
    const std::size_t di = s / kHoursPerDay;
    return di + 1 < dates.size() && dates[di + 1] == dates[di] + days{1};
  };

  std::map<Date, std::string> drop;
  std::vector<std::vector<std::optional<double>>> filled = values;
  for (std::size_t col = 0; col < n_cols; ++col) {
    const auto& v = values[col];
    std::size_t s = 0;
    while (s < slots) {
      if (v[s]) {
        ++s;
        continue;
      }
      std::size_t e = s;
      while (e + 1 < slots && !v[e + 1] && adjacent(e)) ++e;
      const std::size_t run = e - s + 1;
      const bool has_left = s > 0 && adjacent(s - 1) && v[s - 1].has_value();
      const bool has_right = e + 1 < slots && adjacent(e) && v[e + 1].has_value();
      const std::string column = col == 0 ? std::string("price") : table.feature_names[col - 1];
      if (run <= kMaxInterpolatedGap && has_left && has_right) {
        const double a = *v[s - 1];
        const double b = *v[e + 1];
        if (run == 1) {
          filled[col][s] = (a + b) / 2.0;
        } else {
          for (std::size_t k = 0; k < run; ++k) {
            filled[col][s + k] = a + (b - a) * double(k + 1) / double(run + 1);
          }
        }
        rep.values_filled += run;
      } else {
        const std::string reason =
            run > kMaxInterpolatedGap
                ? column + ": " + std::to_string(run) + " consecutive hours missing"
                : column + ": missing hour at a data boundary";
        for (std::size_t k = s; k <= e; ++k) drop.try_emplace(dates[k / kHoursPerDay], reason);
      }
      s = e + 1;
    }
  }

  RawTable out;
  out.feature_names = table.feature_names;
  for (std::size_t di = 0; di < dates.size(); ++di) {
    if (auto it = drop.find(dates[di]); it != drop.end()) {
      log_warning("clean_hours: dropping " + format_date(dates[di]) + " (" + it->second + ")");
      rep.dropped_days.emplace_back(dates[di], it->second);
      continue;
    }
    const auto& hours = by_day[dates[di]];
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      const std::size_t slot = di * kHoursPerDay + h;
      if (hours[h] != nullptr && hours[h]->price && hours[h]->features.size() == n_features &&
          std::all_of(hours[h]->features.begin(), hours[h]->features.end(),
                      [](const auto& x) { return x.has_value(); })) {
        out.records.push_back(*hours[h]);  // complete rows pass through untouched
        continue;
      }
      RawRecord rec;
      rec.date = dates[di];
      rec.hour_ending = int(h) + 1;
      rec.price = filled[0][slot];
      rec.features.resize(n_features);
      for (std::size_t f = 0; f < n_features; ++f) rec.features[f] = filled[f + 1][slot];
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

const std::vector<std::string>& temporal_feature_names() {
  static const std::vector<std::string> names = {"hour_sin",  "hour_cos",  "dow_sin", "dow_cos",
                                                 "month_sin", "month_cos", "weekend"};
  return names;
}

Tensor2 engineer_temporal(Date day) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Tensor2 x(kTemporalFeatureCount, kHoursPerDay);
  const unsigned dow = iso_weekday_index(day);
  const unsigned month = month_of(day);
  const double dow_angle = two_pi * double(dow) / 7.0;
  const double month_angle = two_pi * double(month) / 12.0;
  const double weekend = dow >= 5 ? 1.0 : 0.0;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    const double hour_angle = two_pi * double(t) / 24.0;
    x(0, t) = std::sin(hour_angle);
    x(1, t) = std::cos(hour_angle);
    x(2, t) = std::sin(dow_angle);
    x(3, t) = std::cos(dow_angle);
    x(4, t) = std::sin(month_angle);
    x(5, t) = std::cos(month_angle);
    x(6, t) = weekend;
  }
  return x;
}

DayTable build_feature_days(const RawTable& clean, const FeatureOptions& options) {
  std::vector<std::size_t> kept;
  auto names = std::make_shared<std::vector<std::string>>();
  for (std::size_t f = 0; f < clean.feature_names.size(); ++f) {
    const auto& name = clean.feature_names[f];
    if (std::find(options.exclude.begin(), options.exclude.end(), name) != options.exclude.end()) continue;
    kept.push_back(f);
    names->push_back(name);
  }
  for (const auto& name : options.exclude) {
    if (std::find(clean.feature_names.begin(), clean.feature_names.end(), name) == clean.feature_names.end()) {
      log_warning("build_feature_days: excluded feature '" + name + "' is not present");
    }
  }
  if (options.include_price_lag) names->push_back("price_lag1");
  if (options.include_temporal) {
    for (const auto& n : temporal_feature_names()) names->push_back(n);
  }
  const std::size_t m = names->size();
  if (m == 0) throw DataError("build_feature_days: no features selected");

  // Group the (already complete) hourly records per day.
  struct Day {
    Date date;
    std::array<const RawRecord*, kHoursPerDay> hours{};
  };
  std::vector<Day> grouped;
  for (const RawRecord& rec : clean.records) {
    if (rec.hour_ending < 1 || rec.hour_ending > 24) {
      throw DataError("build_feature_days: table not cleaned (hour " + std::to_string(rec.hour_ending) + ")");
    }
    if (grouped.empty() || grouped.back().date != rec.date) grouped.push_back({rec.date, {}});
    grouped.back().hours[rec.hour_ending - 1] = &rec;
  }

  DayTable out;
  FeatureNames shared = names;
  for (std::size_t di = 0; di < grouped.size(); ++di) {
    const Day& day = grouped[di];
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      const RawRecord* r = day.hours[h];
      if (r == nullptr || !r->price) {
        throw DataError("build_feature_days: " + format_date(day.date) + " is incomplete; run clean_hours first");
      }
      for (std::size_t f : kept) {
        if (f >= r->features.size() || !r->features[f]) {
          throw DataError("build_feature_days: missing '" + clean.feature_names[f] + "' on " +
                          format_date(day.date));
        }
      }
    }
    const Day* prev = (di > 0 && grouped[di - 1].date + days{1} == day.date) ? &grouped[di - 1] : nullptr;
    if (options.include_price_lag && prev == nullptr) continue;

    FeatureDay fd;
    fd.date = day.date;
    fd.names = shared;
    fd.x = Tensor2(m, kHoursPerDay);
    PriceDay pd;
    pd.date = day.date;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      std::size_t row = 0;
      for (std::size_t f : kept) fd.x(row++, h) = *day.hours[h]->features[f];
      if (options.include_price_lag) fd.x(row++, h) = *prev->hours[h]->price;
      pd.y[h] = *day.hours[h]->price;
    }
    if (options.include_temporal) {
      const Tensor2 temporal = engineer_temporal(day.date);
      const std::size_t base = m - kTemporalFeatureCount;
      for (std::size_t r = 0; r < kTemporalFeatureCount; ++r) {
        for (std::size_t h = 0; h < kHoursPerDay; ++h) fd.x(base + r, h) = temporal(r, h);
      }
    }
    out.days.push_back(std::move(fd));
    out.prices.push_back(pd);
  }
  return out;
}

NormStats fit_normalize(std::span<const FeatureDay> train_days,
                        std::span<const PriceDay> train_prices) {
  if (train_days.empty() || train_prices.empty()) throw DataError("fit_normalize: no training rows");
  const auto& names = *train_days.front().names;
  const std::size_t m = names.size();
  const double n = double(train_days.size() * kHoursPerDay);

  NormStats stats;
  for (std::size_t r = 0; r < m; ++r) {
    double sum = 0.0;
    for (const auto& d : train_days) {
      if (d.x.rows() != m || *d.names != names) throw DataError("fit_normalize: inconsistent feature layout");
      for (std::size_t h = 0; h < kHoursPerDay; ++h) sum += d.x(r, h);
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& d : train_days) {
      for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const double e = d.x(r, h) - mean;
        ss += e * e;
      }
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      log_warning("fit_normalize: dropping zero-variance feature '" + names[r] + "'");
      stats.dropped.push_back(names[r]);
      continue;
    }
    stats.feature_names.push_back(names[r]);
    stats.mean.push_back(mean);
    stats.sd.push_back(sd);
  }
  if (stats.feature_names.empty()) throw DataError("fit_normalize: every feature has zero variance");

  double sum = 0.0;
  const double np = double(train_prices.size() * kHoursPerDay);
  for (const auto& p : train_prices) {
    for (double v : p.y) sum += v;
  }
  stats.price_mean = sum / np;
  double ss = 0.0;
  for (const auto& p : train_prices) {
    for (double v : p.y) ss += (v - stats.price_mean) * (v - stats.price_mean);
  }
  stats.price_sd = std::sqrt(ss / np);
  if (!(stats.price_sd > 0.0)) throw DataError("fit_normalize: price has zero variance");
  return stats;
}

std::vector<FeatureDay> apply_normalize(std::span<const FeatureDay> days, const NormStats& stats) {
  std::vector<FeatureDay> out;
  out.reserve(days.size());
  if (days.empty()) return out;
  auto names = std::make_shared<const std::vector<std::string>>(stats.feature_names);
  std::vector<std::size_t> src_rows;
  const FeatureNames* layout = nullptr;
  for (const FeatureDay& d : days) {
    if (layout == nullptr || *d.names != **layout) {
      src_rows.clear();
      for (const auto& name : stats.feature_names) {
        auto it = std::find(d.names->begin(), d.names->end(), name);
        if (it == d.names->end()) {
          throw DataError("apply_normalize: feature '" + name + "' missing on " + format_date(d.date));
        }
        src_rows.push_back(std::size_t(it - d.names->begin()));
      }
      layout = &d.names;
    }
    FeatureDay nd;
    nd.date = d.date;
    nd.names = names;
    nd.x = Tensor2(stats.feature_names.size(), kHoursPerDay);
    for (std::size_t r = 0; r < src_rows.size(); ++r) {
      for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        nd.x(r, h) = (d.x(src_rows[r], h) - stats.mean[r]) / stats.sd[r];
      }
    }
    out.push_back(std::move(nd));
  }
  return out;
}

std::vector<PriceDay> normalize_prices(std::span<const PriceDay> prices, const NormStats& stats) {
  std::vector<PriceDay> out(prices.begin(), prices.end());
  for (auto& p : out) {
    if (p.normalized) throw DataError("normalize_prices: already normalized");
    for (double& v : p.y) v = (v - stats.price_mean) / stats.price_sd;
    p.normalized = true;
  }
  return out;
}

PriceVector denormalize(const PriceVector& y, const NormStats& stats) {
  PriceVector out;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) out[t] = y[t] * stats.price_sd + stats.price_mean;
  return out;
}

std::vector<PriceDay> denormalize_prices(std::span<const PriceDay> prices, const NormStats& stats) {
  std::vector<PriceDay> out(prices.begin(), prices.end());
  for (auto& p : out) {
    if (!p.normalized) throw DataError("denormalize_prices: prices are not normalized");
    p.y = denormalize(p.y, stats);
    p.normalized = false;
  }
  return out;
}

std::vector<SlidingWindowSample> build_windows(std::span<const FeatureDay> days,
                                               std::span<const PriceDay> prices,
                                               const WindowConfig& cfg, std::size_t first_target) {
  if (cfg.lookback == 0 && cfg.exclude_prediction_day_features) {
    throw ConfigError("build_windows: lookback 0 without prediction-day features leaves an empty window");
  }
  if (days.size() != prices.size()) {
    throw DataError("build_windows: " + std::to_string(days.size()) + " feature days but " +
                    std::to_string(prices.size()) + " price days");
  }
  for (std::size_t j = 0; j < days.size(); ++j) {
    if (prices[j].date != days[j].date) {
      throw DataError("build_windows: feature/price dates differ at " + format_date(days[j].date));
    }
    if (j > 0 && days[j].date != days[j - 1].date + std::chrono::days{1}) {
      throw DataError("build_windows: missing date " + format_date(days[j - 1].date + std::chrono::days{1}));
    }
  }
  std::vector<SlidingWindowSample> out;
  const std::size_t n = cfg.lookback;
  if (days.size() < n + 1) {
    log_warning("build_windows: " + std::to_string(days.size()) + " days cannot fill a lookback of " +
                std::to_string(n));
    return out;
  }
  for (std::size_t j = std::max(first_target, n); j < days.size(); ++j) {
    SlidingWindowSample s;
    const std::size_t end = cfg.exclude_prediction_day_features ? j : j + 1;
    s.window.assign(days.begin() + std::ptrdiff_t(j - n), days.begin() + std::ptrdiff_t(end));
    s.target = prices[j];
    out.push_back(std::move(s));
  }
  return out;
}

void write_csv(const RawTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,hour_ending,price";
  for (const auto& n : table.feature_names) out << ',' << n;
  out << '\n';
  for (const auto& r : table.records) {
    out << format_date(r.date) << ',' << r.hour_ending << ',' << (r.price ? format_double(*r.price) : "");
    for (const auto& f : r.features) out << ',' << (f ? format_double(*f) : "");
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace epf
