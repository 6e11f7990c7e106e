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

#include "epf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/log.hpp"
#include "epf/numeric.hpp"

namespace epf {

namespace {

// Names the first date present in one list but not the other, scanning in date order.
std::string describe_mismatch(std::span<const PriceDay> predicted, std::span<const PriceDay> actual) {
  std::set<Date> p, a;
  for (const auto& d : predicted) p.insert(d.date);
  for (const auto& d : actual) a.insert(d.date);
  std::set<Date> all = p;
  all.insert(a.begin(), a.end());
  for (Date d : all) {
    if (!p.contains(d)) return "date " + format_date(d) + " missing from predictions";
    if (!a.contains(d)) return "date " + format_date(d) + " missing from actuals";
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].date != actual[i].date) {
      return "date order differs at " + format_date(std::min(predicted[i].date, actual[i].date));
    }
  }
  return "duplicate dates";
}

}  // namespace

MetricsReport metrics(std::span<const PriceDay> predicted, std::span<const PriceDay> actual, std::string label) {
  if (predicted.empty() && actual.empty()) throw DataError("metrics: no days to evaluate");
  bool aligned = predicted.size() == actual.size();
  for (std::size_t i = 0; aligned && i < predicted.size(); ++i) aligned = predicted[i].date == actual[i].date;
  if (!aligned) throw DataError("metrics: misaligned inputs, " + describe_mismatch(predicted, actual));

  MetricsReport r;
  r.label = std::move(label);
  r.predicted.assign(predicted.begin(), predicted.end());
  r.actual.assign(actual.begin(), actual.end());
  double se = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    DayMetrics dm{predicted[i].date, 0.0, 0.0};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      const double e = predicted[i].y[t] - actual[i].y[t];
      dm.mse += e * e;
      dm.mae += std::abs(e);
    }
    se += dm.mse;
    ae += dm.mae;
    dm.mse /= double(kHoursPerDay);
    dm.mae /= double(kHoursPerDay);
    r.per_day.push_back(dm);
  }
  const double n = double(predicted.size() * kHoursPerDay);
  r.mse = se / n;
  r.mae = ae / n;
  r.rmse = std::sqrt(r.mse);
  return r;
}

PriceDay baseline_persistence(std::span<const PriceDay> history, Date horizon) {
  const PriceDay* best = nullptr;
  for (const auto& d : history) {
    if (d.date < horizon && iso_weekday_index(d.date) == iso_weekday_index(horizon) &&
        (best == nullptr || best->date < d.date)) {
      best = &d;
    }
  }
  if (best == nullptr) {
    throw DataError("persistence: no same-weekday day before " + format_date(horizon));
  }
  return {horizon, best->y, best->normalized};
}

std::vector<double> flatten_window(std::span<const FeatureDay> window) {
  std::vector<double> out;
  for (const auto& d : window) out.insert(out.end(), d.x.flat().begin(), d.x.flat().end());
  return out;
}

RidgeBaseline RidgeBaseline::fit(std::span<const SlidingWindowSample> samples, double lambda) {
  if (samples.empty()) throw ContractError("ridge: no samples");
  if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be >= 0");
  const std::size_t n = samples.size();
  std::vector<std::vector<double>> xs;
  xs.reserve(n);
  for (const auto& s : samples) xs.push_back(flatten_window(s.window));
  const std::size_t dim = xs.front().size();
  for (const auto& x : xs) {
    if (x.size() != dim) throw DimensionError("ridge: windows differ in flattened size");
  }
  if (n < 5 * dim) {
    log_warning("ridge: " + std::to_string(n) + " samples for dimension " + std::to_string(dim) +
                "; the fit relies on regularization");
  }

  RidgeBaseline model;
  model.x_mean_.assign(dim, 0.0);
  for (const auto& x : xs) {
    for (std::size_t k = 0; k < dim; ++k) model.x_mean_[k] += x[k];
  }
  for (double& m : model.x_mean_) m /= double(n);
  for (const auto& s : samples) {
    for (std::size_t t = 0; t < kHoursPerDay; ++t) model.intercept_[t] += s.target.y[t];
  }
  for (double& b : model.intercept_) b /= double(n);

  Tensor2 xc(n, dim);
  Tensor2 yc(n, kHoursPerDay);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) xc(i, k) = xs[i][k] - model.x_mean_[k];
    for (std::size_t t = 0; t < kHoursPerDay; ++t) yc(i, t) = samples[i].target.y[t] - model.intercept_[t];
  }

  if (dim <= n) {
    // (Xc^T Xc + lambda I) W = Xc^T Yc
    Tensor2 gram = matmul(transpose(xc), xc);
    for (std::size_t k = 0; k < dim; ++k) gram(k, k) += lambda;
    model.weights_ = cholesky_solve(gram, matmul(transpose(xc), yc));
  } else {
    // W = Xc^T (Xc Xc^T + lambda I)^-1 Yc
    Tensor2 gram = matmul(xc, transpose(xc));
    for (std::size_t i = 0; i < n; ++i) gram(i, i) += lambda;
    model.weights_ = matmul(transpose(xc), cholesky_solve(gram, yc));
  }
  return model;
}

PriceVector RidgeBaseline::predict(std::span<const FeatureDay> window) const {
  const std::vector<double> x = flatten_window(window);
  if (x.size() != x_mean_.size()) {
    throw DimensionError("ridge: window flattens to " + std::to_string(x.size()) + " values, model expects " +
                         std::to_string(x_mean_.size()));
  }
  PriceVector y = intercept_;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xc = x[k] - x_mean_[k];
    for (std::size_t t = 0; t < kHoursPerDay; ++t) y[t] += xc * weights_(k, t);
  }
  return y;
}

std::vector<ComparisonRow> compare_report(std::span<const MetricsReport> reports) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports) {
    const auto& ref = reports.front().per_day;
    bool same = r.per_day.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i) same = r.per_day[i].date == ref[i].date;
    if (!same) throw DataError("compare: report '" + r.label + "' covers different days than '" +
                               reports.front().label + "'");
    rows.push_back({r.label, r.mse, r.mae, r.rmse});
  }
  return rows;
}

void write_comparison_csv(std::span<const ComparisonRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "config,mse,mae,rmse\n";
  for (const auto& r : rows) {
    out << r.config << ',' << format_double(r.mse) << ',' << format_double(r.mae) << ',' << format_double(r.rmse)
        << '\n';
  }
}

void write_residuals_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,hour,actual,predicted,residual\n";
  for (std::size_t i = 0; i < report.actual.size(); ++i) {
    const std::string date = format_date(report.actual[i].date);
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      const double a = report.actual[i].y[t];
      const double p = report.predicted[i].y[t];
      out << date << ',' << t + 1 << ',' << format_double(a) << ',' << format_double(p) << ','
          << format_double(a - p) << '\n';
    }
  }
}

void write_per_day_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,mse,mae\n";
  for (const auto& d : report.per_day) {
    out << format_date(d.date) << ',' << format_double(d.mse) << ',' << format_double(d.mae) << '\n';
  }
}

std::vector<PriceDay> read_price_days(const std::filesystem::path& path) {
  const CsvFile f = read_csv(path);
  const auto date_col = f.column("date");
  const auto hour_col = f.column("hour_ending");
  const auto price_col = f.column("price");
  if (!date_col || !hour_col || !price_col) {
    throw ParseError(path.string() + ": expected columns date, hour_ending, price");
  }
  std::map<Date, std::pair<PriceVector, std::size_t>> days;
  for (const auto& row : f.rows) {
    const std::string where = f.where(row);
    const Date d = parse_date(row.cells[*date_col]);
    const int h = parse_int(row.cells[*hour_col], where);
    if (h < 1 || h > int(kHoursPerDay)) throw ParseError(where + ": hour_ending must be 1-24");
    auto& [y, seen] = days[d];
    y[std::size_t(h - 1)] = parse_double(row.cells[*price_col], where);
    ++seen;
  }
  std::vector<PriceDay> out;
  for (const auto& [d, entry] : days) {
    if (entry.second != kHoursPerDay) {
      throw DataError(path.string() + ": day " + format_date(d) + " has " + std::to_string(entry.second) +
                      " rows, expected 24");
    }
    out.push_back({d, entry.first, false});
  }
  return out;
}

void write_price_days(std::span<const PriceDay> days, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "date,hour_ending,price\n";
  for (const auto& d : days) {
    const std::string date = format_date(d.date);
    for (std::size_t t = 0; t < kHoursPerDay; ++t) out << date << ',' << t + 1 << ',' << format_double(d.y[t]) << '\n';
  }
}

}  // namespace epf
