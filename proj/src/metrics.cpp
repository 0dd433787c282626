#include "cropcast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "cropcast/error.hpp"

namespace cropcast::metrics {

namespace {

void check_lengths(std::span<const double> actual, std::span<const double> predicted,
                   std::size_t minimum) {
  if (actual.size() != predicted.size()) {
    throw ConfigError("metric inputs differ in length (" + std::to_string(actual.size()) +
                      " vs " + std::to_string(predicted.size()) + ")");
  }
  if (actual.size() < minimum) {
    throw ConfigError("metric needs at least " + std::to_string(minimum) +
                      " values, got " + std::to_string(actual.size()));
  }
}

double mean(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

double mape(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 1);
  std::string zeros;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) zeros += (zeros.empty() ? "" : ", ") + std::to_string(i);
  }
  if (!zeros.empty()) {
    throw NumericError("MAPE undefined: actual value is zero at index " + zeros);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    total += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
  }
  return 100.0 * total / static_cast<double>(actual.size());
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 1);
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    total += r * r;
  }
  return total / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  return std::sqrt(mse(actual, predicted));
}

double sem(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 2);
  std::vector<double> residuals(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) residuals[i] = actual[i] - predicted[i];
  const double centre = mean(residuals);
  double ss = 0.0;
  for (double r : residuals) ss += (r - centre) * (r - centre);
  const double n = static_cast<double>(residuals.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

double pearson_corr(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 2);
  const double ma = mean(actual);
  const double mp = mean(predicted);
  double saa = 0.0, spp = 0.0, sap = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double da = actual[i] - ma;
    const double dp = predicted[i] - mp;
    saa += da * da;
    spp += dp * dp;
    sap += da * dp;
  }
  if (saa == 0.0 || spp == 0.0) {
    throw NumericError(std::string("correlation undefined: ") +
                       (saa == 0.0 ? "actual" : "predicted") + " series is constant");
  }
  return sap / std::sqrt(saa * spp);
}

MetricsReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
  MetricsReport report;
  report.mape = mape(actual, predicted);
  report.mse = mse(actual, predicted);
  report.rmse = std::sqrt(report.mse);
  report.sem = sem(actual, predicted);
  try {
    report.corr = pearson_corr(actual, predicted);
  } catch (const NumericError&) {
    report.corr.reset();
  }
  return report;
}

std::string table_row(const std::string& model, const MetricsReport& report) {
  char corr[32] = "NA";
  if (report.corr) std::snprintf(corr, sizeof corr, "%.4f", *report.corr);
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, "%s,%.4f,%.4f,%s,%.4f,%.4f", model.c_str(), report.mape,
                report.rmse, corr, report.sem, report.mse);
  return buffer;
}

}  // namespace cropcast::metrics
