#pragma once

#include <optional>
#include <span>
#include <string>

namespace cropcast::metrics {

// One row of the model comparison table.
struct MetricsReport {
  double mape = 0.0;  // percent
  double rmse = 0.0;
  // Empty when either series is constant.
  std::optional<double> corr;
  double sem = 0.0;
  double mse = 0.0;
};

double mape(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

// Standard error of the residuals: sample stdev (n - 1) over sqrt(n).
double sem(std::span<const double> actual, std::span<const double> predicted);

// Sample Pearson correlation. Throws NumericError when either side is
// constant instead of returning NaN.
double pearson_corr(std::span<const double> actual, std::span<const double> predicted);

// All five measures. A constant series leaves corr empty rather than
// failing the whole report; the other measures keep their errors.
MetricsReport evaluate(std::span<const double> actual, std::span<const double> predicted);

// Column order of the comparison table.
inline constexpr const char* kTableHeader = "model,MAPE,RMSE,Corr,SEM,MSE";

// "<model>,<mape>,<rmse>,<corr>,<sem>,<mse>" with four decimals; an
// undefined correlation prints as NA.
std::string table_row(const std::string& model, const MetricsReport& report);

}  // namespace cropcast::metrics
