#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mtlf {

/// Sign of PE = 100 (y - y_hat) / y: positive means the forecast was too low.
inline constexpr int kPeSign = +1;

/// 100 |y - y_hat| / |y|; throws std::invalid_argument for y == 0.
double ape(double y, double y_hat);

struct ErrorSummary {
	double median_ape = 0.0;
	double mape = 0.0;
	double iqr = 0.0; // of APE
	double rmse = 0.0;
};

struct PeStats {
	double mean = 0.0;
	double median = 0.0;
	double std = 0.0;      // sample (n - 1)
	double skewness = 0.0; // population moments; 0 when std is 0
	double kurtosis = 0.0; // non-excess
};

struct SeriesReport {
	std::string id;
	ErrorSummary errors;
};

struct EvalReport {
	ErrorSummary pooled;
	PeStats pe;
	std::vector<SeriesReport> per_series;
	std::vector<double> per_month_mape; // one per horizon step, pooled over series
};

/// Pooled MAPE is the mean of per-series MAPEs; median APE and IQR use the
/// flat APE pool; RMSE pools all (series, month) pairs.
EvalReport evaluate(std::span<const std::string> ids, std::span<const std::vector<double>> forecasts,
                    std::span<const std::vector<double>> actuals);

/// Linear-interpolation quantile (q in [0, 1]) of unsorted data.
double quantile(std::vector<double> data, double q);

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
std::string per_series_csv(const EvalReport& report);
std::string per_month_csv(const EvalReport& report);

} // namespace mtlf
