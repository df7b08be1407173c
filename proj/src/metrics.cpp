#include "mtlf/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mtlf {
namespace {

double mean(std::span<const double> v) {
	double s = 0.0;
	for (double x : v) {
		s += x;
	}
	return s / static_cast<double>(v.size());
}

ErrorSummary summarize(std::span<const double> apes, std::span<const double> sq_errors) {
	ErrorSummary out;
	std::vector<double> a(apes.begin(), apes.end());
	out.mape = mean(a);
	out.median_ape = quantile(a, 0.5);
	out.iqr = quantile(a, 0.75) - quantile(a, 0.25);
	out.rmse = std::sqrt(mean(sq_errors));
	return out;
}

nlohmann::json to_json(const ErrorSummary& e) {
	return {{"median_ape", e.median_ape}, {"mape", e.mape}, {"iqr", e.iqr}, {"rmse", e.rmse}};
}

} // namespace

double ape(double y, double y_hat) {
	if (y == 0.0) {
		throw std::invalid_argument("APE undefined for a zero actual");
	}
	return 100.0 * std::abs(y - y_hat) / std::abs(y);
}

double quantile(std::vector<double> data, double q) {
	if (data.empty()) {
		throw std::invalid_argument("quantile of empty data");
	}
	std::sort(data.begin(), data.end());
	const double pos = q * static_cast<double>(data.size() - 1);
	const auto lo = static_cast<std::size_t>(std::floor(pos));
	const std::size_t hi = std::min(lo + 1, data.size() - 1);
	return data[lo] + (pos - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

EvalReport evaluate(std::span<const std::string> ids, std::span<const std::vector<double>> forecasts,
                    std::span<const std::vector<double>> actuals) {
	if (ids.size() != forecasts.size() || ids.size() != actuals.size() || ids.empty()) {
		throw std::invalid_argument("evaluate: mismatched series sets");
	}
	const std::size_t horizon = actuals.front().size();
	EvalReport report;
	report.per_month_mape.assign(horizon, 0.0);
	std::vector<double> all_ape;
	std::vector<double> all_sq;
	std::vector<double> all_pe;
	double mape_sum = 0.0;
	for (std::size_t i = 0; i < ids.size(); ++i) {
		if (forecasts[i].size() != horizon || actuals[i].size() != horizon || horizon == 0) {
			throw std::invalid_argument("evaluate: horizon mismatch for series " + ids[i]);
		}
		std::vector<double> apes;
		std::vector<double> sq;
		for (std::size_t h = 0; h < horizon; ++h) {
			const double y = actuals[i][h];
			const double f = forecasts[i][h];
			const double a = ape(y, f);
			apes.push_back(a);
			sq.push_back((y - f) * (y - f));
			all_pe.push_back(kPeSign * 100.0 * (y - f) / y);
			report.per_month_mape[h] += a;
		}
		SeriesReport sr{ids[i], summarize(apes, sq)};
		mape_sum += sr.errors.mape;
		all_ape.insert(all_ape.end(), apes.begin(), apes.end());
		all_sq.insert(all_sq.end(), sq.begin(), sq.end());
		report.per_series.push_back(std::move(sr));
	}
	for (double& v : report.per_month_mape) {
		v /= static_cast<double>(ids.size());
	}
	report.pooled = summarize(all_ape, all_sq);
	report.pooled.mape = mape_sum / static_cast<double>(ids.size());

	PeStats& pe = report.pe;
	const double n = static_cast<double>(all_pe.size());
	pe.mean = mean(all_pe);
	pe.median = quantile(all_pe, 0.5);
	double m2 = 0.0;
	double m3 = 0.0;
	double m4 = 0.0;
	for (double v : all_pe) {
		const double d = v - pe.mean;
		m2 += d * d;
		m3 += d * d * d;
		m4 += d * d * d * d;
	}
	m2 /= n;
	m3 /= n;
	m4 /= n;
	pe.std = all_pe.size() > 1 ? std::sqrt(m2 * n / (n - 1.0)) : 0.0;
	if (m2 > 1e-300) {
		pe.skewness = m3 / std::pow(m2, 1.5);
		pe.kurtosis = m4 / (m2 * m2);
	}
	return report;
}

std::string report_json(const EvalReport& report) {
	nlohmann::json j;
	j["pooled"] = to_json(report.pooled);
	j["pe"] = {{"mean", report.pe.mean},
	           {"median", report.pe.median},
	           {"std", report.pe.std},
	           {"skewness", report.pe.skewness},
	           {"kurtosis", report.pe.kurtosis},
	           {"sign", "100*(y-yhat)/y"}};
	nlohmann::json per = nlohmann::json::array();
	for (const auto& s : report.per_series) {
		nlohmann::json e = to_json(s.errors);
		e["id"] = s.id;
		per.push_back(e);
	}
	j["per_series"] = per;
	j["per_month_mape"] = report.per_month_mape;
	return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
	std::ostringstream out;
	char line[160];
	std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %12s\n", "series", "MedianAPE", "MAPE", "IQR", "RMSE");
	out << line;
	for (const auto& s : report.per_series) {
		std::snprintf(line, sizeof line, "%-10s %10.2f %10.2f %10.2f %12.2f\n", s.id.c_str(), s.errors.median_ape,
		              s.errors.mape, s.errors.iqr, s.errors.rmse);
		out << line;
	}
	std::snprintf(line, sizeof line, "%-10s %10.2f %10.2f %10.2f %12.2f\n", "ALL", report.pooled.median_ape,
	              report.pooled.mape, report.pooled.iqr, report.pooled.rmse);
	out << line << '\n';
	std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s %10s\n", "PE", "Mean", "Median", "Std", "Skewness",
	              "Kurtosis");
	out << line;
	std::snprintf(line, sizeof line, "%-10s %10.2f %10.2f %10.2f %10.2f %10.2f\n", "", report.pe.mean,
	              report.pe.median, report.pe.std, report.pe.skewness, report.pe.kurtosis);
	out << line;
	return out.str();
}

std::string per_series_csv(const EvalReport& report) {
	std::ostringstream out;
	out << "id,mape\n";
	for (const auto& s : report.per_series) {
		out << s.id << ',' << s.errors.mape << '\n';
	}
	return out.str();
}

std::string per_month_csv(const EvalReport& report) {
	std::ostringstream out;
	out << "horizon,mape\n";
	for (std::size_t h = 0; h < report.per_month_mape.size(); ++h) {
		out << h + 1 << ',' << report.per_month_mape[h] << '\n';
	}
	return out.str();
}

} // namespace mtlf
