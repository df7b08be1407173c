#pragma once

#include "mtlf/dataset.hpp"
#include "mtlf/ensemble.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Forecast files:
//   aggregates  id,year,month,forecast
//   members     id,year,month,run,pool,forecast
// Values are written in shortest round-trip form.

namespace mtlf {

struct ForecastRow {
	std::string id;
	YearMonth start; // month of the first horizon step
	std::vector<double> values;
};

void write_forecasts(std::ostream& out, std::span<const ForecastRow> rows);
void write_members(std::ostream& out, const ForecastSet& set, YearMonth first_month);
std::vector<ForecastRow> read_forecasts(std::istream& in);
std::vector<ForecastRow> read_forecasts(const std::filesystem::path& path);

/// Aggregates of an ensemble run as rows starting at first_month.
std::vector<ForecastRow> aggregate_rows(const ForecastSet& set, YearMonth first_month);

/// For each forecast row, the actual values of the same months from a data
/// collection. Throws std::invalid_argument if any month is missing.
std::vector<std::vector<double>> match_actuals(std::span<const ForecastRow> rows, const SeriesCollection& data);

std::string format_double(double v);

} // namespace mtlf
