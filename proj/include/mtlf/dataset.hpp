#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtlf {

struct YearMonth {
	int year = 2000;
	int month = 1; // 1..12

	auto operator<=>(const YearMonth&) const = default;

	/// Months since year 0 (month 1 of year 0 is index 0).
	int index() const noexcept { return year * 12 + (month - 1); }
	static YearMonth from_index(int idx) noexcept { return {idx / 12, idx % 12 + 1}; }
	YearMonth plus(int months) const noexcept { return from_index(index() + months); }
};

struct MonthlySeries {
	std::string id;
	YearMonth start;
	std::vector<double> values;

	std::size_t size() const noexcept { return values.size(); }
	YearMonth end() const noexcept { return start.plus(static_cast<int>(values.size()) - 1); }
	YearMonth month_at(std::size_t t) const noexcept { return start.plus(static_cast<int>(t)); }
};

struct SeriesCollection {
	std::vector<MonthlySeries> series;
	YearMonth common_end;

	std::size_t size() const noexcept { return series.size(); }
	/// Throws std::out_of_range for an unknown id.
	const MonthlySeries& find(const std::string& id) const;
	std::vector<std::string> ids() const;
};

struct SplitSpec {
	int test_months = 12;
	int valid_months = 12;
};

struct SplitResult {
	SeriesCollection train;
	std::vector<std::vector<double>> valid_targets;
	std::vector<std::vector<double>> test_targets;
};

/// Minimum training length kept by split().
inline constexpr std::size_t kMinTrainMonths = 24;

/// Parses `id,year,month,value` rows. Rows of one id may appear in any order;
/// after sorting they must be gap-free and duplicate-free, values must be
/// strictly positive and every id must end at the same month.
SeriesCollection read_csv(std::istream& in);
SeriesCollection load_csv(const std::filesystem::path& path);
void write_csv(const SeriesCollection& collection, std::ostream& out);
void save_csv(const SeriesCollection& collection, const std::filesystem::path& path);

/// Checks the collection invariants; throws std::invalid_argument.
void validate(const SeriesCollection& collection);

SplitResult split(const SeriesCollection& collection, const SplitSpec& spec = {});

/// Drops the last `months` observations of every series.
SeriesCollection drop_last(const SeriesCollection& collection, int months);

struct SynthOptions {
	double noise = 0.02;       // std. dev. of the log multiplicative noise
	double trend_scale = 1.0;  // 0 gives a flat trend (pure level * season)
	YearMonth end{2014, 12}; // common end month
};

/// trend * season * noise series, deterministic in all arguments.
SeriesCollection synthesize(int n_series, int n_years, std::uint64_t seed, const SynthOptions& options = {});

} // namespace mtlf
