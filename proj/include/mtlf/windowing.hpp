#pragma once

#include "mtlf/dataset.hpp"
#include "mtlf/ets.hpp"
#include "mtlf/tape.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

// Rolling 12-month windows normalized by the ETS trace:
//   x = log(y / (l* * s))
// where l* is the level at the last input position and s is the element's own
// seasonal component. Windows advance by one month.

namespace mtlf {

using Vec12 = std::array<double, kSeason>;

struct TrainingSample {
	std::size_t t_anchor = 0; // 0-based index of the last input element
	std::array<ad::Var, kSeason> x_in;
	std::array<ad::Var, kSeason> x_out; // unset when has_target is false
	bool has_target = false;
	ad::Var level_star;
	std::array<ad::Var, kSeason> horizon_seasonals;
};

struct SeriesSamples {
	std::string series_id;
	std::vector<TrainingSample> samples; // chronological
};

struct TrainingSet {
	std::vector<SeriesSamples> per_series;

	std::size_t sample_count() const noexcept;
};

double preprocess_value(double y, double level_star, double seasonal);

Vec12 postprocess_forecast(std::span<const double> x_hat, double level_star, std::span<const double> horizon_seasonals);

/// Windows with a full output window inside the series: T - 23 samples.
std::vector<TrainingSample> build_series_samples(std::span<const double> y, const EtsTrace& trace, ad::Tape& tape);

/// Input-only windows for every anchor t = 11 .. T-1 (T - 11 windows); the
/// last one ends at the final observation and carries the forecast seasonals.
std::vector<TrainingSample> build_input_windows(std::span<const double> y, const EtsTrace& trace, ad::Tape& tape);

/// One SeriesSamples per series, in collection order. Throws for a series
/// shorter than 24 months.
TrainingSet build_training_set(const SeriesCollection& collection, std::span<const EtsTrace> traces, ad::Tape& tape);

} // namespace mtlf
