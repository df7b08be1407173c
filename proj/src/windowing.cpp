#include "mtlf/windowing.hpp"

#include <cmath>
#include <stdexcept>

namespace mtlf {
namespace {

// Shared by training and forecast windows. Anchors run over [first, last].
std::vector<TrainingSample> make_windows(std::span<const double> y, const EtsTrace& trace, std::size_t last_anchor, bool with_target) {
	const std::size_t n = y.size();
	if (trace.levels.size() != n || trace.seasonals.size() != n + kSeason) {
		throw std::invalid_argument("ETS trace does not match series length");
	}
	const std::size_t first_anchor = kSeason - 1;
	const std::size_t seasonal_end = last_anchor + (with_target ? kSeason : 0) + 1;

	std::vector<ad::Var> log_s(seasonal_end);
	for (std::size_t t = 0; t < seasonal_end; ++t) {
		log_s[t] = ad::log(trace.seasonals[t]);
	}

	std::vector<TrainingSample> out;
	out.reserve(last_anchor - first_anchor + 1);
	for (std::size_t a = first_anchor; a <= last_anchor; ++a) {
		TrainingSample s;
		s.t_anchor = a;
		s.level_star = trace.levels[a];
		s.has_target = with_target;
		const ad::Var log_level = ad::log(s.level_star);
		for (std::size_t j = 0; j < kSeason; ++j) {
			const std::size_t t = a + 1 - kSeason + j;
			s.x_in[j] = (std::log(y[t]) - log_level) - log_s[t];
			s.horizon_seasonals[j] = trace.seasonals[a + 1 + j];
		}
		if (with_target) {
			for (std::size_t j = 0; j < kSeason; ++j) {
				const std::size_t t = a + 1 + j;
				s.x_out[j] = (std::log(y[t]) - log_level) - log_s[t];
			}
		}
		out.push_back(s);
	}
	return out;
}

} // namespace

std::size_t TrainingSet::sample_count() const noexcept {
	std::size_t n = 0;
	for (const auto& s : per_series) {
		n += s.samples.size();
	}
	return n;
}

double preprocess_value(double y, double level_star, double seasonal) {
	if (!(y > 0.0) || !(level_star > 0.0) || !(seasonal > 0.0)) {
		throw std::invalid_argument("preprocess: arguments must be positive");
	}
	return std::log(y / (level_star * seasonal));
}

Vec12 postprocess_forecast(std::span<const double> x_hat, double level_star, std::span<const double> horizon_seasonals) {
	if (x_hat.size() != kSeason || horizon_seasonals.size() != kSeason) {
		throw std::invalid_argument("postprocess: expected 12-vectors");
	}
	if (!(level_star > 0.0)) {
		throw std::invalid_argument("postprocess: level must be positive");
	}
	Vec12 out{};
	for (std::size_t j = 0; j < kSeason; ++j) {
		if (!std::isfinite(x_hat[j])) {
			throw std::domain_error("postprocess: non-finite network output");
		}
		if (!(horizon_seasonals[j] > 0.0)) {
			throw std::invalid_argument("postprocess: seasonal components must be positive");
		}
		out[j] = std::exp(x_hat[j]) * level_star * horizon_seasonals[j];
	}
	return out;
}

std::vector<TrainingSample> build_series_samples(std::span<const double> y, const EtsTrace& trace, ad::Tape& /*tape*/) {
	if (y.size() < 2 * kSeason) {
		throw std::invalid_argument("series shorter than 24 months yields no training sample");
	}
	return make_windows(y, trace, y.size() - kSeason - 1, true);
}

std::vector<TrainingSample> build_input_windows(std::span<const double> y, const EtsTrace& trace, ad::Tape& /*tape*/) {
	if (y.size() < kSeason) {
		throw std::invalid_argument("series shorter than one seasonal cycle");
	}
	return make_windows(y, trace, y.size() - 1, false);
}

TrainingSet build_training_set(const SeriesCollection& collection, std::span<const EtsTrace> traces, ad::Tape& tape) {
	if (traces.size() != collection.size()) {
		throw std::invalid_argument("one ETS trace per series required");
	}
	TrainingSet out;
	out.per_series.reserve(collection.size());
	for (std::size_t i = 0; i < collection.size(); ++i) {
		const auto& s = collection.series[i];
		if (s.size() < 2 * kSeason) {
			throw std::invalid_argument("series " + s.id + " has fewer than 24 observations and yields no sample");
		}
		out.per_series.push_back({s.id, build_series_samples(s.values, traces[i], tape)});
	}
	return out;
}

} // namespace mtlf
