#include "mtlf/ets.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mtlf {

std::array<double, kEtsParamCount> EtsParams::flat() const noexcept {
	std::array<double, kEtsParamCount> out{};
	out[0] = alpha_raw;
	out[1] = beta_raw;
	for (std::size_t i = 0; i < kSeason; ++i) {
		out[2 + i] = init_season_raw[i];
	}
	return out;
}

EtsParams EtsParams::from_flat(std::span<const double> v) {
	if (v.size() != kEtsParamCount) {
		throw std::invalid_argument("ETS parameter vector must have 14 entries");
	}
	EtsParams p;
	p.alpha_raw = v[0];
	p.beta_raw = v[1];
	for (std::size_t i = 0; i < kSeason; ++i) {
		p.init_season_raw[i] = v[2 + i];
	}
	return p;
}

EtsLeaves register_leaves(ad::Tape& tape, const EtsParams& params) {
	const auto flat = params.flat();
	EtsLeaves out;
	out.first = tape.leaf_block(flat);
	out.alpha_raw = tape.var(out.first);
	out.beta_raw = tape.var(out.first + 1);
	for (std::size_t i = 0; i < kSeason; ++i) {
		out.init_season_raw[i] = tape.var(out.first + 2 + static_cast<ad::NodeId>(i));
	}
	return out;
}

double initial_level(std::span<const double> y) {
	if (y.size() < kSeason) {
		throw std::invalid_argument("series shorter than one seasonal cycle");
	}
	return std::accumulate(y.begin(), y.begin() + kSeason, 0.0) / kSeason;
}

EtsTrace run_smoother(std::span<const double> y, const EtsLeaves& params, ad::Tape& tape) {
	return run_smoother(y, params, tape, initial_level(y));
}

EtsTrace run_smoother(std::span<const double> y, const EtsLeaves& params, ad::Tape& tape, double level0) {
	if (y.size() < kSeason) {
		throw std::invalid_argument("series shorter than one seasonal cycle");
	}
	const std::size_t n = y.size();
	const ad::Var alpha = ad::logistic(params.alpha_raw);
	const ad::Var beta = ad::logistic(params.beta_raw);
	const ad::Var keep_level = 1.0 - alpha;
	const ad::Var keep_season = 1.0 - beta;

	EtsTrace trace;
	trace.levels.reserve(n);
	trace.seasonals.reserve(n + kSeason);
	for (std::size_t i = 0; i < kSeason; ++i) {
		trace.seasonals.push_back(ad::exp(params.init_season_raw[i]));
	}
	ad::Var prev = tape.constant(level0);
	for (std::size_t t = 0; t < n; ++t) {
		const ad::Var s = trace.seasonals[t];
		const ad::Var level = alpha * (y[t] / s) + keep_level * prev;
		trace.levels.push_back(level);
		trace.seasonals.push_back(beta * (y[t] / level) + keep_season * s);
		prev = level;
	}
	return trace;
}

EtsValues run_smoother(std::span<const double> y, double alpha, double beta, std::span<const double> init_season,
                       double level0) {
	if (y.size() < kSeason) {
		throw std::invalid_argument("series shorter than one seasonal cycle");
	}
	if (init_season.size() != kSeason) {
		throw std::invalid_argument("need 12 initial seasonal components");
	}
	EtsValues out;
	out.levels.reserve(y.size());
	out.seasonals.assign(init_season.begin(), init_season.end());
	out.seasonals.reserve(y.size() + kSeason);
	double prev = level0;
	for (std::size_t t = 0; t < y.size(); ++t) {
		const double s = out.seasonals[t];
		const double level = alpha * (y[t] / s) + (1.0 - alpha) * prev;
		out.levels.push_back(level);
		out.seasonals.push_back(beta * (y[t] / level) + (1.0 - beta) * s);
		prev = level;
	}
	return out;
}

EtsParams init_params(std::span<const double> y) {
	if (y.size() < 2 * kSeason) {
		throw std::invalid_argument("ETS initialization needs at least 24 observations");
	}
	const double overall = std::accumulate(y.begin(), y.begin() + 2 * kSeason, 0.0) / (2.0 * kSeason);
	EtsParams p;
	for (std::size_t i = 0; i < kSeason; ++i) {
		const double month_mean = 0.5 * (y[i] + y[i + kSeason]);
		p.init_season_raw[i] = std::log(month_mean / overall);
	}
	return p;
}

} // namespace mtlf
