#include "mtlf/baselines.hpp"

#include "mtlf/ets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mtlf {

BaselineKind parse_baseline(std::string_view name) {
	if (name == "seasonal_naive") {
		return BaselineKind::seasonal_naive;
	}
	if (name == "holt_winters") {
		return BaselineKind::holt_winters;
	}
	throw std::invalid_argument("unknown baseline: " + std::string(name));
}

std::string_view baseline_name(BaselineKind kind) noexcept {
	return kind == BaselineKind::seasonal_naive ? "seasonal_naive" : "holt_winters";
}

Vec12 seasonal_naive(std::span<const double> y) {
	if (y.size() < kSeason) {
		throw std::invalid_argument("seasonal naive needs at least 12 observations");
	}
	Vec12 out{};
	for (std::size_t j = 0; j < kSeason; ++j) {
		out[j] = y[y.size() - kSeason + j];
	}
	return out;
}

HoltWintersFit holt_winters_fit(std::span<const double> y) {
	if (y.size() < 2 * kSeason) {
		throw std::invalid_argument("Holt-Winters baseline needs at least 24 observations");
	}
	const EtsParams init = init_params(y);
	std::array<double, kSeason> season{};
	for (std::size_t i = 0; i < kSeason; ++i) {
		season[i] = std::exp(init.init_season_raw[i]);
	}
	const double level0 = initial_level(y);

	HoltWintersFit best;
	best.sse = std::numeric_limits<double>::infinity();
	for (int ia = 1; ia <= 19; ++ia) {
		for (int ib = 1; ib <= 19; ++ib) {
			const double alpha = 0.05 * ia;
			const double beta = 0.05 * ib;
			const EtsValues tr = run_smoother(y, alpha, beta, season, level0);
			double sse = 0.0;
			for (std::size_t t = 0; t < y.size(); ++t) {
				const double prev = t == 0 ? level0 : tr.levels[t - 1];
				const double e = y[t] - prev * tr.seasonals[t];
				sse += e * e;
			}
			if (sse < best.sse) {
				best.sse = sse;
				best.alpha = alpha;
				best.beta = beta;
				for (std::size_t h = 0; h < kSeason; ++h) {
					best.forecast[h] = tr.levels.back() * tr.seasonals[y.size() + h];
				}
			}
		}
	}
	return best;
}

Vec12 holt_winters_forecast(std::span<const double> y) { return holt_winters_fit(y).forecast; }

Vec12 baseline_forecast(BaselineKind kind, std::span<const double> y) {
	return kind == BaselineKind::seasonal_naive ? seasonal_naive(y) : holt_winters_forecast(y);
}

} // namespace mtlf
