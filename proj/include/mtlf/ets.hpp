#pragma once

#include "mtlf/tape.hpp"

#include <array>
#include <span>
#include <vector>

// Trendless multiplicative-seasonal exponential smoothing with cycle 12:
//
//   l_t      = alpha * y_t / s_t + (1 - alpha) * l_{t-1}
//   s_{t+12} = beta  * y_t / l_t + (1 - beta)  * s_t
//
// alpha = logistic(alpha_raw), beta = logistic(beta_raw) and the first twelve
// seasonal components are exp(init_season_raw), so every raw value is
// unconstrained. Traces are stored 0-based: levels[t] is l_{t+1} and
// seasonals[t] is s_{t+1}; seasonals run 12 entries past the series end.

namespace mtlf {

inline constexpr std::size_t kSeason = 12;
inline constexpr std::size_t kEtsParamCount = 2 + kSeason;

struct EtsParams {
	double alpha_raw = 0.0;
	double beta_raw = 0.0;
	std::array<double, kSeason> init_season_raw{};

	double alpha() const noexcept { return ad::logistic(alpha_raw); }
	double beta() const noexcept { return ad::logistic(beta_raw); }

	/// (alpha_raw, beta_raw, init_season_raw...): the order used on tapes and in optimizers.
	std::array<double, kEtsParamCount> flat() const noexcept;
	static EtsParams from_flat(std::span<const double> v);
};

/// EtsParams registered as a contiguous block of tape leaves.
struct EtsLeaves {
	ad::NodeId first = 0;
	ad::Var alpha_raw;
	ad::Var beta_raw;
	std::array<ad::Var, kSeason> init_season_raw;
};

EtsLeaves register_leaves(ad::Tape& tape, const EtsParams& params);

struct EtsTrace {
	std::vector<ad::Var> levels;    // T entries
	std::vector<ad::Var> seasonals; // T + 12 entries
};

/// Plain-value trace, same layout as EtsTrace.
struct EtsValues {
	std::vector<double> levels;
	std::vector<double> seasonals;
};

/// Mean of the first seasonal cycle; used as l_0.
double initial_level(std::span<const double> y);

/// Records the recursion on the leaves' tape with l_0 = initial_level(y).
/// Throws std::invalid_argument for series shorter than 12.
EtsTrace run_smoother(std::span<const double> y, const EtsLeaves& params, ad::Tape& tape);
EtsTrace run_smoother(std::span<const double> y, const EtsLeaves& params, ad::Tape& tape, double level0);

/// Tape-free evaluation with explicit coefficients in [0, 1].
EtsValues run_smoother(std::span<const double> y, double alpha, double beta, std::span<const double> init_season,
                       double level0);

/// alpha = beta = 0.5; init_season_raw[i] = log(mean of positions i, i+12 /
/// mean of the first 24 values). Requires at least 24 observations.
EtsParams init_params(std::span<const double> y);

} // namespace mtlf
