#pragma once

#include "mtlf/windowing.hpp"

#include <span>
#include <string_view>

namespace mtlf {

enum class BaselineKind { seasonal_naive, holt_winters };

BaselineKind parse_baseline(std::string_view name);
std::string_view baseline_name(BaselineKind kind) noexcept;

/// The last 12 observations. Needs at least 12.
Vec12 seasonal_naive(std::span<const double> y);

struct HoltWintersFit {
	double alpha = 0.0;
	double beta = 0.0;
	double sse = 0.0; // one-step-ahead in-sample squared error
	Vec12 forecast{};
};

/// Trendless multiplicative Holt-Winters with alpha, beta chosen on the grid
/// {0.05, 0.10, ..., 0.95} by one-step-ahead squared error of l_{t-1} s_t.
/// Seasonal starts and l_0 as in the learned model's initialization. Needs 24.
HoltWintersFit holt_winters_fit(std::span<const double> y);
Vec12 holt_winters_forecast(std::span<const double> y);

Vec12 baseline_forecast(BaselineKind kind, std::span<const double> y);

} // namespace mtlf
