#pragma once

#include "mtlf/tape.hpp"

#include <span>
#include <vector>

namespace mtlf {

struct LossConfig {
	double tau = 0.4;
	double lambda = 50.0;

	/// Throws std::invalid_argument unless 0 < tau < 1 and lambda >= 0.
	void validate() const;
};

/// (x - x_hat) * tau if x >= x_hat, else (x_hat - x) * (1 - tau).
double pinball(double x, double x_hat, double tau);
/// Same, recorded as max(tau * d, (tau - 1) * d) with d = x - x_hat; the tie
/// at d = 0 takes the x >= x_hat branch.
ad::Var pinball(ad::Var x, ad::Var x_hat, double tau);

/// Level wiggliness: 2 / (T - 2) * sum_t (log(l_{t+2} l_t / l_{t+1}^2))^2.
double level_penalty(std::span<const double> levels);
ad::Var level_penalty(std::span<const ad::Var> levels);

/// mean(pinball_terms) + lambda * mean over series of level_penalty.
double total_loss(std::span<const double> pinball_terms, std::span<const std::vector<double>> levels,
                  const LossConfig& cfg);
ad::Var total_loss(std::span<const ad::Var> pinball_terms, std::span<const std::vector<ad::Var>> levels,
                   const LossConfig& cfg);

} // namespace mtlf
