#include "mtlf/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace mtlf {

void LossConfig::validate() const {
	if (!(tau > 0.0 && tau < 1.0)) {
		throw std::invalid_argument("tau must lie in (0, 1)");
	}
	if (!(lambda >= 0.0)) {
		throw std::invalid_argument("lambda must be non-negative");
	}
}

double pinball(double x, double x_hat, double tau) {
	return x >= x_hat ? (x - x_hat) * tau : (x_hat - x) * (1.0 - tau);
}

ad::Var pinball(ad::Var x, ad::Var x_hat, double tau) {
	const ad::Var d = x - x_hat;
	return ad::max(d * tau, d * (tau - 1.0));
}

double level_penalty(std::span<const double> levels) {
	if (levels.size() < 3) {
		throw std::invalid_argument("level penalty needs at least 3 levels");
	}
	double sum = 0.0;
	for (std::size_t t = 0; t + 2 < levels.size(); ++t) {
		const double e = std::log(levels[t + 2] * levels[t] / (levels[t + 1] * levels[t + 1]));
		sum += e * e;
	}
	return 2.0 * sum / static_cast<double>(levels.size() - 2);
}

ad::Var level_penalty(std::span<const ad::Var> levels) {
	if (levels.size() < 3) {
		throw std::invalid_argument("level penalty needs at least 3 levels");
	}
	std::vector<ad::Var> logs;
	logs.reserve(levels.size());
	for (const ad::Var& l : levels) {
		logs.push_back(ad::log(l));
	}
	ad::Var sum = levels.front().tape->constant(0.0);
	for (std::size_t t = 0; t + 2 < logs.size(); ++t) {
		const ad::Var e = (logs[t + 2] - logs[t + 1]) - (logs[t + 1] - logs[t]);
		sum = sum + e * e;
	}
	return sum * (2.0 / static_cast<double>(levels.size() - 2));
}

double total_loss(std::span<const double> pinball_terms, std::span<const std::vector<double>> levels,
                  const LossConfig& cfg) {
	if (pinball_terms.empty()) {
		throw std::invalid_argument("total loss of an empty batch");
	}
	double fit = 0.0;
	for (double v : pinball_terms) {
		fit += v;
	}
	fit /= static_cast<double>(pinball_terms.size());
	if (cfg.lambda == 0.0 || levels.empty()) {
		return fit;
	}
	double pen = 0.0;
	for (const auto& l : levels) {
		pen += level_penalty(l);
	}
	return fit + cfg.lambda * pen / static_cast<double>(levels.size());
}

ad::Var total_loss(std::span<const ad::Var> pinball_terms, std::span<const std::vector<ad::Var>> levels,
                   const LossConfig& cfg) {
	if (pinball_terms.empty()) {
		throw std::invalid_argument("total loss of an empty batch");
	}
	ad::Tape& tape = *pinball_terms.front().tape;
	ad::Var fit = tape.constant(0.0);
	for (const ad::Var& v : pinball_terms) {
		fit = fit + v;
	}
	fit = fit * (1.0 / static_cast<double>(pinball_terms.size()));
	if (cfg.lambda == 0.0 || levels.empty()) {
		return fit;
	}
	ad::Var pen = tape.constant(0.0);
	for (const auto& l : levels) {
		pen = pen + level_penalty(l);
	}
	return fit + pen * (cfg.lambda / static_cast<double>(levels.size()));
}

} // namespace mtlf
