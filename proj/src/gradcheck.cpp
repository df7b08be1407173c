#include "mtlf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mtlf::ad {
namespace {

struct Evaluation {
	double loss;
	std::vector<std::uint8_t> branches;
};

Evaluation evaluate(const LossBuilder& builder, std::span<const double> leaves) {
	Tape tape;
	const NodeId first = tape.leaf_block(leaves);
	std::vector<Var> vars(leaves.size());
	for (std::size_t i = 0; i < leaves.size(); ++i) {
		vars[i] = tape.var(first + static_cast<NodeId>(i));
	}
	const Var loss = builder(tape, vars);
	if (!std::isfinite(loss.value())) {
		throw std::domain_error("non-finite loss during gradient check");
	}
	return {loss.value(), tape.branches()};
}

} // namespace

GradCheckReport check_gradients(const LossBuilder& builder, std::span<const double> leaves, double step) {
	if (!(step > 0.0)) {
		throw std::invalid_argument("gradient check step must be positive");
	}
	GradCheckReport report;
	std::vector<std::uint8_t> base_branches;
	{
		Tape tape;
		const NodeId first = tape.leaf_block(leaves);
		std::vector<Var> vars(leaves.size());
		for (std::size_t i = 0; i < leaves.size(); ++i) {
			vars[i] = tape.var(first + static_cast<NodeId>(i));
		}
		const Var loss = builder(tape, vars);
		if (!std::isfinite(loss.value())) {
			throw std::domain_error("non-finite loss during gradient check");
		}
		const Gradients grads = backward(tape, loss);
		report.analytic.assign(grads.block(first, leaves.size()).begin(), grads.block(first, leaves.size()).end());
		base_branches = tape.branches();
	}

	std::vector<double> point(leaves.begin(), leaves.end());
	report.numeric.resize(leaves.size());
	report.errors.resize(leaves.size());
	for (std::size_t i = 0; i < leaves.size(); ++i) {
		const double saved = point[i];
		point[i] = saved + step;
		const Evaluation up = evaluate(builder, point);
		point[i] = saved - step;
		const Evaluation down = evaluate(builder, point);
		point[i] = saved;

		const double numeric = (up.loss - down.loss) / (2.0 * step);
		const double analytic = report.analytic[i];
		const double diff = std::abs(analytic - numeric);
		const double err =
		    std::abs(analytic) < 1e-8 ? diff : diff / std::max(std::abs(analytic), std::abs(numeric));
		report.numeric[i] = numeric;
		report.errors[i] = err;

		if (up.branches != base_branches || down.branches != base_branches) {
			report.kink_leaves.push_back(i);
			continue;
		}
		if (err > report.max_relative_error) {
			report.max_relative_error = err;
			report.worst_leaf = i;
		}
	}
	return report;
}

} // namespace mtlf::ad
