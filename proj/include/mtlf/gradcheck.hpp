#pragma once

#include "mtlf/tape.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mtlf::ad {

/// Builds a loss on `tape` from leaves that check_gradients has already placed
/// on it (in the order given). Must be deterministic.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> leaves)>;

struct GradCheckReport {
	double max_relative_error = 0.0;
	std::size_t worst_leaf = 0;
	std::vector<double> analytic;
	std::vector<double> numeric;
	std::vector<double> errors;
	// Leaves whose perturbation flipped a max() branch; their error is reported
	// in `errors` but excluded from the maximum.
	std::vector<std::size_t> kink_leaves;
};

/// Central finite differences against backward(). Relative error per leaf is
/// |a - n| / max(|a|, |n|), or |a - n| when |a| < 1e-8.
GradCheckReport check_gradients(const LossBuilder& builder, std::span<const double> leaves, double step);

} // namespace mtlf::ad
