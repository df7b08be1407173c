#pragma once

#include "mtlf/gradcheck.hpp"

#include <cstdint>

namespace mtlf {

/// Finite-difference checks of three graphs built from seeded fixtures:
///   ets   smoother unrolled over 24 months, one-step log errors + level penalty
///   net   3-step unroll of an m = 4 network, mean squared error
///   full  complete batch loss on 2 synthetic series of 36 months, m = 4
struct GradCheckSuite {
	ad::GradCheckReport ets;
	ad::GradCheckReport net;
	ad::GradCheckReport full;
};

GradCheckSuite run_gradcheck_suite(std::uint64_t seed = 1, double step = 1e-5);

} // namespace mtlf
