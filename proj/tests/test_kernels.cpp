#include "mtlf/simd/kernels.hpp"

#include "mtlf/random.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace mtlf;

namespace {

std::vector<simd::Isa> variants() {
	std::vector<simd::Isa> out;
	for (auto isa : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
		if (simd::supported(isa)) {
			out.push_back(isa);
		}
	}
	return out;
}

} // namespace

TEST_CASE("every available kernel variant matches the scalar reference") {
	const auto& ref = simd::table(simd::Isa::scalar);
	Rng rng(11);
	for (auto isa : variants()) {
		CAPTURE(simd::name(isa));
		const auto& k = simd::table(isa);
		// lengths cover empty, tails and the 52/80 rows used by the network
		for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 12u, 16u, 17u, 40u, 52u, 80u, 131u}) {
			std::vector<double> x(n);
			std::vector<double> y(n);
			for (std::size_t i = 0; i < n; ++i) {
				x[i] = rng.uniform(-2.0, 2.0);
				y[i] = rng.uniform(-2.0, 2.0);
			}
			const double a = ref.dot(x.data(), y.data(), n);
			const double b = k.dot(x.data(), y.data(), n);
			double scale = 0.0;
			for (std::size_t i = 0; i < n; ++i) {
				scale += std::abs(x[i] * y[i]);
			}
			CHECK(std::abs(a - b) <= 1e-14 * (1.0 + scale));

			std::vector<double> z1 = y;
			std::vector<double> z2 = y;
			ref.axpy(0.37, x.data(), z1.data(), n);
			k.axpy(0.37, x.data(), z2.data(), n);
			for (std::size_t i = 0; i < n; ++i) {
				CHECK(std::abs(z1[i] - z2[i]) <= 1e-15 * (1.0 + std::abs(z1[i])));
			}
		}
	}
}

TEST_CASE("unsupported variants are rejected and names round-trip") {
	for (auto isa : {simd::Isa::scalar, simd::Isa::avx2, simd::Isa::neon}) {
		CHECK(simd::parse_isa(simd::name(isa)) == isa);
		if (!simd::supported(isa)) {
			CHECK_THROWS_AS(simd::table(isa), std::invalid_argument);
		}
	}
	CHECK_THROWS_AS(simd::parse_isa("sse9"), std::invalid_argument);
	CHECK(simd::supported(simd::active().isa));
}
