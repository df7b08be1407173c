#include "mtlf/simd/kernels.hpp"

namespace mtlf::simd::detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
	double acc = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		acc += x[i] * y[i];
	}
	return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
	for (std::size_t i = 0; i < n; ++i) {
		y[i] += a * x[i];
	}
}

} // namespace mtlf::simd::detail
