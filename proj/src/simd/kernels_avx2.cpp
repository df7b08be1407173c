// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "mtlf/simd/kernels.hpp"

#include <immintrin.h>

namespace mtlf::simd::detail {

double dot_avx2(const double* x, const double* y, std::size_t n) {
	__m256d acc0 = _mm256_setzero_pd();
	__m256d acc1 = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 8 <= n; i += 8) {
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
		acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
	}
	if (i + 4 <= n) {
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
		i += 4;
	}
	acc0 = _mm256_add_pd(acc0, acc1);
	__m128d lo = _mm256_castpd256_pd128(acc0);
	__m128d hi = _mm256_extractf128_pd(acc0, 1);
	lo = _mm_add_pd(lo, hi);
	double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
	for (; i < n; ++i) {
		acc += x[i] * y[i];
	}
	return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
	const __m256d va = _mm256_set1_pd(a);
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4) {
		__m256d vy = _mm256_loadu_pd(y + i);
		vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
		_mm256_storeu_pd(y + i, vy);
	}
	for (; i < n; ++i) {
		y[i] += a * x[i];
	}
}

} // namespace mtlf::simd::detail
