#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels used by the tape's fused affine nodes. Each kernel has a
// scalar reference implementation and, where the build and the CPU allow it,
// a vectorized variant. The active table is picked once at first use.

namespace mtlf::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
	Isa isa;
	// sum_i x[i] * y[i]
	double (*dot)(const double* x, const double* y, std::size_t n);
	// y[i] += a * x[i]
	void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

/// True when the variant was compiled in and the running CPU supports it.
bool supported(Isa isa) noexcept;

/// Kernel table for a specific variant; throws std::invalid_argument when unsupported.
const KernelTable& table(Isa isa);

/// Table used by the library. Defaults to the widest supported variant unless
/// the MTLF_ISA environment variable (scalar|avx2|neon) or force() says otherwise.
const KernelTable& active() noexcept;

void force(Isa isa);

std::string_view name(Isa isa) noexcept;
Isa parse_isa(std::string_view text);

namespace detail {
double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
#if defined(MTLF_WITH_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
#endif
#if defined(MTLF_WITH_NEON)
double dot_neon(const double* x, const double* y, std::size_t n);
void axpy_neon(double a, const double* x, double* y, std::size_t n);
#endif
} // namespace detail

} // namespace mtlf::simd
