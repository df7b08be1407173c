#include "mtlf/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mtlf::simd {
namespace {

constexpr KernelTable kScalar{Isa::scalar, &detail::dot_scalar, &detail::axpy_scalar};
#if defined(MTLF_WITH_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &detail::dot_avx2, &detail::axpy_avx2};
#endif
#if defined(MTLF_WITH_NEON)
constexpr KernelTable kNeon{Isa::neon, &detail::dot_neon, &detail::axpy_neon};
#endif

const KernelTable* best_available() noexcept {
	if (const char* env = std::getenv("MTLF_ISA")) {
		try {
			Isa wanted = parse_isa(env);
			if (supported(wanted)) {
				return &table(wanted);
			}
		} catch (const std::invalid_argument&) {
			// unknown value: fall through to autodetect
		}
	}
	if (supported(Isa::avx2)) {
		return &table(Isa::avx2);
	}
	if (supported(Isa::neon)) {
		return &table(Isa::neon);
	}
	return &kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

} // namespace

bool supported(Isa isa) noexcept {
	switch (isa) {
	case Isa::scalar:
		return true;
	case Isa::avx2:
#if defined(MTLF_WITH_AVX2)
		return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
		return false;
#endif
	case Isa::neon:
#if defined(MTLF_WITH_NEON)
		return true;
#else
		return false;
#endif
	}
	return false;
}

const KernelTable& table(Isa isa) {
	if (!supported(isa)) {
		throw std::invalid_argument("kernel variant not available: " + std::string(name(isa)));
	}
	switch (isa) {
#if defined(MTLF_WITH_AVX2)
	case Isa::avx2:
		return kAvx2;
#endif
#if defined(MTLF_WITH_NEON)
	case Isa::neon:
		return kNeon;
#endif
	default:
		return kScalar;
	}
}

const KernelTable& active() noexcept {
	const KernelTable* t = g_active.load(std::memory_order_acquire);
	if (t == nullptr) {
		const KernelTable* best = best_available();
		const KernelTable* expected = nullptr;
		g_active.compare_exchange_strong(expected, best, std::memory_order_acq_rel);
		t = g_active.load(std::memory_order_acquire);
	}
	return *t;
}

void force(Isa isa) {
	g_active.store(&table(isa), std::memory_order_release);
}

std::string_view name(Isa isa) noexcept {
	switch (isa) {
	case Isa::scalar:
		return "scalar";
	case Isa::avx2:
		return "avx2";
	case Isa::neon:
		return "neon";
	}
	return "unknown";
}

Isa parse_isa(std::string_view text) {
	if (text == "scalar") {
		return Isa::scalar;
	}
	if (text == "avx2") {
		return Isa::avx2;
	}
	if (text == "neon") {
		return Isa::neon;
	}
	throw std::invalid_argument("unknown kernel variant: " + std::string(text));
}

} // namespace mtlf::simd
