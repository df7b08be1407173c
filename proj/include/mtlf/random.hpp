#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mtlf {

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

/// Seed for a (master, a, b) triple: mix64(mix64(mix64(master) ^ a) ^ b).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
	return mix64(mix64(mix64(master) ^ a) ^ b);
}

// mt19937_64 output is fully specified by the standard; the distributions are
// not, so uniform and normal draws are built here to keep results identical
// across standard library implementations.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	/// Uniform in [0, 1).
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/// Uniform integer in [0, n).
	std::uint64_t below(std::uint64_t n) {
		// rejection sampling to avoid modulo bias
		const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
		std::uint64_t x;
		do {
			x = engine_();
		} while (x >= limit);
		return x % n;
	}

	/// Standard normal via Box-Muller.
	double normal() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		double u1 = 0.0;
		while (u1 <= 0.0) {
			u1 = uniform();
		}
		const double u2 = uniform();
		const double r = std::sqrt(-2.0 * std::log(u1));
		spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
		has_spare_ = true;
		return r * std::cos(2.0 * std::numbers::pi * u2);
	}

	/// Fisher-Yates shuffle.
	template <class T>
	void shuffle(T& items) {
		for (std::size_t i = items.size(); i > 1; --i) {
			std::swap(items[i - 1], items[below(i)]);
		}
	}

private:
	std::mt19937_64 engine_;
	double spare_ = 0.0;
	bool has_spare_ = false;
};

} // namespace mtlf
