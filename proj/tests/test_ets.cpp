#include "mtlf/ets.hpp"

#include "mtlf/dataset.hpp"
#include "mtlf/gradcheck.hpp"
#include "mtlf/random.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace mtlf;

namespace {

EtsTrace trace_on(ad::Tape& tape, std::span<const double> y, const EtsParams& p, double level0) {
	const EtsLeaves leaves = register_leaves(tape, p);
	return run_smoother(y, leaves, tape, level0);
}

double raw_of(double prob) { return std::log(prob / (1.0 - prob)); }

} // namespace

TEST_CASE("constant series is a fixed point for any coefficients") {
	const std::vector<double> y(40, 250.0);
	for (double a : {-3.0, 0.0, 2.0}) {
		for (double b : {-1.0, 0.7}) {
			ad::Tape tape;
			EtsParams p;
			p.alpha_raw = a;
			p.beta_raw = b;
			const EtsTrace tr = trace_on(tape, y, p, 250.0);
			REQUIRE(tr.levels.size() == 40);
			REQUIRE(tr.seasonals.size() == 52);
			for (const auto& l : tr.levels) {
				CHECK(l.value() == doctest::Approx(250.0).epsilon(1e-14));
			}
			for (const auto& s : tr.seasonals) {
				CHECK(s.value() == doctest::Approx(1.0).epsilon(1e-14));
			}
		}
	}
}

TEST_CASE("two hand-unrolled steps") {
	std::vector<double> y = {100, 110};
	for (int i = 0; i < 10; ++i) {
		y.push_back(100);
	}
	ad::Tape tape;
	const EtsTrace tr = trace_on(tape, y, EtsParams{}, 100.0);
	CHECK(tr.levels[0].value() == doctest::Approx(100.0));
	CHECK(tr.levels[1].value() == doctest::Approx(105.0));
	CHECK(tr.seasonals[12].value() == doctest::Approx(1.0));
	CHECK(tr.seasonals[13].value() == doctest::Approx(0.5 * 110.0 / 105.0 + 0.5).epsilon(1e-14));
	CHECK(tr.seasonals[13].value() == doctest::Approx(1.02381).epsilon(1e-5));
}

TEST_CASE("alpha near zero freezes the level") {
	const auto c = synthesize(1, 4, 3);
	EtsParams p;
	p.alpha_raw = -60.0;
	ad::Tape tape;
	const double l0 = initial_level(c.series[0].values);
	const EtsTrace tr = trace_on(tape, c.series[0].values, p, l0);
	for (const auto& l : tr.levels) {
		CHECK(l.value() == doctest::Approx(l0).epsilon(1e-14));
	}
}

TEST_CASE("tape and plain evaluations agree") {
	const auto c = synthesize(1, 6, 12);
	const auto& y = c.series[0].values;
	EtsParams p = init_params(y);
	p.alpha_raw = 0.4;
	p.beta_raw = -1.1;
	ad::Tape tape;
	const EtsTrace tr = trace_on(tape, y, p, initial_level(y));
	std::vector<double> season;
	for (double r : p.init_season_raw) {
		season.push_back(std::exp(r));
	}
	const EtsValues v = run_smoother(y, p.alpha(), p.beta(), season, initial_level(y));
	for (std::size_t t = 0; t < y.size(); ++t) {
		CHECK(tr.levels[t].value() == doctest::Approx(v.levels[t]).epsilon(1e-13));
	}
	for (std::size_t t = 0; t < y.size() + kSeason; ++t) {
		CHECK(tr.seasonals[t].value() == doctest::Approx(v.seasonals[t]).epsilon(1e-13));
	}
}

TEST_CASE("short series are rejected") {
	const std::vector<double> y(11, 1.0);
	ad::Tape tape;
	const EtsLeaves leaves = register_leaves(tape, EtsParams{});
	CHECK_THROWS_AS(run_smoother(y, leaves, tape), std::invalid_argument);
	CHECK_THROWS_AS(init_params(std::vector<double>(23, 1.0)), std::invalid_argument);
}

TEST_CASE("initial parameters") {
	SUBCASE("flat series gives unit seasonals") {
		const EtsParams p = init_params(std::vector<double>(30, 77.0));
		for (double r : p.init_season_raw) {
			CHECK(r == doctest::Approx(0.0));
		}
		CHECK(p.alpha() == 0.5);
		CHECK(p.beta() == 0.5);
	}
	SUBCASE("month seven at twice the yearly mean") {
		// 11 * 100 + 220 = 1320, yearly mean 110, so 220 = 2 * mean.
		std::vector<double> y(24, 100.0);
		y[6] = 220.0;
		y[18] = 220.0;
		const EtsParams p = init_params(y);
		CHECK(std::exp(p.init_season_raw[6]) == doctest::Approx(2.0).epsilon(1e-14));
		CHECK(std::exp(p.init_season_raw[0]) == doctest::Approx(100.0 / 110.0).epsilon(1e-14));
	}
}

TEST_CASE("levels and seasonals stay positive for arbitrary raw parameters") {
	Rng rng(17);
	const auto c = synthesize(3, 5, 4);
	for (int trial = 0; trial < 30; ++trial) {
		EtsParams p;
		p.alpha_raw = rng.uniform(-8.0, 8.0);
		p.beta_raw = rng.uniform(-8.0, 8.0);
		for (double& r : p.init_season_raw) {
			r = rng.uniform(-2.0, 2.0);
		}
		const auto& y = c.series[static_cast<std::size_t>(trial) % 3].values;
		ad::Tape tape;
		const EtsTrace tr = trace_on(tape, y, p, initial_level(y));
		for (const auto& l : tr.levels) {
			CHECK(l.value() > 0.0);
		}
		for (const auto& s : tr.seasonals) {
			CHECK(s.value() > 0.0);
		}
	}
}

TEST_CASE("perfectly multiplicative series keeps levels and seasonals constant") {
	const std::array<double, 12> season = {0.8, 0.9, 1.1, 1.3, 1.0, 0.95, 0.85, 1.05, 1.2, 0.9, 1.0, 0.95};
	const double c = 500.0;
	std::vector<double> y;
	for (int t = 0; t < 60; ++t) {
		y.push_back(c * season[static_cast<std::size_t>(t) % 12]);
	}
	EtsParams p;
	for (std::size_t i = 0; i < 12; ++i) {
		p.init_season_raw[i] = std::log(season[i]);
	}
	Rng rng(5);
	for (int trial = 0; trial < 5; ++trial) {
		p.alpha_raw = rng.uniform(-4.0, 4.0);
		p.beta_raw = rng.uniform(-4.0, 4.0);
		ad::Tape tape;
		const EtsTrace tr = trace_on(tape, y, p, c);
		for (const auto& l : tr.levels) {
			CHECK(l.value() == doctest::Approx(c).epsilon(1e-12));
		}
		for (std::size_t t = 0; t < tr.seasonals.size(); ++t) {
			CHECK(tr.seasonals[t].value() == doctest::Approx(season[t % 12]).epsilon(1e-12));
		}
	}
}

TEST_CASE("smaller alpha gives a smoother level curve") {
	const auto c = synthesize(6, 8, 21);
	auto roughness = [](const std::vector<double>& l) {
		double s = 0.0;
		for (std::size_t t = 1; t < l.size(); ++t) {
			const double d = std::log(l[t] / l[t - 1]);
			s += d * d;
		}
		return s;
	};
	for (const auto& s : c.series) {
		const EtsParams p = init_params(s.values);
		std::vector<double> season;
		for (double r : p.init_season_raw) {
			season.push_back(std::exp(r));
		}
		const double l0 = initial_level(s.values);
		const double smooth = roughness(run_smoother(s.values, 0.05, 0.3, season, l0).levels);
		const double rough = roughness(run_smoother(s.values, 0.95, 0.3, season, l0).levels);
		CHECK(smooth <= rough);
	}
}

TEST_CASE("gradients reach every ETS parameter") {
	const auto c = synthesize(1, 4, 31);
	const auto& y = c.series[0].values;
	const auto flat = init_params(y).flat();
	auto report = ad::check_gradients(
	    [&](ad::Tape& tape, std::span<const ad::Var> v) {
		    EtsLeaves e;
		    e.first = v[0].id;
		    e.alpha_raw = v[0];
		    e.beta_raw = v[1];
		    for (std::size_t i = 0; i < kSeason; ++i) {
			    e.init_season_raw[i] = v[2 + i];
		    }
		    const EtsTrace tr = run_smoother(y, e, tape);
		    ad::Var s = tape.constant(0.0);
		    for (std::size_t t = 1; t < y.size(); ++t) {
			    const ad::Var r = ad::log(tr.levels[t - 1] * tr.seasonals[t] / y[t]);
			    s = s + r * r;
		    }
		    return s;
	    },
	    flat, 1e-5);
	CHECK(report.max_relative_error < 1e-4);
	for (double g : report.analytic) {
		CHECK(g != 0.0);
	}
}
