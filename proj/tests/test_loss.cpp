#include "mtlf/loss.hpp"

#include "mtlf/gradcheck.hpp"
#include "mtlf/random.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace mtlf;
using ad::Var;

TEST_CASE("pinball loss") {
	CHECK(pinball(0.7, 0.7, 0.4) == 0.0);
	CHECK(pinball(1.0, 0.5, 0.4) == doctest::Approx(0.2).epsilon(1e-15));
	CHECK(pinball(1.0, 1.5, 0.4) == doctest::Approx(0.3).epsilon(1e-15));

	Rng rng(3);
	for (int i = 0; i < 200; ++i) {
		const double x = rng.uniform(-3.0, 3.0);
		const double xh = rng.uniform(-3.0, 3.0);
		const double tau = rng.uniform(0.01, 0.99);
		CHECK(pinball(x, xh, tau) >= 0.0);
		CHECK(pinball(x, xh, 0.5) == doctest::Approx(0.5 * std::abs(x - xh)).epsilon(1e-15));

		ad::Tape tape;
		const double v = pinball(tape.constant(x), tape.constant(xh), tau).value();
		CHECK(v == doctest::Approx(pinball(x, xh, tau)).epsilon(1e-14));
	}
}

TEST_CASE("pinball gradient, including the kink") {
	ad::Tape tape;
	const Var x = tape.leaf(1.0);
	const Var xh = tape.leaf(0.5);
	auto g = ad::backward(tape, pinball(x, xh, 0.4));
	CHECK(g[xh] == doctest::Approx(-0.4));

	auto report = ad::check_gradients(
	    [](ad::Tape& t, std::span<const Var> v) { return pinball(v[0], v[1], 0.4); }, std::vector<double>{0.3, 0.3},
	    1e-6);
	CHECK(report.kink_leaves.size() == 2);
	CHECK(report.max_relative_error == 0.0);
}

TEST_CASE("level penalty") {
	CHECK(level_penalty(std::vector<double>{5, 5, 5, 5, 5}) == 0.0);
	std::vector<double> geo;
	for (int t = 0; t < 30; ++t) {
		geo.push_back(3.0 * std::pow(1.07, t));
	}
	CHECK(std::abs(level_penalty(geo)) < 1e-25);

	const std::vector<double> l{1, 2, 8};
	CHECK(level_penalty(l) == doctest::Approx(2.0 * std::log(2.0) * std::log(2.0)).epsilon(1e-14));
	CHECK(level_penalty(l) == doctest::Approx(0.96091).epsilon(1e-5));

	// invariant to a common scale
	Rng rng(9);
	std::vector<double> a;
	std::vector<double> b;
	for (int t = 0; t < 20; ++t) {
		a.push_back(rng.uniform(50.0, 150.0));
		b.push_back(a.back() * 37.5);
	}
	CHECK(level_penalty(a) >= 0.0);
	CHECK(level_penalty(b) == doctest::Approx(level_penalty(a)).epsilon(1e-12));

	ad::Tape tape;
	std::vector<Var> vars;
	for (double x : a) {
		vars.push_back(tape.constant(x));
	}
	CHECK(level_penalty(vars).value() == doctest::Approx(level_penalty(a)).epsilon(1e-13));

	CHECK_THROWS_AS(level_penalty(std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("total loss") {
	const LossConfig cfg;
	const std::vector<std::vector<double>> flat{{4, 4, 4, 4}, {9, 9, 9}};
	SUBCASE("perfect predictions and constant levels") {
		const std::vector<double> terms(24, 0.0);
		CHECK(total_loss(terms, flat, cfg) == 0.0);
	}
	SUBCASE("twelve components of 0.2") {
		const std::vector<double> terms(12, 0.2);
		CHECK(total_loss(terms, flat, cfg) == doctest::Approx(0.2).epsilon(1e-15));
	}
	SUBCASE("lambda 0 is the mean pinball") {
		const std::vector<std::vector<double>> wiggly{{1, 2, 8}, {3, 1, 3, 1}};
		const std::vector<double> terms{0.1, 0.3, 0.5};
		CHECK(total_loss(terms, wiggly, LossConfig{0.4, 0.0}) == doctest::Approx(0.3).epsilon(1e-15));
		const double expected = 0.3 + 50.0 * 0.5 * (level_penalty(wiggly[0]) + level_penalty(wiggly[1]));
		CHECK(total_loss(terms, wiggly, cfg) == doctest::Approx(expected).epsilon(1e-14));
	}
	SUBCASE("derivative in lambda equals the mean penalty") {
		const std::vector<std::vector<double>> wiggly{{1, 2, 8}, {3, 1, 3, 1}};
		const std::vector<double> terms{0.1, 0.3, 0.5};
		const double h = 1e-6;
		const double slope =
		    (total_loss(terms, wiggly, LossConfig{0.4, 2.0 + h}) - total_loss(terms, wiggly, LossConfig{0.4, 2.0 - h})) /
		    (2.0 * h);
		const double mean_pen = 0.5 * (level_penalty(wiggly[0]) + level_penalty(wiggly[1]));
		CHECK(slope == doctest::Approx(mean_pen).epsilon(1e-6));
	}
	CHECK_THROWS_AS(total_loss(std::vector<double>{}, flat, cfg), std::invalid_argument);
}

TEST_CASE("loss configuration") {
	CHECK_NOTHROW(LossConfig{}.validate());
	CHECK_THROWS_AS((LossConfig{0.0, 50.0}.validate()), std::invalid_argument);
	CHECK_THROWS_AS((LossConfig{1.0, 50.0}.validate()), std::invalid_argument);
	CHECK_THROWS_AS((LossConfig{0.4, -1.0}.validate()), std::invalid_argument);
}
