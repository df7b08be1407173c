#include "mtlf/rdlstm.hpp"

#include "mtlf/gradcheck.hpp"
#include "mtlf/random.hpp"
#include "mtlf/simd/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace mtlf;
using ad::Var;

namespace {

std::vector<Var> constants(ad::Tape& tape, std::size_t n, double v) {
	std::vector<Var> out;
	for (std::size_t i = 0; i < n; ++i) {
		out.push_back(tape.constant(v));
	}
	return out;
}

std::vector<std::array<Var, kWindow>> random_inputs(ad::Tape& tape, std::size_t steps, std::uint64_t seed) {
	Rng rng(seed);
	std::vector<std::array<Var, kWindow>> out(steps);
	for (auto& w : out) {
		for (auto& x : w) {
			x = tape.constant(rng.uniform(-0.3, 0.3));
		}
	}
	return out;
}

} // namespace

TEST_CASE("zero-weight LSTM cell") {
	const NetworkParams p(3); // all zeros
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	const auto x = constants(tape, kWindow, 0.7);
	SUBCASE("zero state") {
		const auto st = lstm_cell(x, constants(tape, 3, 0.0), constants(tape, 3, 0.0), net, 0, tape);
		for (std::size_t r = 0; r < 3; ++r) {
			CHECK(st.c[r].value() == 0.0);
			CHECK(st.h[r].value() == 0.0);
		}
	}
	SUBCASE("unit cell state") {
		const auto st = lstm_cell(x, constants(tape, 3, 0.0), constants(tape, 3, 1.0), net, 0, tape);
		for (std::size_t r = 0; r < 3; ++r) {
			CHECK(st.c[r].value() == 0.5);
			CHECK(st.h[r].value() == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
			CHECK(st.h[r].value() == doctest::Approx(0.23106).epsilon(1e-5));
		}
	}
}

TEST_CASE("LSTM output stays inside (-1, 1)") {
	const NetworkParams p = init_weights(5, 3);
	Rng rng(4);
	for (int trial = 0; trial < 20; ++trial) {
		ad::Tape tape;
		const NetworkLeaves net = register_leaves(tape, p);
		std::vector<Var> x;
		std::vector<Var> h;
		std::vector<Var> c;
		for (int i = 0; i < 12; ++i) {
			x.push_back(tape.constant(rng.uniform(-50.0, 50.0)));
		}
		for (int i = 0; i < 5; ++i) {
			h.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
			c.push_back(tape.constant(rng.uniform(-20.0, 20.0)));
		}
		for (const auto& v : lstm_cell(x, h, c, net, 0, tape).h) {
			CHECK(v.value() > -1.0);
			CHECK(v.value() < 1.0);
		}
	}
}

TEST_CASE("zero-weight residual cell") {
	const NetworkParams p(4);
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	Rng rng(2);
	std::vector<Var> lower;
	std::vector<Var> hd;
	std::vector<Var> cd;
	for (int i = 0; i < 4; ++i) {
		lower.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
		hd.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
		cd.push_back(tape.constant(rng.uniform(-3.0, 3.0)));
	}
	const auto st = rdlstm_cell(lower, hd, cd, net, 2, tape);
	for (std::size_t r = 0; r < 4; ++r) {
		const double c = 0.5 * cd[r].value();
		CHECK(st.c[r].value() == doctest::Approx(c).epsilon(1e-15));
		CHECK(st.h[r].value() == doctest::Approx(0.5 * (std::tanh(c) + lower[r].value())).epsilon(1e-15));
	}
}

TEST_CASE("residual cell without a lower input is the standard cell") {
	const NetworkParams p = init_weights(4, 8);
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	Rng rng(6);
	std::vector<Var> hd;
	std::vector<Var> cd;
	for (int i = 0; i < 4; ++i) {
		hd.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
		cd.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
	}
	const auto zero = constants(tape, 4, 0.0);
	const auto a = rdlstm_cell(zero, hd, cd, net, 3, tape);
	const auto b = lstm_cell(zero, hd, cd, net, 3, tape);
	for (std::size_t r = 0; r < 4; ++r) {
		CHECK(a.h[r].value() == b.h[r].value());
		CHECK(a.c[r].value() == b.c[r].value());
	}
}

TEST_CASE("cells reject inconsistent dimensions") {
	const NetworkParams p(4);
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	const auto four = constants(tape, 4, 0.0);
	const auto three = constants(tape, 3, 0.0);
	CHECK_THROWS_AS(lstm_cell(four, four, four, net, 0, tape), std::invalid_argument);
	CHECK_THROWS_AS(rdlstm_cell(three, four, four, net, 1, tape), std::invalid_argument);
	CHECK_THROWS_AS(rdlstm_cell(four, four, three, net, 1, tape), std::invalid_argument);
}

TEST_CASE("each layer reads its state from d steps back") {
	const NetworkParams p = init_weights(3, 1);
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	const auto inputs = random_inputs(tape, 14, 5);
	std::vector<std::array<long, 3>> reads;
	forward_sequence(inputs, net, tape, [&](std::size_t layer, long step, long read) {
		reads.push_back({static_cast<long>(layer), step, read});
	});
	CHECK(reads.size() == 14 * 4);
	for (const auto& [layer, step, read] : reads) {
		CHECK(read == step - static_cast<long>(kDilations[static_cast<std::size_t>(layer)]));
	}
	// d = 3 at t = 5 reads t = 2
	CHECK(reads[(5 - 1) * 4 + 1][2] == 2);
}

TEST_CASE("recurrent state history") {
	ad::Tape tape;
	RecurrentState st(2, tape);
	CHECK(st.read(2, 6).h[0].value() == 0.0); // 6 - 6 = 0: zero state
	CellState s;
	s.h = constants(tape, 2, 1.5);
	s.c = constants(tape, 2, -1.5);
	st.write(1, 2, s);
	CHECK(st.read(1, 5).h[0].value() == 1.5);
	CHECK_THROWS_AS(st.read(1, 6), std::logic_error); // step 3 never written
}

TEST_CASE("forward_sequence shapes and degenerate cases") {
	ad::Tape tape;
	const NetworkParams zero(5);
	const NetworkLeaves zl = register_leaves(tape, zero);
	const auto inputs = random_inputs(tape, 7, 1);
	const auto preds = forward_sequence(inputs, zl, tape);
	REQUIRE(preds.size() == 7);
	for (const auto& p : preds) {
		CHECK(p.size() == 12);
		for (const auto& v : p) {
			CHECK(v.value() == 0.0);
		}
	}
	CHECK_THROWS_AS(forward_sequence(std::span<const std::array<Var, kWindow>>{}, zl, tape), std::invalid_argument);
}

TEST_CASE("identical series give identical predictions, independent of other series") {
	const NetworkParams p = init_weights(6, 12);
	ad::Tape t1;
	const NetworkLeaves n1 = register_leaves(t1, p);
	const auto a1 = forward_sequence(random_inputs(t1, 20, 100), n1, t1);

	ad::Tape t2;
	const NetworkLeaves n2 = register_leaves(t2, p);
	forward_sequence(random_inputs(t2, 9, 200), n2, t2); // another series first
	const auto a2 = forward_sequence(random_inputs(t2, 20, 100), n2, t2);
	for (std::size_t k = 0; k < a1.size(); ++k) {
		for (std::size_t j = 0; j < kWindow; ++j) {
			CHECK(a1[k][j].value() == a2[k][j].value());
		}
	}
}

TEST_CASE("weight initialization") {
	const NetworkParams a = init_weights(7, 99);
	const NetworkParams b = init_weights(7, 99);
	CHECK(a == b);
	CHECK_FALSE(a == init_weights(7, 100));
	CHECK(a.values().size() == NetworkParams::count(7));
	CHECK(a.input_size(0) == 12);
	for (std::size_t l = 1; l < kLayers; ++l) {
		CHECK(a.input_size(l) == 7);
	}
	const double bound = 1.0 / std::sqrt(7.0);
	for (std::size_t l = 0; l < kLayers; ++l) {
		for (std::size_t r = 0; r < 7; ++r) {
			CHECK(a.b(l, forget_gate, r) == 1.0);
			CHECK(a.b(l, input_gate, r) == 0.0);
			CHECK(a.b(l, candidate_gate, r) == 0.0);
			CHECK(a.b(l, output_gate, r) == 0.0);
			for (std::size_t g = 0; g < kGates; ++g) {
				for (std::size_t c = 0; c < a.input_size(l); ++c) {
					CHECK(std::abs(a.W(l, g, r, c)) < bound);
				}
				CHECK(std::abs(a.V(l, g, r, 0)) < bound);
			}
		}
	}
	for (std::size_t r = 0; r < 12; ++r) {
		CHECK(a.out_b(r) == 0.0);
		CHECK(std::abs(a.out_W(r, 6)) < bound);
	}
	CHECK_THROWS_AS(init_weights(0, 1), std::invalid_argument);
}

TEST_CASE("shortcut wiring of the top layer") {
	NetworkParams p = init_weights(4, 21);
	// layer 4: no gate weights, output gate saturated open
	for (std::size_t g = 0; g < kGates; ++g) {
		for (std::size_t r = 0; r < 4; ++r) {
			for (std::size_t c = 0; c < p.row_stride(3); ++c) {
				p.values()[p.gate_offset(3, g) + r * p.row_stride(3) + c] = 0.0;
			}
			p.b(3, g, r) = g == output_gate ? 40.0 : 0.0;
		}
	}
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, p);
	Rng rng(1);
	std::vector<Var> h3;
	std::vector<Var> hd;
	std::vector<Var> cd;
	for (int i = 0; i < 4; ++i) {
		h3.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
		hd.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
		cd.push_back(tape.constant(rng.uniform(-1.0, 1.0)));
	}
	const auto st = rdlstm_cell(h3, hd, cd, net, 3, tape);
	for (std::size_t r = 0; r < 4; ++r) {
		CHECK(st.h[r].value() == doctest::Approx(std::tanh(st.c[r].value()) + h3[r].value()).epsilon(1e-12));
	}
}

TEST_CASE("finite-difference check of a 3-step unroll with m = 4") {
	const NetworkParams p = init_weights(4, 77);
	Rng rng(78);
	std::vector<std::array<double, kWindow>> xs(3);
	std::vector<std::array<double, kWindow>> targets(3);
	for (std::size_t k = 0; k < 3; ++k) {
		for (std::size_t j = 0; j < kWindow; ++j) {
			xs[k][j] = rng.uniform(-0.5, 0.5);
			targets[k][j] = rng.uniform(-0.5, 0.5);
		}
	}
	auto report = ad::check_gradients(
	    [&](ad::Tape& tape, std::span<const Var> leaves) {
		    NetworkLeaves net{&p, leaves.front().id};
		    std::vector<std::array<Var, kWindow>> in(3);
		    for (std::size_t k = 0; k < 3; ++k) {
			    for (std::size_t j = 0; j < kWindow; ++j) {
				    in[k][j] = tape.constant(xs[k][j]);
			    }
		    }
		    const auto preds = forward_sequence(in, net, tape);
		    Var loss = tape.constant(0.0);
		    for (std::size_t k = 0; k < 3; ++k) {
			    for (std::size_t j = 0; j < kWindow; ++j) {
				    const Var d = preds[k][j] - targets[k][j];
				    loss = loss + d * d;
			    }
		    }
		    return loss * (1.0 / (3.0 * kWindow));
	    },
	    p.values(), 1e-5);
	INFO("worst leaf " << report.worst_leaf << ": analytic " << report.analytic[report.worst_leaf] << ", numeric "
	                   << report.numeric[report.worst_leaf]);
	CHECK(report.max_relative_error < 1e-4);
	CHECK(report.kink_leaves.empty());
}

TEST_CASE("scalar and vector kernels give the same network outputs and gradients") {
	if (!simd::supported(simd::Isa::avx2) && !simd::supported(simd::Isa::neon)) {
		return;
	}
	const simd::Isa wide = simd::supported(simd::Isa::avx2) ? simd::Isa::avx2 : simd::Isa::neon;
	const NetworkParams p = init_weights(40, 5);
	auto run = [&](simd::Isa isa) {
		simd::force(isa);
		ad::Tape tape;
		const NetworkLeaves net = register_leaves(tape, p);
		const auto preds = forward_sequence(random_inputs(tape, 15, 3), net, tape);
		Var loss = tape.constant(0.0);
		for (const auto& pr : preds) {
			for (const auto& v : pr) {
				loss = loss + v * v;
			}
		}
		const auto g = ad::backward(tape, loss);
		std::vector<double> out{loss.value()};
		const auto block = g.block(net.first, p.values().size());
		out.insert(out.end(), block.begin(), block.end());
		return out;
	};
	const auto initial = simd::active().isa;
	const auto a = run(simd::Isa::scalar);
	const auto b = run(wide);
	simd::force(initial);
	REQUIRE(a.size() == b.size());
	for (std::size_t i = 0; i < a.size(); ++i) {
		CHECK(std::abs(a[i] - b[i]) <= 1e-12 * (1.0 + std::abs(a[i])));
	}
}
