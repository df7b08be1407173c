#include "mtlf/diagnostics.hpp"

#include "mtlf/dataset.hpp"
#include "mtlf/ets.hpp"
#include "mtlf/loss.hpp"
#include "mtlf/random.hpp"
#include "mtlf/rdlstm.hpp"
#include "mtlf/trainer.hpp"

#include <vector>

namespace mtlf {
namespace {

ad::GradCheckReport check_ets(std::uint64_t seed, double step) {
	MonthlySeries s = synthesize(1, 3, seed).series[0];
	s.values.resize(24);
	Rng rng(derive_seed(seed, 1));
	auto flat = init_params(s.values).flat();
	for (double& v : flat) {
		v += rng.uniform(-0.3, 0.3);
	}
	return ad::check_gradients(
	    [&](ad::Tape& tape, std::span<const ad::Var> leaves) {
		    EtsLeaves p;
		    p.first = leaves[0].id;
		    p.alpha_raw = leaves[0];
		    p.beta_raw = leaves[1];
		    for (std::size_t i = 0; i < kSeason; ++i) {
			    p.init_season_raw[i] = leaves[2 + i];
		    }
		    const EtsTrace trace = run_smoother(s.values, p, tape);
		    ad::Var sum = tape.constant(0.0);
		    for (std::size_t t = 1; t < s.size(); ++t) {
			    const ad::Var e = ad::log(trace.levels[t - 1] * trace.seasonals[t] / s.values[t]);
			    sum = sum + e * e;
		    }
		    return sum * (1.0 / static_cast<double>(s.size() - 1)) + level_penalty(trace.levels);
	    },
	    flat, step);
}

ad::GradCheckReport check_net(std::uint64_t seed, double step) {
	const NetworkParams p = init_weights(4, derive_seed(seed, 2));
	Rng rng(derive_seed(seed, 3));
	std::vector<std::array<double, kWindow>> xs(3);
	std::vector<std::array<double, kWindow>> targets(3);
	for (std::size_t k = 0; k < 3; ++k) {
		for (std::size_t j = 0; j < kWindow; ++j) {
			xs[k][j] = rng.uniform(-0.5, 0.5);
			targets[k][j] = rng.uniform(-0.5, 0.5);
		}
	}
	return ad::check_gradients(
	    [&](ad::Tape& tape, std::span<const ad::Var> leaves) {
		    const NetworkLeaves net{&p, leaves.front().id};
		    std::vector<std::array<ad::Var, kWindow>> in(3);
		    for (std::size_t k = 0; k < 3; ++k) {
			    for (std::size_t j = 0; j < kWindow; ++j) {
				    in[k][j] = tape.constant(xs[k][j]);
			    }
		    }
		    const auto preds = forward_sequence(in, net, tape);
		    ad::Var sum = tape.constant(0.0);
		    for (std::size_t k = 0; k < 3; ++k) {
			    for (std::size_t j = 0; j < kWindow; ++j) {
				    const ad::Var d = preds[k][j] - targets[k][j];
				    sum = sum + d * d;
			    }
		    }
		    return sum * (1.0 / (3.0 * kWindow));
	    },
	    p.values(), step);
}

ad::GradCheckReport check_full(std::uint64_t seed, double step) {
	const SeriesCollection data = synthesize(2, 3, derive_seed(seed, 4));
	const NetworkParams net = init_weights(4, derive_seed(seed, 5));
	std::vector<const MonthlySeries*> batch;
	std::vector<EtsParams> ets;
	for (const auto& s : data.series) {
		batch.push_back(&s);
		ets.push_back(init_params(s.values));
	}
	return check_batch_gradients(net, batch, ets, LossConfig{}, step);
}

} // namespace

GradCheckSuite run_gradcheck_suite(std::uint64_t seed, double step) {
	return {check_ets(seed, step), check_net(seed, step), check_full(seed, step)};
}

} // namespace mtlf
