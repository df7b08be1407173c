#include "mtlf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mtlf {
namespace {

struct BatchGraph {
	ad::Var loss;
	NetworkLeaves net;
	std::vector<EtsLeaves> ets;
};

EtsLeaves ets_leaves_at(ad::Tape& tape, ad::NodeId first) {
	EtsLeaves out;
	out.first = first;
	out.alpha_raw = tape.var(first);
	out.beta_raw = tape.var(first + 1);
	for (std::size_t i = 0; i < kSeason; ++i) {
		out.init_season_raw[i] = tape.var(first + 2 + static_cast<ad::NodeId>(i));
	}
	return out;
}

void check_batch(std::span<const MonthlySeries* const> batch, std::size_t n_ets) {
	if (batch.empty()) {
		throw std::invalid_argument("empty mini-batch");
	}
	if (batch.size() != n_ets) {
		throw std::invalid_argument("one ETS parameter set per batch series required");
	}
}

// Loss graph over leaves already on the tape.
ad::Var batch_loss(ad::Tape& tape, const NetworkLeaves& net, std::span<const EtsLeaves> ets,
                   std::span<const MonthlySeries* const> batch, const LossConfig& cfg) {
	std::vector<ad::Var> terms;
	std::vector<std::vector<ad::Var>> levels;
	levels.reserve(batch.size());
	for (std::size_t i = 0; i < batch.size(); ++i) {
		const MonthlySeries& s = *batch[i];
		EtsTrace trace = run_smoother(s.values, ets[i], tape);
		const std::vector<TrainingSample> samples = build_series_samples(s.values, trace, tape);
		std::vector<std::array<ad::Var, kWindow>> inputs;
		inputs.reserve(samples.size());
		for (const auto& smp : samples) {
			inputs.push_back(smp.x_in);
		}
		const std::vector<Prediction> preds = forward_sequence(inputs, net, tape);
		for (std::size_t k = 0; k < samples.size(); ++k) {
			for (std::size_t j = 0; j < kWindow; ++j) {
				terms.push_back(pinball(samples[k].x_out[j], preds[k][j], cfg.tau));
			}
		}
		levels.push_back(std::move(trace.levels));
	}
	return total_loss(terms, levels, cfg);
}

BatchGraph build_batch(ad::Tape& tape, const NetworkParams& network, std::span<const MonthlySeries* const> batch,
                       std::span<const EtsParams> ets, const LossConfig& cfg) {
	check_batch(batch, ets.size());
	BatchGraph g;
	g.net = register_leaves(tape, network);
	for (const EtsParams& e : ets) {
		g.ets.push_back(register_leaves(tape, e));
	}
	g.loss = batch_loss(tape, g.net, g.ets, batch, cfg);
	return g;
}

} // namespace

void TrainConfig::validate() const {
	if (epochs < 1) {
		throw std::invalid_argument("epochs must be at least 1");
	}
	if (!(learning_rate > 0.0)) {
		throw std::invalid_argument("learning rate must be positive");
	}
	if (batch_size < 1) {
		throw std::invalid_argument("batch size must be at least 1");
	}
	if (snapshot_window < 1 || snapshot_window > static_cast<std::size_t>(epochs)) {
		throw std::invalid_argument("snapshot window L must satisfy 1 <= L <= epochs");
	}
	if (m < 1) {
		throw std::invalid_argument("state length m must be at least 1");
	}
	loss.validate();
}

Adam::Adam(std::size_t n, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
	if (params.size() != m_.size() || grads.size() != m_.size()) {
		throw std::invalid_argument("Adam: size mismatch");
	}
	++t_;
	const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
	const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
	for (std::size_t i = 0; i < params.size(); ++i) {
		m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
		v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
		params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
	}
}

const EtsParams& TrainedModel::ets_for(const std::string& id) const {
	auto it = ets.find(id);
	if (it == ets.end()) {
		throw std::out_of_range("series " + id + " was not part of this model's training set");
	}
	return it->second;
}

BatchGradients batch_gradients(const NetworkParams& network, std::span<const MonthlySeries* const> batch,
                               std::span<const EtsParams> ets, const LossConfig& loss) {
	ad::Tape tape;
	const BatchGraph g = build_batch(tape, network, batch, ets, loss);
	const ad::Gradients grads = ad::backward(tape, g.loss);
	BatchGradients out;
	out.loss = g.loss.value();
	const auto net = grads.block(g.net.first, network.values().size());
	out.network.assign(net.begin(), net.end());
	for (const auto& e : g.ets) {
		std::array<double, kEtsParamCount> v{};
		const auto block = grads.block(e.first, kEtsParamCount);
		std::copy(block.begin(), block.end(), v.begin());
		out.ets.push_back(v);
	}
	return out;
}

ad::GradCheckReport check_batch_gradients(const NetworkParams& network, std::span<const MonthlySeries* const> batch,
                                          std::span<const EtsParams> ets, const LossConfig& loss, double step) {
	check_batch(batch, ets.size());
	std::vector<double> point = network.values();
	for (const EtsParams& e : ets) {
		const auto flat = e.flat();
		point.insert(point.end(), flat.begin(), flat.end());
	}
	const std::size_t n_net = network.values().size();
	return ad::check_gradients(
	    [&](ad::Tape& tape, std::span<const ad::Var> leaves) {
		    const NetworkLeaves net{&network, leaves.front().id};
		    std::vector<EtsLeaves> ets_leaves;
		    for (std::size_t i = 0; i < batch.size(); ++i) {
			    ets_leaves.push_back(ets_leaves_at(tape, leaves[n_net + i * kEtsParamCount].id));
		    }
		    return batch_loss(tape, net, ets_leaves, batch, loss);
	    },
	    point, step);
}

Trainer::Trainer(const SeriesCollection& collection, TrainConfig cfg)
    : data_(collection), cfg_(cfg), rng_(derive_seed(cfg.seed, 1)) {
	cfg_.validate();
	if (collection.size() == 0) {
		throw std::invalid_argument("training collection is empty");
	}
	for (const auto& s : collection.series) {
		if (s.size() < 2 * kSeason) {
			throw std::invalid_argument("series " + s.id + " admits no training sample (needs 24 months)");
		}
		ets_.push_back(init_params(s.values));
		ets_opt_.emplace_back(kEtsParamCount);
	}
	network_ = init_weights(cfg_.m, derive_seed(cfg_.seed, 2));
	net_opt_ = Adam(network_.values().size());
	snapshots_.resize(collection.size());
}

double Trainer::train_batch(std::span<const std::size_t> series) {
	std::vector<const MonthlySeries*> batch;
	std::vector<EtsParams> ets;
	for (std::size_t idx : series) {
		batch.push_back(&data_.series.at(idx));
		ets.push_back(ets_.at(idx));
	}
	tape_.clear();
	const BatchGraph g = build_batch(tape_, network_, batch, ets, cfg_.loss);
	const double loss = g.loss.value();
	if (!std::isfinite(loss)) {
		return loss;
	}
	const ad::Gradients grads = ad::backward(tape_, g.loss);

	std::vector<double> net_grad(grads.block(g.net.first, network_.values().size()).begin(),
	                             grads.block(g.net.first, network_.values().size()).end());
	std::vector<std::array<double, kEtsParamCount>> ets_grad(series.size());
	double sq = std::inner_product(net_grad.begin(), net_grad.end(), net_grad.begin(), 0.0);
	for (std::size_t i = 0; i < series.size(); ++i) {
		const auto block = grads.block(g.ets[i].first, kEtsParamCount);
		std::copy(block.begin(), block.end(), ets_grad[i].begin());
		sq += std::inner_product(block.begin(), block.end(), block.begin(), 0.0);
	}
	const double norm = std::sqrt(sq);
	if (cfg_.gradient_clip > 0.0 && norm > cfg_.gradient_clip) {
		const double scale = cfg_.gradient_clip / norm;
		for (double& v : net_grad) {
			v *= scale;
		}
		for (auto& e : ets_grad) {
			for (double& v : e) {
				v *= scale;
			}
		}
	}

	const double lr = cfg_.learning_rate;
	auto apply = [&](Adam& opt, std::span<double> params, std::span<const double> grad) {
		if (cfg_.optimizer == OptimizerKind::adam) {
			opt.step(params, grad, lr);
		} else {
			for (std::size_t k = 0; k < params.size(); ++k) {
				params[k] -= lr * grad[k];
			}
		}
	};
	apply(net_opt_, network_.values(), net_grad);
	for (std::size_t i = 0; i < series.size(); ++i) {
		auto flat = ets_[series[i]].flat();
		apply(ets_opt_[series[i]], flat, ets_grad[i]);
		ets_[series[i]] = EtsParams::from_flat(flat);
	}
	return loss;
}

void Trainer::run_epoch(int epoch, const LogSink& log) {
	std::vector<std::size_t> order(data_.size());
	std::iota(order.begin(), order.end(), 0);
	rng_.shuffle(order);
	double sum = 0.0;
	int batches = 0;
	for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
		const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
		const double loss = train_batch(std::span<const std::size_t>(order).subspan(start, end - start));
		++batches;
		if (!std::isfinite(loss)) {
			throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
			                         std::to_string(batches));
		}
		if (log) {
			log({epoch, batches, loss});
		}
		sum += loss;
	}
	epoch_loss_.push_back(sum / batches);
	for (std::size_t i = 0; i < data_.size(); ++i) {
		const std::string where = "non-finite forecast at epoch " + std::to_string(epoch) + " for series " + data_.series[i].id;
		Vec12 f{};
		try {
			f = forecast(i);
		} catch (const std::invalid_argument& e) {
			throw std::runtime_error(where + " (" + e.what() + ")");
		}
		if (!std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); })) {
			throw std::runtime_error(where);
		}
		snapshots_[i].push_back(f);
	}
}

Vec12 Trainer::forecast(std::size_t series) const {
	return mtlf::forecast(network_, ets_.at(series), data_.series.at(series));
}

TrainedModel Trainer::finish() && {
	TrainedModel out;
	out.network = std::move(network_);
	out.epoch_loss = std::move(epoch_loss_);
	for (std::size_t i = 0; i < data_.size(); ++i) {
		const std::string& id = data_.series[i].id;
		out.ids.push_back(id);
		out.ets[id] = ets_[i];
		out.snapshots[id] = std::move(snapshots_[i]);
	}
	return out;
}

TrainedModel train(const SeriesCollection& collection, const TrainConfig& cfg, const LogSink& log) {
	Trainer trainer(collection, cfg);
	for (int e = 1; e <= cfg.epochs; ++e) {
		trainer.run_epoch(e, log);
	}
	return std::move(trainer).finish();
}

Vec12 forecast(const NetworkParams& network, const EtsParams& ets, const MonthlySeries& series) {
	ad::Tape tape;
	const NetworkLeaves net = register_leaves(tape, network);
	const EtsLeaves leaves = register_leaves(tape, ets);
	const EtsTrace trace = run_smoother(series.values, leaves, tape);
	const std::vector<TrainingSample> windows = build_input_windows(series.values, trace, tape);
	std::vector<std::array<ad::Var, kWindow>> inputs;
	inputs.reserve(windows.size());
	for (const auto& w : windows) {
		inputs.push_back(w.x_in);
	}
	const std::vector<Prediction> preds = forward_sequence(inputs, net, tape);
	Vec12 x_hat{};
	Vec12 seasonals{};
	for (std::size_t j = 0; j < kWindow; ++j) {
		x_hat[j] = preds.back()[j].value();
		seasonals[j] = windows.back().horizon_seasonals[j].value();
	}
	return postprocess_forecast(x_hat, windows.back().level_star.value(), seasonals);
}

Vec12 forecast(const TrainedModel& model, const MonthlySeries& series) {
	return forecast(model.network, model.ets_for(series.id), series);
}

Vec12 snapshot_average(std::span<const Vec12> snapshots, std::size_t L) {
	if (L < 1) {
		throw std::invalid_argument("snapshot window must be at least 1");
	}
	if (snapshots.size() < L) {
		throw std::invalid_argument("fewer snapshots (" + std::to_string(snapshots.size()) + ") than L = " +
		                            std::to_string(L));
	}
	Vec12 out{};
	for (std::size_t k = snapshots.size() - L; k < snapshots.size(); ++k) {
		for (std::size_t j = 0; j < kSeason; ++j) {
			out[j] += snapshots[k][j];
		}
	}
	for (double& v : out) {
		v /= static_cast<double>(L);
	}
	return out;
}

} // namespace mtlf
