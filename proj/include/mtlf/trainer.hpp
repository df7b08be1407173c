#pragma once

#include "mtlf/dataset.hpp"
#include "mtlf/ets.hpp"
#include "mtlf/gradcheck.hpp"
#include "mtlf/loss.hpp"
#include "mtlf/random.hpp"
#include "mtlf/rdlstm.hpp"
#include "mtlf/windowing.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mtlf {

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
	int epochs = 10;
	double learning_rate = 1e-3;
	std::size_t batch_size = 8;      // series per mini-batch
	std::size_t snapshot_window = 5; // L
	std::size_t m = 40;
	double gradient_clip = 10.0; // global norm; <= 0 disables
	std::uint64_t seed = 1;
	OptimizerKind optimizer = OptimizerKind::adam;
	LossConfig loss;

	void validate() const;
};

/// Per-parameter first/second moment estimates with bias correction.
class Adam {
public:
	explicit Adam(std::size_t n = 0, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

	void step(std::span<double> params, std::span<const double> grads, double lr);
	long steps() const noexcept { return t_; }

private:
	std::vector<double> m_;
	std::vector<double> v_;
	double beta1_;
	double beta2_;
	double eps_;
	long t_ = 0;
};

struct TrainedModel {
	NetworkParams network;
	std::vector<std::string> ids; // training order of series
	std::map<std::string, EtsParams> ets;
	std::map<std::string, std::vector<Vec12>> snapshots; // one per epoch
	std::vector<double> epoch_loss;                       // mean batch loss per epoch

	const EtsParams& ets_for(const std::string& id) const;
};

struct LogLine {
	int epoch;
	int batch;
	double loss;
};
using LogSink = std::function<void(const LogLine&)>;

/// Loss value and gradients of one mini-batch, for tests and diagnostics.
struct BatchGradients {
	double loss = 0.0;
	std::vector<double> network;
	std::vector<std::array<double, kEtsParamCount>> ets; // one per batch series
};

BatchGradients batch_gradients(const NetworkParams& network, std::span<const MonthlySeries* const> batch,
                               std::span<const EtsParams> ets, const LossConfig& loss);

/// Central finite differences over every network and ETS leaf of one batch
/// loss. Leaves are ordered network first, then each series' ETS parameters.
ad::GradCheckReport check_batch_gradients(const NetworkParams& network, std::span<const MonthlySeries* const> batch,
                                          std::span<const EtsParams> ets, const LossConfig& loss, double step = 1e-5);

/// Joint optimizer of the shared network and the per-series ETS table.
class Trainer {
public:
	Trainer(const SeriesCollection& collection, TrainConfig cfg);

	/// One gradient step on the given series (indices into the collection).
	double train_batch(std::span<const std::size_t> series);
	/// Shuffled pass over all series followed by a forecast snapshot.
	void run_epoch(int epoch, const LogSink& log = {});

	const NetworkParams& network() const noexcept { return network_; }
	const EtsParams& ets(std::size_t series) const { return ets_.at(series); }
	Vec12 forecast(std::size_t series) const;

	TrainedModel finish() &&;

private:
	const SeriesCollection& data_;
	TrainConfig cfg_;
	NetworkParams network_;
	std::vector<EtsParams> ets_;
	Adam net_opt_;
	std::vector<Adam> ets_opt_;
	Rng rng_;
	ad::Tape tape_;
	std::vector<std::vector<Vec12>> snapshots_;
	std::vector<double> epoch_loss_;
};

/// Full training run: cfg.epochs epochs with a snapshot after each.
/// Throws std::runtime_error naming epoch and batch on a non-finite loss, or
/// epoch and series on a non-finite snapshot forecast.
TrainedModel train(const SeriesCollection& collection, const TrainConfig& cfg, const LogSink& log = {});

/// Horizon forecast from the final input window, postprocessed with the last
/// level and the 12 seasonal components past the series end.
Vec12 forecast(const NetworkParams& network, const EtsParams& ets, const MonthlySeries& series);
/// Throws std::out_of_range when the model holds no ETS parameters for the series.
Vec12 forecast(const TrainedModel& model, const MonthlySeries& series);

/// Componentwise mean of the last L snapshots.
Vec12 snapshot_average(std::span<const Vec12> snapshots, std::size_t L);

} // namespace mtlf
