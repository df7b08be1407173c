#pragma once

#include "mtlf/dataset.hpp"
#include "mtlf/trainer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtlf {

enum class Aggregation { mean, median, trimmed_mean };

struct EnsembleConfig {
	std::size_t K = 4; // pool size
	std::size_t R = 3; // independent runs
	TrainConfig base;
	std::uint64_t master_seed = 1;
	std::size_t threads = 0; // 0: hardware concurrency
	Aggregation aggregation = Aggregation::mean;

	void validate() const;
};

/// Seeds: partition of run r uses derive_seed(master, r, 0); trainer (r, k)
/// uses derive_seed(master, r, k). r and k are 1-based.
std::uint64_t partition_seed(std::uint64_t master, std::size_t run);
std::uint64_t trainer_seed(std::uint64_t master, std::size_t run, std::size_t pool);

struct Partition {
	std::vector<std::vector<std::string>> subsets; // Theta_1 .. Theta_K
};

/// Shuffles the ids and deals them round-robin into K subsets, so sizes differ
/// by at most one. Throws std::invalid_argument when |ids| < K.
Partition partition_series(std::span<const std::string> ids, std::size_t K, std::uint64_t seed);

struct Contribution {
	std::size_t run = 0;
	std::size_t pool = 0;
	Vec12 forecast{};
};

struct SeriesForecast {
	std::string id;
	std::vector<Contribution> members;
	Vec12 aggregate{};
};

struct ForecastSet {
	std::vector<SeriesForecast> series; // collection order

	const SeriesForecast& find(const std::string& id) const;
};

struct MemberRun {
	std::size_t run = 0;
	std::size_t pool = 0;
	std::uint64_t seed = 0;
	std::vector<std::string> held_out; // Theta_k
	TrainedModel model;
	std::vector<LogLine> log;
};

struct EnsembleResult {
	ForecastSet forecasts;
	std::vector<Partition> partitions; // one per run
	std::vector<MemberRun> members;    // ordered by (run, pool)
};

/// Trains R * K models, each on all series except its held-out subset, and
/// averages the R (K - 1) snapshot-averaged forecasts of every series.
/// Trainer failures are rethrown as std::runtime_error tagged with (run, pool).
EnsembleResult run_ensemble(const SeriesCollection& collection, const EnsembleConfig& cfg);

/// Componentwise combination of contributors; throws on an empty list.
Vec12 aggregate(std::span<const Vec12> contributors, Aggregation how = Aggregation::mean);

} // namespace mtlf
