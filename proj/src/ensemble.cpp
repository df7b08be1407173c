#include "mtlf/ensemble.hpp"

#include "mtlf/random.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <stdexcept>
#include <thread>

namespace mtlf {

void EnsembleConfig::validate() const {
	if (K < 2) {
		throw std::invalid_argument("pool size K must be at least 2");
	}
	if (R < 1) {
		throw std::invalid_argument("number of runs R must be at least 1");
	}
	base.validate();
}

std::uint64_t partition_seed(std::uint64_t master, std::size_t run) { return derive_seed(master, run, 0); }

std::uint64_t trainer_seed(std::uint64_t master, std::size_t run, std::size_t pool) {
	return derive_seed(master, run, pool);
}

const SeriesForecast& ForecastSet::find(const std::string& id) const {
	for (const auto& s : series) {
		if (s.id == id) {
			return s;
		}
	}
	throw std::out_of_range("no forecast for series " + id);
}

Partition partition_series(std::span<const std::string> ids, std::size_t K, std::uint64_t seed) {
	if (K < 1 || ids.size() < K) {
		throw std::invalid_argument("cannot split " + std::to_string(ids.size()) + " series into " +
		                            std::to_string(K) + " subsets");
	}
	std::vector<std::string> order(ids.begin(), ids.end());
	Rng rng(seed);
	rng.shuffle(order);
	Partition p;
	p.subsets.resize(K);
	for (std::size_t i = 0; i < order.size(); ++i) {
		p.subsets[i % K].push_back(order[i]);
	}
	return p;
}

Vec12 aggregate(std::span<const Vec12> contributors, Aggregation how) {
	if (contributors.empty()) {
		throw std::invalid_argument("aggregate: no contributors");
	}
	Vec12 out{};
	const std::size_t n = contributors.size();
	for (std::size_t j = 0; j < kSeason; ++j) {
		if (how == Aggregation::mean) {
			double sum = 0.0;
			for (const auto& c : contributors) {
				sum += c[j];
			}
			out[j] = sum / static_cast<double>(n);
			continue;
		}
		std::vector<double> col;
		col.reserve(n);
		for (const auto& c : contributors) {
			col.push_back(c[j]);
		}
		std::sort(col.begin(), col.end());
		if (how == Aggregation::median) {
			out[j] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
		} else {
			// drop the lowest and highest 10% (at least one each when n >= 3)
			std::size_t cut = n / 10;
			if (cut == 0 && n >= 3) {
				cut = 1;
			}
			double sum = 0.0;
			for (std::size_t k = cut; k < n - cut; ++k) {
				sum += col[k];
			}
			out[j] = sum / static_cast<double>(n - 2 * cut);
		}
	}
	return out;
}

EnsembleResult run_ensemble(const SeriesCollection& collection, const EnsembleConfig& cfg) {
	cfg.validate();
	validate(collection);
	const std::vector<std::string> ids = collection.ids();

	EnsembleResult result;
	struct Job {
		SeriesCollection subset;
		MemberRun member;
		std::exception_ptr error;
	};
	std::vector<Job> jobs;
	jobs.reserve(cfg.R * cfg.K);
	for (std::size_t r = 1; r <= cfg.R; ++r) {
		Partition part = partition_series(ids, cfg.K, partition_seed(cfg.master_seed, r));
		for (std::size_t k = 1; k <= cfg.K; ++k) {
			Job job;
			job.member.run = r;
			job.member.pool = k;
			job.member.seed = trainer_seed(cfg.master_seed, r, k);
			job.member.held_out = part.subsets[k - 1];
			const std::set<std::string> held(job.member.held_out.begin(), job.member.held_out.end());
			job.subset.common_end = collection.common_end;
			for (const auto& s : collection.series) {
				if (!held.contains(s.id)) {
					job.subset.series.push_back(s);
				}
			}
			jobs.push_back(std::move(job));
		}
		result.partitions.push_back(std::move(part));
	}

	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
			Job& job = jobs[i];
			try {
				TrainConfig tc = cfg.base;
				tc.seed = job.member.seed;
				std::vector<LogLine>& log = job.member.log;
				job.member.model = train(job.subset, tc, [&log](const LogLine& line) { log.push_back(line); });
			} catch (...) {
				job.error = std::current_exception();
			}
		}
	};
	std::size_t threads = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
	threads = std::min(threads, jobs.size());
	{
		std::vector<std::jthread> pool;
		for (std::size_t t = 1; t < threads; ++t) {
			pool.emplace_back(worker);
		}
		worker();
	}

	for (Job& job : jobs) {
		if (job.error) {
			try {
				std::rethrow_exception(job.error);
			} catch (const std::exception& e) {
				throw std::runtime_error("run " + std::to_string(job.member.run) + ", pool " +
				                         std::to_string(job.member.pool) + ": " + e.what());
			}
		}
	}

	result.forecasts.series.reserve(ids.size());
	for (const auto& id : ids) {
		result.forecasts.series.push_back({id, {}, {}});
	}
	auto slot = [&](const std::string& id) -> SeriesForecast& {
		const auto it = std::find(ids.begin(), ids.end(), id);
		return result.forecasts.series[static_cast<std::size_t>(it - ids.begin())];
	};
	for (Job& job : jobs) {
		const TrainedModel& model = job.member.model;
		for (const auto& id : model.ids) {
			slot(id).members.push_back(
			    {job.member.run, job.member.pool, snapshot_average(model.snapshots.at(id), cfg.base.snapshot_window)});
		}
		result.members.push_back(std::move(job.member));
	}
	for (auto& s : result.forecasts.series) {
		std::vector<Vec12> vs;
		vs.reserve(s.members.size());
		for (const auto& c : s.members) {
			vs.push_back(c.forecast);
		}
		s.aggregate = aggregate(vs, cfg.aggregation);
	}
	return result;
}

} // namespace mtlf
