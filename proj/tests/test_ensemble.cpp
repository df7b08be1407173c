#include "mtlf/ensemble.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

using namespace mtlf;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
	std::vector<std::string> ids;
	for (std::size_t i = 0; i < n; ++i) {
		ids.push_back("C" + std::to_string(i));
	}
	return ids;
}

EnsembleConfig tiny(std::size_t K, std::size_t R) {
	EnsembleConfig cfg;
	cfg.K = K;
	cfg.R = R;
	cfg.base.epochs = 2;
	cfg.base.snapshot_window = 2;
	cfg.base.m = 4;
	cfg.base.batch_size = 3;
	cfg.master_seed = 99;
	cfg.threads = 1;
	return cfg;
}

Vec12 filled(double v) {
	Vec12 out{};
	out.fill(v);
	return out;
}

} // namespace

TEST_CASE("partition sizes and coverage") {
	const auto ids = make_ids(35);
	const Partition p = partition_series(ids, 4, 123);
	REQUIRE(p.subsets.size() == 4);
	std::multiset<std::size_t> sizes;
	std::set<std::string> seen;
	for (const auto& s : p.subsets) {
		sizes.insert(s.size());
		seen.insert(s.begin(), s.end());
	}
	CHECK(sizes == std::multiset<std::size_t>{8, 9, 9, 9});
	CHECK(seen.size() == 35);

	const Partition singles = partition_series(make_ids(4), 4, 5);
	for (const auto& s : singles.subsets) {
		CHECK(s.size() == 1);
	}
	CHECK(partition_series(ids, 4, 123).subsets == p.subsets);
	CHECK_FALSE(partition_series(ids, 4, 124).subsets == p.subsets);
	CHECK_THROWS_AS(partition_series(make_ids(3), 4, 1), std::invalid_argument);
}

TEST_CASE("seed derivation") {
	std::set<std::uint64_t> seeds;
	for (std::size_t r = 1; r <= 3; ++r) {
		seeds.insert(partition_seed(1, r));
		for (std::size_t k = 1; k <= 4; ++k) {
			seeds.insert(trainer_seed(1, r, k));
		}
	}
	CHECK(seeds.size() == 15);
	CHECK(partition_seed(1, 2) == derive_seed(1, 2, 0));
	CHECK(trainer_seed(7, 3, 2) == derive_seed(7, 3, 2));
}

TEST_CASE("aggregation") {
	const std::vector<Vec12> three{filled(100), filled(200), filled(300)};
	CHECK(aggregate(three) == filled(200));
	CHECK(aggregate(three, Aggregation::median) == filled(200));
	CHECK(aggregate(three, Aggregation::trimmed_mean) == filled(200));
	const std::vector<Vec12> one{filled(42)};
	CHECK(aggregate(one) == filled(42));
	const std::vector<Vec12> same(9, filled(7.5));
	CHECK(aggregate(same) == filled(7.5));
	const std::vector<Vec12> skew{filled(1), filled(2), filled(3), filled(100)};
	CHECK(aggregate(skew, Aggregation::median) == filled(2.5));
	CHECK(aggregate(skew, Aggregation::trimmed_mean) == filled(2.5));
	CHECK_THROWS_AS(aggregate(std::vector<Vec12>{}), std::invalid_argument);
}

TEST_CASE("configuration") {
	CHECK_THROWS_AS(tiny(1, 1).validate(), std::invalid_argument);
	CHECK_THROWS_AS(tiny(2, 0).validate(), std::invalid_argument);
	CHECK_NOTHROW(tiny(4, 3).validate());
}

TEST_CASE("leave-subset-out ensemble") {
	const SeriesCollection data = synthesize(8, 3, 31);
	const EnsembleResult res = run_ensemble(data, tiny(4, 3));
	REQUIRE(res.members.size() == 12);
	REQUIRE(res.partitions.size() == 3);
	for (std::size_t i = 0; i < res.members.size(); ++i) {
		const MemberRun& m = res.members[i];
		CHECK(m.run == i / 4 + 1);
		CHECK(m.pool == i % 4 + 1);
		CHECK(m.seed == trainer_seed(99, m.run, m.pool));
		CHECK(m.held_out == res.partitions[m.run - 1].subsets[m.pool - 1]);
		CHECK(m.model.ids.size() == 8 - m.held_out.size());
		for (const auto& id : m.held_out) {
			CHECK(std::find(m.model.ids.begin(), m.model.ids.end(), id) == m.model.ids.end());
		}
		CHECK(m.log.size() == 2 * ((m.model.ids.size() + 2) / 3));
	}
	REQUIRE(res.forecasts.series.size() == 8);
	for (const auto& s : res.forecasts.series) {
		CHECK(s.members.size() == 9);
		std::vector<Vec12> vs;
		for (const auto& c : s.members) {
			const auto& held = res.partitions[c.run - 1].subsets[c.pool - 1];
			CHECK(std::find(held.begin(), held.end(), s.id) == held.end());
			vs.push_back(c.forecast);
		}
		CHECK(s.aggregate == aggregate(vs));
		for (double v : s.aggregate) {
			CHECK(v > 0.0);
		}
	}
	CHECK(res.forecasts.find("S003").id == "S003");
	CHECK_THROWS_AS(res.forecasts.find("nope"), std::out_of_range);
}

TEST_CASE("degenerate ensemble K = 2, R = 1") {
	const SeriesCollection data = synthesize(4, 3, 12);
	const EnsembleResult res = run_ensemble(data, tiny(2, 1));
	for (const auto& s : res.forecasts.series) {
		REQUIRE(s.members.size() == 1);
		CHECK(s.aggregate == s.members[0].forecast);
	}
}

TEST_CASE("results do not depend on the thread count") {
	const SeriesCollection data = synthesize(6, 3, 13);
	EnsembleConfig cfg = tiny(3, 1);
	const EnsembleResult a = run_ensemble(data, cfg);
	cfg.threads = 3;
	const EnsembleResult b = run_ensemble(data, cfg);
	for (std::size_t i = 0; i < a.forecasts.series.size(); ++i) {
		CHECK(a.forecasts.series[i].aggregate == b.forecasts.series[i].aggregate);
	}
}

TEST_CASE("member failures are tagged with run and pool") {
	const SeriesCollection data = synthesize(4, 3, 12);
	EnsembleConfig cfg = tiny(2, 1);
	cfg.base.learning_rate = 1e300;
	cfg.base.gradient_clip = 0.0;
	cfg.base.batch_size = 1;
	try {
		run_ensemble(data, cfg);
		FAIL("expected failure");
	} catch (const std::runtime_error& e) {
		CHECK(std::string(e.what()).rfind("run 1, pool 1: ", 0) == 0);
	}
}
