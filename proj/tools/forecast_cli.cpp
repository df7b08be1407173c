// forecast: train, evaluate and diagnose the hybrid ETS + dilated LSTM model.
//
//   forecast synth      --out data.csv --n 35 --years 10 --seed 7
//   forecast train      --data data.csv --out runs/a [hyperparameters]
//   forecast evaluate   --forecasts runs/a/forecasts.csv --actuals runs/a/actuals.csv --out runs/a/eval
//   forecast baseline   --data data.csv --method holt_winters --out runs/hw
//   forecast gradcheck  [--seed 1] [--step 1e-5]
//
// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.

#include "mtlf/baselines.hpp"
#include "mtlf/checkpoint.hpp"
#include "mtlf/dataset.hpp"
#include "mtlf/diagnostics.hpp"
#include "mtlf/ensemble.hpp"
#include "mtlf/forecast_csv.hpp"
#include "mtlf/metrics.hpp"
#include "mtlf/simd/kernels.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Bad flag values detected after parsing; mapped to exit code 2.
struct UsageError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

enum class Mode { test, valid, forecast };

struct Options {
	std::string data;
	std::string out;
	std::string forecasts;
	std::string actuals;
	std::string isa;
	std::string method = "holt_winters";
	Mode mode = Mode::test;
	mtlf::EnsembleConfig ensemble;
	std::string aggregation = "mean";
	bool emit_members = false;
	std::size_t threads = 0;

	// synth
	int n = 35;
	int years = 10;
	double noise = 0.02;

	// gradcheck
	double step = 1e-5;
	std::uint64_t seed = 1;
};

const std::map<std::string, Mode> kModes{{"test", Mode::test}, {"valid", Mode::valid}, {"forecast", Mode::forecast}};
const std::map<std::string, mtlf::Aggregation> kAggregations{
    {"mean", mtlf::Aggregation::mean},
    {"median", mtlf::Aggregation::median},
    {"trimmed_mean", mtlf::Aggregation::trimmed_mean}};

std::string mode_name(Mode m) {
	for (const auto& [k, v] : kModes) {
		if (v == m) {
			return k;
		}
	}
	return "?";
}

void write_text(const fs::path& path, const std::string& text) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw std::runtime_error("cannot write " + path.string());
	}
	out << text;
}

void apply_isa(const std::string& isa) {
	if (isa.empty()) {
		return;
	}
	try {
		mtlf::simd::force(mtlf::simd::parse_isa(isa));
	} catch (const std::invalid_argument& e) {
		throw UsageError(e.what());
	}
}

// Training collection and, unless forecasting the future, the held-back actuals.
struct Holdout {
	mtlf::SeriesCollection train;
	mtlf::SeriesCollection actuals;
	mtlf::YearMonth first_month;
};

Holdout make_holdout(const mtlf::SeriesCollection& data, Mode mode) {
	const int drop = mode == Mode::test ? 12 : mode == Mode::valid ? 24 : 0;
	Holdout h;
	h.train = drop > 0 ? mtlf::drop_last(data, drop) : data;
	h.first_month = h.train.common_end.plus(1);
	if (mode == Mode::forecast) {
		return h;
	}
	h.actuals.common_end = h.train.common_end.plus(12);
	for (const auto& s : data.series) {
		const std::size_t from = s.size() - static_cast<std::size_t>(drop);
		h.actuals.series.push_back(
		    {s.id, h.first_month, std::vector<double>(s.values.begin() + static_cast<long>(from),
		                                              s.values.begin() + static_cast<long>(from) + 12)});
	}
	return h;
}

json config_json(const Options& o) {
	const auto& b = o.ensemble.base;
	return {{"epochs", b.epochs},
	        {"lr", b.learning_rate},
	        {"m", b.m},
	        {"tau", b.loss.tau},
	        {"lambda", b.loss.lambda},
	        {"L", b.snapshot_window},
	        {"K", o.ensemble.K},
	        {"R", o.ensemble.R},
	        {"seed", o.ensemble.master_seed},
	        {"batch_size", b.batch_size},
	        {"clip", b.gradient_clip},
	        {"aggregation", o.aggregation},
	        {"mode", mode_name(o.mode)}};
}

int cmd_train(Options& o) {
	o.ensemble.aggregation = kAggregations.at(o.aggregation);
	o.ensemble.threads = o.threads;
	try {
		o.ensemble.validate();
	} catch (const std::invalid_argument& e) {
		throw UsageError(e.what());
	}
	apply_isa(o.isa);

	const mtlf::SeriesCollection data = mtlf::load_csv(o.data);
	const Holdout h = make_holdout(data, o.mode);
	const fs::path out(o.out);
	fs::create_directories(out / "checkpoints");
	fs::create_directories(out / "logs");

	const auto t0 = std::chrono::steady_clock::now();
	const mtlf::EnsembleResult res = mtlf::run_ensemble(h.train, o.ensemble);
	const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

	json artifacts = json::array();
	{
		std::ofstream f(out / "forecasts.csv", std::ios::binary);
		mtlf::write_forecasts(f, mtlf::aggregate_rows(res.forecasts, h.first_month));
		artifacts.push_back("forecasts.csv");
	}
	if (o.emit_members) {
		std::ofstream f(out / "members.csv", std::ios::binary);
		mtlf::write_members(f, res.forecasts, h.first_month);
		artifacts.push_back("members.csv");
	}
	if (o.mode != Mode::forecast) {
		mtlf::save_csv(h.actuals, out / "actuals.csv");
		artifacts.push_back("actuals.csv");
	}
	json members = json::array();
	for (const auto& m : res.members) {
		const std::string tag = "r" + std::to_string(m.run) + "_k" + std::to_string(m.pool);
		mtlf::save_model(m.model, out / "checkpoints" / (tag + ".json"));
		std::string log = "epoch,batch,loss\n";
		for (const auto& line : m.log) {
			log += std::to_string(line.epoch) + "," + std::to_string(line.batch) + "," +
			       mtlf::format_double(line.loss) + "\n";
		}
		write_text(out / "logs" / (tag + ".csv"), log);
		artifacts.push_back("checkpoints/" + tag + ".json");
		artifacts.push_back("logs/" + tag + ".csv");
		members.push_back({{"run", m.run},
		                   {"pool", m.pool},
		                   {"seed", m.seed},
		                   {"partition_seed", mtlf::partition_seed(o.ensemble.master_seed, m.run)},
		                   {"held_out", m.held_out}});
	}

	const json manifest{{"command", "train"},
	                    {"data", fs::absolute(o.data).string()},
	                    {"config", config_json(o)},
	                    {"first_forecast_month", {h.first_month.year, h.first_month.month}},
	                    {"series", h.train.size()},
	                    {"isa", std::string(mtlf::simd::name(mtlf::simd::active().isa))},
	                    {"members", members},
	                    {"artifacts", artifacts},
	                    {"seconds", seconds}};
	write_text(out / "manifest.json", manifest.dump(2) + "\n");
	std::cout << "trained " << res.members.size() << " models on " << h.train.size() << " series in " << seconds
	          << " s; forecasts in " << (out / "forecasts.csv").string() << "\n";
	return 0;
}

int cmd_evaluate(const Options& o) {
	const auto rows = mtlf::read_forecasts(fs::path(o.forecasts));
	const mtlf::SeriesCollection actual_data = mtlf::load_csv(o.actuals);
	const auto actuals = mtlf::match_actuals(rows, actual_data);
	std::vector<std::string> ids;
	std::vector<std::vector<double>> forecasts;
	for (const auto& r : rows) {
		ids.push_back(r.id);
		forecasts.push_back(r.values);
	}
	const mtlf::EvalReport report = mtlf::evaluate(ids, forecasts, actuals);
	const fs::path out(o.out);
	fs::create_directories(out);
	write_text(out / "report.json", mtlf::report_json(report));
	write_text(out / "report.txt", mtlf::report_table(report));
	write_text(out / "per_country_mape.csv", mtlf::per_series_csv(report));
	write_text(out / "per_month_mape.csv", mtlf::per_month_csv(report));
	std::cout << mtlf::report_table(report);
	return 0;
}

int cmd_baseline(Options& o) {
	mtlf::BaselineKind kind{};
	try {
		kind = mtlf::parse_baseline(o.method);
	} catch (const std::invalid_argument& e) {
		throw UsageError(e.what());
	}
	const mtlf::SeriesCollection data = mtlf::load_csv(o.data);
	const Holdout h = make_holdout(data, o.mode);
	std::vector<mtlf::ForecastRow> rows;
	for (const auto& s : h.train.series) {
		const mtlf::Vec12 f = mtlf::baseline_forecast(kind, s.values);
		rows.push_back({s.id, h.first_month, std::vector<double>(f.begin(), f.end())});
	}
	const fs::path out(o.out);
	fs::create_directories(out);
	{
		std::ofstream f(out / "forecasts.csv", std::ios::binary);
		mtlf::write_forecasts(f, rows);
	}
	if (o.mode != Mode::forecast) {
		mtlf::save_csv(h.actuals, out / "actuals.csv");
	}
	std::cout << mtlf::baseline_name(kind) << " forecasts for " << rows.size() << " series in "
	          << (out / "forecasts.csv").string() << "\n";
	return 0;
}

int cmd_gradcheck(const Options& o) {
	if (!(o.step > 0.0)) {
		throw UsageError("--step must be positive");
	}
	apply_isa(o.isa);
	const mtlf::GradCheckSuite suite = mtlf::run_gradcheck_suite(o.seed, o.step);
	const std::pair<const char*, const mtlf::ad::GradCheckReport*> parts[] = {
	    {"ets", &suite.ets}, {"net", &suite.net}, {"full", &suite.full}};
	int status = 0;
	for (const auto& [name, r] : parts) {
		std::cout << name << ": " << r->max_relative_error << "\n";
		if (!r->kink_leaves.empty()) {
			std::cerr << name << ": " << r->kink_leaves.size() << " leaves at a kink, not scored\n";
		}
		if (!(r->max_relative_error < 1e-4)) {
			std::cerr << name << ": leaf " << r->worst_leaf << " analytic " << r->analytic[r->worst_leaf]
			          << " numeric " << r->numeric[r->worst_leaf] << "\n";
			status = 1;
		}
	}
	return status;
}

int cmd_synth(const Options& o) {
	if (o.years < 3) {
		throw UsageError("--years must be at least 3");
	}
	if (o.n < 1) {
		throw UsageError("--n must be at least 1");
	}
	mtlf::SynthOptions opts;
	opts.noise = o.noise;
	const mtlf::SeriesCollection data = mtlf::synthesize(o.n, o.years, o.seed, opts);
	const fs::path path(o.out);
	if (path.has_parent_path()) {
		fs::create_directories(path.parent_path());
	}
	mtlf::save_csv(data, path);
	return 0;
}

void add_training_flags(CLI::App& cmd, Options& o) {
	auto& b = o.ensemble.base;
	cmd.add_option("--epochs", b.epochs, "training epochs")->capture_default_str();
	cmd.add_option("--lr", b.learning_rate, "learning rate")->capture_default_str();
	cmd.add_option("--m", b.m, "state length of every recurrent layer")->capture_default_str();
	cmd.add_option("--tau", b.loss.tau, "pinball quantile")->capture_default_str();
	cmd.add_option("--lambda", b.loss.lambda, "level penalty weight")->capture_default_str();
	cmd.add_option("--L", b.snapshot_window, "snapshot averaging window (last L epochs)")->capture_default_str();
	cmd.add_option("--K", o.ensemble.K, "pool size")->capture_default_str();
	cmd.add_option("--R", o.ensemble.R, "independent runs")->capture_default_str();
	cmd.add_option("--seed", o.ensemble.master_seed, "master seed")->capture_default_str();
	cmd.add_option("--batch-size", b.batch_size, "series per mini-batch")->capture_default_str();
	cmd.add_option("--clip", b.gradient_clip, "global gradient norm clip, 0 disables")->capture_default_str();
	cmd.add_option("--threads", o.threads, "worker threads, 0 for all cores")->capture_default_str();
	cmd.add_option("--aggregation", o.aggregation, "ensemble combination")
	    ->check(CLI::IsMember({"mean", "median", "trimmed_mean"}))
	    ->capture_default_str();
	cmd.add_flag("--emit-members", o.emit_members, "also write every contributing forecast");
}

void add_mode_flag(CLI::App& cmd, Options& o) {
	cmd.add_option("--mode", o.mode, "hold out the test year, the validation year, or nothing")
	    ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
	    ->default_str("test");
}

// Expands `--config FILE` (key = value lines) into flags placed right after the
// subcommand, so flags given on the command line are parsed later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
	std::vector<std::string> args(argv + 1, argv + argc);
	std::string path;
	for (std::size_t i = 0; i < args.size(); ++i) {
		if (args[i] == "--config" && i + 1 < args.size()) {
			path = args[i + 1];
			args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
			break;
		}
		if (args[i].rfind("--config=", 0) == 0) {
			path = args[i].substr(9);
			args.erase(args.begin() + static_cast<long>(i));
			break;
		}
	}
	if (path.empty()) {
		return args;
	}
	std::vector<std::string> flags;
	for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
		if (item.name == "++" || item.name == "--") {
			continue; // section markers
		}
		flags.push_back("--" + item.name);
		flags.insert(flags.end(), item.inputs.begin(), item.inputs.end());
	}
	const auto at = args.empty() ? args.end() : args.begin() + 1;
	args.insert(at, flags.begin(), flags.end());
	return args;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Hybrid exponential smoothing and dilated LSTM forecaster for monthly demand"};
	app.require_subcommand(1);
	app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
	Options o;

	auto* train = app.add_subcommand("train", "train the ensemble and forecast the held-out year");
	std::string config_file;
	train->add_option("--config", config_file, "key = value file; command-line flags take precedence");
	train->add_option("--data", o.data, "input CSV (id,year,month,value)")->required()->check(CLI::ExistingFile);
	train->add_option("--out", o.out, "output directory")->required();
	train->add_option("--isa", o.isa, "kernel set: scalar, avx2 or neon");
	add_training_flags(*train, o);
	add_mode_flag(*train, o);

	auto* evaluate = app.add_subcommand("evaluate", "score forecasts against actuals");
	evaluate->add_option("--forecasts", o.forecasts, "forecast CSV (id,year,month,forecast)")
	    ->required()
	    ->check(CLI::ExistingFile);
	evaluate->add_option("--actuals", o.actuals, "actuals CSV (id,year,month,value)")->required()->check(CLI::ExistingFile);
	evaluate->add_option("--out", o.out, "report directory")->required();

	auto* baseline = app.add_subcommand("baseline", "classical benchmark forecasts");
	baseline->add_option("--data", o.data, "input CSV")->required()->check(CLI::ExistingFile);
	baseline->add_option("--out", o.out, "output directory")->required();
	baseline->add_option("--method", o.method, "seasonal_naive or holt_winters")->capture_default_str();
	add_mode_flag(*baseline, o);

	auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the gradients");
	gradcheck->add_option("--step", o.step, "central difference step")->capture_default_str();
	gradcheck->add_option("--seed", o.seed, "fixture seed")->capture_default_str();
	gradcheck->add_option("--isa", o.isa, "kernel set: scalar, avx2 or neon");

	auto* synth = app.add_subcommand("synth", "write a synthetic collection");
	synth->add_option("--out", o.out, "output CSV")->required();
	synth->add_option("--n", o.n, "number of series")->capture_default_str();
	synth->add_option("--years", o.years, "years per series (at least 3)")->capture_default_str();
	synth->add_option("--seed", o.seed, "seed")->capture_default_str();
	synth->add_option("--noise", o.noise, "log noise standard deviation")->capture_default_str();

	try {
		std::vector<std::string> args = expand_config(argc, argv);
		std::reverse(args.begin(), args.end());
		app.parse(args);
	} catch (const CLI::FileError& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 2;
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	try {
		if (train->parsed()) {
			return cmd_train(o);
		}
		if (evaluate->parsed()) {
			return cmd_evaluate(o);
		}
		if (baseline->parsed()) {
			return cmd_baseline(o);
		}
		if (gradcheck->parsed()) {
			return cmd_gradcheck(o);
		}
		return cmd_synth(o);
	} catch (const UsageError& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 2;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
}
