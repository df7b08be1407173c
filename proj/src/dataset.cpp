#include "mtlf/dataset.hpp"

#include "mtlf/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mtlf {
namespace {

struct Row {
	YearMonth ym;
	double value;
	std::size_t line;
};

std::string trim(std::string_view s) {
	const auto b = s.find_first_not_of(" \t\r");
	if (b == std::string_view::npos) {
		return {};
	}
	const auto e = s.find_last_not_of(" \t\r");
	return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
	std::vector<std::string> out;
	std::size_t pos = 0;
	while (true) {
		const auto comma = line.find(',', pos);
		out.push_back(trim(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
		if (comma == std::string::npos) {
			break;
		}
		pos = comma + 1;
	}
	return out;
}

template <class T>
T parse_number(const std::string& field, std::size_t line, const char* what) {
	T value{};
	const char* first = field.data();
	const char* last = field.data() + field.size();
	auto [ptr, ec] = std::from_chars(first, last, value);
	if (ec != std::errc{} || ptr != last) {
		throw std::invalid_argument("line " + std::to_string(line) + ": bad " + what + " '" + field + "'");
	}
	return value;
}

std::string format_ym(YearMonth ym) {
	char buf[16];
	std::snprintf(buf, sizeof buf, "%04d-%02d", ym.year, ym.month);
	return buf;
}

} // namespace

const MonthlySeries& SeriesCollection::find(const std::string& id) const {
	for (const auto& s : series) {
		if (s.id == id) {
			return s;
		}
	}
	throw std::out_of_range("unknown series id: " + id);
}

std::vector<std::string> SeriesCollection::ids() const {
	std::vector<std::string> out;
	out.reserve(series.size());
	for (const auto& s : series) {
		out.push_back(s.id);
	}
	return out;
}

SeriesCollection read_csv(std::istream& in) {
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		if (!trim(line).empty()) {
			break;
		}
	}
	if (line_no == 0 || trim(line).empty()) {
		throw std::invalid_argument("empty CSV");
	}
	if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
		line.erase(0, 3); // UTF-8 BOM
	}
	const auto header = split_fields(line);
	if (header != std::vector<std::string>{"id", "year", "month", "value"}) {
		throw std::invalid_argument("expected header 'id,year,month,value'");
	}

	std::vector<std::string> order;
	std::map<std::string, std::vector<Row>> rows;
	while (std::getline(in, line)) {
		++line_no;
		if (trim(line).empty()) {
			continue;
		}
		const auto f = split_fields(line);
		if (f.size() != 4) {
			throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 4 fields");
		}
		Row r{{parse_number<int>(f[1], line_no, "year"), parse_number<int>(f[2], line_no, "month")},
		      parse_number<double>(f[3], line_no, "value"),
		      line_no};
		if (r.ym.month < 1 || r.ym.month > 12) {
			throw std::invalid_argument("line " + std::to_string(line_no) + ": month out of range");
		}
		if (!(r.value > 0.0) || !std::isfinite(r.value)) {
			throw std::invalid_argument("line " + std::to_string(line_no) + ": non-positive demand for " + f[0]);
		}
		auto [it, inserted] = rows.try_emplace(f[0]);
		if (inserted) {
			order.push_back(f[0]);
		}
		it->second.push_back(r);
	}
	if (order.empty()) {
		throw std::invalid_argument("CSV contains no data rows");
	}

	SeriesCollection out;
	for (const auto& id : order) {
		auto& rs = rows[id];
		std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.ym < b.ym; });
		MonthlySeries s{id, rs.front().ym, {}};
		s.values.reserve(rs.size());
		for (std::size_t i = 0; i < rs.size(); ++i) {
			if (i > 0) {
				const int step = rs[i].ym.index() - rs[i - 1].ym.index();
				if (step == 0) {
					throw std::invalid_argument("duplicate (id, year, month) " + id + " " + format_ym(rs[i].ym) +
					                            " at line " + std::to_string(rs[i].line));
				}
				if (step != 1) {
					throw std::invalid_argument("calendar gap in " + id + " between " + format_ym(rs[i - 1].ym) +
					                            " and " + format_ym(rs[i].ym));
				}
			}
			s.values.push_back(rs[i].value);
		}
		out.series.push_back(std::move(s));
	}
	out.common_end = out.series.front().end();
	validate(out);
	return out;
}

SeriesCollection load_csv(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw std::runtime_error("cannot open data file: " + path.string());
	}
	return read_csv(in);
}

void write_csv(const SeriesCollection& collection, std::ostream& out) {
	out << "id,year,month,value\n";
	char buf[64];
	for (const auto& s : collection.series) {
		for (std::size_t t = 0; t < s.size(); ++t) {
			const YearMonth ym = s.month_at(t);
			auto res = std::to_chars(buf, buf + sizeof buf, s.values[t]);
			out << s.id << ',' << ym.year << ',' << ym.month << ',' << std::string_view(buf, res.ptr - buf) << '\n';
		}
	}
}

void save_csv(const SeriesCollection& collection, const std::filesystem::path& path) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw std::runtime_error("cannot write: " + path.string());
	}
	write_csv(collection, out);
	if (!out) {
		throw std::runtime_error("write failed: " + path.string());
	}
}

void validate(const SeriesCollection& collection) {
	std::vector<std::string> ids;
	for (const auto& s : collection.series) {
		if (s.values.empty()) {
			throw std::invalid_argument("series " + s.id + " is empty");
		}
		for (double v : s.values) {
			if (!(v > 0.0) || !std::isfinite(v)) {
				throw std::invalid_argument("non-positive demand in series " + s.id);
			}
		}
		if (s.end() != collection.common_end) {
			throw std::invalid_argument("series " + s.id + " ends " + format_ym(s.end()) + ", expected common end " +
			                            format_ym(collection.common_end));
		}
		ids.push_back(s.id);
	}
	std::sort(ids.begin(), ids.end());
	if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
		throw std::invalid_argument("duplicate series id");
	}
}

SplitResult split(const SeriesCollection& collection, const SplitSpec& spec) {
	if (spec.test_months < 1 || spec.valid_months < 1) {
		throw std::invalid_argument("test and validation horizons must be positive");
	}
	const std::size_t held = static_cast<std::size_t>(spec.test_months + spec.valid_months);
	SplitResult out;
	out.train.common_end = collection.common_end.plus(-static_cast<int>(held));
	for (const auto& s : collection.series) {
		if (s.size() < held + kMinTrainMonths) {
			throw std::invalid_argument("series " + s.id + " too short for split: " + std::to_string(s.size()) +
			                            " months, need " + std::to_string(held + kMinTrainMonths));
		}
		const auto train_end = s.values.end() - static_cast<std::ptrdiff_t>(held);
		const auto valid_end = train_end + spec.valid_months;
		out.train.series.push_back({s.id, s.start, {s.values.begin(), train_end}});
		out.valid_targets.emplace_back(train_end, valid_end);
		out.test_targets.emplace_back(valid_end, s.values.end());
	}
	return out;
}

SeriesCollection drop_last(const SeriesCollection& collection, int months) {
	SeriesCollection out;
	out.common_end = collection.common_end.plus(-months);
	for (const auto& s : collection.series) {
		if (s.size() <= static_cast<std::size_t>(months)) {
			throw std::invalid_argument("series " + s.id + " too short to drop " + std::to_string(months) + " months");
		}
		out.series.push_back({s.id, s.start, {s.values.begin(), s.values.end() - months}});
	}
	return out;
}

SeriesCollection synthesize(int n_series, int n_years, std::uint64_t seed, const SynthOptions& options) {
	if (n_series < 1) {
		throw std::invalid_argument("synthesize: need at least one series");
	}
	if (n_years < 3) {
		throw std::invalid_argument("synthesize: n_years must be at least 3");
	}
	if (options.noise < 0.0) {
		throw std::invalid_argument("synthesize: noise dispersion must be non-negative");
	}
	const int length = n_years * 12;
	const YearMonth start = options.end.plus(-(length - 1));
	SeriesCollection out;
	out.common_end = options.end;
	Rng rng(seed);
	for (int k = 0; k < n_series; ++k) {
		const double base = std::exp(rng.uniform(std::log(1000.0), std::log(50000.0)));
		// log-trend: drift + curvature + slow oscillation over the whole span
		const double drift = rng.uniform(-0.15, 0.25);
		const double curve = rng.uniform(-0.15, 0.15);
		const double wave = rng.uniform(0.0, 0.05);
		const double freq = rng.uniform(0.5, 1.5);
		const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

		const double amp = rng.uniform(0.05, 0.3);
		const double peak = rng.uniform(0.0, 12.0);
		const double amp2 = rng.uniform(0.0, 0.08);
		double season[12];
		double log_mean = 0.0;
		for (int i = 0; i < 12; ++i) {
			const double a = 2.0 * std::numbers::pi * (i - peak) / 12.0;
			season[i] = 1.0 + amp * std::cos(a) + amp2 * std::cos(2.0 * a) + rng.uniform(-0.03, 0.03);
			log_mean += std::log(season[i]) / 12.0;
		}
		for (double& s : season) {
			s /= std::exp(log_mean);
		}

		MonthlySeries s;
		char id[16];
		std::snprintf(id, sizeof id, "S%03d", k + 1);
		s.id = id;
		s.start = start;
		s.values.resize(static_cast<std::size_t>(length));
		for (int t = 0; t < length; ++t) {
			const double u = static_cast<double>(t) / length;
			const double shape = drift * u + curve * (u - 0.5) * (u - 0.5) + wave * std::sin(2.0 * std::numbers::pi * freq * u + phase);
			const double trend = base * std::exp(options.trend_scale * shape);
			const int month = start.plus(t).month - 1;
			const double z = rng.normal();
			const double noise = options.noise > 0.0 ? std::exp(options.noise * z) : 1.0;
			s.values[static_cast<std::size_t>(t)] = trend * season[month] * noise;
		}
		out.series.push_back(std::move(s));
	}
	return out;
}

} // namespace mtlf
