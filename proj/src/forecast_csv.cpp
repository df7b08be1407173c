#include "mtlf/forecast_csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mtlf {

std::string format_double(double v) {
	char buf[64];
	auto res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

void write_forecasts(std::ostream& out, std::span<const ForecastRow> rows) {
	out << "id,year,month,forecast\n";
	for (const auto& r : rows) {
		for (std::size_t h = 0; h < r.values.size(); ++h) {
			const YearMonth ym = r.start.plus(static_cast<int>(h));
			out << r.id << ',' << ym.year << ',' << ym.month << ',' << format_double(r.values[h]) << '\n';
		}
	}
}

void write_members(std::ostream& out, const ForecastSet& set, YearMonth first_month) {
	out << "id,year,month,run,pool,forecast\n";
	for (const auto& s : set.series) {
		for (const auto& c : s.members) {
			for (std::size_t h = 0; h < c.forecast.size(); ++h) {
				const YearMonth ym = first_month.plus(static_cast<int>(h));
				out << s.id << ',' << ym.year << ',' << ym.month << ',' << c.run << ',' << c.pool << ','
				    << format_double(c.forecast[h]) << '\n';
			}
		}
	}
}

std::vector<ForecastRow> read_forecasts(std::istream& in) {
	// Same column layout as the demand file apart from the header name.
	std::stringstream buffer;
	std::string line;
	if (!std::getline(in, line)) {
		throw std::invalid_argument("empty forecast file");
	}
	if (!line.empty() && line.back() == '\r') {
		line.pop_back();
	}
	if (line != "id,year,month,forecast") {
		throw std::invalid_argument("expected header 'id,year,month,forecast'");
	}
	buffer << "id,year,month,value\n" << in.rdbuf();
	const SeriesCollection c = read_csv(buffer);
	std::vector<ForecastRow> rows;
	for (const auto& s : c.series) {
		rows.push_back({s.id, s.start, s.values});
	}
	return rows;
}

std::vector<ForecastRow> read_forecasts(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw std::runtime_error("cannot open forecast file: " + path.string());
	}
	return read_forecasts(in);
}

std::vector<ForecastRow> aggregate_rows(const ForecastSet& set, YearMonth first_month) {
	std::vector<ForecastRow> rows;
	for (const auto& s : set.series) {
		rows.push_back({s.id, first_month, {s.aggregate.begin(), s.aggregate.end()}});
	}
	return rows;
}

std::vector<std::vector<double>> match_actuals(std::span<const ForecastRow> rows, const SeriesCollection& data) {
	std::vector<std::vector<double>> out;
	for (const auto& r : rows) {
		const MonthlySeries* s = nullptr;
		for (const auto& cand : data.series) {
			if (cand.id == r.id) {
				s = &cand;
			}
		}
		if (s == nullptr) {
			throw std::invalid_argument("no actuals for series " + r.id);
		}
		std::vector<double> vals;
		for (std::size_t h = 0; h < r.values.size(); ++h) {
			const int t = r.start.plus(static_cast<int>(h)).index() - s->start.index();
			if (t < 0 || t >= static_cast<int>(s->size())) {
				throw std::invalid_argument("actuals for " + r.id + " do not cover the forecast months");
			}
			vals.push_back(s->values[static_cast<std::size_t>(t)]);
		}
		out.push_back(std::move(vals));
	}
	return out;
}

} // namespace mtlf
