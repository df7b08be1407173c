#include "mtlf/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mtlf {
namespace {

using nlohmann::json;

constexpr const char* kGateNames[kGates] = {"f", "i", "g", "o"};

json network_json(const NetworkParams& p) {
	const std::size_t m = p.m();
	json arrays = json::object();
	for (std::size_t l = 0; l < kLayers; ++l) {
		const std::string prefix = "layer" + std::to_string(l + 1) + ".";
		for (std::size_t g = 0; g < kGates; ++g) {
			std::vector<double> w;
			std::vector<double> v;
			std::vector<double> b;
			for (std::size_t r = 0; r < m; ++r) {
				for (std::size_t c = 0; c < p.input_size(l); ++c) {
					w.push_back(p.W(l, g, r, c));
				}
				for (std::size_t c = 0; c < m; ++c) {
					v.push_back(p.V(l, g, r, c));
				}
				b.push_back(p.b(l, g, r));
			}
			arrays[prefix + "W_" + kGateNames[g]] = {{"shape", {m, p.input_size(l)}}, {"data", w}};
			arrays[prefix + "V_" + kGateNames[g]] = {{"shape", {m, m}}, {"data", v}};
			arrays[prefix + "b_" + kGateNames[g]] = {{"shape", {m, 1}}, {"data", b}};
		}
	}
	std::vector<double> ow;
	std::vector<double> ob;
	for (std::size_t r = 0; r < kWindow; ++r) {
		for (std::size_t c = 0; c < m; ++c) {
			ow.push_back(p.out_W(r, c));
		}
		ob.push_back(p.out_b(r));
	}
	arrays["out.W"] = {{"shape", {kWindow, m}}, {"data", ow}};
	arrays["out.b"] = {{"shape", {kWindow, 1}}, {"data", ob}};
	return {{"format", "mtlf-network"},
	        {"version", kCheckpointVersion},
	        {"m", m},
	        {"dilations", kDilations},
	        {"arrays", arrays}};
}

const std::vector<double> array_data(const json& arrays, const std::string& name, std::size_t rows, std::size_t cols) {
	if (!arrays.contains(name)) {
		throw std::invalid_argument("checkpoint is missing array " + name);
	}
	const json& a = arrays.at(name);
	const auto shape = a.at("shape").get<std::vector<std::size_t>>();
	auto data = a.at("data").get<std::vector<double>>();
	if (shape.size() != 2 || shape[0] != rows || shape[1] != cols || data.size() != rows * cols) {
		throw std::invalid_argument("checkpoint array " + name + " has the wrong shape");
	}
	return data;
}

NetworkParams network_from(const json& j) {
	if (j.value("format", "") != "mtlf-network") {
		throw std::invalid_argument("not a network checkpoint");
	}
	if (j.value("version", 0) != kCheckpointVersion) {
		throw std::invalid_argument("unsupported checkpoint version");
	}
	if (j.at("dilations").get<std::vector<std::size_t>>() != std::vector<std::size_t>(kDilations.begin(), kDilations.end())) {
		throw std::invalid_argument("checkpoint dilations must be (1, 3, 6, 12)");
	}
	const auto m = j.at("m").get<std::size_t>();
	NetworkParams p(m);
	const json& arrays = j.at("arrays");
	for (std::size_t l = 0; l < kLayers; ++l) {
		const std::string prefix = "layer" + std::to_string(l + 1) + ".";
		for (std::size_t g = 0; g < kGates; ++g) {
			const auto w = array_data(arrays, prefix + "W_" + kGateNames[g], m, p.input_size(l));
			const auto v = array_data(arrays, prefix + "V_" + kGateNames[g], m, m);
			const auto b = array_data(arrays, prefix + "b_" + kGateNames[g], m, 1);
			for (std::size_t r = 0; r < m; ++r) {
				for (std::size_t c = 0; c < p.input_size(l); ++c) {
					p.W(l, g, r, c) = w[r * p.input_size(l) + c];
				}
				for (std::size_t c = 0; c < m; ++c) {
					p.V(l, g, r, c) = v[r * m + c];
				}
				p.b(l, g, r) = b[r];
			}
		}
	}
	const auto ow = array_data(arrays, "out.W", kWindow, m);
	const auto ob = array_data(arrays, "out.b", kWindow, 1);
	for (std::size_t r = 0; r < kWindow; ++r) {
		for (std::size_t c = 0; c < m; ++c) {
			p.out_W(r, c) = ow[r * m + c];
		}
		p.out_b(r) = ob[r];
	}
	return p;
}

} // namespace

std::string network_to_json(const NetworkParams& params) { return network_json(params).dump(); }

NetworkParams network_from_json(const std::string& text) { return network_from(json::parse(text)); }

std::string model_to_json(const TrainedModel& model) {
	json ets = json::object();
	json snaps = json::object();
	for (const auto& id : model.ids) {
		const EtsParams& e = model.ets_for(id);
		ets[id] = {{"alpha_raw", e.alpha_raw}, {"beta_raw", e.beta_raw}, {"init_season_raw", e.init_season_raw}};
		json list = json::array();
		if (auto it = model.snapshots.find(id); it != model.snapshots.end()) {
			for (const auto& s : it->second) {
				list.push_back(s);
			}
		}
		snaps[id] = list;
	}
	json j{{"format", "mtlf-model"},
	       {"version", kCheckpointVersion},
	       {"network", network_json(model.network)},
	       {"ids", model.ids},
	       {"ets", ets},
	       {"snapshots", snaps},
	       {"epoch_loss", model.epoch_loss}};
	return j.dump();
}

TrainedModel model_from_json(const std::string& text) {
	const json j = json::parse(text);
	if (j.value("format", "") != "mtlf-model" || j.value("version", 0) != kCheckpointVersion) {
		throw std::invalid_argument("not a version-1 model checkpoint");
	}
	TrainedModel m;
	m.network = network_from(j.at("network"));
	m.ids = j.at("ids").get<std::vector<std::string>>();
	for (const auto& id : m.ids) {
		const json& e = j.at("ets").at(id);
		EtsParams p;
		p.alpha_raw = e.at("alpha_raw").get<double>();
		p.beta_raw = e.at("beta_raw").get<double>();
		const auto s = e.at("init_season_raw").get<std::vector<double>>();
		if (s.size() != kSeason) {
			throw std::invalid_argument("ETS entry for " + id + " needs 12 seasonal values");
		}
		std::copy(s.begin(), s.end(), p.init_season_raw.begin());
		m.ets[id] = p;
		m.snapshots[id] = j.at("snapshots").at(id).get<std::vector<Vec12>>();
	}
	m.epoch_loss = j.value("epoch_loss", std::vector<double>{});
	return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw std::runtime_error("cannot write checkpoint: " + path.string());
	}
	out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in) {
		throw std::runtime_error("cannot open checkpoint: " + path.string());
	}
	std::stringstream ss;
	ss << in.rdbuf();
	return model_from_json(ss.str());
}

} // namespace mtlf
