#include "mtlf/rdlstm.hpp"

#include "mtlf/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mtlf {

std::size_t NetworkParams::count(std::size_t m) noexcept {
	std::size_t n = 0;
	for (std::size_t l = 0; l < kLayers; ++l) {
		const std::size_t in = l == 0 ? kWindow : m;
		n += kGates * m * (in + m) + kGates * m;
	}
	return n + kWindow * m + kWindow;
}

NetworkParams::NetworkParams(std::size_t m) : m_(m) {
	if (m == 0) {
		throw std::invalid_argument("state length m must be at least 1");
	}
	std::size_t off = 0;
	for (std::size_t l = 0; l < kLayers; ++l) {
		layer_offsets_[l] = off;
		off += kGates * m * row_stride(l) + kGates * m;
	}
	out_offset_ = off;
	values_.assign(count(m), 0.0);
}

std::size_t NetworkParams::gate_offset(std::size_t layer, std::size_t gate) const noexcept {
	return layer_offsets_[layer] + gate * m_ * row_stride(layer);
}

std::size_t NetworkParams::bias_offset(std::size_t layer, std::size_t gate) const noexcept {
	return layer_offsets_[layer] + kGates * m_ * row_stride(layer) + gate * m_;
}

double& NetworkParams::W(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) {
	return values_[gate_offset(layer, gate) + row * row_stride(layer) + col];
}
double& NetworkParams::V(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) {
	return values_[gate_offset(layer, gate) + row * row_stride(layer) + input_size(layer) + col];
}
double& NetworkParams::b(std::size_t layer, std::size_t gate, std::size_t row) {
	return values_[bias_offset(layer, gate) + row];
}
double& NetworkParams::out_W(std::size_t row, std::size_t col) { return values_[out_offset_ + row * m_ + col]; }
double& NetworkParams::out_b(std::size_t row) { return values_[out_b_offset() + row]; }

double NetworkParams::W(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) const {
	return values_[gate_offset(layer, gate) + row * row_stride(layer) + col];
}
double NetworkParams::V(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) const {
	return values_[gate_offset(layer, gate) + row * row_stride(layer) + input_size(layer) + col];
}
double NetworkParams::b(std::size_t layer, std::size_t gate, std::size_t row) const {
	return values_[bias_offset(layer, gate) + row];
}
double NetworkParams::out_W(std::size_t row, std::size_t col) const { return values_[out_offset_ + row * m_ + col]; }
double NetworkParams::out_b(std::size_t row) const { return values_[out_b_offset() + row]; }

NetworkParams init_weights(std::size_t m, std::uint64_t seed) {
	NetworkParams p(m);
	Rng rng(seed);
	const double bound = 1.0 / std::sqrt(static_cast<double>(m));
	for (std::size_t l = 0; l < kLayers; ++l) {
		for (std::size_t g = 0; g < kGates; ++g) {
			for (std::size_t r = 0; r < m; ++r) {
				for (std::size_t c = 0; c < p.row_stride(l); ++c) {
					p.values()[p.gate_offset(l, g) + r * p.row_stride(l) + c] = rng.uniform(-bound, bound);
				}
			}
		}
		for (std::size_t r = 0; r < m; ++r) {
			p.b(l, forget_gate, r) = 1.0;
		}
	}
	for (std::size_t r = 0; r < kWindow; ++r) {
		for (std::size_t c = 0; c < m; ++c) {
			p.out_W(r, c) = rng.uniform(-bound, bound);
		}
	}
	return p;
}

NetworkLeaves register_leaves(ad::Tape& tape, const NetworkParams& params) {
	return {&params, tape.leaf_block(params.values())};
}

namespace {

// Gate pre-activations for every unit, then the shared cell update. `lower`
// is the residual input (empty for the standard cell).
CellState cell(std::span<const ad::Var> input, std::span<const ad::Var> h_rec, std::span<const ad::Var> c_rec,
               std::span<const ad::Var> lower, const NetworkLeaves& net, std::size_t layer, ad::Tape& tape) {
	const NetworkParams& p = *net.params;
	const std::size_t m = p.m();
	if (layer >= kLayers) {
		throw std::invalid_argument("layer index out of range");
	}
	if (input.size() != p.input_size(layer) || h_rec.size() != m || c_rec.size() != m ||
	    (!lower.empty() && lower.size() != m)) {
		throw std::invalid_argument("LSTM cell dimension mismatch in layer " + std::to_string(layer + 1));
	}
	std::vector<ad::Var> joined;
	joined.reserve(input.size() + m);
	joined.insert(joined.end(), input.begin(), input.end());
	joined.insert(joined.end(), h_rec.begin(), h_rec.end());
	const ad::PackId packed = tape.pack(joined);

	const std::size_t stride = p.row_stride(layer);
	auto pre = [&](std::size_t gate, std::size_t row) {
		const auto w = net.first + static_cast<ad::NodeId>(p.gate_offset(layer, gate) + row * stride);
		const ad::Var bias = tape.var(net.first + static_cast<ad::NodeId>(p.bias_offset(layer, gate) + row));
		return tape.affine(w, packed, bias);
	};

	CellState out;
	out.h.reserve(m);
	out.c.reserve(m);
	for (std::size_t r = 0; r < m; ++r) {
		const ad::Var f = ad::logistic(pre(forget_gate, r));
		const ad::Var i = ad::logistic(pre(input_gate, r));
		const ad::Var g = ad::tanh(pre(candidate_gate, r));
		const ad::Var o = ad::logistic(pre(output_gate, r));
		const ad::Var c = f * c_rec[r] + i * g;
		ad::Var act = ad::tanh(c);
		if (!lower.empty()) {
			act = act + lower[r];
		}
		out.c.push_back(c);
		out.h.push_back(o * act);
	}
	return out;
}

} // namespace

CellState lstm_cell(std::span<const ad::Var> x, std::span<const ad::Var> h_prev, std::span<const ad::Var> c_prev,
                    const NetworkLeaves& net, std::size_t layer, ad::Tape& tape) {
	return cell(x, h_prev, c_prev, {}, net, layer, tape);
}

CellState rdlstm_cell(std::span<const ad::Var> h_lower, std::span<const ad::Var> h_delayed,
                      std::span<const ad::Var> c_delayed, const NetworkLeaves& net, std::size_t layer, ad::Tape& tape) {
	if (h_lower.size() != net.params->m()) {
		throw std::invalid_argument("residual cell dimension mismatch");
	}
	return cell(h_lower, h_delayed, c_delayed, h_lower, net, layer, tape);
}

RecurrentState::RecurrentState(std::size_t m, ad::Tape& tape) {
	const ad::Var zero = tape.constant(0.0);
	zero_.h.assign(m, zero);
	zero_.c.assign(m, zero);
	for (std::size_t l = 0; l < kLayers; ++l) {
		history_[l].assign(kDilations[l], zero_);
		written_step_[l].assign(kDilations[l], 0);
	}
}

const CellState& RecurrentState::read(std::size_t layer, long step) const {
	const long d = static_cast<long>(kDilations[layer]);
	const long wanted = step - d;
	if (wanted < 1) {
		return zero_;
	}
	const auto slot = static_cast<std::size_t>(wanted % d);
	if (written_step_[layer][slot] != wanted) {
		throw std::logic_error("recurrent state for step " + std::to_string(wanted) + " was not written");
	}
	return history_[layer][slot];
}

void RecurrentState::write(std::size_t layer, long step, CellState state) {
	const long d = static_cast<long>(kDilations[layer]);
	const auto slot = static_cast<std::size_t>(step % d);
	history_[layer][slot] = std::move(state);
	written_step_[layer][slot] = step;
}

std::vector<Prediction> forward_sequence(std::span<const std::array<ad::Var, kWindow>> inputs, const NetworkLeaves& net,
                                         ad::Tape& tape, const StateReadObserver& observer) {
	if (inputs.empty()) {
		throw std::invalid_argument("forward_sequence: empty sequence");
	}
	const NetworkParams& p = *net.params;
	RecurrentState state(p.m(), tape);
	std::vector<Prediction> out;
	out.reserve(inputs.size());
	const auto out_w = net.first + static_cast<ad::NodeId>(p.out_w_offset());
	const auto out_b = net.first + static_cast<ad::NodeId>(p.out_b_offset());

	for (std::size_t k = 0; k < inputs.size(); ++k) {
		const long step = static_cast<long>(k) + 1;
		std::vector<ad::Var> lower;
		for (std::size_t l = 0; l < kLayers; ++l) {
			if (observer) {
				observer(l, step, step - static_cast<long>(kDilations[l]));
			}
			const CellState& prev = state.read(l, step);
			CellState next = l == 0 ? lstm_cell(inputs[k], prev.h, prev.c, net, l, tape)
			                        : rdlstm_cell(lower, prev.h, prev.c, net, l, tape);
			lower = next.h;
			state.write(l, step, std::move(next));
		}
		const ad::PackId top = tape.pack(lower);
		Prediction pred;
		for (std::size_t r = 0; r < kWindow; ++r) {
			pred[r] = tape.affine(out_w + static_cast<ad::NodeId>(r * p.m()), top, tape.var(out_b + static_cast<ad::NodeId>(r)));
		}
		out.push_back(pred);
	}
	return out;
}

} // namespace mtlf
