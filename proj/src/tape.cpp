#include "mtlf/tape.hpp"

#include "mtlf/simd/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mtlf::ad {
namespace {
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
}

double logistic(double x) noexcept {
	if (x >= 0.0) {
		return 1.0 / (1.0 + std::exp(-x));
	}
	const double e = std::exp(x);
	return e / (1.0 + e);
}

Var Tape::push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c, double aux, double value) {
	const auto id = static_cast<NodeId>(nodes_.size());
	nodes_.push_back({op, a, b, c, aux});
	values_.push_back(value);
	return {this, id};
}

void Tape::check(Var v) const {
	if (!owns(v)) {
		throw std::invalid_argument("variable does not belong to this tape");
	}
}

Var Tape::leaf(double value) { return push(Op::leaf, kNone, kNone, kNone, 0.0, value); }

Var Tape::constant(double value) { return push(Op::constant, kNone, kNone, kNone, 0.0, value); }

NodeId Tape::leaf_block(std::span<const double> values) {
	const auto first = static_cast<NodeId>(nodes_.size());
	nodes_.reserve(nodes_.size() + values.size());
	values_.reserve(values_.size() + values.size());
	for (double v : values) {
		push(Op::leaf, kNone, kNone, kNone, 0.0, v);
	}
	return first;
}

Var Tape::var(NodeId id) {
	if (id >= nodes_.size()) {
		throw std::out_of_range("node id out of range");
	}
	return {this, id};
}

Var Tape::add(Var a, Var b) { return push(Op::add, a.id, b.id, kNone, 0.0, values_[a.id] + values_[b.id]); }

Var Tape::sub(Var a, Var b) { return push(Op::sub, a.id, b.id, kNone, 0.0, values_[a.id] - values_[b.id]); }

Var Tape::mul(Var a, Var b) { return push(Op::mul, a.id, b.id, kNone, 0.0, values_[a.id] * values_[b.id]); }

Var Tape::div(Var a, Var b) { return push(Op::div, a.id, b.id, kNone, 0.0, values_[a.id] / values_[b.id]); }

Var Tape::add_const(Var a, double c) { return push(Op::add_const, a.id, kNone, kNone, c, values_[a.id] + c); }

Var Tape::mul_const(Var a, double c) { return push(Op::mul_const, a.id, kNone, kNone, c, values_[a.id] * c); }

Var Tape::const_div(double c, Var a) { return push(Op::const_div, a.id, kNone, kNone, c, c / values_[a.id]); }

Var Tape::log(Var a) { return push(Op::log, a.id, kNone, kNone, 0.0, std::log(values_[a.id])); }

Var Tape::exp(Var a) { return push(Op::exp, a.id, kNone, kNone, 0.0, std::exp(values_[a.id])); }

Var Tape::tanh(Var a) { return push(Op::tanh, a.id, kNone, kNone, 0.0, std::tanh(values_[a.id])); }

Var Tape::logistic(Var a) { return push(Op::logistic, a.id, kNone, kNone, 0.0, ad::logistic(values_[a.id])); }

Var Tape::max(Var a, Var b) {
	const double va = values_[a.id];
	const double vb = values_[b.id];
	const std::uint32_t taken = va >= vb ? 0U : 1U;
	branches_.push_back(static_cast<std::uint8_t>(taken));
	return push(Op::max, a.id, b.id, taken, 0.0, taken == 0U ? va : vb);
}

PackId Tape::pack(std::span<const Var> items) {
	const auto offset = static_cast<std::uint32_t>(pack_ids_.size());
	for (const Var& v : items) {
		pack_ids_.push_back(v.id);
		pack_values_.push_back(values_[v.id]);
	}
	const auto index = static_cast<std::uint32_t>(packs_.size());
	packs_.push_back({offset, static_cast<std::uint32_t>(items.size())});
	push(Op::pack, index, kNone, kNone, 0.0, 0.0);
	return {index};
}

std::span<const double> Tape::pack_values(PackId p) const {
	const PackRecord& rec = packs_[p.index];
	return {pack_values_.data() + rec.offset, rec.length};
}

Var Tape::affine(NodeId weight_first, PackId input, Var bias) {
	const PackRecord& rec = packs_[input.index];
	if (static_cast<std::size_t>(weight_first) + rec.length > nodes_.size()) {
		throw std::out_of_range("affine weight block out of range");
	}
	const double dot = simd::active().dot(values_.data() + weight_first, pack_values_.data() + rec.offset, rec.length);
	return push(Op::affine, bias.id, input.index, weight_first, 0.0, values_[bias.id] + dot);
}

void Tape::clear() {
	nodes_.clear();
	values_.clear();
	packs_.clear();
	pack_ids_.clear();
	pack_values_.clear();
	branches_.clear();
}

Gradients backward(const Tape& tape, Var loss) {
	if (!tape.owns(loss)) {
		throw std::invalid_argument("loss variable is not on this tape");
	}
	const auto& nodes = tape.nodes_;
	const auto& vals = tape.values_;
	const simd::KernelTable& k = simd::active();

	Gradients out;
	std::vector<double>& adj = out.adjoints_;
	adj.assign(nodes.size(), 0.0);
	std::vector<double> pack_adj(tape.pack_values_.size(), 0.0);
	adj[loss.id] = 1.0;

	for (std::size_t idx = loss.id + 1; idx-- > 0;) {
		const auto& n = nodes[idx];
		if (n.op == Op::pack) {
			const auto& rec = tape.packs_[n.a];
			for (std::uint32_t j = 0; j < rec.length; ++j) {
				adj[tape.pack_ids_[rec.offset + j]] += pack_adj[rec.offset + j];
			}
			continue;
		}
		const double g = adj[idx];
		if (g == 0.0) {
			continue;
		}
		switch (n.op) {
		case Op::leaf:
		case Op::constant:
		case Op::pack:
			break;
		case Op::add:
			adj[n.a] += g;
			adj[n.b] += g;
			break;
		case Op::sub:
			adj[n.a] += g;
			adj[n.b] -= g;
			break;
		case Op::mul:
			adj[n.a] += g * vals[n.b];
			adj[n.b] += g * vals[n.a];
			break;
		case Op::div:
			adj[n.a] += g / vals[n.b];
			adj[n.b] -= g * vals[idx] / vals[n.b];
			break;
		case Op::add_const:
			adj[n.a] += g;
			break;
		case Op::mul_const:
			adj[n.a] += g * n.aux;
			break;
		case Op::const_div:
			adj[n.a] -= g * vals[idx] / vals[n.a];
			break;
		case Op::log:
			adj[n.a] += g / vals[n.a];
			break;
		case Op::exp:
			adj[n.a] += g * vals[idx];
			break;
		case Op::tanh:
			adj[n.a] += g * (1.0 - vals[idx] * vals[idx]);
			break;
		case Op::logistic:
			adj[n.a] += g * vals[idx] * (1.0 - vals[idx]);
			break;
		case Op::max:
			adj[n.c == 0U ? n.a : n.b] += g;
			break;
		case Op::affine: {
			const auto& rec = tape.packs_[n.b];
			adj[n.a] += g;
			k.axpy(g, tape.pack_values_.data() + rec.offset, adj.data() + n.c, rec.length);
			k.axpy(g, vals.data() + n.c, pack_adj.data() + rec.offset, rec.length);
			break;
		}
		}
	}

	for (std::size_t i = 0; i <= loss.id; ++i) {
		if (!std::isfinite(adj[i])) {
			throw std::domain_error("non-finite adjoint at node " + std::to_string(i));
		}
	}
	return out;
}

} // namespace mtlf::ad
