#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Reverse-mode automatic differentiation over scalar nodes.
//
// Nodes are appended in evaluation order, so insertion order is a topological
// order and a single reverse sweep computes all adjoints. Besides the scalar
// primitives, the tape carries two structural records used by the recurrent
// network: a pack (a list of existing nodes gathered into a contiguous buffer)
// and a fused affine node  bias + <weights, pack>  whose weights are a
// contiguous block of leaves. Both keep per-node bookkeeping small for the
// m x (in + m) gate products while leaving every value a scalar node.

namespace mtlf::ad {

class Tape;

using NodeId = std::uint32_t;

struct Var {
	Tape* tape = nullptr;
	NodeId id = 0;

	double value() const;
};

class Gradients;
Gradients backward(const Tape& tape, Var loss);

struct PackId {
	std::uint32_t index = 0;
};

enum class Op : std::uint8_t {
	leaf,
	constant,
	add,
	sub,
	mul,
	div,
	add_const,
	mul_const,
	const_div,
	log,
	exp,
	tanh,
	logistic,
	max,
	pack,
	affine,
};

class Tape {
public:
	Tape() = default;
	Tape(const Tape&) = delete;
	Tape& operator=(const Tape&) = delete;
	Tape(Tape&&) = default;
	Tape& operator=(Tape&&) = default;

	Var leaf(double value);
	Var constant(double value);
	/// Appends one leaf per value with consecutive ids; returns the first id.
	NodeId leaf_block(std::span<const double> values);

	Var add(Var a, Var b);
	Var sub(Var a, Var b);
	Var mul(Var a, Var b);
	Var div(Var a, Var b);
	Var add_const(Var a, double c);
	Var mul_const(Var a, double c);
	Var const_div(double c, Var a);
	Var log(Var a);
	Var exp(Var a);
	Var tanh(Var a);
	Var logistic(Var a);
	/// max(a, b); ties select a. The taken side is recorded as a branch decision.
	Var max(Var a, Var b);

	PackId pack(std::span<const Var> items);
	/// bias + sum_j value(weight_first + j) * pack[j]; weights must be leaves.
	Var affine(NodeId weight_first, PackId input, Var bias);

	Var var(NodeId id);
	double value(NodeId id) const { return values_[id]; }
	std::span<const double> values(NodeId first, std::size_t n) const { return {values_.data() + first, n}; }
	std::span<const double> pack_values(PackId p) const;
	std::size_t pack_size(PackId p) const { return packs_[p.index].length; }

	std::size_t size() const noexcept { return nodes_.size(); }
	Op op(NodeId id) const { return nodes_[id].op; }
	bool owns(Var v) const noexcept { return v.tape == this && v.id < nodes_.size(); }

	/// Taken side (0 = first operand) of every max node, in insertion order.
	const std::vector<std::uint8_t>& branches() const noexcept { return branches_; }

	/// Drops every node but keeps allocated capacity.
	void clear();

private:
	friend class Gradients;
	friend Gradients backward(const Tape& tape, Var loss);

	struct Node {
		Op op;
		std::uint32_t a;
		std::uint32_t b;
		std::uint32_t c;
		double aux;
	};

	struct PackRecord {
		std::uint32_t offset;
		std::uint32_t length;
	};

	Var push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c, double aux, double value);
	void check(Var v) const;

	std::vector<Node> nodes_;
	std::vector<double> values_;
	std::vector<PackRecord> packs_;
	std::vector<NodeId> pack_ids_;
	std::vector<double> pack_values_;
	std::vector<std::uint8_t> branches_;
};

/// Adjoints of one loss with respect to every node of a tape.
class Gradients {
public:
	double operator[](Var v) const { return adjoints_[v.id]; }
	double at(NodeId id) const { return adjoints_[id]; }
	std::span<const double> block(NodeId first, std::size_t n) const { return {adjoints_.data() + first, n}; }
	std::size_t size() const noexcept { return adjoints_.size(); }

private:
	friend Gradients backward(const Tape& tape, Var loss);
	std::vector<double> adjoints_;
};

/// Single reverse sweep from `loss`. Throws std::invalid_argument if the loss
/// does not belong to the tape, std::domain_error on a non-finite adjoint.
Gradients backward(const Tape& tape, Var loss);

inline double Var::value() const { return tape->value(id); }

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator+(Var a, double c) { return a.tape->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.tape->add_const(a, c); }
inline Var operator-(Var a, double c) { return a.tape->add_const(a, -c); }
inline Var operator-(double c, Var a) { return a.tape->add_const(a.tape->mul_const(a, -1.0), c); }
inline Var operator-(Var a) { return a.tape->mul_const(a, -1.0); }
inline Var operator*(Var a, double c) { return a.tape->mul_const(a, c); }
inline Var operator*(double c, Var a) { return a.tape->mul_const(a, c); }
inline Var operator/(Var a, double c) { return a.tape->mul_const(a, 1.0 / c); }
inline Var operator/(double c, Var a) { return a.tape->const_div(c, a); }

inline Var log(Var a) { return a.tape->log(a); }
inline Var exp(Var a) { return a.tape->exp(a); }
inline Var tanh(Var a) { return a.tape->tanh(a); }
inline Var logistic(Var a) { return a.tape->logistic(a); }
inline Var max(Var a, Var b) { return a.tape->max(a, b); }

/// Numerically stable 1 / (1 + exp(-x)).
double logistic(double x) noexcept;

} // namespace mtlf::ad
