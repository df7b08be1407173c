#pragma once

#include "mtlf/tape.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Four recurrent layers and a linear read-out:
//   layer 1      standard LSTM over the 12-element input window
//   layers 2..4  residual dilated LSTM with dilations 3, 6, 12:
//                  c_t = f * c_{t-d} + i * g
//                  h_t = o * (tanh(c_t) + h_t^{lower})
//   read-out     x_hat = out_W * h^4_t + out_b  (12 outputs)
// Gates use the logistic function, candidate and cell activation use tanh.

namespace mtlf {

inline constexpr std::size_t kLayers = 4;
inline constexpr std::size_t kWindow = 12;
inline constexpr std::array<std::size_t, kLayers> kDilations{1, 3, 6, 12};

enum Gate : std::size_t { forget_gate = 0, input_gate = 1, candidate_gate = 2, output_gate = 3 };
inline constexpr std::size_t kGates = 4;

/// All network parameters in one flat vector.
///
/// Layout, per layer l with input size n_l (12 for layer 0, m otherwise):
///   for each gate (f, i, g, o): m rows of [W_gate row (n_l) | V_gate row (m)]
///   then the four bias vectors b_f, b_i, b_g, b_o (m each)
/// followed by out_W (12 x m, row-major) and out_b (12).
class NetworkParams {
public:
	NetworkParams() = default;
	explicit NetworkParams(std::size_t m);

	std::size_t m() const noexcept { return m_; }
	const std::array<std::size_t, kLayers>& dilations() const noexcept { return kDilations; }

	std::size_t input_size(std::size_t layer) const noexcept { return layer == 0 ? kWindow : m_; }
	std::size_t row_stride(std::size_t layer) const noexcept { return input_size(layer) + m_; }
	std::size_t layer_offset(std::size_t layer) const noexcept { return layer_offsets_[layer]; }
	std::size_t gate_offset(std::size_t layer, std::size_t gate) const noexcept;
	std::size_t bias_offset(std::size_t layer, std::size_t gate) const noexcept;
	std::size_t out_w_offset() const noexcept { return out_offset_; }
	std::size_t out_b_offset() const noexcept { return out_offset_ + kWindow * m_; }

	double& W(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col);
	double& V(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col);
	double& b(std::size_t layer, std::size_t gate, std::size_t row);
	double& out_W(std::size_t row, std::size_t col);
	double& out_b(std::size_t row);
	double W(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) const;
	double V(std::size_t layer, std::size_t gate, std::size_t row, std::size_t col) const;
	double b(std::size_t layer, std::size_t gate, std::size_t row) const;
	double out_W(std::size_t row, std::size_t col) const;
	double out_b(std::size_t row) const;

	std::vector<double>& values() noexcept { return values_; }
	const std::vector<double>& values() const noexcept { return values_; }

	static std::size_t count(std::size_t m) noexcept;

	bool operator==(const NetworkParams&) const = default;

private:
	std::size_t m_ = 0;
	std::array<std::size_t, kLayers> layer_offsets_{};
	std::size_t out_offset_ = 0;
	std::vector<double> values_;
};

/// Uniform(-1/sqrt(m), 1/sqrt(m)) weights, forget biases 1, other biases 0.
NetworkParams init_weights(std::size_t m, std::uint64_t seed);

/// NetworkParams placed on a tape as one contiguous leaf block.
struct NetworkLeaves {
	const NetworkParams* params = nullptr;
	ad::NodeId first = 0;
};

NetworkLeaves register_leaves(ad::Tape& tape, const NetworkParams& params);

struct CellState {
	std::vector<ad::Var> h;
	std::vector<ad::Var> c;
};

/// Standard LSTM cell of `layer` (input x, previous state).
CellState lstm_cell(std::span<const ad::Var> x, std::span<const ad::Var> h_prev, std::span<const ad::Var> c_prev,
                    const NetworkLeaves& net, std::size_t layer, ad::Tape& tape);

/// Residual dilated cell of `layer`: gates read h_lower and the state d steps back.
CellState rdlstm_cell(std::span<const ad::Var> h_lower, std::span<const ad::Var> h_delayed,
                      std::span<const ad::Var> c_delayed, const NetworkLeaves& net, std::size_t layer, ad::Tape& tape);

/// Called with (layer, step, step_read) whenever a layer reads its recurrent
/// state; steps are 1-based and step_read < 1 means the zero state.
using StateReadObserver = std::function<void(std::size_t layer, long step, long step_read)>;

/// Per-layer history of the last d (h, c) pairs.
class RecurrentState {
public:
	RecurrentState(std::size_t m, ad::Tape& tape);

	/// State written at `step - dilation(layer)`, or zeros.
	const CellState& read(std::size_t layer, long step) const;
	void write(std::size_t layer, long step, CellState state);

private:
	std::array<std::vector<CellState>, kLayers> history_;
	std::array<std::vector<long>, kLayers> written_step_;
	CellState zero_;
};

using Prediction = std::array<ad::Var, kWindow>;

/// Stateful unroll over one series' chronological input windows, starting
/// from a zero state. Returns one 12-output prediction per step.
std::vector<Prediction> forward_sequence(std::span<const std::array<ad::Var, kWindow>> inputs, const NetworkLeaves& net,
                                         ad::Tape& tape, const StateReadObserver& observer = {});

} // namespace mtlf
