#pragma once

#include "funsat/netlist.hpp"
#include "funsat/sim.hpp"

#include <vector>

namespace funsat {

/// Frame-replicated combinational copy of a sequential circuit. Frames
/// 0..t_k-1 take the key sequence on the primary inputs; frames t_k..t_k+b-1
/// take the data inputs and expose their outputs. Outputs of the key frames
/// are not observable.
struct UnrolledCircuit
{
	std::size_t t_k = 0;
	std::size_t b = 0;
	std::size_t width = 0;	    ///< |I|
	std::size_t out_width = 0;  ///< |O|
	Netlist comb;		    ///< inputs = key_ports ++ data_ports, outputs = obs_outputs
	std::vector<NetId> key_ports;   ///< frame-major, t_k * |I|
	std::vector<NetId> data_ports;  ///< frame-major, b * |I|
	std::vector<NetId> obs_outputs; ///< frame-major, b * |O|
	/// state_taps[f] holds the state entering frame f; the last entry is the
	/// state after the final frame (t_k + b + 1 entries in total).
	std::vector<std::vector<NetId>> state_taps;

	std::size_t frames() const { return t_k + b; }
};

/// Structural unrolling; frame 0 reads the flip-flop reset values through
/// shared constant drivers.
UnrolledCircuit unroll(const Netlist &c, std::size_t t_k, std::size_t b);

/// Observed output frames of the unrolled circuit for one (key, data) pair.
std::vector<OutputVector> evaluate(const UnrolledCircuit &u, const KeySequence &key, const Sequence &data);

/// State entering frame t_k under key sequence `k`.
State state_after_key(const UnrolledCircuit &u, const KeySequence &k);

/// One clock cycle as a combinational netlist: inputs are the primary inputs
/// followed by the flip-flop outputs; outputs are the primary outputs followed
/// by the flip-flop next-state nets.
Netlist frame_netlist(const Netlist &c);

/// Flattens frames into one bit vector in frame-major order.
Bits flatten(std::span<const Bits> frames);
/// Splits a frame-major bit vector into frames of `width` bits.
Sequence split_frames(const Bits &flat, std::size_t width);

} // namespace funsat
