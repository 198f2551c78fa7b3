#pragma once

#include "funsat/netlist.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace funsat {

using Bits = std::vector<bool>;
using State = Bits;	   ///< indexed by flip-flop order
using InputVector = Bits;  ///< indexed by primary input order
using OutputVector = Bits; ///< indexed by primary output order
using Sequence = std::vector<Bits>;
/// t_k frames applied on the primary inputs right after reset.
using KeySequence = std::vector<InputVector>;

/// Cycle-accurate two-valued simulator for one netlist.
class Simulator
{
      public:
	explicit Simulator(const Netlist &c);

	const Netlist &netlist() const { return *c_; }
	State reset_state() const;

	struct Step
	{
		State next;
		OutputVector outputs;
	};
	Step step(const State &s, const InputVector &in) const;
	/// Value of every net during one cycle.
	std::vector<std::uint8_t> values(const State &s, const InputVector &in) const;
	/// Outputs for every cycle; `s` ends holding the final state.
	std::vector<OutputVector> run(State &s, std::span<const InputVector> ins) const;

      private:
	void check(const State &s, const InputVector &in) const;

	const Netlist *c_;
	std::vector<std::size_t> order_;
};

Simulator::Step step(const Netlist &c, const State &s, const InputVector &in);
std::vector<OutputVector> run_sequence(const Netlist &c, const State &s0, std::span<const InputVector> ins);

/// 64 independent stimuli per call, one per bit lane.
class WordSimulator
{
      public:
	using Word = std::uint64_t;

	explicit WordSimulator(const Netlist &c);

	std::vector<Word> reset_state() const;
	/// Advances `state` by one cycle and writes the output words.
	void step(std::vector<Word> &state, std::span<const Word> in, std::vector<Word> &out) const;

      private:
	const Netlist *c_;
	std::vector<std::size_t> order_;
	mutable std::vector<Word> values_;
};

/// Black-box access to the unlocked circuit. Every query starts from reset.
/// Implementations must tolerate concurrent queries.
class Oracle
{
      public:
	virtual ~Oracle() = default;
	virtual std::size_t num_inputs() const = 0;
	virtual std::size_t num_outputs() const = 0;
	virtual std::vector<OutputVector> query(std::span<const InputVector> seq) const = 0;

	std::uint64_t queries() const { return queries_.load(); }

      protected:
	mutable std::atomic<std::uint64_t> queries_{0};
};

class NetlistOracle : public Oracle
{
      public:
	explicit NetlistOracle(Netlist c);

	std::size_t num_inputs() const override { return c_->inputs().size(); }
	std::size_t num_outputs() const override { return c_->outputs().size(); }
	std::vector<OutputVector> query(std::span<const InputVector> seq) const override;

      private:
	std::shared_ptr<const Netlist> c_;
	Simulator sim_;
};

struct FcEntry
{
	double fc = 0.0;
	bool exact = false;
	std::uint64_t samples = 0;
	std::uint64_t corrupted = 0;
};

/// FC estimates keyed by unrolling depth b.
using FcTrace = std::map<std::size_t, FcEntry>;

struct FcOptions
{
	std::uint64_t samples = 1000;
	std::uint64_t seed = 1;
	unsigned threads = 1;
	/// Enumerate exactly when the space has at most `samples` points.
	bool allow_exact = true;
};

/// Monte-Carlo estimate of the b-depth functional corruptibility.
///
/// Sample `s` draws its key frames and then its input frames from a stream
/// seeded by (seed, s), so the inputs drawn for depth b are a prefix of the
/// inputs drawn for depth b+1 under the same seed. Estimates for growing b
/// are therefore nondecreasing, and the result does not depend on `threads`.
/// Falls back to exact enumeration when the space has at most `samples` points
/// and `allow_exact` is set.
FcEntry estimate_fc(const Netlist &ce, const Oracle &oracle, std::size_t t_k, std::size_t b,
		    const FcOptions &opts = {});

constexpr unsigned kDefaultEnumerationBits = 24;

/// Exact FC_b by enumerating every (input, key) pair.
double exact_fc(const Netlist &ce, const Netlist &co, std::size_t t_k, std::size_t b,
		unsigned max_bits = kDefaultEnumerationBits);

/// Error tag of every (input, key) pair at depth b; 0 encodes "no error".
/// Index layout: bit f*|I|+j is input j of frame f, key frames first.
std::vector<std::uint8_t> error_tags(const Netlist &ce, const Netlist &co, std::size_t t_k, std::size_t b,
				     unsigned max_bits = kDefaultEnumerationBits);

/// Frames packed into an integer using the error_tags layout.
Sequence unpack_frames(std::uint64_t packed, std::size_t frames, std::size_t width);
std::uint64_t pack_frames(std::span<const Bits> frames);

} // namespace funsat
