#pragma once

#include "funsat/netlist.hpp"
#include "funsat/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace funsat {

enum class Scheme { Harpoon, Interlocking };

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view s);

/// Ground truth of the delayed-error path of an Interlocking instance.
struct TrapInfo
{
	std::size_t distance = 0;      ///< functional-mode transitions before the error state
	std::size_t witness_depth = 0; ///< first observed frame (1-based) with a wrong output
	Sequence witness;	       ///< inputs driving the circuit to the error state
	std::vector<KeySequence> wrong_keys;
	State s_pre; ///< encrypted-circuit state at the witness depth under wrong_keys[0]
};

struct EncryptionArtifact
{
	Netlist encrypted;
	KeySequence correct_key;
	Scheme scheme = Scheme::Harpoon;
	std::size_t t_k = 0;
	double r_mkf = 0.0;
	std::size_t d_max = 0;
	std::uint64_t seed = 0;
	std::size_t mkf_count = 0;
	std::optional<TrapInfo> trap;
};

/// Mode FSM with a single accepting key path. Any wrong key frame drops the
/// machine into an absorbing encrypted region where ceil(r_mkf * |gates|)
/// XOR-inserted nets are inverted (one of them a primary output), and the
/// original flip-flops stay at their reset values until functional mode.
EncryptionArtifact harpoon_encrypt(const Netlist &c, std::size_t t_k, double r_mkf, std::uint64_t seed);

struct InterlockingOptions
{
	std::size_t traps = 1;		    ///< number of wrong keys sharing the delayed-error path
	std::optional<std::size_t> distance; ///< fixed distance in [1, d_max] instead of a random draw
	double r_mkf = 0.1;		    ///< encrypted-region corruption, as in HARPOON
};

/// HARPOON plus additional key paths into functional mode. Those paths set a
/// latched flag; `distance` functional transitions later the circuit reaches
/// the error state and one primary output is inverted from then on.
EncryptionArtifact interlocking_encrypt(const Netlist &c, std::size_t t_k, std::size_t d_max, std::uint64_t seed,
					const InterlockingOptions &opts = {});

} // namespace funsat
