#pragma once

#include "funsat/cnf.hpp"
#include "funsat/netlist.hpp"
#include "funsat/sim.hpp"
#include "funsat/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace funsat {

/// Two keys from the candidate set and an input sequence on which the
/// encrypted circuit produces different outputs under them.
struct Counterexample
{
	KeySequence key_a;
	KeySequence key_b;
	Sequence inputs; ///< cycles after the key, shared by both copies
	std::size_t cycle = 0; ///< 0-based cycle of the first output difference
};

/// Replays a counterexample in the simulator; true if the outputs really
/// differ at `cycle`.
bool replay(const Netlist &ce, const Counterexample &cex);

struct UkResult
{
	bool unique = false;
	std::optional<KeySequence> witness;
	std::uint64_t conflicts = 0;
};

UkResult check_unique_key(const Netlist &ce, std::size_t t_k, std::size_t b, const KeySequence &k_star,
			  const DipList &dips, const Limits &limits = {});

/// Two copies of the encrypted circuit with shared per-cycle inputs whose
/// initial states are the states reached after the key sequences K_a and
/// K_b. Both keys range over the candidate set: keys that reproduce every
/// recorded oracle response at depth b.
struct ProductMachine
{
	const Netlist *ce = nullptr;
	std::size_t t_k = 0;
	std::size_t b = 0;
	DipList dips;
	KeySequence k_star;
	/// Ties K_b to K_a; used to check a key against itself.
	bool same_key = false;
};

ProductMachine build_mce_model(const Netlist &ce, std::size_t t_k, std::size_t b, const DipList &dips,
			       const KeySequence &k_star);

struct BmcResult
{
	bool holds = true;
	std::optional<Counterexample> cex;
	std::uint64_t conflicts = 0;
};

/// Searches for an output difference within `bound` cycles.
BmcResult bmc_check(const ProductMachine &m, std::size_t bound, const Limits &limits = {});

enum class InductionStatus { Proved, Counterexample, Unknown };

struct InductionResult
{
	InductionStatus status = InductionStatus::Unknown;
	std::size_t k = 0;
	std::optional<Counterexample> cex;
	std::size_t invariant_size = 0; ///< register pairs proved equal in every reachable state
	std::uint64_t conflicts = 0;
};

/// k-induction for k = 1..max_k. The step case requires a simple path and is
/// strengthened by an inductive register-correspondence invariant.
InductionResult kinduction_check(const ProductMachine &m, std::size_t max_k, const Limits &limits = {});

enum class Verdict { Verified, Refuted, Unknown };
std::string_view to_string(Verdict v);
std::string_view to_string(InductionStatus s);

struct VerifyOptions
{
	std::size_t max_k = 16;
	Limits limits;
};

struct VerifyReport
{
	Verdict verdict = Verdict::Unknown;
	bool uk = false;
	std::string bmc = "skipped";	   ///< holds | counterexample | skipped
	std::string induction = "skipped"; ///< proved | counterexample | unknown | skipped
	std::size_t induction_k = 0;
	std::optional<Counterexample> cex;
	std::uint64_t conflicts = 0;
};

/// UK check, then BMC with bound b+1, then k-induction.
VerifyReport key_verify(const Netlist &ce, std::size_t t_k, std::size_t b, const KeySequence &k_star,
			const DipList &dips, const VerifyOptions &opts = {});

/// Bounded equivalence of `ce` under a concrete key against `co` from reset,
/// for `depth` cycles. Returns a distinguishing input sequence if any.
std::optional<Sequence> bmc_equivalence(const Netlist &ce, const Netlist &co, std::size_t t_k,
					const KeySequence &key, std::size_t depth, const Limits &limits = {});

} // namespace funsat
