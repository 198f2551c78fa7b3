#pragma once

#include "funsat/cnf.hpp"
#include "funsat/netlist.hpp"
#include "funsat/sim.hpp"
#include "funsat/solver.hpp"
#include "funsat/verify.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace funsat {

using SolverFactory = std::function<std::unique_ptr<SatBackend>()>;

struct SatAttackResult
{
	KeySequence key;
	DipList dips;
	std::uint64_t conflicts = 0;
};

/// Oracle-guided SAT attack on the circuit unrolled for t_k + b cycles. The
/// returned key agrees with the oracle on every input sequence of depth b.
/// Throws InconsistentOracle if no key survives.
SatAttackResult sat_attack(const Netlist &ce, const Oracle &oracle, std::size_t t_k, std::size_t b,
			   const Limits &limits = {}, const SolverFactory &solver = {});

enum class UpdateRule { Increment, Double };
std::string_view to_string(UpdateRule r);
std::optional<UpdateRule> parse_update_rule(std::string_view s);

struct FunSatConfig
{
	std::size_t t_win = 10;
	double delta = 0.01;
	std::size_t Delta = 5;
	std::uint64_t samples = 1000;
	std::uint64_t seed = 1;
	unsigned threads = 1;
	std::size_t depth_cap = 64;
	UpdateRule update_rule = UpdateRule::Increment;
	std::size_t max_k = 16;
	/// Wall-clock budget for the whole run.
	std::optional<std::chrono::milliseconds> budget;
	/// Conflict cap for each solver call.
	std::optional<std::uint64_t> conflict_budget;
	SolverFactory solver;

	void validate() const;
};

struct DepthSelection
{
	std::size_t b_star = 1;
	bool early_break = false;
};

/// FC analysis over [b_l, b_u]: counts successive depths whose FC rises by
/// at most `delta`; when the count reaches `Delta` the depth just before the
/// plateau is chosen, otherwise b_u. `prev_fc` is FC at b_l - 1, when b_l > 1.
/// The result never drops below max(b_l, 1).
DepthSelection select_unroll_depth(const FcTrace &trace, std::size_t b_l, std::size_t b_u, double delta,
				   std::size_t Delta, std::optional<double> prev_fc = std::nullopt);

struct PhaseRecord
{
	std::size_t b_star = 0;
	std::optional<std::pair<std::size_t, std::size_t>> fc_window;
	bool early_break = false;
	FcTrace fc; ///< estimates computed for this phase's window
	std::size_t dips = 0;
	std::uint64_t sat_conflicts = 0;
	VerifyReport verify;
	double seconds = 0.0;
};

enum class Termination { Success, DepthCap, Timeout, Budget, Inconsistent };
std::string_view to_string(Termination t);

struct AttackReport
{
	std::string mode; ///< funsat | reference
	std::size_t t_k = 0;
	FunSatConfig config;
	std::vector<PhaseRecord> phases;
	FcTrace fc_cache;
	/// The first FC window saw no corruption at any depth.
	bool fc_zero_window = false;
	Termination termination = Termination::DepthCap;
	std::optional<KeySequence> key; ///< present iff termination is Success
	std::string message;
	std::uint64_t oracle_queries = 0;
	std::uint64_t conflicts = 0; ///< SAT attack plus verification
	double seconds = 0.0;
};

/// Unrolls to b = 1, 2, ... (or 1, 2, 4, ...) until a key verifies.
AttackReport reference_attack(const Netlist &ce, const Oracle &oracle, std::size_t t_k, const FunSatConfig &cfg);

/// FC analysis picks the unrolling depth before each SAT attack; on a failed
/// verification the analysis resumes just above the depth tried.
AttackReport fun_sat(const Netlist &ce, const Oracle &oracle, std::size_t t_k, const FunSatConfig &cfg);

} // namespace funsat
