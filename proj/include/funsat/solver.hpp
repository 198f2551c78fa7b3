#pragma once

#include "funsat/cnf.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace funsat {

enum class SolveStatus { Sat, Unsat };

struct SolveResult
{
	SolveStatus status = SolveStatus::Unsat;
	std::vector<bool> model; ///< total assignment, only for Sat
	std::uint64_t conflicts = 0;

	bool sat() const { return status == SolveStatus::Sat; }
};

/// Resource caps for one solve call. Hitting a cap throws instead of
/// returning an answer.
struct Limits
{
	std::optional<std::uint64_t> conflicts;
	std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Incremental SAT engine contract. Clauses persist across solve calls;
/// assumptions hold for a single call.
class SatBackend
{
      public:
	virtual ~SatBackend() = default;

	virtual Var new_var() = 0;
	virtual Var num_vars() const = 0;
	virtual void add_clause(std::span<const Lit> clause) = 0;
	/// Throws BudgetExceeded or TimeoutError when a limit is reached.
	virtual SolveResult solve(std::span<const Lit> assumptions = {}, const Limits &limits = {}) = 0;
	virtual std::uint64_t total_conflicts() const = 0;

	/// Declares missing variables and adds clauses [from, end) of `f`;
	/// returns the new end so repeated calls stream a growing formula.
	std::size_t load(const CnfFormula &f, std::size_t from = 0);
};

/// Conflict-driven clause-learning solver: two watched literals with blocker
/// literals, first-UIP learning with clause minimization, VSIDS (decay 0.95),
/// phase saving, Luby restarts (unit 100 conflicts), activity-based learnt
/// clause reduction. No randomness, so runs are reproducible.
class CdclSolver : public SatBackend
{
      public:
	CdclSolver();
	~CdclSolver() override;
	CdclSolver(const CdclSolver &) = delete;
	CdclSolver &operator=(const CdclSolver &) = delete;

	Var new_var() override;
	Var num_vars() const override;
	void add_clause(std::span<const Lit> clause) override;
	SolveResult solve(std::span<const Lit> assumptions = {}, const Limits &limits = {}) override;
	std::uint64_t total_conflicts() const override;

      private:
	struct Impl;
	std::unique_ptr<Impl> impl_;
};

/// Runs an external DIMACS solver per call: the formula plus assumption units
/// is written to a temporary file and `command <file>` is executed. The
/// output must carry `s SATISFIABLE` / `s UNSATISFIABLE` and `v` lines.
/// Limits are not forwarded.
class ExternalSolver : public SatBackend
{
      public:
	explicit ExternalSolver(std::string command);

	Var new_var() override { return f_.new_var(); }
	Var num_vars() const override { return f_.num_vars; }
	void add_clause(std::span<const Lit> clause) override { f_.add_clause(Clause(clause.begin(), clause.end())); }
	SolveResult solve(std::span<const Lit> assumptions = {}, const Limits &limits = {}) override;
	std::uint64_t total_conflicts() const override { return 0; }

      private:
	std::string command_;
	CnfFormula f_;
};

/// Parses `s` / `v` solver output for a formula with `num_vars` variables.
SolveResult parse_solver_output(std::string_view text, Var num_vars);

} // namespace funsat
