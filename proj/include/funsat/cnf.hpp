#pragma once

#include "funsat/netlist.hpp"
#include "funsat/sim.hpp"
#include "funsat/unroll.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace funsat {

using Var = std::uint32_t;

/// Literal encoded as 2*var + negated.
struct Lit
{
	std::uint32_t x = 0;

	static constexpr Lit make(Var v, bool negated = false) { return Lit{2 * v + (negated ? 1u : 0u)}; }
	constexpr Var var() const { return x >> 1; }
	constexpr bool negated() const { return x & 1u; }
	constexpr Lit operator~() const { return Lit{x ^ 1u}; }
	constexpr Lit operator^(bool flip) const { return Lit{x ^ (flip ? 1u : 0u)}; }
	auto operator<=>(const Lit &) const = default;
};

using Clause = std::vector<Lit>;

struct CnfFormula
{
	Var num_vars = 0;
	std::vector<Clause> clauses;

	Var new_var() { return num_vars++; }
	void add_clause(Clause c) { clauses.push_back(std::move(c)); }
	/// True if `model` (indexed by variable) satisfies every clause.
	bool satisfied_by(const std::vector<bool> &model) const;
};

/// DIMACS `p cnf V C` text; variables are shifted to 1-based on output.
std::string to_dimacs(const CnfFormula &f);
CnfFormula parse_dimacs(std::string_view text);

/// Literal per net for each encoded copy of a circuit. Nets a copy shares with
/// another copy (the data inputs of a miter) map to the same literal.
class VarMap
{
      public:
	void bind(int copy, NetId net, Lit l);
	std::optional<Lit> find(int copy, NetId net) const;
	Lit at(int copy, NetId net) const;

      private:
	std::vector<std::vector<std::optional<Lit>>> copies_;
};

/// Plain Tseitin encoding: one variable per net and per internal XOR link,
/// both implication directions for every gate.
struct TseitinResult
{
	CnfFormula cnf;
	VarMap vars; ///< copy 0
};
TseitinResult tseitin(const Netlist &comb);
inline TseitinResult tseitin(const UnrolledCircuit &u) { return tseitin(u.comb); }

/// Incremental circuit-to-CNF builder used by the attack. Variable 0 is the
/// constant true literal; gate outputs are folded against constants and
/// structurally hashed so repeated logic (the key frames of every DIP copy)
/// is encoded once.
class CnfBuilder
{
      public:
	CnfBuilder();

	CnfFormula &cnf() { return cnf_; }
	const CnfFormula &cnf() const { return cnf_; }

	Lit constant(bool value) const { return value ? kTrue : ~kTrue; }
	static bool is_const(Lit l) { return l.var() == 0; }
	Lit fresh() { return Lit::make(cnf_.new_var()); }

	Lit and_of(std::vector<Lit> in);
	Lit or_of(std::vector<Lit> in);
	Lit xor_of(std::vector<Lit> in);
	Lit gate(GateKind kind, std::vector<Lit> in);

	/// Encodes `comb` with the given literal on every primary input; returns
	/// the literal of every net.
	std::vector<Lit> encode(const Netlist &comb, std::span<const Lit> inputs);

	/// Adds the clause, dropping false constants; a clause with a true
	/// constant is skipped.
	void add_clause(Clause c);

	static constexpr Lit kTrue = Lit::make(0);

      private:
	Lit and2_new(const std::vector<Lit> &in);
	Lit xor2(Lit a, Lit b);

	CnfFormula cnf_;
	struct Key
	{
		std::uint8_t op;
		std::vector<Lit> in;
		bool operator==(const Key &) const = default;
	};
	struct KeyHash
	{
		std::size_t operator()(const Key &k) const;
	};
	std::unordered_map<Key, Lit, KeyHash> strash_;
};

/// Two copies of the unrolled encrypted circuit sharing the data inputs, with
/// separate key variables and an output-difference literal.
struct Miter
{
	CnfBuilder builder;
	VarMap vars;			///< copies 0 (K1) and 1 (K2)
	std::vector<Lit> key[2];	///< per key port
	std::vector<Lit> data;		///< per data port
	std::vector<Lit> out[2];	///< per observable output
	/// True iff some observable output differs. The attack assumes it while
	/// searching for DIPs and drops it for the final key extraction.
	Lit diff;
};

Miter build_miter(const UnrolledCircuit &u);

/// A distinguishing input sequence with the oracle's response.
struct Dip
{
	Sequence inputs;
	std::vector<OutputVector> outputs;
};
using DipList = std::vector<Dip>;

/// Forces f'_b(dip, K) = odip for both key copies of the miter.
void add_dip_constraint(Miter &m, const UnrolledCircuit &u, const Dip &dip);

/// Clauses requiring f'_b(dip, keys) = odip, for one set of key literals.
void add_io_constraint(CnfBuilder &b, const UnrolledCircuit &u, std::span<const Lit> keys, const Dip &dip);

struct UkInstance
{
	CnfBuilder builder;
	std::vector<Lit> key; ///< K' per key port
};

/// Satisfiable iff some K' != k_star agrees with k_star on every dip.
UkInstance build_uk_instance(const UnrolledCircuit &u, const KeySequence &k_star, const DipList &dips);

/// Key sequence read from a model through the key literals.
KeySequence key_from_model(std::span<const Lit> key, const std::vector<bool> &model, std::size_t width);
bool lit_value(Lit l, const std::vector<bool> &model);

} // namespace funsat
