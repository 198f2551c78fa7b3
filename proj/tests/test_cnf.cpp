#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "funsat/cnf.hpp"
#include "funsat/errors.hpp"
#include "funsat/solver.hpp"
#include "toys.hpp"

#include <set>

using namespace funsat;

namespace {

Netlist s27() { return read_bench_file(FUNSAT_BENCH_DIR "/s27.bench"); }

std::vector<Lit> as_lits(const Netlist &c, const VarMap &vm, std::span<const NetId> nets)
{
	std::vector<Lit> out;
	for (NetId n : nets)
		out.push_back(vm.at(0, n));
	(void)c;
	return out;
}

// Every model of the formula, restricted to `vars`.
std::set<std::vector<bool>> projected_models(const CnfFormula &f, const std::vector<Lit> &vars)
{
	CdclSolver s;
	s.load(f);
	std::set<std::vector<bool>> out;
	for (;;) {
		auto r = s.solve();
		if (!r.sat())
			return out;
		std::vector<bool> m;
		Clause block;
		for (Lit l : vars) {
			m.push_back(lit_value(l, r.model));
			block.push_back(l ^ lit_value(l, r.model));
		}
		out.insert(m);
		if (block.empty())
			return out;
		s.add_clause(block);
	}
}

// y = XOR(a, k) with k the only key port.
Netlist xor_lock()
{
	return parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\n");
}

} // namespace

TEST_CASE("single AND gate")
{
	auto c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)");
	auto t = tseitin(c);
	CHECK(t.cnf.clauses.size() == 3);
	Lit a = t.vars.at(0, c.inputs()[0]), b = t.vars.at(0, c.inputs()[1]), y = t.vars.at(0, c.outputs()[0]);
	auto models = projected_models(t.cnf, {a, b, y});
	CHECK(models.size() == 4);
	for (const auto &m : models)
		CHECK(m[2] == (m[0] && m[1]));
}

TEST_CASE("BUF encodes equivalence in two clauses")
{
	auto c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)");
	auto t = tseitin(c);
	CHECK(t.cnf.clauses.size() == 2);
	auto models = projected_models(t.cnf, {t.vars.at(0, c.inputs()[0]), t.vars.at(0, c.outputs()[0])});
	CHECK(models == std::set<std::vector<bool>>{{false, false}, {true, true}});
}

TEST_CASE("full encoding has exactly the circuit's I/O behavior")
{
	for (std::uint64_t seed = 1; seed <= 5; ++seed) {
		auto c = random_circuit(4, 3, 0, 25, seed);
		auto t = tseitin(c);
		std::vector<Lit> ports = as_lits(c, t.vars, c.inputs());
		auto outs = as_lits(c, t.vars, c.outputs());
		ports.insert(ports.end(), outs.begin(), outs.end());
		auto models = projected_models(t.cnf, ports);
		CHECK(models.size() == 16);
		for (const auto &m : models) {
			InputVector in(m.begin(), m.begin() + 4);
			auto r = step(c, State{}, in);
			CHECK(OutputVector(m.begin() + 4, m.end()) == r.outputs);
		}
	}
}

TEST_CASE("s27 single-frame models replay in the simulator")
{
	auto c = s27();
	auto u = unroll(c, 0, 1);
	auto t = tseitin(u);
	CdclSolver s;
	s.load(t.cnf);
	std::mt19937_64 rng(1);
	for (int i = 0; i < 20; ++i) {
		std::vector<Lit> assume;
		InputVector in(4);
		for (std::size_t j = 0; j < 4; ++j) {
			in[j] = rng() & 1u;
			assume.push_back(t.vars.at(0, u.data_ports[j]) ^ !in[j]);
		}
		auto r = s.solve(assume);
		REQUIRE(r.sat());
		CHECK(t.cnf.satisfied_by(r.model));
		auto expect = run_sequence(c, Simulator(c).reset_state(), Sequence{in});
		CHECK(lit_value(t.vars.at(0, u.obs_outputs[0]), r.model) == expect[0][0]);
	}
}

TEST_CASE("builder folding agrees with simulation")
{
	for (std::uint64_t seed = 1; seed <= 8; ++seed) {
		auto c = random_circuit(5, 4, 0, 40, seed);
		for (std::uint64_t x = 0; x < 32; ++x) {
			CnfBuilder b;
			InputVector in(5);
			std::vector<Lit> lits;
			for (std::size_t j = 0; j < 5; ++j) {
				in[j] = (x >> j) & 1u;
				// Half the inputs are constants, half are free and pinned by units.
				if (j % 2) {
					lits.push_back(b.constant(in[j]));
				} else {
					Lit l = b.fresh();
					b.add_clause({l ^ !in[j]});
					lits.push_back(l);
				}
			}
			auto nets = b.encode(c, lits);
			CdclSolver s;
			s.load(b.cnf());
			auto r = s.solve();
			REQUIRE(r.sat());
			auto expect = step(c, State{}, in).outputs;
			for (std::size_t o = 0; o < 4; ++o)
				CHECK(lit_value(nets[c.outputs()[o].index], r.model) == expect[o]);
		}
	}
}

TEST_CASE("builder simplifications")
{
	CnfBuilder b;
	Lit x = b.fresh(), y = b.fresh();
	CHECK(b.and_of({x, ~x}) == b.constant(false));
	CHECK(b.and_of({x, b.constant(true)}) == x);
	CHECK(b.or_of({x, ~x}) == b.constant(true));
	CHECK(b.xor_of({x, x}) == b.constant(false));
	CHECK(b.xor_of({x, ~x}) == b.constant(true));
	CHECK(b.and_of({x, y}) == b.and_of({y, x}));
	CHECK(b.xor_of({~x, y}) == ~b.xor_of({x, y}));
	CHECK(b.gate(GateKind::Nand, {b.constant(false), x}) == b.constant(true));
}

TEST_CASE("miter of a key-less circuit is UNSAT")
{
	// No state, so the key frames cannot influence anything.
	auto c = random_circuit(4, 2, 0, 30, 3);
	auto u = unroll(c, 2, 2);
	auto m = build_miter(u);
	CdclSolver s;
	s.load(m.builder.cnf());
	std::vector<Lit> as{m.diff};
	CHECK_FALSE(s.solve(as).sat());
}

TEST_CASE("miter on a 1-bit XOR key")
{
	// One key frame; the stored key bit is XORed onto the output.
	auto c = xor_lock();
	NetlistOracle oracle(parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n"));
	auto u = unroll(c, 1, 1);
	auto m = build_miter(u);
	CdclSolver s;
	s.load(m.builder.cnf());
	std::vector<Lit> as{m.diff};
	auto r = s.solve(as);
	REQUIRE(r.sat());
	auto k1 = key_from_model(m.key[0], r.model, 1), k2 = key_from_model(m.key[1], r.model, 1);
	CHECK(k1 != k2);
	auto dip = key_from_model(m.data, r.model, 1);
	CHECK(evaluate(u, k1, dip) != evaluate(u, k2, dip));

	// The oracle answer kills the wrong key; the miter becomes UNSAT.
	Dip d{dip, oracle.query(dip)};
	add_dip_constraint(m, u, d);
	std::size_t loaded = 0;
	CdclSolver s2;
	loaded = s2.load(m.builder.cnf(), loaded);
	CHECK_FALSE(s2.solve(as).sat());
	auto fin = s2.solve();
	REQUIRE(fin.sat());
	CHECK(key_from_model(m.key[0], fin.model, 1) == KeySequence{{false}});
}

TEST_CASE("DIP constraints on random toys")
{
	for (std::uint64_t seed = 1; seed <= 6; ++seed) {
		auto c = toys::mutate_gate(random_circuit(2, 2, 3, 16, seed), 3);
		auto co = random_circuit(2, 2, 3, 16, seed);
		NetlistOracle oracle(co);
		auto u = unroll(c, 1, 2);
		auto m = build_miter(u);
		std::vector<Lit> keys = m.key[0];
		keys.insert(keys.end(), m.key[1].begin(), m.key[1].end());

		CdclSolver s;
		std::size_t loaded = s.load(m.builder.cnf());
		std::vector<Lit> as{m.diff};
		auto r = s.solve(as);
		if (!r.sat())
			continue;
		auto dip_in = key_from_model(m.data, r.model, 2);
		Dip d{dip_in, oracle.query(dip_in)};
		add_dip_constraint(m, u, d);
		loaded = s.load(m.builder.cnf(), loaded);
		auto fin = s.solve();
		if (fin.sat()) {
			auto k1 = key_from_model(m.key[0], fin.model, 2);
			CHECK(evaluate(u, k1, d.inputs) == d.outputs);
		}
		// Same dip twice: key-pair model set unchanged.
		auto once = projected_models(m.builder.cnf(), keys);
		add_dip_constraint(m, u, d);
		CHECK(projected_models(m.builder.cnf(), keys) == once);
		// Brute force: surviving key pairs are exactly those agreeing with the oracle.
		std::set<std::vector<bool>> expect;
		for (std::uint64_t k = 0; k < 16; ++k) {
			auto ka = unpack_frames(k & 3, 1, 2), kb = unpack_frames(k >> 2, 1, 2);
			if (evaluate(u, ka, d.inputs) == d.outputs && evaluate(u, kb, d.inputs) == d.outputs)
				expect.insert({bool(k & 1), bool(k & 2), bool(k & 4), bool(k & 8)});
		}
		CHECK(once == expect);
	}
}

TEST_CASE("dip dimension checks")
{
	auto u = unroll(xor_lock(), 1, 2);
	auto m = build_miter(u);
	Dip bad{Sequence{{true}}, {{true}}};
	CHECK_THROWS_AS(add_dip_constraint(m, u, bad), DimensionMismatch);
}

TEST_CASE("unique-key instance")
{
	auto c = xor_lock();
	auto u = unroll(c, 1, 1);
	KeySequence k{{false}};
	Dip d{Sequence{{true}}, evaluate(u, k, Sequence{{true}})};
	{
		auto uk = build_uk_instance(u, k, {d});
		CdclSolver s;
		s.load(uk.builder.cnf());
		CHECK_FALSE(s.solve().sat());
	}
	{
		// No dips: any other key agrees vacuously.
		auto uk = build_uk_instance(u, k, {});
		CdclSolver s;
		s.load(uk.builder.cnf());
		auto r = s.solve();
		REQUIRE(r.sat());
		CHECK(key_from_model(uk.key, r.model, 1) == KeySequence{{true}});
	}
	{
		// The second input frame never reaches the output: its key bit is redundant.
		auto twin = parse_bench("INPUT(a)\nINPUT(z)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\nw = BUF(z)\n");
		auto ut = unroll(twin, 1, 1);
		KeySequence kt{{false, false}};
		Dip dt{Sequence{{true, false}}, evaluate(ut, kt, Sequence{{true, false}})};
		auto uk = build_uk_instance(ut, kt, {dt});
		CdclSolver s;
		s.load(uk.builder.cnf());
		auto r = s.solve();
		REQUIRE(r.sat());
		CHECK(key_from_model(uk.key, r.model, 2) == KeySequence{{false, true}});
	}
}
