#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "funsat/attack.hpp"
#include "funsat/encrypt.hpp"
#include "funsat/errors.hpp"
#include "funsat/unroll.hpp"
#include "toys.hpp"

using namespace funsat;

namespace {

FcTrace trace_of(std::vector<double> v, std::size_t from = 1)
{
	FcTrace t;
	for (std::size_t i = 0; i < v.size(); ++i)
		t[from + i] = FcEntry{v[i], true, 0, 0};
	return t;
}

// Keys agreeing with every dip, by enumeration.
std::set<KeySequence> dip_consistent(const Netlist &ce, std::size_t t_k, std::size_t b, const DipList &dips)
{
	auto u = unroll(ce, t_k, b);
	const std::size_t w = ce.inputs().size();
	std::set<KeySequence> out;
	for (std::uint64_t k = 0; k < (std::uint64_t{1} << (t_k * w)); ++k) {
		auto key = unpack_frames(k, t_k, w);
		bool ok = true;
		for (const Dip &d : dips)
			ok = ok && evaluate(u, key, d.inputs) == d.outputs;
		if (ok)
			out.insert(key);
	}
	return out;
}

std::vector<std::size_t> depths(const AttackReport &r)
{
	std::vector<std::size_t> out;
	for (const auto &p : r.phases)
		out.push_back(p.b_star);
	return out;
}

const Netlist &trap_toy()
{
	static const Netlist c = random_circuit(2, 2, 2, 10, 6);
	return c;
}

EncryptionArtifact trap_instance(std::size_t distance)
{
	InterlockingOptions o;
	o.distance = distance;
	return interlocking_encrypt(trap_toy(), 1, 3, 20 + distance, o);
}

} // namespace

TEST_CASE("sat_attack recovers a one-bit XOR key")
{
	auto ce = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\n");
	auto co = parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n");
	NetlistOracle oracle(co);
	auto r = sat_attack(ce, oracle, 1, 1);
	CHECK(r.dips.size() == 1);
	CHECK(r.key == KeySequence{{false}});
	for (bool a : {false, true})
		CHECK_FALSE(toys::mismatch(ce, co, 1, 1, (std::uint64_t{a} << 1)));
}

TEST_CASE("key-ineffective circuit needs no dips")
{
	auto c = random_circuit(3, 2, 0, 20, 2);
	NetlistOracle oracle(c);
	auto r = sat_attack(c, oracle, 2, 2);
	CHECK(r.dips.empty());
	CHECK(r.key.size() == 2);
	CHECK(oracle.queries() == 0);
}

TEST_CASE("inconsistent oracle and bad arguments")
{
	auto ce = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\n");
	// Both outputs carry a XOR k; the oracle drives them apart, which no key matches.
	auto twin = parse_bench("INPUT(a)\nOUTPUT(y)\nOUTPUT(z)\ny = XOR(a, q)\nz = BUF(y)\nq = DFF(a)\n");
	NetlistOracle apart(parse_bench("INPUT(a)\nOUTPUT(y)\nOUTPUT(z)\ny = BUF(a)\nz = NOT(a)\n"));
	CHECK_THROWS_AS(sat_attack(twin, apart, 1, 1), InconsistentOracle);
	NetlistOracle one(parse_bench("INPUT(a)\nOUTPUT(y)\ny = CONST1()\n"));
	NetlistOracle wide(random_circuit(2, 1, 0, 4, 1));
	CHECK_THROWS_AS(sat_attack(ce, wide, 1, 1), DimensionMismatch);
	CHECK_THROWS(sat_attack(ce, one, 1, 0));
}

TEST_CASE("trap key survives below its witness depth")
{
	auto a = trap_instance(2); // witness depth 3
	NetlistOracle oracle(trap_toy());
	auto r = sat_attack(a.encrypted, oracle, 1, 2);
	auto kept = dip_consistent(a.encrypted, 1, 2, r.dips);
	CHECK(kept.count(a.trap->wrong_keys[0]) == 1);
	CHECK(kept.count(a.correct_key) == 1);
	CHECK(kept.count(r.key) == 1);
	// Depth-3 exhaustive check separates them.
	CHECK_FALSE(toys::surviving_keys(a.encrypted, trap_toy(), 1, 3).count(a.trap->wrong_keys[0]));
}

TEST_CASE("surviving keys match enumeration and shrink with depth")
{
	int flat = 0;
	for (std::uint64_t seed = 1; seed <= 10; ++seed) {
		auto co = random_circuit(2, 2, 2, 10, seed);
		auto ce = seed % 2 ? harpoon_encrypt(co, 1 + seed % 2, 0.2, seed).encrypted
				   : interlocking_encrypt(co, 1, 3, seed).encrypted;
		const std::size_t t_k = seed % 2 ? 1 + seed % 2 : 1;
		NetlistOracle oracle(co);
		std::set<KeySequence> prev;
		double prev_fc = 0;
		for (std::size_t b = 1; (t_k + b) * 2 <= 10; ++b) {
			CAPTURE(seed);
			CAPTURE(b);
			auto r = sat_attack(ce, oracle, t_k, b);
			auto kept = dip_consistent(ce, t_k, b, r.dips);
			auto brute = toys::surviving_keys(ce, co, t_k, b);
			CHECK(kept == brute);
			CHECK(brute.count(r.key) == 1);
			double fc = toys::brute_fc(ce, co, t_k, b);
			if (b > 1) {
				CHECK(std::includes(prev.begin(), prev.end(), brute.begin(), brute.end()));
				if (fc == prev_fc) {
					CHECK(brute == prev);
					++flat;
				}
			}
			prev = brute;
			prev_fc = fc;
		}
	}
	CHECK(flat > 0);
}

TEST_CASE("select_unroll_depth")
{
	SUBCASE("increasing trace picks the window's upper bound")
	{
		auto sel = select_unroll_depth(trace_of({0.1, 0.2, 0.3, 0.4, 0.5}), 1, 5, 0.01, 2);
		CHECK(sel.b_star == 5);
		CHECK_FALSE(sel.early_break);
	}
	SUBCASE("constant trace breaks early")
	{
		auto sel = select_unroll_depth(trace_of({0.5, 0.5, 0.5, 0.5}), 1, 4, 0.01, 2);
		CHECK(sel.b_star == 1);
		CHECK(sel.early_break);
	}
	SUBCASE("short plateau resets the counter")
	{
		auto sel = select_unroll_depth(trace_of({0.1, 0.2, 0.2, 0.3, 0.4, 0.5}), 1, 6, 0.01, 2);
		CHECK(sel.b_star == 6);
		CHECK_FALSE(sel.early_break);
	}
	SUBCASE("plateau after a rise")
	{
		auto sel = select_unroll_depth(trace_of({0.5, 0.5, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7}), 1, 9, 0.01, 5);
		CHECK(sel.b_star == 3);
		CHECK(sel.early_break);
	}
	SUBCASE("rise within delta counts as flat")
	{
		auto sel = select_unroll_depth(trace_of({0.5, 0.505, 0.51}), 1, 3, 0.01, 2);
		CHECK(sel.b_star == 1);
	}
	SUBCASE("later window compares against the cached depth and clamps")
	{
		auto t = trace_of({0.7, 0.7, 0.7}, 4);
		auto sel = select_unroll_depth(t, 4, 6, 0.01, 2, 0.7);
		CHECK(sel.early_break);
		CHECK(sel.b_star == 4);
		// Without the previous value the first comparison is skipped.
		auto no_prev = select_unroll_depth(t, 4, 6, 0.01, 2);
		CHECK(no_prev.b_star == 4);
		CHECK(no_prev.early_break);
	}
	CHECK_THROWS(select_unroll_depth(trace_of({0.1}), 1, 2, 0.01, 2));
}

TEST_CASE("reference attack on a trap toy")
{
	auto a = trap_instance(2);
	NetlistOracle oracle(trap_toy());
	REQUIRE(toys::brute_b_req(a.encrypted, trap_toy(), 1, 6) == 3);
	FunSatConfig cfg;
	auto inc = reference_attack(a.encrypted, oracle, 1, cfg);
	CHECK(inc.termination == Termination::Success);
	CHECK(depths(inc) == std::vector<std::size_t>{1, 2, 3});
	REQUIRE(inc.key);
	CHECK(toys::equivalent(a.encrypted, trap_toy(), *inc.key));
	CHECK(inc.phases[0].verify.verdict == Verdict::Refuted);
	CHECK(inc.oracle_queries > 0);

	cfg.update_rule = UpdateRule::Double;
	auto dbl = reference_attack(a.encrypted, oracle, 1, cfg);
	CHECK(dbl.termination == Termination::Success);
	CHECK(depths(dbl) == std::vector<std::size_t>{1, 2, 4});

	cfg.depth_cap = 2;
	cfg.update_rule = UpdateRule::Increment;
	auto capped = reference_attack(a.encrypted, oracle, 1, cfg);
	CHECK(capped.termination == Termination::DepthCap);
	CHECK_FALSE(capped.key);
	CHECK(capped.phases.size() == 2);
}

TEST_CASE("fun_sat predicts the trap depth")
{
	for (std::size_t d = 1; d <= 3; ++d) {
		auto a = trap_instance(d);
		NetlistOracle oracle(trap_toy());
		const std::size_t b_req = toys::brute_b_req(a.encrypted, trap_toy(), 1, 6);
		REQUIRE(b_req == d + 1);
		FunSatConfig cfg;
		cfg.t_win = 10;
		auto r = fun_sat(a.encrypted, oracle, 1, cfg);
		CAPTURE(d);
		CHECK(r.termination == Termination::Success);
		REQUIRE(r.phases.size() >= 1);
		CHECK(r.phases[0].b_star == b_req);
		CHECK(r.phases.size() == 1);
		CHECK(r.phases[0].early_break);
		REQUIRE(r.key);
		CHECK(toys::equivalent(a.encrypted, trap_toy(), *r.key));
		CHECK_FALSE(r.fc_zero_window);
		// Every estimate in the window is recorded in the cache.
		for (const auto &[b, e] : r.phases[0].fc)
			CHECK(r.fc_cache.at(b).fc == e.fc);

		auto ref = reference_attack(a.encrypted, oracle, 1, cfg);
		CHECK(ref.phases.size() == b_req);
		CHECK(r.phases.size() <= ref.phases.size());
	}
}

TEST_CASE("fun_sat on HARPOON stops at depth one")
{
	auto c = random_circuit(2, 2, 3, 14, 3);
	auto a = harpoon_encrypt(c, 2, 0.2, 4);
	NetlistOracle oracle(c);
	auto r = fun_sat(a.encrypted, oracle, 2, FunSatConfig{});
	CHECK(r.termination == Termination::Success);
	REQUIRE(r.phases.size() == 1);
	CHECK(r.phases[0].b_star == 1);
	CHECK(r.phases[0].verify.uk);
	REQUIRE(r.key);
	CHECK(*r.key == a.correct_key);
}

TEST_CASE("fun_sat on a no-op encryption")
{
	auto c = random_circuit(3, 2, 2, 16, 9);
	NetlistOracle oracle(c);
	auto r = fun_sat(c, oracle, 1, FunSatConfig{});
	CHECK(r.termination == Termination::Success);
	CHECK(r.fc_zero_window);
	REQUIRE(r.phases.size() == 1);
	CHECK(r.phases[0].b_star == 1);
	CHECK(r.phases[0].dips == 0);
	CHECK_FALSE(r.phases[0].verify.uk);
	CHECK(r.phases[0].verify.induction == "proved");
	CHECK(r.key.has_value());
}

TEST_CASE("fun_sat retries above a failed depth")
{
	// A tiny window cannot see the delayed error, so the first guess fails.
	auto a = trap_instance(3);
	NetlistOracle oracle(trap_toy());
	FunSatConfig cfg;
	cfg.t_win = 1;
	cfg.Delta = 1;
	auto r = fun_sat(a.encrypted, oracle, 1, cfg);
	CHECK(r.termination == Termination::Success);
	REQUIRE(r.phases.size() >= 2);
	for (std::size_t i = 1; i < r.phases.size(); ++i) {
		CHECK(r.phases[i].b_star > r.phases[i - 1].b_star);
		CHECK(r.phases[i].fc_window->first == r.phases[i - 1].b_star + 1);
		CHECK(r.phases[i].fc_window->second == r.phases[i - 1].b_star + 1 + cfg.t_win);
	}
	REQUIRE(r.key);
	CHECK(toys::equivalent(a.encrypted, trap_toy(), *r.key));
}

TEST_CASE("budgets end the run")
{
	auto a = trap_instance(2);
	NetlistOracle oracle(trap_toy());
	FunSatConfig cfg;
	cfg.budget = std::chrono::milliseconds(0);
	auto r = fun_sat(a.encrypted, oracle, 1, cfg);
	CHECK(r.termination == Termination::Timeout);
	CHECK_FALSE(r.key);
	auto ref = reference_attack(a.encrypted, oracle, 1, cfg);
	CHECK(ref.termination == Termination::Timeout);

	FunSatConfig bad;
	bad.Delta = 0;
	CHECK_THROWS(fun_sat(a.encrypted, oracle, 1, bad));
	CHECK(parse_update_rule("double") == UpdateRule::Double);
	CHECK_FALSE(parse_update_rule("triple"));
}

TEST_CASE("pluggable solver backend")
{
	auto ce = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\n");
	NetlistOracle oracle(parse_bench("INPUT(a)\nOUTPUT(y)\ny = BUF(a)\n"));
	int made = 0;
	SolverFactory f = [&] {
		++made;
		return std::make_unique<CdclSolver>();
	};
	auto r = sat_attack(ce, oracle, 1, 1, {}, f);
	CHECK(made == 1);
	CHECK(r.key == KeySequence{{false}});
}
