#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "funsat/encrypt.hpp"
#include "funsat/errors.hpp"
#include "funsat/unroll.hpp"
#include "toys.hpp"

#include <cmath>

using namespace funsat;

namespace {

Netlist s27() { return read_bench_file(FUNSAT_BENCH_DIR "/s27.bench"); }

bool matches_oracle(const Netlist &ce, const Netlist &co, const KeySequence &key, const Sequence &data)
{
	Sequence all = key;
	all.insert(all.end(), data.begin(), data.end());
	auto got = run_sequence(ce, Simulator(ce).reset_state(), all);
	auto want = run_sequence(co, Simulator(co).reset_state(), data);
	return std::equal(want.begin(), want.end(), got.begin() + static_cast<std::ptrdiff_t>(key.size()));
}

// First depth at which `key` disagrees with the oracle on some input, up to max_b.
std::size_t first_error_depth(const Netlist &ce, const Netlist &co, const KeySequence &key, std::size_t max_b)
{
	const std::size_t w = co.inputs().size();
	for (std::size_t b = 1; b <= max_b; ++b)
		for (std::uint64_t x = 0; x < (std::uint64_t{1} << (b * w)); ++x)
			if (!matches_oracle(ce, co, key, unpack_frames(x, b, w)))
				return b;
	return 0;
}

} // namespace

TEST_CASE("HARPOON functional-mode equivalence")
{
	std::vector<Netlist> circuits{s27(), random_circuit(3, 6, 21, 193, 1), random_circuit(2, 2, 3, 12, 5)};
	std::mt19937_64 rng(1);
	for (const auto &c : circuits)
		for (std::size_t t_k : {1u, 2u, 3u}) {
			auto a = harpoon_encrypt(c, t_k, 0.1, 7 + t_k);
			CHECK_NOTHROW(a.encrypted.validate());
			CHECK(a.correct_key.size() == t_k);
			CHECK(a.encrypted.inputs().size() == c.inputs().size());
			CHECK(a.encrypted.outputs().size() == c.outputs().size());
			CHECK(a.mkf_count == static_cast<std::size_t>(std::ceil(0.1 * double(c.gates().size()))));
			for (int t = 0; t < 100; ++t)
				REQUIRE(matches_oracle(a.encrypted, c, a.correct_key,
						       toys::random_sequence(rng, 1 + rng() % 8, c.inputs().size())));
		}
}

TEST_CASE("HARPOON wrong keys corrupt at the first observed cycle")
{
	auto c = random_circuit(2, 2, 3, 14, 3);
	auto a = harpoon_encrypt(c, 2, 0.2, 4);
	for (std::uint64_t k = 0; k < 16; ++k) {
		auto key = unpack_frames(k, 2, 2);
		for (std::uint64_t x = 0; x < 4; ++x) {
			bool ok = matches_oracle(a.encrypted, c, key, unpack_frames(x, 1, 2));
			CHECK(ok == (key == a.correct_key));
		}
	}
	CHECK(exact_fc(a.encrypted, c, 2, 1) == doctest::Approx(15.0 / 16.0));
}

TEST_CASE("one correct key out of two")
{
	auto c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(a)\n");
	auto a = harpoon_encrypt(c, 1, 1.0, 9);
	int correct = 0;
	for (bool k : {false, true})
		correct += first_error_depth(a.encrypted, c, KeySequence{{k}}, 4) == 0;
	CHECK(correct == 1);
}

TEST_CASE("keys diverging at cycle 1 reach different states")
{
	auto c = s27();
	auto a = harpoon_encrypt(c, 2, 0.1, 3);
	auto u = unroll(a.encrypted, 2, 1);
	KeySequence other = a.correct_key;
	other[0][0] = !other[0][0];
	CHECK(state_after_key(u, a.correct_key) != state_after_key(u, other));
}

TEST_CASE("parameter validation")
{
	auto c = s27();
	CHECK_THROWS_AS(harpoon_encrypt(c, 1, 0.0, 1), GenerationFailure);
	CHECK_THROWS_AS(harpoon_encrypt(c, 1, 1.5, 1), GenerationFailure);
	CHECK_THROWS_AS(harpoon_encrypt(c, 0, 0.1, 1), GenerationFailure);
	CHECK_THROWS_AS(interlocking_encrypt(c, 1, 0, 1), GenerationFailure);
	InterlockingOptions many;
	many.traps = 16;
	CHECK_THROWS_AS(interlocking_encrypt(c, 1, 3, 1, many), GenerationFailure);
	CHECK(parse_scheme("harpoon") == Scheme::Harpoon);
	CHECK_FALSE(parse_scheme("sarlock").has_value());
}

TEST_CASE("deterministic given seed")
{
	auto c = s27();
	CHECK(write_bench(harpoon_encrypt(c, 2, 0.2, 5).encrypted) == write_bench(harpoon_encrypt(c, 2, 0.2, 5).encrypted));
	auto a = interlocking_encrypt(c, 2, 4, 8), b = interlocking_encrypt(c, 2, 4, 8);
	CHECK(write_bench(a.encrypted) == write_bench(b.encrypted));
	CHECK(a.trap->witness == b.trap->witness);
}

TEST_CASE("Interlocking delayed error")
{
	std::mt19937_64 rng(2);
	for (std::uint64_t seed = 1; seed <= 12; ++seed) {
		auto c = seed % 2 ? s27() : random_circuit(3, 6, 21, 193, seed);
		auto a = interlocking_encrypt(c, 1 + seed % 2, 4, seed);
		REQUIRE(a.trap);
		const auto &t = *a.trap;
		CHECK(t.distance >= 1);
		CHECK(t.distance <= 4);
		CHECK(t.witness_depth == t.distance + 1);
		CHECK(t.witness.size() == t.witness_depth);
		CHECK(t.s_pre.size() == a.encrypted.dffs().size());
		CHECK_NOTHROW(a.encrypted.validate());

		const auto &kw = t.wrong_keys.at(0);
		Sequence before(t.witness.begin(), t.witness.end() - 1);
		CHECK(matches_oracle(a.encrypted, c, kw, before));
		CHECK_FALSE(matches_oracle(a.encrypted, c, kw, t.witness));
		for (int r = 0; r < 100; ++r)
			REQUIRE(matches_oracle(a.encrypted, c, a.correct_key,
					       toys::random_sequence(rng, 1 + rng() % 10, c.inputs().size())));
	}
}

TEST_CASE("Interlocking trap key error depth on a toy")
{
	auto c = random_circuit(2, 2, 2, 10, 6);
	for (std::size_t d = 1; d <= 3; ++d) {
		InterlockingOptions o;
		o.distance = d;
		auto a = interlocking_encrypt(c, 1, 3, 20 + d, o);
		const auto &kw = a.trap->wrong_keys[0];
		// No error from k_w below the witness depth, an error at it.
		CHECK(first_error_depth(a.encrypted, c, kw, d + 2) == d + 1);
		CHECK(first_error_depth(a.encrypted, c, a.correct_key, d + 2) == 0);
		// Every other key fails at depth 1.
		for (std::uint64_t k = 0; k < 4; ++k) {
			auto key = unpack_frames(k, 1, 2);
			if (key != kw && key != a.correct_key)
				CHECK(first_error_depth(a.encrypted, c, key, 1) == 1);
		}
		// FC restricted to k_w.
		double below = 0, at = 0;
		for (std::uint64_t x = 0; x < (std::uint64_t{1} << (2 * (d + 1))); ++x) {
			auto seq = unpack_frames(x, d + 1, 2);
			Sequence shorter(seq.begin(), seq.end() - 1);
			below += !matches_oracle(a.encrypted, c, kw, shorter);
			at += !matches_oracle(a.encrypted, c, kw, seq);
		}
		CHECK(below == 0);
		CHECK(at > 0);
	}
}

TEST_CASE("multiple traps share the error state")
{
	auto c = s27();
	InterlockingOptions o;
	o.traps = 8;
	o.distance = 2;
	auto a = interlocking_encrypt(c, 2, 4, 3, o);
	CHECK(a.trap->wrong_keys.size() == 8);
	for (const auto &kw : a.trap->wrong_keys) {
		CHECK(kw != a.correct_key);
		Sequence before(a.trap->witness.begin(), a.trap->witness.end() - 1);
		CHECK(matches_oracle(a.encrypted, c, kw, before));
		CHECK_FALSE(matches_oracle(a.encrypted, c, kw, a.trap->witness));
	}
}
