#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "funsat/errors.hpp"
#include "funsat/unroll.hpp"
#include "toys.hpp"

using namespace funsat;

namespace {

Netlist s27() { return read_bench_file(FUNSAT_BENCH_DIR "/s27.bench"); }

std::vector<OutputVector> tail(const Netlist &c, const Sequence &key, const Sequence &data)
{
	Sequence all = key;
	all.insert(all.end(), data.begin(), data.end());
	auto out = run_sequence(c, Simulator(c).reset_state(), all);
	return {out.begin() + static_cast<std::ptrdiff_t>(key.size()), out.end()};
}

} // namespace

TEST_CASE("single frame")
{
	auto c = s27();
	auto u = unroll(c, 0, 1);
	CHECK(u.comb.dffs().empty());
	CHECK(u.key_ports.empty());
	CHECK(u.data_ports.size() == 4);
	CHECK(u.obs_outputs.size() == 1);
	CHECK(u.state_taps.size() == 2);
	CHECK_NOTHROW(u.comb.validate());
	CHECK_THROWS(unroll(c, 1, 0));
}

TEST_CASE("structural gate count")
{
	auto c = s27();
	for (std::size_t t_k : {0u, 1u, 3u})
		for (std::size_t b : {1u, 2u, 5u}) {
			auto u = unroll(c, t_k, b);
			// s27 resets to all-zero, so one shared constant driver is injected.
			CHECK(u.comb.gates().size() == (t_k + b) * c.gates().size() + 1);
			CHECK(u.key_ports.size() == t_k * 4);
			CHECK(u.data_ports.size() == b * 4);
			CHECK(u.obs_outputs.size() == b);
			CHECK(u.state_taps.size() == t_k + b + 1);
		}
	auto mixed = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(p, q)\n# init p 1\np = DFF(a)\nq = DFF(p)");
	CHECK(unroll(mixed, 1, 1).comb.gates().size() == 2 * 1 + 2);
}

TEST_CASE("toy 1-DFF circuit matches simulation exhaustively")
{
	auto c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = XOR(a, q)\nq = DFF(n)\nn = NAND(a, q)");
	auto u = unroll(c, 1, 2);
	CHECK(u.frames() == 3);
	for (std::uint64_t x = 0; x < 8; ++x) {
		auto frames = unpack_frames(x, 3, 1);
		Sequence key(frames.begin(), frames.begin() + 1), data(frames.begin() + 1, frames.end());
		CHECK(evaluate(u, key, data) == tail(c, key, data));
	}
}

TEST_CASE("semantics preserved on random stimuli")
{
	std::vector<Netlist> circuits{s27(), random_circuit(3, 6, 21, 193, 2)};
	std::mt19937_64 rng(17);
	for (const auto &c : circuits) {
		const std::size_t w = c.inputs().size();
		auto u = unroll(c, 2, 4);
		for (int t = 0; t < 100; ++t) {
			auto key = toys::random_sequence(rng, 2, w);
			auto data = toys::random_sequence(rng, 4, w);
			REQUIRE(evaluate(u, key, data) == tail(c, key, data));
		}
		auto oracle = unroll(c, 0, 3);
		for (int t = 0; t < 20; ++t) {
			auto data = toys::random_sequence(rng, 3, w);
			REQUIRE(evaluate(oracle, {}, data) == run_sequence(c, Simulator(c).reset_state(), data));
		}
	}
}

TEST_CASE("prefix coherence")
{
	auto c = random_circuit(2, 2, 5, 40, 6);
	auto u3 = unroll(c, 1, 3), u2 = unroll(c, 1, 2);
	std::mt19937_64 rng(2);
	for (int t = 0; t < 50; ++t) {
		auto key = toys::random_sequence(rng, 1, 2);
		auto i = toys::random_sequence(rng, 3, 2);
		Sequence j(i.begin(), i.begin() + 2);
		auto long_out = evaluate(u3, key, i);
		auto short_out = evaluate(u2, key, j);
		CHECK(std::equal(short_out.begin(), short_out.end(), long_out.begin()));
	}
}

TEST_CASE("state_after_key")
{
	auto c = s27();
	auto u0 = unroll(c, 0, 1);
	CHECK(state_after_key(u0, {}) == Simulator(c).reset_state());
	auto u = unroll(c, 3, 1);
	std::mt19937_64 rng(4);
	for (int t = 0; t < 30; ++t) {
		auto key = toys::random_sequence(rng, 3, 4);
		State s = Simulator(c).reset_state();
		Simulator(c).run(s, key);
		CHECK(state_after_key(u, key) == s);
	}
	CHECK_THROWS_AS(state_after_key(u, toys::random_sequence(rng, 2, 4)), DimensionMismatch);
}

TEST_CASE("flatten and split")
{
	Sequence s{{true, false}, {false, false}, {true, true}};
	CHECK(flatten(s).size() == 6);
	CHECK(split_frames(flatten(s), 2) == s);
}
