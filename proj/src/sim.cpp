#include "funsat/sim.hpp"

#include "funsat/errors.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <thread>

namespace funsat {

namespace {

std::string dims(std::size_t got, std::size_t want, const char *what)
{
	return std::string(what) + " has " + std::to_string(got) + " bits, expected " + std::to_string(want);
}

std::uint64_t space_bits(const Netlist &c, std::size_t t_k, std::size_t b, unsigned max_bits)
{
	std::uint64_t bits = (t_k + b) * c.inputs().size();
	if (bits > max_bits)
		throw EnumerationCapExceeded("enumeration over 2^" + std::to_string(bits) + " points exceeds cap 2^" +
					     std::to_string(max_bits));
	return bits;
}

/// Lane words of the enumeration index bits for a 64-aligned block starting at `base`.
WordSimulator::Word index_word(std::uint64_t base, std::size_t bit)
{
	static constexpr WordSimulator::Word kPatterns[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull,
							     0xF0F0F0F0F0F0F0F0ull, 0xFF00FF00FF00FF00ull,
							     0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
	if (bit < 6)
		return kPatterns[bit];
	return ((base >> bit) & 1u) ? ~WordSimulator::Word{0} : 0;
}

/// Per-lane "outputs differ somewhere in the first `b` observed frames" for
/// the 64 enumeration points starting at `base`.
WordSimulator::Word mismatch_block(const WordSimulator &enc, const WordSimulator &orc, std::size_t width,
				   std::size_t t_k, std::size_t b, std::uint64_t base)
{
	using Word = WordSimulator::Word;
	auto se = enc.reset_state();
	auto so = orc.reset_state();
	std::vector<Word> in(width), oute, outo;
	for (std::size_t f = 0; f < t_k; ++f) {
		for (std::size_t j = 0; j < width; ++j)
			in[j] = index_word(base, f * width + j);
		enc.step(se, in, oute);
	}
	Word diff = 0;
	for (std::size_t f = t_k; f < t_k + b; ++f) {
		for (std::size_t j = 0; j < width; ++j)
			in[j] = index_word(base, f * width + j);
		enc.step(se, in, oute);
		orc.step(so, in, outo);
		for (std::size_t o = 0; o < oute.size(); ++o)
			diff |= oute[o] ^ outo[o];
	}
	return diff;
}

void check_pair(const Netlist &ce, const Netlist &co)
{
	if (ce.inputs().size() != co.inputs().size() || ce.outputs().size() != co.outputs().size())
		throw DimensionMismatch("encrypted and oracle circuits have different port counts");
}

/// All mismatch flags at depth b, one byte per enumeration point.
std::vector<std::uint8_t> mismatch_table(const Netlist &ce, const Netlist &co, std::size_t t_k, std::size_t b,
					 unsigned max_bits)
{
	std::uint64_t bits = space_bits(ce, t_k, b, max_bits);
	std::uint64_t total = std::uint64_t{1} << bits;
	WordSimulator enc(ce), orc(co);
	std::vector<std::uint8_t> table(total, 0);
	for (std::uint64_t base = 0; base < total; base += 64) {
		auto diff = mismatch_block(enc, orc, ce.inputs().size(), t_k, b, base);
		for (std::uint64_t l = 0; l < 64 && base + l < total; ++l)
			table[base + l] = static_cast<std::uint8_t>((diff >> l) & 1u);
	}
	return table;
}

} // namespace

Simulator::Simulator(const Netlist &c) : c_(&c), order_(topo_order(c)) {}

State Simulator::reset_state() const
{
	State s(c_->dffs().size());
	for (std::size_t i = 0; i < s.size(); ++i)
		s[i] = c_->dffs()[i].init;
	return s;
}

void Simulator::check(const State &s, const InputVector &in) const
{
	if (s.size() != c_->dffs().size())
		throw DimensionMismatch(dims(s.size(), c_->dffs().size(), "state"));
	if (in.size() != c_->inputs().size())
		throw DimensionMismatch(dims(in.size(), c_->inputs().size(), "input vector"));
}

std::vector<std::uint8_t> Simulator::values(const State &s, const InputVector &in) const
{
	check(s, in);
	std::vector<std::uint8_t> v(c_->num_nets(), 0);
	for (std::size_t i = 0; i < in.size(); ++i)
		v[c_->inputs()[i].index] = in[i];
	for (std::size_t i = 0; i < s.size(); ++i)
		v[c_->dffs()[i].q.index] = s[i];
	std::vector<std::uint8_t> args;
	for (std::size_t gi : order_) {
		const Gate &g = c_->gates()[gi];
		args.clear();
		for (NetId n : g.inputs)
			args.push_back(v[n.index]);
		v[g.output.index] = eval_gate<std::uint8_t>(g.kind, args, 1);
	}
	return v;
}

Simulator::Step Simulator::step(const State &s, const InputVector &in) const
{
	auto v = values(s, in);
	Step r;
	r.next.resize(s.size());
	for (std::size_t i = 0; i < s.size(); ++i)
		r.next[i] = v[c_->dffs()[i].d.index];
	r.outputs.resize(c_->outputs().size());
	for (std::size_t i = 0; i < r.outputs.size(); ++i)
		r.outputs[i] = v[c_->outputs()[i].index];
	return r;
}

std::vector<OutputVector> Simulator::run(State &s, std::span<const InputVector> ins) const
{
	std::vector<OutputVector> outs;
	outs.reserve(ins.size());
	for (const auto &in : ins) {
		auto r = step(s, in);
		s = std::move(r.next);
		outs.push_back(std::move(r.outputs));
	}
	return outs;
}

Simulator::Step step(const Netlist &c, const State &s, const InputVector &in)
{
	return Simulator(c).step(s, in);
}

std::vector<OutputVector> run_sequence(const Netlist &c, const State &s0, std::span<const InputVector> ins)
{
	Simulator sim(c);
	State s = s0;
	return sim.run(s, ins);
}

WordSimulator::WordSimulator(const Netlist &c) : c_(&c), order_(topo_order(c)), values_(c.num_nets(), 0) {}

std::vector<WordSimulator::Word> WordSimulator::reset_state() const
{
	std::vector<Word> s(c_->dffs().size());
	for (std::size_t i = 0; i < s.size(); ++i)
		s[i] = c_->dffs()[i].init ? ~Word{0} : 0;
	return s;
}

void WordSimulator::step(std::vector<Word> &state, std::span<const Word> in, std::vector<Word> &out) const
{
	if (state.size() != c_->dffs().size() || in.size() != c_->inputs().size())
		throw DimensionMismatch("word simulation vector sizes do not match the netlist");
	for (std::size_t i = 0; i < in.size(); ++i)
		values_[c_->inputs()[i].index] = in[i];
	for (std::size_t i = 0; i < state.size(); ++i)
		values_[c_->dffs()[i].q.index] = state[i];
	std::vector<Word> args;
	for (std::size_t gi : order_) {
		const Gate &g = c_->gates()[gi];
		args.clear();
		for (NetId n : g.inputs)
			args.push_back(values_[n.index]);
		values_[g.output.index] = eval_gate<Word>(g.kind, args, ~Word{0});
	}
	for (std::size_t i = 0; i < state.size(); ++i)
		state[i] = values_[c_->dffs()[i].d.index];
	out.resize(c_->outputs().size());
	for (std::size_t i = 0; i < out.size(); ++i)
		out[i] = values_[c_->outputs()[i].index];
}

NetlistOracle::NetlistOracle(Netlist c) : c_(std::make_shared<const Netlist>(std::move(c))), sim_(*c_) {}

std::vector<OutputVector> NetlistOracle::query(std::span<const InputVector> seq) const
{
	++queries_;
	State s = sim_.reset_state();
	return sim_.run(s, seq);
}

Sequence unpack_frames(std::uint64_t packed, std::size_t frames, std::size_t width)
{
	Sequence seq(frames, Bits(width));
	for (std::size_t f = 0; f < frames; ++f)
		for (std::size_t j = 0; j < width; ++j)
			seq[f][j] = (packed >> (f * width + j)) & 1u;
	return seq;
}

std::uint64_t pack_frames(std::span<const Bits> frames)
{
	std::uint64_t x = 0;
	std::size_t pos = 0;
	for (const auto &f : frames)
		for (bool bit : f) {
			if (bit)
				x |= std::uint64_t{1} << pos;
			++pos;
		}
	return x;
}

FcEntry estimate_fc(const Netlist &ce, const Oracle &oracle, std::size_t t_k, std::size_t b, const FcOptions &opts)
{
	if (opts.samples == 0 || b == 0)
		throw Error("estimate_fc needs at least one sample and b >= 1");
	const std::size_t width = ce.inputs().size();
	if (width != oracle.num_inputs() || ce.outputs().size() != oracle.num_outputs())
		throw DimensionMismatch("encrypted circuit and oracle have different port counts");

	Simulator sim(ce);
	const std::size_t bits = (t_k + b) * width;
	FcEntry entry;

	if (opts.allow_exact && bits < 63 && (std::uint64_t{1} << bits) <= opts.samples) {
		// Exact: loop inputs outside so each oracle answer is reused for every key.
		const std::uint64_t keys = std::uint64_t{1} << (t_k * width);
		const std::uint64_t inputs = std::uint64_t{1} << (b * width);
		for (std::uint64_t i = 0; i < inputs; ++i) {
			Sequence data = unpack_frames(i, b, width);
			auto expect = oracle.query(data);
			for (std::uint64_t k = 0; k < keys; ++k) {
				Sequence frames = unpack_frames(k, t_k, width);
				frames.insert(frames.end(), data.begin(), data.end());
				State s = sim.reset_state();
				auto got = sim.run(s, frames);
				if (!std::equal(expect.begin(), expect.end(), got.begin() + static_cast<std::ptrdiff_t>(t_k)))
					++entry.corrupted;
			}
		}
		entry.samples = keys * inputs;
		entry.exact = true;
		entry.fc = static_cast<double>(entry.corrupted) / static_cast<double>(entry.samples);
		return entry;
	}

	auto run_range = [&](std::uint64_t lo, std::uint64_t hi) {
		std::uint64_t corrupted = 0;
		for (std::uint64_t s = lo; s < hi; ++s) {
			std::seed_seq sq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
					 static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
			std::mt19937_64 gen(sq);
			Sequence frames(t_k + b, Bits(width));
			for (auto &f : frames) {
				std::uint64_t w = 0;
				for (std::size_t j = 0; j < width; ++j) {
					if (j % 64 == 0)
						w = gen();
					f[j] = (w >> (j % 64)) & 1u;
				}
			}
			State st = sim.reset_state();
			auto got = sim.run(st, frames);
			auto expect = oracle.query(std::span<const InputVector>(frames).subspan(t_k));
			if (!std::equal(expect.begin(), expect.end(), got.begin() + static_cast<std::ptrdiff_t>(t_k)))
				++corrupted;
		}
		return corrupted;
	};

	unsigned workers = std::max(1u, opts.threads);
	if (workers == 1) {
		entry.corrupted = run_range(0, opts.samples);
	} else {
		std::vector<std::uint64_t> partial(workers, 0);
		std::vector<std::thread> pool;
		for (unsigned w = 0; w < workers; ++w) {
			std::uint64_t lo = opts.samples * w / workers, hi = opts.samples * (w + 1) / workers;
			pool.emplace_back([&, w, lo, hi] { partial[w] = run_range(lo, hi); });
		}
		for (auto &t : pool)
			t.join();
		for (auto p : partial)
			entry.corrupted += p;
	}
	entry.samples = opts.samples;
	entry.fc = static_cast<double>(entry.corrupted) / static_cast<double>(entry.samples);
	return entry;
}

double exact_fc(const Netlist &ce, const Netlist &co, std::size_t t_k, std::size_t b, unsigned max_bits)
{
	check_pair(ce, co);
	std::uint64_t bits = space_bits(ce, t_k, b, max_bits);
	std::uint64_t total = std::uint64_t{1} << bits;
	WordSimulator enc(ce), orc(co);
	std::uint64_t count = 0;
	for (std::uint64_t base = 0; base < total; base += 64) {
		auto diff = mismatch_block(enc, orc, ce.inputs().size(), t_k, b, base);
		if (total - base < 64)
			diff &= (std::uint64_t{1} << (total - base)) - 1;
		count += static_cast<std::uint64_t>(std::popcount(diff));
	}
	return static_cast<double>(count) / static_cast<double>(total);
}

std::vector<std::uint8_t> error_tags(const Netlist &ce, const Netlist &co, std::size_t t_k, std::size_t b,
				     unsigned max_bits)
{
	check_pair(ce, co);
	if (b == 0 || b > 255)
		throw Error("error_tags needs 1 <= b <= 255");
	space_bits(ce, t_k, b, max_bits);
	const std::size_t width = ce.inputs().size();

	// T_1 from the depth-1 mismatches, then T_d from T_{d-1} through the prefix j of each point.
	std::vector<std::uint8_t> tags = mismatch_table(ce, co, t_k, 1, max_bits);
	for (std::size_t d = 2; d <= b; ++d) {
		auto mismatch = mismatch_table(ce, co, t_k, d, max_bits);
		const std::uint64_t prefix_mask = (std::uint64_t{1} << ((t_k + d - 1) * width)) - 1;
		std::vector<std::uint8_t> next(mismatch.size(), 0);
		for (std::uint64_t x = 0; x < mismatch.size(); ++x) {
			if (!mismatch[x])
				continue;
			std::uint8_t prev = tags[x & prefix_mask];
			next[x] = prev == 0 ? static_cast<std::uint8_t>(d) : prev;
		}
		tags = std::move(next);
	}
	return tags;
}

} // namespace funsat
