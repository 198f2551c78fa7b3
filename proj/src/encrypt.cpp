#include "funsat/encrypt.hpp"

#include "funsat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace funsat {

std::string_view to_string(Scheme s) { return s == Scheme::Harpoon ? "harpoon" : "interlocking"; }

std::optional<Scheme> parse_scheme(std::string_view s)
{
	if (s == "harpoon")
		return Scheme::Harpoon;
	if (s == "interlocking")
		return Scheme::Interlocking;
	return std::nullopt;
}

namespace {

class Locker
{
      public:
	explicit Locker(Netlist &m) : m_(m), inv_(m.inputs().size()) {}

	NetId gate(GateKind kind, std::vector<NetId> in, std::string_view base)
	{
		NetId out = m_.add_net(m_.fresh_name(base));
		m_.add_gate(Gate{kind, std::move(in), out});
		return out;
	}

	NetId reg(bool init, std::string_view base)
	{
		NetId q = m_.add_net(m_.fresh_name(base));
		// D is patched once the next-state logic exists.
		dff_index_.push_back(m_.add_dff(Dff{q, q, init}));
		return q;
	}
	void set_d(NetId q, NetId d)
	{
		for (auto i : dff_index_)
			if (m_.dffs()[i].q == q)
				m_.mutable_dffs()[i].d = d;
	}

	NetId inverted_input(std::size_t j)
	{
		if (!inv_[j])
			inv_[j] = gate(GateKind::Not, {m_.inputs()[j]}, "lk_n" + m_.net_name(m_.inputs()[j]));
		return *inv_[j];
	}

	/// High exactly when the primary inputs equal `v`.
	NetId match(const InputVector &v)
	{
		std::vector<NetId> lits;
		for (std::size_t j = 0; j < v.size(); ++j)
			lits.push_back(v[j] ? m_.inputs()[j] : inverted_input(j));
		if (lits.size() == 1)
			return lits[0];
		return gate(GateKind::And, std::move(lits), "lk_match");
	}

	NetId or_of(std::vector<NetId> in, std::string_view base)
	{
		if (in.size() == 1)
			return in[0];
		return gate(GateKind::Or, std::move(in), base);
	}

	NetId constant0()
	{
		if (!zero_)
			zero_ = gate(GateKind::Const0, {}, "lk_zero");
		return *zero_;
	}

	/// Key chain from the reset register; returns the "last frame matched" net.
	NetId chain(NetId start, const KeySequence &key, std::string_view base)
	{
		NetId prev = start;
		for (std::size_t f = 0; f < key.size(); ++f) {
			NetId adv = gate(GateKind::And, {prev, match(key[f])}, std::string(base) + "_adv");
			if (f + 1 == key.size())
				return adv;
			NetId q = reg(false, std::string(base) + "_s" + std::to_string(f + 1));
			set_d(q, adv);
			prev = q;
		}
		return prev;
	}

	/// Replaces the driver of `net` by XOR(original, flip).
	void xor_into(NetId net, NetId flip, std::string_view suffix)
	{
		NetId raw = m_.detach_driver(net, m_.fresh_name(m_.net_name(net) + std::string(suffix)));
		m_.add_gate(Gate{GateKind::Xor, {raw, flip}, net});
	}

      private:
	Netlist &m_;
	std::vector<std::optional<NetId>> inv_;
	std::vector<std::size_t> dff_index_;
	std::optional<NetId> zero_;
};

KeySequence random_key(std::mt19937_64 &rng, std::size_t t_k, std::size_t width)
{
	KeySequence k(t_k, InputVector(width));
	for (auto &f : k)
		for (std::size_t j = 0; j < width; ++j)
			f[j] = rng() & 1u;
	return k;
}

/// Nets in the combinational fan-in of `root` (gates only).
std::vector<bool> fanin_cone(const Netlist &c, NetId root)
{
	auto drivers = net_drivers(c);
	std::vector<bool> in(c.num_nets(), false);
	std::vector<NetId> stack{root};
	in[root.index] = true;
	while (!stack.empty()) {
		NetId n = stack.back();
		stack.pop_back();
		if (drivers[n.index].kind != DriverKind::Gate)
			continue;
		for (NetId i : c.gates()[drivers[n.index].index].inputs)
			if (!in[i.index]) {
				in[i.index] = true;
				stack.push_back(i);
			}
	}
	return in;
}

/// Outputs whose driver can be moved (not a primary input).
std::vector<NetId> movable_outputs(const Netlist &c)
{
	auto drivers = net_drivers(c);
	std::vector<NetId> out;
	for (NetId o : c.outputs())
		if (drivers[o.index].kind != DriverKind::Input &&
		    std::find(out.begin(), out.end(), o) == out.end())
			out.push_back(o);
	return out;
}

struct Base
{
	Netlist m;
	NetId functional;
	NetId not_functional;
	std::optional<NetId> wrong_path;
	std::size_t mkfs = 0;
	NetId mkf_output;
};

/// Shared HARPOON core: mode FSM, held original state, and MKF insertion.
Base lock_core(const Netlist &c, std::size_t t_k, double r_mkf, const KeySequence &key,
	       const std::vector<KeySequence> &traps, std::mt19937_64 &rng)
{
	if (t_k < 1)
		throw GenerationFailure("t_k must be at least 1");
	if (!(r_mkf > 0.0 && r_mkf <= 1.0))
		throw GenerationFailure("r_mkf must lie in (0, 1]");
	if (c.gates().empty())
		throw GenerationFailure("circuit has no gates to corrupt");
	auto outs = movable_outputs(c);
	if (outs.empty())
		throw GenerationFailure("no primary output is driven by logic");

	Base b{c, {}, {}, {}, 0, {}};
	Netlist &m = b.m;
	Locker lk(m);
	const std::size_t orig_dffs = c.dffs().size();

	NetId p0 = lk.reg(true, "lk_p0");
	lk.set_d(p0, lk.constant0());
	std::vector<NetId> enter{lk.chain(p0, key, "lk_k")};
	std::vector<NetId> trap_enter;
	for (std::size_t t = 0; t < traps.size(); ++t)
		trap_enter.push_back(lk.chain(p0, traps[t], "lk_w" + std::to_string(t)));

	NetId f = lk.reg(false, "lk_func");
	std::vector<NetId> f_in{f};
	f_in.insert(f_in.end(), enter.begin(), enter.end());
	f_in.insert(f_in.end(), trap_enter.begin(), trap_enter.end());
	lk.set_d(f, lk.or_of(f_in, "lk_func_next"));
	b.functional = f;
	b.not_functional = lk.gate(GateKind::Not, {f}, "lk_nfunc");
	if (!traps.empty()) {
		NetId w = lk.reg(false, "lk_wrong");
		std::vector<NetId> w_in{w};
		w_in.insert(w_in.end(), trap_enter.begin(), trap_enter.end());
		lk.set_d(w, lk.or_of(w_in, "lk_wrong_next"));
		b.wrong_path = w;
	}

	for (std::size_t i = 0; i < orig_dffs; ++i) {
		Dff &dff = m.mutable_dffs()[i];
		NetId held = dff.init ? lk.gate(GateKind::Or, {b.not_functional, dff.d}, "lk_hold")
				      : lk.gate(GateKind::And, {f, dff.d}, "lk_hold");
		m.mutable_dffs()[i].d = held;
	}

	// MKF targets: one output, then nets outside that output's cone.
	const std::size_t count =
	    std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r_mkf * static_cast<double>(c.gates().size()) - 1e-9)));
	NetId out = outs[rng() % outs.size()];
	auto cone = fanin_cone(c, out);
	std::vector<NetId> outside, inside;
	for (const Gate &g : c.gates()) {
		if (g.output == out)
			continue;
		(cone[g.output.index] ? inside : outside).push_back(g.output);
	}
	std::shuffle(outside.begin(), outside.end(), rng);
	std::shuffle(inside.begin(), inside.end(), rng);
	outside.insert(outside.end(), inside.begin(), inside.end());
	std::vector<NetId> targets{out};
	for (std::size_t i = 0; targets.size() < count && i < outside.size(); ++i)
		targets.push_back(outside[i]);
	for (NetId t : targets)
		lk.xor_into(t, b.not_functional, "_mkf");
	b.mkfs = targets.size();
	b.mkf_output = out;
	return b;
}

void check_valid(const Netlist &m)
{
	try {
		m.validate();
	} catch (const NetlistError &e) {
		throw GenerationFailure(std::string("encrypted netlist is invalid: ") + e.what());
	}
}

} // namespace

EncryptionArtifact harpoon_encrypt(const Netlist &c, std::size_t t_k, double r_mkf, std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	EncryptionArtifact a;
	a.correct_key = random_key(rng, t_k, c.inputs().size());
	auto b = lock_core(c, t_k, r_mkf, a.correct_key, {}, rng);
	b.m.set_name(c.name() + "_harpoon");
	check_valid(b.m);
	a.encrypted = std::move(b.m);
	a.scheme = Scheme::Harpoon;
	a.t_k = t_k;
	a.r_mkf = r_mkf;
	a.seed = seed;
	a.mkf_count = b.mkfs;
	return a;
}

EncryptionArtifact interlocking_encrypt(const Netlist &c, std::size_t t_k, std::size_t d_max, std::uint64_t seed,
					const InterlockingOptions &opts)
{
	if (d_max < 1)
		throw GenerationFailure("d_max must be at least 1");
	if (opts.traps < 1)
		throw GenerationFailure("at least one wrong key is needed");
	std::mt19937_64 rng(seed);
	const std::size_t width = c.inputs().size();
	EncryptionArtifact a;
	a.correct_key = random_key(rng, t_k, width);

	const double space = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(t_k * width, 1000)));
	if (static_cast<double>(opts.traps) + 1.0 > space)
		throw GenerationFailure("key space too small for " + std::to_string(opts.traps) + " wrong keys");
	std::vector<KeySequence> traps;
	while (traps.size() < opts.traps) {
		auto k = random_key(rng, t_k, width);
		if (k != a.correct_key && std::find(traps.begin(), traps.end(), k) == traps.end())
			traps.push_back(std::move(k));
	}

	std::size_t distance = opts.distance ? *opts.distance
					     : std::uniform_int_distribution<std::size_t>(1, d_max)(rng);
	if (distance < 1 || distance > d_max)
		throw GenerationFailure("trap distance must lie in [1, d_max]");

	auto b = lock_core(c, t_k, opts.r_mkf, a.correct_key, traps, rng);
	Netlist &m = b.m;
	m.set_name(c.name() + "_interlocking");
	Locker lk(m);

	// Wrong-path counter: u_1 starts on the first flagged functional cycle,
	// the pulse shifts to u_distance, which then saturates.
	std::vector<NetId> u;
	for (std::size_t i = 0; i < distance; ++i)
		u.push_back(lk.reg(false, "lk_u" + std::to_string(i + 1)));
	NetId any = lk.or_of(u, "lk_uany");
	NetId idle = lk.gate(GateKind::Not, {any}, "lk_uidle");
	NetId trigger = lk.gate(GateKind::And, {b.functional, *b.wrong_path, idle}, "lk_utrig");
	if (distance == 1) {
		lk.set_d(u[0], lk.gate(GateKind::Or, {trigger, u[0]}, "lk_u1_next"));
	} else {
		lk.set_d(u[0], trigger);
		for (std::size_t i = 1; i + 1 < distance; ++i)
			lk.set_d(u[i], u[i - 1]);
		lk.set_d(u.back(), lk.gate(GateKind::Or, {u[distance - 2], u.back()}, "lk_usat"));
	}
	NetId fire = lk.gate(GateKind::And, {u.back(), *b.wrong_path}, "lk_fire");
	auto outs = movable_outputs(c);
	NetId target = outs[rng() % outs.size()];
	lk.xor_into(target, fire, "_trap");
	check_valid(m);

	// Certify the delayed error by simulation.
	TrapInfo trap;
	trap.distance = distance;
	trap.witness_depth = distance + 1;
	trap.wrong_keys = traps;
	trap.witness = Sequence(distance + 1, InputVector(width));
	for (auto &frame : trap.witness)
		for (std::size_t j = 0; j < width; ++j)
			frame[j] = rng() & 1u;
	Simulator enc(m);
	Sequence all = traps[0];
	all.insert(all.end(), trap.witness.begin(), trap.witness.end());
	State s = enc.reset_state();
	auto got = enc.run(s, all);
	auto want = run_sequence(c, Simulator(c).reset_state(), trap.witness);
	for (std::size_t f = 0; f < distance; ++f)
		if (got[t_k + f] != want[f])
			throw GenerationFailure("wrong key diverges before the error state");
	if (got[t_k + distance] == want[distance])
		throw GenerationFailure("error state not reached within " + std::to_string(d_max) + " transitions");
	State pre = enc.reset_state();
	Sequence prefix(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(t_k + distance));
	enc.run(pre, prefix);
	trap.s_pre = pre;

	a.encrypted = std::move(m);
	a.scheme = Scheme::Interlocking;
	a.t_k = t_k;
	a.r_mkf = opts.r_mkf;
	a.d_max = d_max;
	a.seed = seed;
	a.mkf_count = b.mkfs;
	a.trap = std::move(trap);
	return a;
}

} // namespace funsat
