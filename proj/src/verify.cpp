#include "funsat/verify.hpp"

#include "funsat/errors.hpp"
#include "funsat/unroll.hpp"

#include <algorithm>

namespace funsat {

std::string_view to_string(Verdict v)
{
	switch (v) {
	case Verdict::Verified: return "verified";
	case Verdict::Refuted: return "refuted";
	case Verdict::Unknown: return "unknown";
	}
	return "unknown";
}

std::string_view to_string(InductionStatus s)
{
	switch (s) {
	case InductionStatus::Proved: return "proved";
	case InductionStatus::Counterexample: return "counterexample";
	case InductionStatus::Unknown: return "unknown";
	}
	return "unknown";
}

bool replay(const Netlist &ce, const Counterexample &cex)
{
	if (cex.cycle >= cex.inputs.size())
		return false;
	auto run = [&](const KeySequence &k) {
		Sequence all = k;
		all.insert(all.end(), cex.inputs.begin(), cex.inputs.end());
		return run_sequence(ce, Simulator(ce).reset_state(), all);
	};
	auto a = run(cex.key_a), b = run(cex.key_b);
	const std::size_t at = cex.key_a.size() + cex.cycle;
	return a[at] != b[at];
}

namespace {

struct Cycle
{
	std::vector<Lit> out;
	std::vector<Lit> next;
};

Cycle encode_cycle(CnfBuilder &b, const Netlist &frame, std::size_t n_out, std::span<const Lit> inputs,
		   std::span<const Lit> state)
{
	std::vector<Lit> in(inputs.begin(), inputs.end());
	in.insert(in.end(), state.begin(), state.end());
	auto lits = b.encode(frame, in);
	Cycle c;
	for (std::size_t i = 0; i < frame.outputs().size(); ++i)
		(i < n_out ? c.out : c.next).push_back(lits[frame.outputs()[i].index]);
	return c;
}

Lit differs(CnfBuilder &b, const std::vector<Lit> &x, const std::vector<Lit> &y)
{
	std::vector<Lit> d;
	for (std::size_t i = 0; i < x.size(); ++i)
		d.push_back(b.xor_of({x[i], y[i]}));
	return b.or_of(std::move(d));
}

std::vector<Lit> fresh_lits(CnfBuilder &b, std::size_t n)
{
	std::vector<Lit> v;
	for (std::size_t i = 0; i < n; ++i)
		v.push_back(b.fresh());
	return v;
}

Bits values(std::span<const Lit> lits, const std::vector<bool> &model)
{
	Bits out;
	for (Lit l : lits)
		out.push_back(lit_value(l, model));
	return out;
}

/// Product machine from its initial states onward, with one incremental solver.
class BaseModel
{
      public:
	BaseModel(const ProductMachine &m) : m_(m), frame_(frame_netlist(*m.ce))
	{
		const Netlist &ce = *m.ce;
		width_ = ce.inputs().size();
		n_out_ = ce.outputs().size();
		const std::size_t nk = m.t_k * width_;
		ka_ = fresh_lits(b_, nk);
		kb_ = m.same_key ? ka_ : fresh_lits(b_, nk);
		if (!m.dips.empty()) {
			auto u = unroll(ce, m.t_k, m.b);
			for (const Dip &d : m.dips) {
				add_io_constraint(b_, u, ka_, d);
				if (!m.same_key)
					add_io_constraint(b_, u, kb_, d);
			}
		}
		auto u1 = unroll(ce, m.t_k, 1);
		auto init = [&](const std::vector<Lit> &k) {
			std::vector<Lit> in = k;
			for (std::size_t j = 0; j < width_; ++j)
				in.push_back(b_.constant(false));
			auto lits = b_.encode(u1.comb, in);
			std::vector<Lit> s;
			for (NetId n : u1.state_taps[m.t_k])
				s.push_back(lits[n.index]);
			return s;
		};
		sa_ = init(ka_);
		sb_ = m.same_key ? sa_ : init(kb_);
	}

	const std::vector<Lit> &sa() const { return sa_; }
	const std::vector<Lit> &sb() const { return sb_; }
	CnfBuilder &builder() { return b_; }

	SolveResult solve(std::span<const Lit> assumptions, const Limits &limits)
	{
		loaded_ = solver_.load(b_.cnf(), loaded_);
		auto r = solver_.solve(assumptions, limits);
		conflicts_ += r.conflicts;
		return r;
	}

	/// Adds one more cycle; returns a counterexample if outputs can differ there.
	std::optional<Counterexample> extend(const Limits &limits)
	{
		auto x = fresh_lits(b_, width_);
		auto ca = encode_cycle(b_, frame_, n_out_, x, sa_);
		auto cb = encode_cycle(b_, frame_, n_out_, x, sb_);
		inputs_.push_back(x);
		sa_ = ca.next;
		sb_ = cb.next;
		Lit d = differs(b_, ca.out, cb.out);
		const std::size_t cycle = inputs_.size() - 1;
		if (d == b_.constant(false))
			return std::nullopt;
		std::vector<Lit> as{d};
		auto r = solve(as, limits);
		if (!r.sat()) {
			b_.add_clause({~d});
			return std::nullopt;
		}
		Counterexample cex;
		cex.key_a = key_from_model(ka_, r.model, width_);
		cex.key_b = key_from_model(kb_, r.model, width_);
		if (m_.t_k == 0)
			cex.key_a = cex.key_b = {};
		for (const auto &xi : inputs_)
			cex.inputs.push_back(values(xi, r.model));
		cex.cycle = cycle;
		return cex;
	}

	std::uint64_t conflicts() const { return conflicts_; }
	std::size_t cycles() const { return inputs_.size(); }

      private:
	const ProductMachine &m_;
	Netlist frame_;
	CnfBuilder b_;
	CdclSolver solver_;
	std::size_t loaded_ = 0;
	std::size_t width_ = 0, n_out_ = 0;
	std::vector<Lit> ka_, kb_, sa_, sb_;
	std::vector<std::vector<Lit>> inputs_;
	std::uint64_t conflicts_ = 0;
};

/// Register pairs (a_r, b_r) equal in every initial state and preserved by
/// every transition from states where all retained pairs are equal.
std::vector<bool> register_correspondence(const ProductMachine &m, BaseModel &base, const Limits &limits,
					  std::uint64_t &conflicts)
{
	const std::size_t n = base.sa().size();
	std::vector<bool> keep(n, true);
	CnfBuilder &b = base.builder();
	for (;;) {
		std::vector<Lit> d;
		for (std::size_t r = 0; r < n; ++r)
			if (keep[r])
				d.push_back(b.xor_of({base.sa()[r], base.sb()[r]}));
		Lit act = b.or_of(d);
		if (act == b.constant(false))
			break;
		std::vector<Lit> as{act};
		auto res = base.solve(as, limits);
		if (!res.sat())
			break;
		for (std::size_t r = 0; r < n; ++r)
			if (keep[r] && lit_value(base.sa()[r], res.model) != lit_value(base.sb()[r], res.model))
				keep[r] = false;
	}

	const Netlist &ce = *m.ce;
	Netlist frame = frame_netlist(ce);
	for (;;) {
		CnfBuilder s;
		auto sa = fresh_lits(s, n);
		std::vector<Lit> sb(n);
		for (std::size_t r = 0; r < n; ++r)
			sb[r] = keep[r] ? sa[r] : s.fresh();
		auto x = fresh_lits(s, ce.inputs().size());
		auto ca = encode_cycle(s, frame, ce.outputs().size(), x, sa);
		auto cb = encode_cycle(s, frame, ce.outputs().size(), x, sb);
		std::vector<Lit> d;
		for (std::size_t r = 0; r < n; ++r)
			if (keep[r])
				d.push_back(s.xor_of({ca.next[r], cb.next[r]}));
		Lit act = s.or_of(d);
		if (act == s.constant(false))
			break;
		CdclSolver solver;
		solver.load(s.cnf());
		std::vector<Lit> as{act};
		auto res = solver.solve(as, limits);
		conflicts += res.conflicts;
		if (!res.sat())
			break;
		for (std::size_t r = 0; r < n; ++r)
			if (keep[r] && lit_value(ca.next[r], res.model) != lit_value(cb.next[r], res.model))
				keep[r] = false;
	}
	return keep;
}

} // namespace

UkResult check_unique_key(const Netlist &ce, std::size_t t_k, std::size_t b, const KeySequence &k_star,
			  const DipList &dips, const Limits &limits)
{
	auto u = unroll(ce, t_k, b);
	auto inst = build_uk_instance(u, k_star, dips);
	CdclSolver s;
	s.load(inst.builder.cnf());
	auto r = s.solve({}, limits);
	UkResult out;
	out.conflicts = r.conflicts;
	out.unique = !r.sat();
	if (r.sat())
		out.witness = key_from_model(inst.key, r.model, ce.inputs().size());
	return out;
}

ProductMachine build_mce_model(const Netlist &ce, std::size_t t_k, std::size_t b, const DipList &dips,
			       const KeySequence &k_star)
{
	if (k_star.size() != t_k)
		throw DimensionMismatch("candidate key has the wrong number of frames");
	for (const Dip &d : dips)
		if (d.inputs.size() != b)
			throw DimensionMismatch("all dips must have depth b");
	ProductMachine m;
	m.ce = &ce;
	m.t_k = t_k;
	m.b = b;
	m.dips = dips;
	m.k_star = k_star;
	return m;
}

BmcResult bmc_check(const ProductMachine &m, std::size_t bound, const Limits &limits)
{
	if (bound < 1)
		throw Error("BMC bound must be at least 1");
	BaseModel base(m);
	BmcResult r;
	for (std::size_t t = 0; t < bound; ++t) {
		if (auto cex = base.extend(limits)) {
			r.holds = false;
			r.cex = std::move(cex);
			break;
		}
	}
	r.conflicts = base.conflicts();
	return r;
}

InductionResult kinduction_check(const ProductMachine &m, std::size_t max_k, const Limits &limits)
{
	if (max_k < 1)
		throw Error("k-induction needs max_k >= 1");
	const Netlist &ce = *m.ce;
	InductionResult out;
	BaseModel base(m);
	std::uint64_t conflicts = 0;
	auto keep = register_correspondence(m, base, limits, conflicts);
	out.invariant_size = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));

	Netlist frame = frame_netlist(ce);
	const std::size_t n = keep.size(), width = ce.inputs().size(), n_out = ce.outputs().size();
	CnfBuilder s;
	CdclSolver step;
	std::size_t loaded = 0;
	std::vector<std::vector<Lit>> path; // concatenated (a, b) state per step
	std::vector<Lit> sa = fresh_lits(s, n), sb(n);
	for (std::size_t r = 0; r < n; ++r)
		sb[r] = keep[r] ? sa[r] : s.fresh();
	Lit pending_diff = s.constant(false);
	auto add_state = [&](const std::vector<Lit> &a, const std::vector<Lit> &b) {
		std::vector<Lit> joint = a;
		joint.insert(joint.end(), b.begin(), b.end());
		for (const auto &prev : path)
			s.add_clause({differs(s, joint, prev)});
		path.push_back(std::move(joint));
		auto x = fresh_lits(s, width);
		auto ca = encode_cycle(s, frame, n_out, x, a);
		auto cb = encode_cycle(s, frame, n_out, x, b);
		pending_diff = differs(s, ca.out, cb.out);
		sa = ca.next;
		sb = cb.next;
	};
	add_state(sa, sb);

	for (std::size_t k = 1; k <= max_k; ++k) {
		out.k = k;
		if (auto cex = base.extend(limits)) {
			out.status = InductionStatus::Counterexample;
			out.cex = std::move(cex);
			break;
		}
		// Step: property holds on the first k states of a simple path, fails on state k+1.
		s.add_clause({~pending_diff});
		add_state(sa, sb);
		if (pending_diff == s.constant(false)) {
			out.status = InductionStatus::Proved;
			break;
		}
		loaded = step.load(s.cnf(), loaded);
		std::vector<Lit> as{pending_diff};
		auto r = step.solve(as, limits);
		conflicts += r.conflicts;
		if (!r.sat()) {
			out.status = InductionStatus::Proved;
			break;
		}
	}
	out.conflicts = conflicts + base.conflicts();
	return out;
}

VerifyReport key_verify(const Netlist &ce, std::size_t t_k, std::size_t b, const KeySequence &k_star,
			const DipList &dips, const VerifyOptions &opts)
{
	VerifyReport rep;
	auto uk = check_unique_key(ce, t_k, b, k_star, dips, opts.limits);
	rep.conflicts += uk.conflicts;
	rep.uk = uk.unique;
	if (uk.unique) {
		rep.verdict = Verdict::Verified;
		return rep;
	}
	auto m = build_mce_model(ce, t_k, b, dips, k_star);
	auto bmc = bmc_check(m, b + 1, opts.limits);
	rep.conflicts += bmc.conflicts;
	if (!bmc.holds) {
		rep.bmc = "counterexample";
		rep.cex = bmc.cex;
		rep.verdict = Verdict::Refuted;
		return rep;
	}
	rep.bmc = "holds";
	auto ind = kinduction_check(m, opts.max_k, opts.limits);
	rep.conflicts += ind.conflicts;
	rep.induction = std::string(to_string(ind.status));
	rep.induction_k = ind.k;
	switch (ind.status) {
	case InductionStatus::Proved:
		rep.verdict = Verdict::Verified;
		break;
	case InductionStatus::Counterexample:
		rep.cex = ind.cex;
		rep.verdict = Verdict::Refuted;
		break;
	case InductionStatus::Unknown:
		rep.verdict = Verdict::Unknown;
		break;
	}
	return rep;
}

std::optional<Sequence> bmc_equivalence(const Netlist &ce, const Netlist &co, std::size_t t_k,
					const KeySequence &key, std::size_t depth, const Limits &limits)
{
	if (ce.inputs().size() != co.inputs().size() || ce.outputs().size() != co.outputs().size())
		throw DimensionMismatch("encrypted and oracle circuits have different port counts");
	if (key.size() != t_k)
		throw DimensionMismatch("key has the wrong number of frames");
	Simulator se(ce), so(co);
	State start = se.reset_state();
	se.run(start, key);
	State reset = so.reset_state();

	CnfBuilder b;
	CdclSolver solver;
	std::size_t loaded = 0;
	Netlist fe = frame_netlist(ce), fo = frame_netlist(co);
	std::vector<Lit> sa, sb;
	for (bool v : start)
		sa.push_back(b.constant(v));
	for (bool v : reset)
		sb.push_back(b.constant(v));
	std::vector<std::vector<Lit>> xs;
	for (std::size_t t = 0; t < depth; ++t) {
		auto x = fresh_lits(b, ce.inputs().size());
		xs.push_back(x);
		auto ca = encode_cycle(b, fe, ce.outputs().size(), x, sa);
		auto cb = encode_cycle(b, fo, co.outputs().size(), x, sb);
		sa = ca.next;
		sb = cb.next;
		Lit d = differs(b, ca.out, cb.out);
		if (d == b.constant(false))
			continue;
		loaded = solver.load(b.cnf(), loaded);
		std::vector<Lit> as{d};
		auto r = solver.solve(as, limits);
		if (r.sat()) {
			Sequence seq;
			for (const auto &xi : xs)
				seq.push_back(values(xi, r.model));
			return seq;
		}
		b.add_clause({~d});
	}
	return std::nullopt;
}

} // namespace funsat
