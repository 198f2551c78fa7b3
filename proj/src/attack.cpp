#include "funsat/attack.hpp"

#include "funsat/errors.hpp"
#include "funsat/unroll.hpp"

#include <algorithm>

namespace funsat {

std::string_view to_string(UpdateRule r) { return r == UpdateRule::Increment ? "increment" : "double"; }

std::optional<UpdateRule> parse_update_rule(std::string_view s)
{
	if (s == "increment")
		return UpdateRule::Increment;
	if (s == "double")
		return UpdateRule::Double;
	return std::nullopt;
}

std::string_view to_string(Termination t)
{
	switch (t) {
	case Termination::Success: return "success";
	case Termination::DepthCap: return "depth_cap";
	case Termination::Timeout: return "timeout";
	case Termination::Budget: return "budget";
	case Termination::Inconsistent: return "inconsistent";
	}
	return "depth_cap";
}

void FunSatConfig::validate() const
{
	if (t_win < 1)
		throw Error("t_win must be at least 1");
	if (!(delta >= 0.0))
		throw Error("delta must be nonnegative");
	if (Delta < 1)
		throw Error("Delta must be at least 1");
	if (samples < 1)
		throw Error("sample size must be at least 1");
	if (depth_cap < 1)
		throw Error("depth cap must be at least 1");
	if (max_k < 1)
		throw Error("max_k must be at least 1");
}

SatAttackResult sat_attack(const Netlist &ce, const Oracle &oracle, std::size_t t_k, std::size_t b,
			   const Limits &limits, const SolverFactory &solver)
{
	if (b < 1)
		throw Error("sat_attack needs b >= 1");
	if (oracle.num_inputs() != ce.inputs().size() || oracle.num_outputs() != ce.outputs().size())
		throw DimensionMismatch("oracle ports do not match the encrypted circuit");
	const std::size_t width = ce.inputs().size();
	auto u = unroll(ce, t_k, b);
	auto m = build_miter(u);
	std::unique_ptr<SatBackend> s = solver ? solver() : std::make_unique<CdclSolver>();
	std::size_t loaded = s->load(m.builder.cnf());
	SatAttackResult out;
	std::vector<Lit> as{m.diff};
	for (;;) {
		auto r = s->solve(as, limits);
		out.conflicts += r.conflicts;
		if (!r.sat())
			break;
		Dip d;
		d.inputs = key_from_model(m.data, r.model, width);
		d.outputs = oracle.query(d.inputs);
		add_dip_constraint(m, u, d);
		loaded = s->load(m.builder.cnf(), loaded);
		out.dips.push_back(std::move(d));
	}
	auto r = s->solve({}, limits);
	out.conflicts += r.conflicts;
	if (!r.sat())
		throw InconsistentOracle("no key reproduces the oracle responses at depth " + std::to_string(b));
	out.key = key_from_model(m.key[0], r.model, width);
	return out;
}

namespace {

// The selection loop over lazily supplied FC values; `fc_at` may compute them.
template <class FcAt>
DepthSelection select_depth(std::size_t b_l, std::size_t b_u, double delta, std::size_t Delta,
			    std::optional<double> prev_fc, FcAt &&fc_at)
{
	DepthSelection sel;
	std::size_t counter = 0, b_star = b_l;
	std::optional<double> prev = b_l > 1 ? prev_fc : std::nullopt;
	for (std::size_t b = b_l; b <= b_u; ++b) {
		const double fc = fc_at(b);
		if (b > 1 && prev) {
			if (fc - *prev <= delta)
				++counter;
			else
				counter = 0;
		}
		prev = fc;
		b_star = b;
		if (counter == Delta) {
			b_star = b > Delta ? b - Delta : 0;
			sel.early_break = true;
			break;
		}
	}
	sel.b_star = std::max({b_star, b_l, std::size_t{1}});
	return sel;
}

class Run
{
      public:
	Run(const Netlist &ce, const Oracle &oracle, std::size_t t_k, const FunSatConfig &cfg, std::string mode)
	    : ce_(ce), oracle_(oracle), t_k_(t_k), start_(std::chrono::steady_clock::now()),
	      queries0_(oracle.queries())
	{
		cfg.validate();
		rep_.mode = std::move(mode);
		rep_.t_k = t_k;
		rep_.config = cfg;
		rep_.config.solver = nullptr;
		solver_ = cfg.solver;
		limits_.conflicts = cfg.conflict_budget;
		if (cfg.budget)
			limits_.deadline = start_ + *cfg.budget;
	}

	const FunSatConfig &cfg() const { return rep_.config; }
	AttackReport &report() { return rep_; }

	void check_time() const
	{
		if (limits_.deadline && std::chrono::steady_clock::now() >= *limits_.deadline)
			throw TimeoutError("wall-clock budget expired");
	}

	/// True if every depth up to b_u can be enumerated within the sample size.
	bool exact_window(std::size_t b_u) const
	{
		const std::size_t bits = (t_k_ + b_u) * ce_.inputs().size();
		return bits < 63 && (std::uint64_t{1} << bits) <= cfg().samples;
	}

	/// FC at depth b in the requested mode, reusing the cache when the mode matches.
	double fc(std::size_t b, bool exact, PhaseRecord &phase)
	{
		auto it = rep_.fc_cache.find(b);
		if (it == rep_.fc_cache.end() || it->second.exact != exact) {
			check_time();
			FcOptions o;
			o.samples = cfg().samples;
			o.seed = cfg().seed;
			o.threads = cfg().threads;
			o.allow_exact = exact;
			it = rep_.fc_cache.insert_or_assign(b, estimate_fc(ce_, oracle_, t_k_, b, o)).first;
		}
		phase.fc[b] = it->second;
		return it->second.fc;
	}

	/// SAT attack plus key verification at depth b; true when the key verifies.
	bool attack_at(std::size_t b, PhaseRecord &phase, std::chrono::steady_clock::time_point phase_start)
	{
		phase.b_star = b;
		auto sa = sat_attack(ce_, oracle_, t_k_, b, limits_, solver_);
		phase.dips = sa.dips.size();
		phase.sat_conflicts = sa.conflicts;
		VerifyOptions vo;
		vo.max_k = cfg().max_k;
		vo.limits = limits_;
		phase.verify = key_verify(ce_, t_k_, b, sa.key, sa.dips, vo);
		phase.seconds = seconds_since(phase_start);
		rep_.conflicts += sa.conflicts + phase.verify.conflicts;
		rep_.phases.push_back(phase);
		if (phase.verify.verdict != Verdict::Verified)
			return false;
		rep_.key = sa.key;
		rep_.termination = Termination::Success;
		return true;
	}

	template <class Body> AttackReport run(Body &&body)
	{
		try {
			body();
		} catch (const TimeoutError &e) {
			rep_.termination = Termination::Timeout;
			rep_.message = e.what();
		} catch (const BudgetExceeded &e) {
			rep_.termination = Termination::Budget;
			rep_.message = e.what();
		} catch (const InconsistentOracle &e) {
			rep_.termination = Termination::Inconsistent;
			rep_.message = e.what();
		} catch (const DepthCapReached &e) {
			rep_.termination = Termination::DepthCap;
			rep_.message = e.what();
		}
		if (rep_.termination != Termination::Success)
			rep_.key.reset();
		rep_.oracle_queries = oracle_.queries() - queries0_;
		rep_.seconds = seconds_since(start_);
		return std::move(rep_);
	}

	static double seconds_since(std::chrono::steady_clock::time_point t)
	{
		return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
	}

      private:
	const Netlist &ce_;
	const Oracle &oracle_;
	std::size_t t_k_;
	std::chrono::steady_clock::time_point start_;
	std::uint64_t queries0_;
	Limits limits_;
	SolverFactory solver_;
	AttackReport rep_;
};

[[noreturn]] void depth_cap(std::size_t cap)
{
	throw DepthCapReached("no verified key up to depth " + std::to_string(cap));
}

} // namespace

DepthSelection select_unroll_depth(const FcTrace &trace, std::size_t b_l, std::size_t b_u, double delta,
				   std::size_t Delta, std::optional<double> prev_fc)
{
	if (b_l < 1 || b_u < b_l)
		throw Error("invalid FC window");
	return select_depth(b_l, b_u, delta, Delta, prev_fc, [&](std::size_t b) {
		auto it = trace.find(b);
		if (it == trace.end())
			throw Error("FC trace misses depth " + std::to_string(b));
		return it->second.fc;
	});
}

AttackReport reference_attack(const Netlist &ce, const Oracle &oracle, std::size_t t_k, const FunSatConfig &cfg)
{
	Run run(ce, oracle, t_k, cfg, "reference");
	return run.run([&] {
		for (std::size_t b = 1;; b = cfg.update_rule == UpdateRule::Increment ? b + 1 : 2 * b) {
			if (b > cfg.depth_cap)
				depth_cap(cfg.depth_cap);
			run.check_time();
			PhaseRecord phase;
			if (run.attack_at(b, phase, std::chrono::steady_clock::now()))
				return;
		}
	});
}

AttackReport fun_sat(const Netlist &ce, const Oracle &oracle, std::size_t t_k, const FunSatConfig &cfg)
{
	Run run(ce, oracle, t_k, cfg, "funsat");
	return run.run([&] {
		std::size_t b_l = 1, b_u = cfg.t_win;
		for (bool first = true;; first = false) {
			if (b_l > cfg.depth_cap)
				depth_cap(cfg.depth_cap);
			b_u = std::min(b_u, cfg.depth_cap);
			auto phase_start = std::chrono::steady_clock::now();
			PhaseRecord phase;
			phase.fc_window = std::pair{b_l, b_u};
			// One FC mode per window, so differences never mix exact and sampled values.
			const bool exact = run.exact_window(b_u);
			std::optional<double> prev;
			if (b_l > 1)
				prev = run.fc(b_l - 1, exact, phase);
			phase.fc.clear();
			auto sel = select_depth(b_l, b_u, cfg.delta, cfg.Delta, prev,
						[&](std::size_t b) { return run.fc(b, exact, phase); });
			phase.early_break = sel.early_break;
			if (first)
				run.report().fc_zero_window = std::all_of(
					phase.fc.begin(), phase.fc.end(), [](const auto &e) { return e.second.fc == 0.0; });
			run.check_time();
			if (run.attack_at(sel.b_star, phase, phase_start))
				return;
			b_l = sel.b_star + 1;
			b_u = sel.b_star + 1 + cfg.t_win;
		}
	});
}

} // namespace funsat
