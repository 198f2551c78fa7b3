#include "funsat/solver.hpp"

#include "funsat/errors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace funsat {

std::size_t SatBackend::load(const CnfFormula &f, std::size_t from)
{
	while (num_vars() < f.num_vars)
		new_var();
	for (std::size_t i = from; i < f.clauses.size(); ++i)
		add_clause(f.clauses[i]);
	return f.clauses.size();
}

namespace {

constexpr std::uint32_t kNoReason = 0xFFFFFFFFu;
constexpr std::int8_t kUndef = -1;

double luby(double y, std::uint64_t x)
{
	std::uint64_t size = 1;
	int seq = 0;
	while (size < x + 1) {
		++seq;
		size = 2 * size + 1;
	}
	while (size - 1 != x) {
		size = (size - 1) >> 1;
		--seq;
		x = x % size;
	}
	double r = 1;
	for (int i = 0; i < seq; ++i)
		r *= y;
	return r;
}

} // namespace

struct CdclSolver::Impl
{
	struct ClauseRec
	{
		std::vector<Lit> lits;
		double activity = 0;
		bool learnt = false;
		bool removed = false;
	};
	struct Watcher
	{
		std::uint32_t cref;
		Lit blocker;
	};

	std::vector<ClauseRec> clauses;
	std::vector<std::uint32_t> learnts;
	std::vector<std::vector<Watcher>> watches; // by literal
	std::vector<std::int8_t> assign;	   // by variable
	std::vector<std::uint32_t> reason;
	std::vector<int> level;
	std::vector<bool> polarity; // saved phase, true = negative
	std::vector<double> activity;
	std::vector<char> seen;
	std::vector<Lit> trail;
	std::vector<std::size_t> trail_lim;
	std::size_t qhead = 0;
	bool ok = true;

	// Max-heap of variables by activity.
	std::vector<Var> heap;
	std::vector<int> heap_pos;

	double var_inc = 1.0, var_decay = 0.95;
	double cla_inc = 1.0, cla_decay = 0.999;
	double max_learnts = 0;
	std::uint64_t conflicts_total = 0;

	std::int8_t value(Lit l) const
	{
		std::int8_t v = assign[l.var()];
		return v == kUndef ? kUndef : static_cast<std::int8_t>(v ^ static_cast<std::int8_t>(l.negated()));
	}
	int decision_level() const { return static_cast<int>(trail_lim.size()); }

	// Heap helpers.
	bool heap_less(Var a, Var b) const { return activity[a] > activity[b] || (activity[a] == activity[b] && a < b); }
	void heap_up(std::size_t i)
	{
		Var v = heap[i];
		while (i > 0) {
			std::size_t p = (i - 1) / 2;
			if (!heap_less(v, heap[p]))
				break;
			heap[i] = heap[p];
			heap_pos[heap[i]] = static_cast<int>(i);
			i = p;
		}
		heap[i] = v;
		heap_pos[v] = static_cast<int>(i);
	}
	void heap_down(std::size_t i)
	{
		Var v = heap[i];
		for (;;) {
			std::size_t c = 2 * i + 1;
			if (c >= heap.size())
				break;
			if (c + 1 < heap.size() && heap_less(heap[c + 1], heap[c]))
				++c;
			if (!heap_less(heap[c], v))
				break;
			heap[i] = heap[c];
			heap_pos[heap[i]] = static_cast<int>(i);
			i = c;
		}
		heap[i] = v;
		heap_pos[v] = static_cast<int>(i);
	}
	void heap_insert(Var v)
	{
		if (heap_pos[v] >= 0)
			return;
		heap.push_back(v);
		heap_up(heap.size() - 1);
	}
	Var heap_pop()
	{
		Var top = heap[0];
		heap_pos[top] = -1;
		Var last = heap.back();
		heap.pop_back();
		if (!heap.empty()) {
			heap[0] = last;
			heap_pos[last] = 0;
			heap_down(0);
		}
		return top;
	}

	Var new_var()
	{
		Var v = static_cast<Var>(assign.size());
		assign.push_back(kUndef);
		reason.push_back(kNoReason);
		level.push_back(0);
		polarity.push_back(true);
		activity.push_back(0.0);
		seen.push_back(0);
		heap_pos.push_back(-1);
		watches.emplace_back();
		watches.emplace_back();
		heap_insert(v);
		return v;
	}

	void var_bump(Var v)
	{
		if ((activity[v] += var_inc) > 1e100) {
			for (double &a : activity)
				a *= 1e-100;
			var_inc *= 1e-100;
		}
		if (heap_pos[v] >= 0)
			heap_up(static_cast<std::size_t>(heap_pos[v]));
	}
	void clause_bump(ClauseRec &c)
	{
		if ((c.activity += cla_inc) > 1e20) {
			for (auto cr : learnts)
				clauses[cr].activity *= 1e-20;
			cla_inc *= 1e-20;
		}
	}

	void enqueue(Lit p, std::uint32_t from)
	{
		assign[p.var()] = static_cast<std::int8_t>(!p.negated());
		reason[p.var()] = from;
		level[p.var()] = decision_level();
		trail.push_back(p);
	}

	void attach(std::uint32_t cr)
	{
		const auto &c = clauses[cr].lits;
		watches[(~c[0]).x].push_back({cr, c[1]});
		watches[(~c[1]).x].push_back({cr, c[0]});
	}

	std::uint32_t propagate()
	{
		while (qhead < trail.size()) {
			Lit p = trail[qhead++];
			auto &ws = watches[p.x];
			std::size_t i = 0, j = 0;
			const Lit false_lit = ~p;
			while (i < ws.size()) {
				Watcher w = ws[i];
				if (value(w.blocker) == 1) {
					ws[j++] = ws[i++];
					continue;
				}
				ClauseRec &cr = clauses[w.cref];
				if (cr.removed) {
					++i;
					continue;
				}
				auto &c = cr.lits;
				if (c[0] == false_lit)
					std::swap(c[0], c[1]);
				++i;
				Lit first = c[0];
				if (first != w.blocker && value(first) == 1) {
					ws[j++] = {w.cref, first};
					continue;
				}
				bool moved = false;
				for (std::size_t k = 2; k < c.size(); ++k) {
					if (value(c[k]) != 0) {
						std::swap(c[1], c[k]);
						watches[(~c[1]).x].push_back({w.cref, first});
						moved = true;
						break;
					}
				}
				if (moved)
					continue;
				ws[j++] = {w.cref, first};
				if (value(first) == 0) {
					while (i < ws.size())
						ws[j++] = ws[i++];
					ws.resize(j);
					qhead = trail.size();
					return w.cref;
				}
				enqueue(first, w.cref);
			}
			ws.resize(j);
		}
		return kNoReason;
	}

	void cancel_until(int lvl)
	{
		if (decision_level() <= lvl)
			return;
		for (std::size_t i = trail.size(); i-- > trail_lim[static_cast<std::size_t>(lvl)];) {
			Var v = trail[i].var();
			assign[v] = kUndef;
			reason[v] = kNoReason;
			polarity[v] = trail[i].negated();
			heap_insert(v);
		}
		qhead = trail_lim[static_cast<std::size_t>(lvl)];
		trail.resize(trail_lim[static_cast<std::size_t>(lvl)]);
		trail_lim.resize(static_cast<std::size_t>(lvl));
	}

	bool redundant(Lit p, std::vector<Lit> &to_clear)
	{
		// Iterative check that p is implied by literals already in the learnt clause.
		std::vector<Lit> stack{p};
		std::size_t top = to_clear.size();
		while (!stack.empty()) {
			Lit q = stack.back();
			stack.pop_back();
			const auto &c = clauses[reason[q.var()]].lits;
			for (std::size_t k = 1; k < c.size(); ++k) {
				Lit l = c[k];
				Var v = l.var();
				if (seen[v] || level[v] == 0)
					continue;
				if (reason[v] == kNoReason) {
					for (std::size_t t = top; t < to_clear.size(); ++t)
						seen[to_clear[t].var()] = 0;
					to_clear.resize(top);
					return false;
				}
				seen[v] = 1;
				stack.push_back(l);
				to_clear.push_back(l);
			}
		}
		return true;
	}

	void analyze(std::uint32_t confl, std::vector<Lit> &out, int &out_level)
	{
		out.clear();
		out.push_back(Lit{});
		int path = 0;
		Lit p{};
		bool have_p = false;
		std::size_t index = trail.size();
		do {
			ClauseRec &c = clauses[confl];
			if (c.learnt)
				clause_bump(c);
			for (std::size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
				Lit q = c.lits[k];
				Var v = q.var();
				if (!seen[v] && level[v] > 0) {
					var_bump(v);
					seen[v] = 1;
					if (level[v] >= decision_level())
						++path;
					else
						out.push_back(q);
				}
			}
			while (!seen[trail[--index].var()]) {
			}
			p = trail[index];
			have_p = true;
			confl = reason[p.var()];
			seen[p.var()] = 0;
			--path;
		} while (path > 0);
		out[0] = ~p;

		std::vector<Lit> to_clear(out.begin(), out.end());
		std::size_t j = 1;
		for (std::size_t i = 1; i < out.size(); ++i)
			if (reason[out[i].var()] == kNoReason || !redundant(out[i], to_clear))
				out[j++] = out[i];
		out.resize(j);
		for (Lit l : to_clear)
			seen[l.var()] = 0;

		if (out.size() == 1) {
			out_level = 0;
		} else {
			std::size_t max_i = 1;
			for (std::size_t i = 2; i < out.size(); ++i)
				if (level[out[i].var()] > level[out[max_i].var()])
					max_i = i;
			std::swap(out[1], out[max_i]);
			out_level = level[out[1].var()];
		}
	}

	void reduce_db()
	{
		std::sort(learnts.begin(), learnts.end(), [&](std::uint32_t a, std::uint32_t b) {
			const auto &ca = clauses[a], &cb = clauses[b];
			if ((ca.lits.size() > 2) != (cb.lits.size() > 2))
				return ca.lits.size() > 2;
			return ca.activity < cb.activity;
		});
		double extra = cla_inc / static_cast<double>(std::max<std::size_t>(learnts.size(), 1));
		std::size_t j = 0;
		for (std::size_t i = 0; i < learnts.size(); ++i) {
			ClauseRec &c = clauses[learnts[i]];
			bool locked = reason[c.lits[0].var()] == learnts[i] && value(c.lits[0]) == 1;
			if (c.lits.size() > 2 && !locked && (i < learnts.size() / 2 || c.activity < extra)) {
				c.removed = true;
				c.lits.clear();
				c.lits.shrink_to_fit();
			} else {
				learnts[j++] = learnts[i];
			}
		}
		learnts.resize(j);
		for (auto &ws : watches)
			ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher &w) { return clauses[w.cref].removed; }),
				 ws.end());
	}

	void add_clause(std::span<const Lit> in)
	{
		if (!ok)
			return;
		cancel_until(0);
		std::vector<Lit> c(in.begin(), in.end());
		for (Lit l : c)
			if (l.var() >= assign.size())
				throw Error("clause references undeclared variable " + std::to_string(l.var()));
		std::sort(c.begin(), c.end());
		std::size_t j = 0;
		for (std::size_t i = 0; i < c.size(); ++i) {
			if (value(c[i]) == 1 || (j > 0 && c[i] == ~c[j - 1]))
				return;
			if (value(c[i]) == 0 || (j > 0 && c[i] == c[j - 1]))
				continue;
			c[j++] = c[i];
		}
		c.resize(j);
		if (c.empty()) {
			ok = false;
			return;
		}
		if (c.size() == 1) {
			enqueue(c[0], kNoReason);
			ok = propagate() == kNoReason;
			return;
		}
		auto cr = static_cast<std::uint32_t>(clauses.size());
		clauses.push_back(ClauseRec{std::move(c)});
		attach(cr);
	}

	SolveResult solve(std::span<const Lit> assumptions, const Limits &limits)
	{
		SolveResult result;
		cancel_until(0);
		for (Lit a : assumptions)
			if (a.var() >= assign.size())
				throw Error("assumption references undeclared variable");
		if (!ok || propagate() != kNoReason) {
			ok = false;
			return result;
		}
		std::size_t originals = clauses.size() - learnts.size();
		max_learnts = std::max(max_learnts, static_cast<double>(originals) / 3.0 + 1000.0);
		std::uint64_t conflicts = 0, decisions = 0;
		std::vector<Lit> learnt;
		for (std::uint64_t restart = 0;; ++restart) {
			const auto budget = static_cast<std::uint64_t>(luby(2.0, restart) * 100.0);
			std::uint64_t local = 0;
			for (;;) {
				std::uint32_t confl = propagate();
				if (confl != kNoReason) {
					++conflicts;
					++conflicts_total;
					++local;
					if (decision_level() == 0) {
						ok = false;
						result.conflicts = conflicts;
						return result;
					}
					int back = 0;
					analyze(confl, learnt, back);
					cancel_until(back);
					if (learnt.size() == 1) {
						enqueue(learnt[0], kNoReason);
					} else {
						auto cr = static_cast<std::uint32_t>(clauses.size());
						clauses.push_back(ClauseRec{learnt, 0.0, true, false});
						learnts.push_back(cr);
						attach(cr);
						clause_bump(clauses[cr]);
						enqueue(learnt[0], cr);
					}
					var_inc /= var_decay;
					cla_inc /= cla_decay;
					if (limits.conflicts && conflicts >= *limits.conflicts) {
						cancel_until(0);
						throw BudgetExceeded("conflict budget of " + std::to_string(*limits.conflicts) +
								     " exhausted");
					}
					if (limits.deadline && (conflicts & 63) == 0 &&
					    std::chrono::steady_clock::now() >= *limits.deadline) {
						cancel_until(0);
						throw TimeoutError("solver deadline reached");
					}
					continue;
				}
				if (local >= budget) {
					cancel_until(0);
					break;
				}
				if (static_cast<double>(learnts.size()) - static_cast<double>(trail.size()) >= max_learnts) {
					reduce_db();
					max_learnts *= 1.1;
				}
				Lit next{};
				bool have = false;
				while (static_cast<std::size_t>(decision_level()) < assumptions.size()) {
					Lit a = assumptions[static_cast<std::size_t>(decision_level())];
					if (value(a) == 1) {
						trail_lim.push_back(trail.size());
					} else if (value(a) == 0) {
						cancel_until(0);
						result.conflicts = conflicts;
						return result;
					} else {
						next = a;
						have = true;
						break;
					}
				}
				if (!have) {
					while (!heap.empty()) {
						Var v = heap_pop();
						if (assign[v] == kUndef) {
							next = Lit::make(v, polarity[v]);
							have = true;
							break;
						}
					}
				}
				if (!have) {
					result.status = SolveStatus::Sat;
					result.model.resize(assign.size());
					for (Var v = 0; v < assign.size(); ++v)
						result.model[v] = assign[v] == 1;
					result.conflicts = conflicts;
					cancel_until(0);
					return result;
				}
				if (limits.deadline && (++decisions & 4095) == 0 &&
				    std::chrono::steady_clock::now() >= *limits.deadline) {
					cancel_until(0);
					throw TimeoutError("solver deadline reached");
				}
				trail_lim.push_back(trail.size());
				enqueue(next, kNoReason);
			}
		}
	}
};

CdclSolver::CdclSolver() : impl_(std::make_unique<Impl>()) {}
CdclSolver::~CdclSolver() = default;
Var CdclSolver::new_var() { return impl_->new_var(); }
Var CdclSolver::num_vars() const { return static_cast<Var>(impl_->assign.size()); }
void CdclSolver::add_clause(std::span<const Lit> clause) { impl_->add_clause(clause); }
SolveResult CdclSolver::solve(std::span<const Lit> assumptions, const Limits &limits)
{
	return impl_->solve(assumptions, limits);
}
std::uint64_t CdclSolver::total_conflicts() const { return impl_->conflicts_total; }

ExternalSolver::ExternalSolver(std::string command) : command_(std::move(command)) {}

SolveResult parse_solver_output(std::string_view text, Var num_vars)
{
	SolveResult r;
	bool status = false;
	std::vector<bool> model(num_vars, false);
	std::istringstream is{std::string(text)};
	std::string line;
	while (std::getline(is, line)) {
		if (line.rfind("s ", 0) == 0) {
			if (line.find("UNSATISFIABLE") != std::string::npos) {
				r.status = SolveStatus::Unsat;
				status = true;
			} else if (line.find("SATISFIABLE") != std::string::npos) {
				r.status = SolveStatus::Sat;
				status = true;
			} else {
				throw Error("external solver gave no answer: " + line);
			}
		} else if (line.rfind("v ", 0) == 0) {
			std::istringstream vs(line.substr(2));
			long long v;
			while (vs >> v) {
				if (v == 0)
					break;
				auto var = static_cast<std::size_t>((v < 0 ? -v : v) - 1);
				if (var < model.size())
					model[var] = v > 0;
			}
		}
	}
	if (!status)
		throw Error("external solver output has no status line");
	if (r.sat())
		r.model = std::move(model);
	return r;
}

SolveResult ExternalSolver::solve(std::span<const Lit> assumptions, const Limits &)
{
	CnfFormula f = f_;
	for (Lit a : assumptions)
		f.add_clause({a});
	auto dir = std::filesystem::temp_directory_path();
	static std::atomic<unsigned> counter{0};
	auto base = dir / ("funsat_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
	auto cnf_path = base.string() + ".cnf";
	auto out_path = base.string() + ".out";
	{
		std::ofstream os(cnf_path);
		os << to_dimacs(f);
	}
	std::string cmd = command_ + " '" + cnf_path + "' > '" + out_path + "' 2>/dev/null";
	int rc = std::system(cmd.c_str());
	(void)rc; // many solvers exit with 10/20
	std::ifstream is(out_path);
	std::stringstream ss;
	ss << is.rdbuf();
	std::filesystem::remove(cnf_path);
	std::filesystem::remove(out_path);
	auto r = parse_solver_output(ss.str(), f_.num_vars);
	if (r.sat() && !f.satisfied_by(r.model))
		throw Error("external solver returned a model that violates the formula");
	return r;
}

} // namespace funsat
