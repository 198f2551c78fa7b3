#include "funsat/cnf.hpp"

#include "funsat/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace funsat {

bool lit_value(Lit l, const std::vector<bool> &model) { return model.at(l.var()) != l.negated(); }

bool CnfFormula::satisfied_by(const std::vector<bool> &model) const
{
	if (model.size() < num_vars)
		return false;
	return std::all_of(clauses.begin(), clauses.end(), [&](const Clause &c) {
		return std::any_of(c.begin(), c.end(), [&](Lit l) { return lit_value(l, model); });
	});
}

std::string to_dimacs(const CnfFormula &f)
{
	std::ostringstream os;
	os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
	for (const Clause &c : f.clauses) {
		for (Lit l : c)
			os << (l.negated() ? "-" : "") << l.var() + 1 << ' ';
		os << "0\n";
	}
	return os.str();
}

CnfFormula parse_dimacs(std::string_view text)
{
	CnfFormula f;
	bool header = false;
	std::size_t declared = 0;
	Clause cur;
	std::size_t line_no = 0;
	std::size_t pos = 0;
	while (pos <= text.size()) {
		std::size_t end = text.find('\n', pos);
		if (end == std::string_view::npos)
			end = text.size();
		std::string_view line = text.substr(pos, end - pos);
		pos = end + 1;
		++line_no;
		std::size_t first = line.find_first_not_of(" \t\r");
		if (first == std::string_view::npos || line[first] == 'c' || line[first] == '%')
			continue;
		if (line[first] == 'p') {
			std::istringstream is{std::string(line.substr(first))};
			std::string p, kind;
			long long v = -1, c = -1;
			is >> p >> kind >> v >> c;
			if (kind != "cnf" || v < 0 || c < 0)
				throw ParseError(line_no, "malformed DIMACS header");
			f.num_vars = static_cast<Var>(v);
			declared = static_cast<std::size_t>(c);
			header = true;
			continue;
		}
		if (!header)
			throw ParseError(line_no, "clause before the p cnf header");
		std::size_t i = first;
		while (i < line.size()) {
			while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
				++i;
			if (i >= line.size())
				break;
			long long v = 0;
			auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
			if (ec != std::errc{})
				throw ParseError(line_no, "bad literal");
			i = static_cast<std::size_t>(ptr - line.data());
			if (v == 0) {
				f.clauses.push_back(std::move(cur));
				cur.clear();
				continue;
			}
			auto var = static_cast<Var>((v < 0 ? -v : v) - 1);
			if (var >= f.num_vars)
				throw ParseError(line_no, "literal exceeds declared variable count");
			cur.push_back(Lit::make(var, v < 0));
		}
	}
	if (!cur.empty())
		f.clauses.push_back(std::move(cur));
	if (!header)
		throw ParseError(0, "missing p cnf header");
	if (f.clauses.size() != declared)
		throw ParseError(0, "header declares " + std::to_string(declared) + " clauses, found " +
					    std::to_string(f.clauses.size()));
	return f;
}

void VarMap::bind(int copy, NetId net, Lit l)
{
	if (copy < 0)
		throw Error("negative copy tag");
	if (copies_.size() <= static_cast<std::size_t>(copy))
		copies_.resize(static_cast<std::size_t>(copy) + 1);
	auto &v = copies_[static_cast<std::size_t>(copy)];
	if (v.size() <= net.index)
		v.resize(net.index + 1);
	v[net.index] = l;
}

std::optional<Lit> VarMap::find(int copy, NetId net) const
{
	if (copy < 0 || static_cast<std::size_t>(copy) >= copies_.size())
		return std::nullopt;
	const auto &v = copies_[static_cast<std::size_t>(copy)];
	return net.index < v.size() ? v[net.index] : std::nullopt;
}

Lit VarMap::at(int copy, NetId net) const
{
	auto l = find(copy, net);
	if (!l)
		throw Error("net " + std::to_string(net.index) + " is not encoded in copy " + std::to_string(copy));
	return *l;
}

TseitinResult tseitin(const Netlist &comb)
{
	if (!comb.dffs().empty())
		throw NetlistError("tseitin expects a combinational netlist");
	TseitinResult r;
	CnfFormula &f = r.cnf;
	std::vector<Lit> lit(comb.num_nets());
	for (NetId in : comb.inputs()) {
		lit[in.index] = Lit::make(f.new_var());
		r.vars.bind(0, in, lit[in.index]);
	}
	auto and_clauses = [&](Lit y, const std::vector<Lit> &xs) {
		Clause big{y};
		for (Lit x : xs) {
			f.add_clause({~y, x});
			big.push_back(~x);
		}
		f.add_clause(std::move(big));
	};
	auto xor_clauses = [&](Lit y, Lit a, Lit b) {
		f.add_clause({~y, a, b});
		f.add_clause({~y, ~a, ~b});
		f.add_clause({y, ~a, b});
		f.add_clause({y, a, ~b});
	};
	for (std::size_t gi : topo_order(comb)) {
		const Gate &g = comb.gates()[gi];
		Lit y = Lit::make(f.new_var());
		std::vector<Lit> xs;
		for (NetId n : g.inputs)
			xs.push_back(lit[n.index]);
		switch (g.kind) {
		case GateKind::And:
			and_clauses(y, xs);
			break;
		case GateKind::Nand:
			and_clauses(~y, xs);
			break;
		case GateKind::Or:
		case GateKind::Nor:
			for (Lit &x : xs)
				x = ~x;
			and_clauses(g.kind == GateKind::Or ? ~y : y, xs);
			break;
		case GateKind::Xor:
		case GateKind::Xnor: {
			Lit acc = xs[0];
			for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
				Lit t = Lit::make(f.new_var());
				xor_clauses(t, acc, xs[i]);
				acc = t;
			}
			xor_clauses(g.kind == GateKind::Xor ? y : ~y, acc, xs.back());
			break;
		}
		case GateKind::Not:
			f.add_clause({y, xs[0]});
			f.add_clause({~y, ~xs[0]});
			break;
		case GateKind::Buf:
			f.add_clause({~y, xs[0]});
			f.add_clause({y, ~xs[0]});
			break;
		case GateKind::Const0:
			f.add_clause({~y});
			break;
		case GateKind::Const1:
			f.add_clause({y});
			break;
		}
		lit[g.output.index] = y;
		r.vars.bind(0, g.output, y);
	}
	return r;
}

std::size_t CnfBuilder::KeyHash::operator()(const Key &k) const
{
	std::size_t h = k.op;
	for (Lit l : k.in)
		h = h * 0x9E3779B97F4A7C15ull + l.x + 1;
	return h ^ (h >> 29);
}

CnfBuilder::CnfBuilder()
{
	cnf_.new_var();
	cnf_.add_clause({kTrue});
}

void CnfBuilder::add_clause(Clause c)
{
	Clause out;
	for (Lit l : c) {
		if (l == kTrue)
			return;
		if (l == ~kTrue)
			continue;
		out.push_back(l);
	}
	cnf_.add_clause(std::move(out));
}

Lit CnfBuilder::and2_new(const std::vector<Lit> &in)
{
	Key key{0, in};
	if (auto it = strash_.find(key); it != strash_.end())
		return it->second;
	Lit y = fresh();
	Clause big{y};
	for (Lit x : in) {
		cnf_.add_clause({~y, x});
		big.push_back(~x);
	}
	cnf_.add_clause(std::move(big));
	strash_.emplace(std::move(key), y);
	return y;
}

Lit CnfBuilder::and_of(std::vector<Lit> in)
{
	std::vector<Lit> xs;
	for (Lit l : in) {
		if (l == kTrue)
			continue;
		if (l == ~kTrue)
			return ~kTrue;
		xs.push_back(l);
	}
	std::sort(xs.begin(), xs.end());
	xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
	for (std::size_t i = 1; i < xs.size(); ++i)
		if (xs[i].var() == xs[i - 1].var())
			return ~kTrue;
	if (xs.empty())
		return kTrue;
	if (xs.size() == 1)
		return xs[0];
	return and2_new(xs);
}

Lit CnfBuilder::or_of(std::vector<Lit> in)
{
	for (Lit &l : in)
		l = ~l;
	return ~and_of(std::move(in));
}

Lit CnfBuilder::xor2(Lit a, Lit b)
{
	if (b < a)
		std::swap(a, b);
	Key key{1, {a, b}};
	if (auto it = strash_.find(key); it != strash_.end())
		return it->second;
	Lit y = fresh();
	cnf_.add_clause({~y, a, b});
	cnf_.add_clause({~y, ~a, ~b});
	cnf_.add_clause({y, ~a, b});
	cnf_.add_clause({y, a, ~b});
	strash_.emplace(std::move(key), y);
	return y;
}

Lit CnfBuilder::xor_of(std::vector<Lit> in)
{
	bool parity = false;
	std::vector<Lit> xs;
	for (Lit l : in) {
		if (is_const(l)) {
			parity ^= l == kTrue;
			continue;
		}
		parity ^= l.negated();
		xs.push_back(Lit::make(l.var()));
	}
	std::sort(xs.begin(), xs.end());
	std::vector<Lit> odd;
	for (std::size_t i = 0; i < xs.size();) {
		std::size_t j = i;
		while (j < xs.size() && xs[j] == xs[i])
			++j;
		if ((j - i) % 2)
			odd.push_back(xs[i]);
		i = j;
	}
	if (odd.empty())
		return constant(parity);
	Lit acc = odd[0];
	for (std::size_t i = 1; i < odd.size(); ++i)
		acc = xor2(acc, odd[i]);
	return acc ^ parity;
}

Lit CnfBuilder::gate(GateKind kind, std::vector<Lit> in)
{
	switch (kind) {
	case GateKind::And: return and_of(std::move(in));
	case GateKind::Nand: return ~and_of(std::move(in));
	case GateKind::Or: return or_of(std::move(in));
	case GateKind::Nor: return ~or_of(std::move(in));
	case GateKind::Xor: return xor_of(std::move(in));
	case GateKind::Xnor: return ~xor_of(std::move(in));
	case GateKind::Not: return ~in.at(0);
	case GateKind::Buf: return in.at(0);
	case GateKind::Const0: return constant(false);
	case GateKind::Const1: return constant(true);
	}
	throw Error("unknown gate kind");
}

std::vector<Lit> CnfBuilder::encode(const Netlist &comb, std::span<const Lit> inputs)
{
	if (!comb.dffs().empty())
		throw NetlistError("encode expects a combinational netlist");
	if (inputs.size() != comb.inputs().size())
		throw DimensionMismatch("encode got " + std::to_string(inputs.size()) + " input literals for " +
					std::to_string(comb.inputs().size()) + " inputs");
	std::vector<Lit> lit(comb.num_nets(), ~kTrue);
	for (std::size_t i = 0; i < inputs.size(); ++i)
		lit[comb.inputs()[i].index] = inputs[i];
	std::vector<Lit> args;
	for (std::size_t gi : topo_order(comb)) {
		const Gate &g = comb.gates()[gi];
		args.clear();
		for (NetId n : g.inputs)
			args.push_back(lit[n.index]);
		lit[g.output.index] = gate(g.kind, args);
	}
	return lit;
}

Miter build_miter(const UnrolledCircuit &u)
{
	Miter m;
	CnfBuilder &b = m.builder;
	for (std::size_t i = 0; i < u.data_ports.size(); ++i)
		m.data.push_back(b.fresh());
	for (int c = 0; c < 2; ++c) {
		for (std::size_t i = 0; i < u.key_ports.size(); ++i)
			m.key[c].push_back(b.fresh());
		std::vector<Lit> in = m.key[c];
		in.insert(in.end(), m.data.begin(), m.data.end());
		auto lits = b.encode(u.comb, in);
		for (std::size_t n = 0; n < lits.size(); ++n)
			m.vars.bind(c, NetId{static_cast<std::uint32_t>(n)}, lits[n]);
		for (NetId o : u.obs_outputs)
			m.out[c].push_back(lits[o.index]);
	}
	std::vector<Lit> diffs;
	for (std::size_t o = 0; o < u.obs_outputs.size(); ++o)
		diffs.push_back(b.xor_of({m.out[0][o], m.out[1][o]}));
	m.diff = b.or_of(diffs);
	return m;
}

void add_io_constraint(CnfBuilder &b, const UnrolledCircuit &u, std::span<const Lit> keys, const Dip &dip)
{
	if (dip.inputs.size() != u.b || dip.outputs.size() != u.b)
		throw DimensionMismatch("dip has " + std::to_string(dip.inputs.size()) + " frames, expected " +
					std::to_string(u.b));
	if (keys.size() != u.key_ports.size())
		throw DimensionMismatch("key literal count does not match the key ports");
	std::vector<Lit> in(keys.begin(), keys.end());
	for (const auto &frame : dip.inputs) {
		if (frame.size() != u.width)
			throw DimensionMismatch("dip frame width does not match the circuit");
		for (bool v : frame)
			in.push_back(b.constant(v));
	}
	auto lits = b.encode(u.comb, in);
	for (std::size_t f = 0; f < u.b; ++f) {
		if (dip.outputs[f].size() != u.out_width)
			throw DimensionMismatch("dip output width does not match the circuit");
		for (std::size_t o = 0; o < u.out_width; ++o) {
			Lit l = lits[u.obs_outputs[f * u.out_width + o].index];
			b.add_clause({dip.outputs[f][o] ? l : ~l});
		}
	}
}

void add_dip_constraint(Miter &m, const UnrolledCircuit &u, const Dip &dip)
{
	add_io_constraint(m.builder, u, m.key[0], dip);
	add_io_constraint(m.builder, u, m.key[1], dip);
}

UkInstance build_uk_instance(const UnrolledCircuit &u, const KeySequence &k_star, const DipList &dips)
{
	if (k_star.size() != u.t_k)
		throw DimensionMismatch("candidate key has the wrong number of frames");
	UkInstance inst;
	for (std::size_t i = 0; i < u.key_ports.size(); ++i)
		inst.key.push_back(inst.builder.fresh());
	for (const Dip &d : dips) {
		Dip expect{d.inputs, evaluate(u, k_star, d.inputs)};
		add_io_constraint(inst.builder, u, inst.key, expect);
	}
	Bits flat = flatten(k_star);
	Clause differ;
	for (std::size_t i = 0; i < flat.size(); ++i)
		differ.push_back(inst.key[i] ^ flat[i]);
	inst.builder.add_clause(std::move(differ));
	return inst;
}

KeySequence key_from_model(std::span<const Lit> key, const std::vector<bool> &model, std::size_t width)
{
	Bits flat;
	for (Lit l : key)
		flat.push_back(lit_value(l, model));
	return split_frames(flat, width);
}

} // namespace funsat
