#include "funsat/netlist.hpp"

#include "funsat/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <queue>
#include <random>
#include <sstream>

namespace funsat {

namespace {

struct KindName
{
	GateKind kind;
	std::string_view name;
};

constexpr KindName kKindNames[] = {
    {GateKind::And, "AND"},	  {GateKind::Nand, "NAND"},	{GateKind::Or, "OR"},
    {GateKind::Nor, "NOR"},	  {GateKind::Xor, "XOR"},	{GateKind::Xnor, "XNOR"},
    {GateKind::Not, "NOT"},	  {GateKind::Buf, "BUFF"},	{GateKind::Const0, "CONST0"},
    {GateKind::Const1, "CONST1"},
};

std::string upper(std::string_view s)
{
	std::string out(s);
	for (char &c : out)
		c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
	return out;
}

std::string_view trim(std::string_view s)
{
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
		s.remove_prefix(1);
	while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
		s.remove_suffix(1);
	return s;
}

bool arity_ok(GateKind kind, std::size_t n)
{
	switch (kind) {
	case GateKind::Not:
	case GateKind::Buf:
		return n == 1;
	case GateKind::Const0:
	case GateKind::Const1:
		return n == 0;
	default:
		return n >= 2;
	}
}

} // namespace

std::string_view to_string(GateKind kind)
{
	for (const auto &[k, n] : kKindNames)
		if (k == kind)
			return n;
	return "?";
}

std::optional<GateKind> parse_gate_kind(std::string_view token)
{
	std::string t = upper(trim(token));
	if (t == "BUF")
		return GateKind::Buf;
	if (t == "GND")
		return GateKind::Const0;
	if (t == "VDD")
		return GateKind::Const1;
	for (const auto &[k, n] : kKindNames)
		if (n == t)
			return k;
	return std::nullopt;
}

NetId Netlist::add_net(std::string_view name)
{
	std::string n = (name.empty() || by_name_.contains(std::string(name))) ? fresh_name(name.empty() ? "n" : name)
									      : std::string(name);
	NetId id{static_cast<std::uint32_t>(names_.size())};
	by_name_.emplace(n, id.index);
	names_.push_back(std::move(n));
	return id;
}

NetId Netlist::net(std::string_view name)
{
	if (auto found = find_net(name))
		return *found;
	return add_net(name);
}

std::optional<NetId> Netlist::find_net(std::string_view name) const
{
	auto it = by_name_.find(std::string(name));
	if (it == by_name_.end())
		return std::nullopt;
	return NetId{it->second};
}

std::string Netlist::fresh_name(std::string_view base) const
{
	std::string b(base);
	if (!by_name_.contains(b))
		return b;
	for (std::size_t i = names_.size();; ++i) {
		std::string candidate = b + "_" + std::to_string(i);
		if (!by_name_.contains(candidate))
			return candidate;
	}
}

std::size_t Netlist::add_gate(Gate g)
{
	gates_.push_back(std::move(g));
	return gates_.size() - 1;
}

std::size_t Netlist::add_dff(Dff f)
{
	dffs_.push_back(f);
	return dffs_.size() - 1;
}

NetId Netlist::detach_driver(NetId from, std::string_view new_name)
{
	auto drivers = net_drivers(*this);
	const Driver &d = drivers.at(from.index);
	NetId moved = add_net(new_name);
	switch (d.kind) {
	case DriverKind::Gate:
		gates_[d.index].output = moved;
		break;
	case DriverKind::Dff:
		dffs_[d.index].q = moved;
		break;
	default:
		throw NetlistError("cannot detach the driver of net '" + net_name(from) + "'");
	}
	return moved;
}

std::vector<Driver> net_drivers(const Netlist &c)
{
	std::vector<Driver> drv(c.num_nets());
	auto claim = [&](NetId n, DriverKind kind, std::size_t idx) {
		if (drv.at(n.index).kind != DriverKind::None)
			throw NetlistError("net '" + c.net_name(n) + "' has more than one driver");
		drv[n.index] = Driver{kind, idx};
	};
	for (std::size_t i = 0; i < c.inputs().size(); ++i)
		claim(c.inputs()[i], DriverKind::Input, i);
	for (std::size_t i = 0; i < c.gates().size(); ++i)
		claim(c.gates()[i].output, DriverKind::Gate, i);
	for (std::size_t i = 0; i < c.dffs().size(); ++i)
		claim(c.dffs()[i].q, DriverKind::Dff, i);
	return drv;
}

void Netlist::validate() const
{
	if (inputs_.empty())
		throw NetlistError("netlist '" + name_ + "' has no primary inputs");
	auto drv = net_drivers(*this);
	auto require_driven = [&](NetId n, const char *role) {
		if (drv.at(n.index).kind == DriverKind::None)
			throw NetlistError(std::string(role) + " net '" + net_name(n) + "' is undriven");
	};
	for (const Gate &g : gates_) {
		if (!arity_ok(g.kind, g.inputs.size()))
			throw NetlistError("gate driving '" + net_name(g.output) + "' has invalid arity for " +
					   std::string(to_string(g.kind)));
		for (NetId in : g.inputs)
			require_driven(in, "gate input");
	}
	for (const Dff &f : dffs_)
		require_driven(f.d, "flip-flop input");
	for (NetId o : outputs_)
		require_driven(o, "output");
	topo_order(*this);
}

std::vector<std::size_t> topo_order(const Netlist &c)
{
	auto drv = net_drivers(c);
	const auto &gates = c.gates();
	std::vector<std::size_t> pending(gates.size(), 0);
	std::vector<std::vector<std::size_t>> fanout(gates.size());
	for (std::size_t i = 0; i < gates.size(); ++i) {
		for (NetId in : gates[i].inputs) {
			const Driver &d = drv.at(in.index);
			if (d.kind == DriverKind::Gate) {
				++pending[i];
				fanout[d.index].push_back(i);
			}
		}
	}

	using Item = std::pair<std::uint32_t, std::size_t>; // (output net, gate)
	std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
	for (std::size_t i = 0; i < gates.size(); ++i)
		if (pending[i] == 0)
			ready.emplace(gates[i].output.index, i);

	std::vector<std::size_t> order;
	order.reserve(gates.size());
	while (!ready.empty()) {
		std::size_t g = ready.top().second;
		ready.pop();
		order.push_back(g);
		for (std::size_t succ : fanout[g])
			if (--pending[succ] == 0)
				ready.emplace(gates[succ].output.index, succ);
	}
	if (order.size() == gates.size())
		return order;

	// Walk back through unscheduled gates until one repeats.
	std::size_t start = 0;
	while (pending[start] == 0)
		++start;
	std::vector<int> seen_at(gates.size(), -1);
	std::vector<std::size_t> path;
	std::size_t g = start;
	while (seen_at[g] < 0) {
		seen_at[g] = static_cast<int>(path.size());
		path.push_back(g);
		for (NetId in : gates[g].inputs) {
			const Driver &d = drv.at(in.index);
			if (d.kind == DriverKind::Gate && pending[d.index] != 0) {
				g = d.index;
				break;
			}
		}
	}
	std::string msg = "combinational cycle through nets:";
	for (std::size_t i = static_cast<std::size_t>(seen_at[g]); i < path.size(); ++i)
		msg += " " + c.net_name(gates[path[i]].output);
	throw NetlistError(msg);
}

Netlist parse_bench(std::string_view text, std::string name)
{
	Netlist c(std::move(name));
	std::unordered_map<std::uint32_t, std::size_t> first_use;
	std::unordered_map<std::string, bool> init_annotations;
	std::vector<bool> driven;

	auto use = [&](std::string_view raw, std::size_t line) {
		std::string_view n = trim(raw);
		if (n.empty())
			throw ParseError(line, "empty net name");
		NetId id = c.net(n);
		first_use.emplace(id.index, line);
		return id;
	};
	auto drive = [&](NetId id, std::size_t line) {
		if (driven.size() <= id.index)
			driven.resize(id.index + 1, false);
		if (driven[id.index])
			throw ParseError(line, "net '" + c.net_name(id) + "' is driven more than once");
		driven[id.index] = true;
	};

	std::size_t line_no = 0;
	std::size_t pos = 0;
	while (pos <= text.size()) {
		std::size_t eol = text.find('\n', pos);
		if (eol == std::string_view::npos)
			eol = text.size();
		std::string_view line = text.substr(pos, eol - pos);
		pos = eol + 1;
		++line_no;

		if (auto hash = line.find('#'); hash != std::string_view::npos) {
			std::istringstream comment{std::string(line.substr(hash + 1))};
			std::string tag, net, value;
			if (comment >> tag >> net >> value && upper(tag) == "INIT") {
				if (value != "0" && value != "1")
					throw ParseError(line_no, "init annotation expects 0 or 1");
				init_annotations[net] = value == "1";
			}
			line = line.substr(0, hash);
		}
		line = trim(line);
		if (line.empty())
			continue;

		auto open = line.find('(');
		auto close = line.rfind(')');
		if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
		    !trim(line.substr(close + 1)).empty())
			throw ParseError(line_no, "expected KIND(args)");
		std::string_view args = line.substr(open + 1, close - open - 1);
		std::string_view head = line.substr(0, open);

		auto eq = head.find('=');
		if (eq == std::string_view::npos) {
			std::string kw = upper(trim(head));
			if (kw == "INPUT") {
				NetId id = use(args, line_no);
				drive(id, line_no);
				c.add_input(id);
			} else if (kw == "OUTPUT") {
				c.add_output(use(args, line_no));
			} else {
				throw ParseError(line_no, "unknown declaration '" + std::string(trim(head)) + "'");
			}
			continue;
		}

		NetId out = use(head.substr(0, eq), line_no);
		std::string kind_token = upper(trim(head.substr(eq + 1)));
		std::vector<NetId> ins;
		if (!trim(args).empty()) {
			std::size_t a = 0;
			while (true) {
				auto comma = args.find(',', a);
				ins.push_back(use(args.substr(a, comma == std::string_view::npos ? args.npos : comma - a), line_no));
				if (comma == std::string_view::npos)
					break;
				a = comma + 1;
			}
		}
		drive(out, line_no);

		if (kind_token == "DFF") {
			if (ins.size() != 1)
				throw ParseError(line_no, "DFF takes exactly one input");
			bool init = false;
			if (auto it = init_annotations.find(c.net_name(out)); it != init_annotations.end())
				init = it->second;
			c.add_dff(Dff{ins[0], out, init});
			continue;
		}
		auto kind = parse_gate_kind(kind_token);
		if (!kind)
			throw ParseError(line_no, "unknown gate kind '" + kind_token + "'");
		if (!arity_ok(*kind, ins.size()))
			throw ParseError(line_no, "wrong number of inputs for " + kind_token);
		c.add_gate(Gate{*kind, std::move(ins), out});
	}

	driven.resize(c.num_nets(), false);
	for (std::uint32_t i = 0; i < c.num_nets(); ++i)
		if (!driven[i])
			throw ParseError(first_use[i], "net '" + c.net_name(NetId{i}) + "' is undriven");
	try {
		c.validate();
	} catch (const NetlistError &e) {
		throw ParseError(0, e.what());
	}
	return c;
}

Netlist read_bench_file(const std::filesystem::path &path)
{
	std::ifstream in(path);
	if (!in)
		throw Error("cannot open " + path.string());
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_bench(ss.str(), path.stem().string());
}

std::string write_bench(const Netlist &c)
{
	std::ostringstream out;
	out << "# " << c.name() << "\n";
	out << "# " << c.inputs().size() << " inputs, " << c.outputs().size() << " outputs, " << c.dffs().size()
	    << " D-type flipflops, " << c.gates().size() << " gates\n\n";
	for (NetId n : c.inputs())
		out << "INPUT(" << c.net_name(n) << ")\n";
	out << "\n";
	for (NetId n : c.outputs())
		out << "OUTPUT(" << c.net_name(n) << ")\n";
	out << "\n";
	for (const Dff &f : c.dffs()) {
		if (f.init)
			out << "# init " << c.net_name(f.q) << " 1\n";
		out << c.net_name(f.q) << " = DFF(" << c.net_name(f.d) << ")\n";
	}
	out << "\n";
	for (std::size_t gi : topo_order(c)) {
		const Gate &g = c.gates()[gi];
		out << c.net_name(g.output) << " = " << to_string(g.kind) << "(";
		for (std::size_t i = 0; i < g.inputs.size(); ++i)
			out << (i ? ", " : "") << c.net_name(g.inputs[i]);
		out << ")\n";
	}
	return out.str();
}

void write_bench_file(const Netlist &c, const std::filesystem::path &path)
{
	std::ofstream out(path);
	if (!out)
		throw Error("cannot write " + path.string());
	out << write_bench(c);
}

Netlist random_circuit(std::size_t inputs, std::size_t outputs, std::size_t dffs, std::size_t gates,
		       std::uint64_t seed, std::string name)
{
	if (inputs == 0 || gates == 0 || outputs == 0)
		throw Error("random_circuit needs inputs, outputs and gates");
	std::mt19937_64 rng(seed);
	Netlist c(std::move(name));
	std::vector<NetId> sources;
	for (std::size_t i = 0; i < inputs; ++i) {
		NetId n = c.add_net("I" + std::to_string(i));
		c.add_input(n);
		sources.push_back(n);
	}
	std::vector<NetId> state;
	for (std::size_t i = 0; i < dffs; ++i) {
		state.push_back(c.add_net("S" + std::to_string(i)));
		sources.push_back(state.back());
	}

	const GateKind kinds[] = {GateKind::And, GateKind::And, GateKind::Or,  GateKind::Or,	 GateKind::Nand,
				  GateKind::Nand, GateKind::Nor, GateKind::Nor, GateKind::Not, GateKind::Xor};
	std::vector<NetId> unused = sources;
	std::vector<NetId> pool = sources;
	std::vector<NetId> gate_nets;
	auto pick = [&]() {
		if (!unused.empty() && std::uniform_int_distribution<int>(0, 1)(rng)) {
			std::size_t k = std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng);
			NetId n = unused[k];
			unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(k));
			return n;
		}
		// Bias towards recent nets to obtain some logic depth.
		std::size_t lo = pool.size() > 24 ? pool.size() - 24 : 0;
		std::size_t k = std::uniform_int_distribution<std::size_t>(lo, pool.size() - 1)(rng);
		NetId n = pool[k];
		std::erase(unused, n);
		return n;
	};
	for (std::size_t g = 0; g < gates; ++g) {
		GateKind kind = kinds[std::uniform_int_distribution<std::size_t>(0, std::size(kinds) - 1)(rng)];
		std::size_t arity = kind == GateKind::Not ? 1 : (std::uniform_int_distribution<int>(0, 4)(rng) == 0 ? 3 : 2);
		std::vector<NetId> ins;
		while (ins.size() < arity) {
			NetId n = pick();
			if (std::find(ins.begin(), ins.end(), n) == ins.end())
				ins.push_back(n);
			else if (pool.size() <= arity)
				break;
		}
		if (ins.size() < 2 && kind != GateKind::Not)
			kind = GateKind::Not, ins.resize(1);
		NetId out = c.add_net("N" + std::to_string(g));
		c.add_gate(Gate{kind, std::move(ins), out});
		pool.push_back(out);
		unused.push_back(out);
		gate_nets.push_back(out);
	}

	// Sinks consume unused gate outputs first.
	auto sink = [&]() {
		for (auto it = unused.rbegin(); it != unused.rend(); ++it) {
			if (std::find(gate_nets.begin(), gate_nets.end(), *it) != gate_nets.end()) {
				NetId n = *it;
				unused.erase(std::next(it).base());
				return n;
			}
		}
		return gate_nets[std::uniform_int_distribution<std::size_t>(0, gate_nets.size() - 1)(rng)];
	};
	for (std::size_t i = 0; i < dffs; ++i)
		c.add_dff(Dff{sink(), state[i], false});
	for (std::size_t i = 0; i < outputs; ++i)
		c.add_output(sink());
	c.validate();
	return c;
}

} // namespace funsat
