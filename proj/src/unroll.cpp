#include "funsat/unroll.hpp"

#include "funsat/errors.hpp"

namespace funsat {

UnrolledCircuit unroll(const Netlist &c, std::size_t t_k, std::size_t b)
{
	if (b == 0)
		throw Error("unroll needs b >= 1");
	UnrolledCircuit u;
	u.t_k = t_k;
	u.b = b;
	u.width = c.inputs().size();
	u.out_width = c.outputs().size();
	u.comb.set_name(c.name() + "_unrolled_" + std::to_string(t_k) + "_" + std::to_string(b));
	Netlist &m = u.comb;

	const auto order = topo_order(c);
	std::optional<NetId> const0, const1;
	auto constant = [&](bool value) {
		auto &slot = value ? const1 : const0;
		if (!slot) {
			slot = m.add_net(value ? "const1" : "const0");
			m.add_gate(Gate{value ? GateKind::Const1 : GateKind::Const0, {}, *slot});
		}
		return *slot;
	};

	std::vector<NetId> state;
	for (const Dff &f : c.dffs())
		state.push_back(constant(f.init));
	u.state_taps.push_back(state);

	std::vector<NetId> map(c.num_nets());
	for (std::size_t f = 0; f < t_k + b; ++f) {
		const std::string suffix = "@" + std::to_string(f);
		for (std::size_t j = 0; j < c.inputs().size(); ++j) {
			NetId n = m.add_net(c.net_name(c.inputs()[j]) + suffix);
			m.add_input(n);
			(f < t_k ? u.key_ports : u.data_ports).push_back(n);
			map[c.inputs()[j].index] = n;
		}
		for (std::size_t i = 0; i < c.dffs().size(); ++i)
			map[c.dffs()[i].q.index] = state[i];
		for (std::size_t gi : order) {
			const Gate &g = c.gates()[gi];
			Gate copy{g.kind, {}, m.add_net(c.net_name(g.output) + suffix)};
			for (NetId in : g.inputs)
				copy.inputs.push_back(map[in.index]);
			map[g.output.index] = copy.output;
			m.add_gate(std::move(copy));
		}
		if (f >= t_k) {
			for (NetId o : c.outputs()) {
				m.add_output(map[o.index]);
				u.obs_outputs.push_back(map[o.index]);
			}
		}
		for (std::size_t i = 0; i < c.dffs().size(); ++i)
			state[i] = map[c.dffs()[i].d.index];
		u.state_taps.push_back(state);
	}
	return u;
}

Netlist frame_netlist(const Netlist &c)
{
	Netlist m(c.name() + "_frame");
	for (std::size_t n = 0; n < c.num_nets(); ++n)
		m.add_net(c.net_name(NetId{static_cast<std::uint32_t>(n)}));
	for (NetId i : c.inputs())
		m.add_input(i);
	for (const Dff &f : c.dffs())
		m.add_input(f.q);
	for (NetId o : c.outputs())
		m.add_output(o);
	for (const Dff &f : c.dffs())
		m.add_output(f.d);
	for (const Gate &g : c.gates())
		m.add_gate(g);
	return m;
}

Bits flatten(std::span<const Bits> frames)
{
	Bits flat;
	for (const auto &f : frames)
		flat.insert(flat.end(), f.begin(), f.end());
	return flat;
}

Sequence split_frames(const Bits &flat, std::size_t width)
{
	Sequence seq;
	if (width == 0)
		return seq;
	for (std::size_t i = 0; i + width <= flat.size(); i += width)
		seq.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i),
				 flat.begin() + static_cast<std::ptrdiff_t>(i + width));
	return seq;
}

namespace {

std::vector<std::uint8_t> comb_values(const UnrolledCircuit &u, const KeySequence &key, const Sequence &data)
{
	if (key.size() != u.t_k || data.size() != u.b)
		throw DimensionMismatch("unrolled circuit expects " + std::to_string(u.t_k) + " key frames and " +
					std::to_string(u.b) + " data frames");
	Bits in = flatten(key);
	Bits d = flatten(data);
	in.insert(in.end(), d.begin(), d.end());
	if (in.size() != u.comb.inputs().size())
		throw DimensionMismatch("frame width does not match the unrolled circuit");
	return Simulator(u.comb).values({}, in);
}

} // namespace

std::vector<OutputVector> evaluate(const UnrolledCircuit &u, const KeySequence &key, const Sequence &data)
{
	auto v = comb_values(u, key, data);
	std::vector<OutputVector> out(u.b, OutputVector(u.out_width));
	for (std::size_t f = 0; f < u.b; ++f)
		for (std::size_t o = 0; o < u.out_width; ++o)
			out[f][o] = v[u.obs_outputs[f * u.out_width + o].index];
	return out;
}

State state_after_key(const UnrolledCircuit &u, const KeySequence &k)
{
	Sequence zeros(u.b, Bits(u.width, false));
	auto v = comb_values(u, k, zeros);
	const auto &tap = u.state_taps.at(u.t_k);
	State s(tap.size());
	for (std::size_t i = 0; i < tap.size(); ++i)
		s[i] = v[tap[i].index];
	return s;
}

} // namespace funsat
