#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace funsat {

/// Dense index of a net inside one netlist.
struct NetId
{
	std::uint32_t index = 0;

	auto operator<=>(const NetId &) const = default;
};

/// Gate kinds. Const0/Const1 are zero-input constant drivers used by the
/// unroller and the encryptors; everything else mirrors the ISCAS `.bench`
/// vocabulary.
enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Const0, Const1 };

std::string_view to_string(GateKind kind);
std::optional<GateKind> parse_gate_kind(std::string_view token);

/// Evaluates a gate over any bitwise-capable value type (bool or 64-lane words).
template <typename Word> Word eval_gate(GateKind kind, std::span<const Word> in, Word ones)
{
	Word acc{};
	switch (kind) {
	case GateKind::And:
	case GateKind::Nand:
		acc = ones;
		for (Word v : in)
			acc = acc & v;
		return kind == GateKind::And ? acc : Word(acc ^ ones);
	case GateKind::Or:
	case GateKind::Nor:
		for (Word v : in)
			acc = acc | v;
		return kind == GateKind::Or ? acc : Word(acc ^ ones);
	case GateKind::Xor:
	case GateKind::Xnor:
		for (Word v : in)
			acc = acc ^ v;
		return kind == GateKind::Xor ? acc : Word(acc ^ ones);
	case GateKind::Not:
		return Word(in[0] ^ ones);
	case GateKind::Buf:
		return in[0];
	case GateKind::Const0:
		return Word{};
	case GateKind::Const1:
		return ones;
	}
	return acc;
}

struct Gate
{
	GateKind kind = GateKind::Buf;
	std::vector<NetId> inputs;
	NetId output;
};

struct Dff
{
	NetId d;    ///< next-state input
	NetId q;    ///< state output
	bool init = false;
};

/// Gate-level sequential circuit. Built through the mutators, then treated as
/// immutable; `validate()` checks the structural invariants.
class Netlist
{
      public:
	Netlist() = default;
	explicit Netlist(std::string name) : name_(std::move(name)) {}

	const std::string &name() const { return name_; }
	void set_name(std::string name) { name_ = std::move(name); }

	/// Creates a net. An empty or already-used name is replaced by a fresh one.
	NetId add_net(std::string_view name = {});
	/// Returns the net with this name, creating it if needed.
	NetId net(std::string_view name);
	std::optional<NetId> find_net(std::string_view name) const;
	/// A name derived from `base` that no net uses yet.
	std::string fresh_name(std::string_view base) const;

	void add_input(NetId n) { inputs_.push_back(n); }
	void add_output(NetId n) { outputs_.push_back(n); }
	std::size_t add_gate(Gate g);
	std::size_t add_dff(Dff f);

	/// Moves the driver of `from` onto a new net and returns it; fan-out stays on `from`.
	/// Used to splice logic in front of an existing net.
	NetId detach_driver(NetId from, std::string_view new_name);

	std::size_t num_nets() const { return names_.size(); }
	const std::vector<NetId> &inputs() const { return inputs_; }
	const std::vector<NetId> &outputs() const { return outputs_; }
	const std::vector<Gate> &gates() const { return gates_; }
	const std::vector<Dff> &dffs() const { return dffs_; }
	std::vector<Dff> &mutable_dffs() { return dffs_; }
	const std::string &net_name(NetId n) const { return names_.at(n.index); }

	/// Throws NetlistError when an invariant is violated: single driver per
	/// net, driven outputs, gate arities, non-empty input set, acyclic
	/// combinational logic.
	void validate() const;

      private:
	std::string name_;
	std::vector<std::string> names_;
	std::unordered_map<std::string, std::uint32_t> by_name_;
	std::vector<NetId> inputs_;
	std::vector<NetId> outputs_;
	std::vector<Gate> gates_;
	std::vector<Dff> dffs_;
};

enum class DriverKind : std::uint8_t { None, Input, Gate, Dff };

struct Driver
{
	DriverKind kind = DriverKind::None;
	std::size_t index = 0; ///< position in inputs(), gates() or dffs()
};

/// Driver of every net; throws NetlistError on a multiply-driven net.
std::vector<Driver> net_drivers(const Netlist &c);

/// Gate indices in evaluation order (flip-flops cut). Ties are broken by
/// output net index so the schedule is reproducible. Throws NetlistError
/// naming the nets of one cycle if the combinational logic is cyclic.
std::vector<std::size_t> topo_order(const Netlist &c);

Netlist parse_bench(std::string_view text, std::string name = {});
Netlist read_bench_file(const std::filesystem::path &path);
std::string write_bench(const Netlist &c);
void write_bench_file(const Netlist &c, const std::filesystem::path &path);

/// Seeded random sequential circuit with the given interface profile. Every
/// gate is used; used to create stand-in benchmarks and property-test inputs.
Netlist random_circuit(std::size_t inputs, std::size_t outputs, std::size_t dffs, std::size_t gates,
		       std::uint64_t seed, std::string name = "random");

} // namespace funsat
