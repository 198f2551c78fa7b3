#include "funsat/cli.hpp"

#include "funsat/errors.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace funsat::cli {

using nlohmann::json;

int exit_code(Termination t)
{
	switch (t) {
	case Termination::Success: return kSuccess;
	case Termination::Timeout: return kTimeout;
	default: return kFailed;
	}
}

std::string bits_string(const Bits &b)
{
	std::string s;
	for (bool v : b)
		s.push_back(v ? '1' : '0');
	return s;
}

Bits parse_bits(std::string_view s)
{
	Bits b;
	for (char c : s) {
		if (c != '0' && c != '1')
			throw Error("bit string may only contain 0 and 1");
		b.push_back(c == '1');
	}
	return b;
}

json frames_json(const std::vector<Bits> &frames)
{
	json j = json::array();
	for (const auto &f : frames)
		j.push_back(bits_string(f));
	return j;
}

std::vector<Bits> frames_from_json(const json &j)
{
	std::vector<Bits> out;
	for (const auto &f : j)
		out.push_back(parse_bits(f.get<std::string>()));
	return out;
}

json fc_trace_json(const FcTrace &t)
{
	json j = json::array();
	for (const auto &[b, e] : t)
		j.push_back({{"b", b}, {"fc", e.fc}, {"exact", e.exact}, {"samples", e.samples}, {"corrupted", e.corrupted}});
	return j;
}

json config_json(const FunSatConfig &cfg)
{
	json j{{"t_win", cfg.t_win},
	       {"delta", cfg.delta},
	       {"Delta", cfg.Delta},
	       {"samples", cfg.samples},
	       {"seed", cfg.seed},
	       {"threads", cfg.threads},
	       {"depth_cap", cfg.depth_cap},
	       {"update_rule", to_string(cfg.update_rule)},
	       {"max_k", cfg.max_k},
	       {"budget_ms", nullptr},
	       {"conflict_budget", nullptr}};
	if (cfg.budget)
		j["budget_ms"] = cfg.budget->count();
	if (cfg.conflict_budget)
		j["conflict_budget"] = *cfg.conflict_budget;
	return j;
}

namespace {

json cex_json(const Counterexample &c, const Netlist *ce)
{
	json j{{"key_a", frames_json(c.key_a)},
	       {"key_b", frames_json(c.key_b)},
	       {"inputs", frames_json(c.inputs)},
	       {"cycle", c.cycle}};
	if (!ce)
		return j;
	// Per-cycle states and outputs of both copies, from the first data cycle.
	auto copy = [&](const KeySequence &key) {
		Simulator sim(*ce);
		State s = sim.reset_state();
		sim.run(s, key);
		json states = json::array(), outs = json::array();
		for (const auto &in : c.inputs) {
			states.push_back(bits_string(s));
			auto r = sim.step(s, in);
			outs.push_back(bits_string(r.outputs));
			s = r.next;
		}
		return json{{"states", states}, {"outputs", outs}};
	};
	j["trace_a"] = copy(c.key_a);
	j["trace_b"] = copy(c.key_b);
	return j;
}

json verify_json_impl(const VerifyReport &v, const Netlist *ce)
{
	json j{{"verdict", to_string(v.verdict)},
	       {"uk", v.uk},
	       {"bmc", v.bmc},
	       {"induction", v.induction},
	       {"induction_k", v.induction_k},
	       {"conflicts", v.conflicts}};
	if (v.cex)
		j["counterexample"] = cex_json(*v.cex, ce);
	return j;
}

json report_json_impl(const AttackReport &r, bool timing, const Netlist *ce)
{
	json phases = json::array();
	for (const auto &p : r.phases) {
		json jp{{"b_star", p.b_star},
			{"fc_window", nullptr},
			{"early_break", p.early_break},
			{"fc", fc_trace_json(p.fc)},
			{"dips", p.dips},
			{"conflicts", p.sat_conflicts + p.verify.conflicts},
			{"sat_conflicts", p.sat_conflicts},
			{"verify", verify_json_impl(p.verify, ce)}};
		if (p.fc_window)
			jp["fc_window"] = {p.fc_window->first, p.fc_window->second};
		if (timing)
			jp["seconds"] = p.seconds;
		phases.push_back(std::move(jp));
	}
	json result{{"status", to_string(r.termination)}};
	if (r.key)
		result["key"] = frames_json(*r.key);
	if (!r.message.empty())
		result["message"] = r.message;
	json j{{"mode", r.mode},
	       {"t_k", r.t_k},
	       {"config", config_json(r.config)},
	       {"scheme", nullptr},
	       {"phases", phases},
	       {"fc_cache", fc_trace_json(r.fc_cache)},
	       {"fc_zero_window", r.fc_zero_window},
	       {"result", result},
	       {"oracle_queries", r.oracle_queries},
	       {"conflicts", r.conflicts}};
	if (timing)
		j["seconds"] = r.seconds;
	return j;
}

} // namespace

json verify_json(const VerifyReport &v) { return verify_json_impl(v, nullptr); }

json report_json(const AttackReport &r, bool timing) { return report_json_impl(r, timing, nullptr); }

json sidecar_json(const EncryptionArtifact &a)
{
	json j{{"key_material", true},
	       {"scheme", to_string(a.scheme)},
	       {"params",
		{{"t_k", a.t_k}, {"r_mkf", a.r_mkf}, {"d_max", a.d_max}, {"seed", a.seed}}},
	       {"inputs", a.encrypted.inputs().size()},
	       {"correct_key", frames_json(a.correct_key)},
	       {"mkf_count", a.mkf_count},
	       {"trap_info", nullptr}};
	if (a.trap) {
		json wrong = json::array();
		for (const auto &k : a.trap->wrong_keys)
			wrong.push_back(frames_json(k));
		j["trap_info"] = {{"distance", a.trap->distance},
				  {"witness_depth", a.trap->witness_depth},
				  {"witness", frames_json(a.trap->witness)},
				  {"wrong_keys", wrong},
				  {"s_pre", bits_string(a.trap->s_pre)}};
	}
	return j;
}

std::size_t default_traps(std::size_t width, std::size_t t_k)
{
	const std::size_t bits = width * t_k;
	if (bits >= 20)
		return std::size_t{1} << 15;
	return std::max<std::size_t>(1, (std::size_t{1} << bits) / 32);
}

std::chrono::milliseconds parse_duration(std::string_view s)
{
	std::string str(s);
	double scale = 1000.0;
	auto strip = [&](std::string_view suffix, double sc) {
		if (str.size() > suffix.size() && str.ends_with(suffix)) {
			str.resize(str.size() - suffix.size());
			scale = sc;
			return true;
		}
		return false;
	};
	strip("ms", 1.0) || strip("s", 1000.0) || strip("m", 60000.0) || strip("h", 3600000.0);
	std::size_t used = 0;
	double v = 0;
	try {
		v = std::stod(str, &used);
	} catch (const std::exception &) {
		used = 0;
	}
	if (used != str.size() || !(v >= 0))
		throw Error("invalid duration '" + std::string(s) + "'");
	return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(v * scale)));
}

std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t index)
{
	std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
			  static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
	std::mt19937_64 rng(seq);
	return rng();
}

namespace {

struct Instance
{
	std::string circuit;
	Scheme scheme;
	std::size_t t_k;
	double param;
};

std::string stem(const std::string &path) { return std::filesystem::path(path).stem().string(); }

AttackReport run_mode(const std::string &mode, const Netlist &ce, const Oracle &oracle, std::size_t t_k,
		      FunSatConfig cfg)
{
	if (mode == "funsat")
		return fun_sat(ce, oracle, t_k, cfg);
	if (mode == "reference")
		return reference_attack(ce, oracle, t_k, cfg);
	if (mode == "reference-double") {
		cfg.update_rule = UpdateRule::Double;
		return reference_attack(ce, oracle, t_k, cfg);
	}
	throw Error("unknown attack mode '" + mode + "'");
}

} // namespace

std::vector<BenchRow> run_bench(const BenchConfig &cfg)
{
	std::vector<Instance> grid;
	for (const auto &c : cfg.circuits)
		for (Scheme s : cfg.schemes)
			for (std::size_t t_k : cfg.t_k)
				if (s == Scheme::Harpoon)
					for (double r : cfg.r_mkf)
						grid.push_back({c, s, t_k, r});
				else
					for (std::size_t d : cfg.d_max)
						grid.push_back({c, s, t_k, static_cast<double>(d)});

	std::map<std::string, Netlist> circuits;
	for (const auto &c : cfg.circuits)
		circuits.emplace(c, read_bench_file(c));

	std::vector<BenchRow> rows(grid.size());
	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failure_mu;
	auto worker = [&] {
		for (std::size_t i; (i = next++) < grid.size();) {
			try {
				const Instance &in = grid[i];
				const Netlist &co = circuits.at(in.circuit);
				BenchRow &row = rows[i];
				row.circuit = stem(in.circuit);
				row.scheme = in.scheme;
				row.t_k = in.t_k;
				row.param = in.param;
				row.seed = instance_seed(cfg.seed, i);
				EncryptionArtifact a;
				if (in.scheme == Scheme::Harpoon) {
					a = harpoon_encrypt(co, in.t_k, in.param, row.seed);
				} else {
					InterlockingOptions o;
					o.traps = default_traps(co.inputs().size(), in.t_k);
					a = interlocking_encrypt(co, in.t_k, static_cast<std::size_t>(in.param), row.seed, o);
					row.witness_depth = a.trap->witness_depth;
				}
				NetlistOracle oracle(co);
				for (const auto &mode : cfg.modes) {
					FunSatConfig ac = cfg.attack;
					ac.seed = row.seed;
					BenchRun run{mode, run_mode(mode, a.encrypted, oracle, in.t_k, ac), false};
					if (run.report.key) {
						const std::size_t depth = run.report.phases.back().b_star + 4;
						run.equivalent = !bmc_equivalence(a.encrypted, co, in.t_k, *run.report.key, depth);
					}
					row.runs.push_back(std::move(run));
				}
			} catch (...) {
				std::lock_guard lock(failure_mu);
				if (!failure)
					failure = std::current_exception();
			}
		}
	};
	const unsigned jobs = std::max(1u, cfg.jobs);
	std::vector<std::thread> pool;
	for (unsigned j = 1; j < jobs; ++j)
		pool.emplace_back(worker);
	worker();
	for (auto &t : pool)
		t.join();
	if (failure)
		std::rethrow_exception(failure);
	return rows;
}

namespace {

std::string depth_list(const AttackReport &r)
{
	std::string s;
	for (const auto &p : r.phases)
		s += (s.empty() ? "" : ";") + std::to_string(p.b_star);
	return s;
}

std::string param_string(const BenchRow &r)
{
	std::ostringstream os;
	os << r.param;
	return os.str();
}

} // namespace

std::string bench_csv(const std::vector<BenchRow> &rows, bool timing)
{
	std::ostringstream os;
	os << "circuit,scheme,t_k,param,seed,witness_depth";
	if (!rows.empty())
		for (const auto &run : rows.front().runs) {
			const auto &m = run.mode;
			os << ',' << m << "_status," << m << "_depths," << m << "_phases," << m << "_dips," << m
			   << "_conflicts," << m << "_queries," << m << "_equivalent";
			if (timing)
				os << ',' << m << "_seconds";
		}
	os << '\n';
	for (const auto &r : rows) {
		os << r.circuit << ',' << to_string(r.scheme) << ',' << r.t_k << ',' << param_string(r) << ',' << r.seed
		   << ',' << r.witness_depth;
		for (const auto &run : r.runs) {
			std::size_t dips = 0;
			for (const auto &p : run.report.phases)
				dips += p.dips;
			os << ',' << to_string(run.report.termination) << ',' << depth_list(run.report) << ','
			   << run.report.phases.size() << ',' << dips << ',' << run.report.conflicts << ','
			   << run.report.oracle_queries << ',' << (run.equivalent ? 1 : 0);
			if (timing)
				os << ',' << run.report.seconds;
		}
		os << '\n';
	}
	return os.str();
}

json bench_json(const std::vector<BenchRow> &rows, bool timing)
{
	json out = json::array();
	for (const auto &r : rows) {
		json runs = json::object();
		for (const auto &run : r.runs) {
			json rep = report_json(run.report, timing);
			rep["scheme"] = to_string(r.scheme);
			rep["equivalent"] = run.equivalent;
			runs[run.mode] = std::move(rep);
		}
		out.push_back({{"circuit", r.circuit},
			       {"scheme", to_string(r.scheme)},
			       {"t_k", r.t_k},
			       {"param", r.param},
			       {"seed", r.seed},
			       {"witness_depth", r.witness_depth},
			       {"runs", runs}});
	}
	return out;
}

namespace {

void write_text(const std::string &path, const std::string &text)
{
	if (path.empty() || path == "-") {
		std::cout << text;
		return;
	}
	std::ofstream f(path, std::ios::binary);
	if (!f)
		throw Error("cannot write " + path);
	f << text;
	if (!f)
		throw Error("write failed: " + path);
}

struct AttackArgs
{
	std::string encrypted, oracle, mode = "funsat", update = "increment", budget, solver, report, scheme;
	std::size_t t_k = 1;
	bool no_timing = false;
};

void add_attack_options(CLI::App &cmd, FunSatConfig &cfg, std::string &budget)
{
	cmd.add_option("--twin", cfg.t_win, "FC analysis window")->check(CLI::PositiveNumber);
	cmd.add_option("--delta", cfg.delta, "FC difference threshold")->check(CLI::NonNegativeNumber);
	cmd.add_option("--Delta", cfg.Delta, "FC hold threshold")->check(CLI::PositiveNumber);
	cmd.add_option("--samples", cfg.samples, "FC sample size S")->check(CLI::PositiveNumber);
	cmd.add_option("--threads", cfg.threads, "FC sampling threads")->check(CLI::PositiveNumber);
	cmd.add_option("--depth-cap", cfg.depth_cap, "largest unrolling depth tried")->check(CLI::PositiveNumber);
	cmd.add_option("--max-k", cfg.max_k, "k-induction depth cap")->check(CLI::PositiveNumber);
	cmd.add_option("--budget", budget, "wall-clock budget, e.g. 30s or 500ms");
	cmd.add_option("--conflicts", cfg.conflict_budget, "conflict cap per solver call");
}

void apply_budget(FunSatConfig &cfg, const std::string &budget)
{
	if (!budget.empty())
		cfg.budget = parse_duration(budget);
}

int cmd_encrypt(const std::string &input, std::string out, Scheme scheme, std::size_t t_k, double r_mkf,
		std::size_t d_max, std::uint64_t seed, std::size_t traps, std::optional<std::size_t> distance)
{
	Netlist c = read_bench_file(input);
	EncryptionArtifact a;
	if (scheme == Scheme::Harpoon) {
		a = harpoon_encrypt(c, t_k, r_mkf, seed);
	} else {
		InterlockingOptions o;
		o.traps = traps;
		o.distance = distance;
		o.r_mkf = r_mkf;
		a = interlocking_encrypt(c, t_k, d_max, seed, o);
	}
	if (out.empty())
		out = stem(input) + "_" + std::string(to_string(scheme)) + ".bench";
	std::filesystem::path side(out);
	side.replace_extension(".key.json");
	write_bench_file(a.encrypted, out);
	write_text(side.string(), sidecar_json(a).dump(2) + "\n");
	std::cerr << "wrote " << out << " and " << side.string() << "\n";
	return kSuccess;
}

int cmd_attack(const AttackArgs &args, FunSatConfig cfg)
{
	auto mode = args.mode;
	if (mode != "funsat" && mode != "reference")
		throw Error("unknown mode '" + mode + "'");
	cfg.update_rule = *parse_update_rule(args.update);
	if (!args.solver.empty()) {
		std::string cmdline = args.solver;
		cfg.solver = [cmdline] { return std::make_unique<ExternalSolver>(cmdline); };
	}
	Netlist ce = read_bench_file(args.encrypted);
	NetlistOracle oracle(read_bench_file(args.oracle));
	auto rep = mode == "funsat" ? fun_sat(ce, oracle, args.t_k, cfg) : reference_attack(ce, oracle, args.t_k, cfg);
	json j = report_json_impl(rep, !args.no_timing, &ce);
	if (!args.scheme.empty())
		j["scheme"] = args.scheme;
	j["config"]["run"] = {{"encrypted", args.encrypted}, {"oracle", args.oracle}, {"mode", mode},
			      {"solver", args.solver.empty() ? json(nullptr) : json(args.solver)}};
	write_text(args.report, j.dump(2) + "\n");
	std::cerr << to_string(rep.termination) << " after " << rep.phases.size() << " phase(s)";
	if (rep.key)
		std::cerr << ", key " << frames_json(*rep.key).dump();
	std::cerr << "\n";
	return exit_code(rep.termination);
}

int cmd_fc_scan(const std::string &encrypted, const std::string &oracle_path, std::size_t t_k, std::size_t from,
		std::size_t to, const FunSatConfig &cfg, bool exact, const std::string &csv, const std::string &json_path)
{
	if (from < 1 || to < from)
		throw Error("invalid depth range");
	Netlist ce = read_bench_file(encrypted);
	Netlist co = read_bench_file(oracle_path);
	NetlistOracle oracle(co);
	FcTrace trace;
	// Exact enumeration only if every depth of the range fits in the sample size.
	const std::size_t top_bits = (t_k + to) * ce.inputs().size();
	const bool auto_exact = top_bits < 63 && (std::uint64_t{1} << top_bits) <= cfg.samples;
	for (std::size_t b = from; b <= to; ++b) {
		if (exact) {
			const std::size_t bits = (t_k + b) * ce.inputs().size();
			FcEntry e;
			e.fc = exact_fc(ce, co, t_k, b);
			e.exact = true;
			e.samples = std::uint64_t{1} << bits;
			e.corrupted = static_cast<std::uint64_t>(std::llround(e.fc * static_cast<double>(e.samples)));
			trace[b] = e;
		} else {
			FcOptions o;
			o.samples = cfg.samples;
			o.seed = cfg.seed;
			o.threads = cfg.threads;
			o.allow_exact = auto_exact;
			trace[b] = estimate_fc(ce, oracle, t_k, b, o);
		}
	}
	std::ostringstream os;
	os << "b,fc,exact,samples\n";
	for (const auto &[b, e] : trace)
		os << b << ',' << e.fc << ',' << (e.exact ? 1 : 0) << ',' << e.samples << '\n';
	if (!json_path.empty())
		write_text(json_path, fc_trace_json(trace).dump(2) + "\n");
	if (!csv.empty() || json_path.empty())
		write_text(csv, os.str());
	return kSuccess;
}

} // namespace

int run(int argc, const char *const *argv)
{
	CLI::App app{"Functional-corruptibility guided SAT attack workbench"};
	app.require_subcommand(1);

	// encrypt
	std::string enc_in, enc_out, enc_scheme = "harpoon";
	std::size_t enc_tk = 1, enc_dmax = 4, enc_traps = 1;
	double enc_rmkf = 0.1;
	std::uint64_t enc_seed = 1;
	std::optional<std::size_t> enc_distance;
	auto *enc = app.add_subcommand("encrypt", "encrypt a .bench netlist and write a key sidecar");
	enc->add_option("input", enc_in, "original .bench")->required()->check(CLI::ExistingFile);
	enc->add_option("-o,--output", enc_out, "encrypted .bench (sidecar gets .key.json)");
	enc->add_option("--scheme", enc_scheme, "harpoon | interlocking")
		->check(CLI::IsMember({"harpoon", "interlocking"}));
	enc->add_option("--tk", enc_tk, "key sequence length")->check(CLI::PositiveNumber);
	enc->add_option("--rmkf", enc_rmkf, "MKF to gate ratio")->check(CLI::Range(0.0, 1.0));
	enc->add_option("--dmax", enc_dmax, "largest trap distance (interlocking)")->check(CLI::PositiveNumber);
	enc->add_option("--traps", enc_traps, "trap keys (interlocking)")->check(CLI::PositiveNumber);
	enc->add_option("--distance", enc_distance, "fixed trap distance (interlocking)")->check(CLI::PositiveNumber);
	enc->add_option("--seed", enc_seed, "generator seed");

	// attack
	AttackArgs aa;
	FunSatConfig acfg;
	std::string abudget;
	auto *att = app.add_subcommand("attack", "recover the key of an encrypted netlist");
	att->add_option("encrypted", aa.encrypted, "encrypted .bench")->required()->check(CLI::ExistingFile);
	att->add_option("--oracle", aa.oracle, "unlocked .bench used as black-box oracle")
		->required()
		->check(CLI::ExistingFile);
	att->add_option("--tk", aa.t_k, "key sequence length")->required()->check(CLI::NonNegativeNumber);
	att->add_option("--mode", aa.mode, "funsat | reference")->check(CLI::IsMember({"funsat", "reference"}));
	att->add_option("--update", aa.update, "reference depth update: increment | double")
		->check(CLI::IsMember({"increment", "double"}));
	att->add_option("--seed", acfg.seed, "FC sampling seed");
	att->add_option("--solver", aa.solver, "external DIMACS solver command for the SAT attack");
	att->add_option("--report", aa.report, "report path (default stdout)");
	att->add_option("--scheme", aa.scheme, "label echoed into the report");
	att->add_flag("--no-timing", aa.no_timing, "omit wall-clock fields");
	add_attack_options(*att, acfg, abudget);

	// fc-scan
	std::string fc_enc, fc_oracle, fc_csv, fc_json;
	std::size_t fc_tk = 1, fc_from = 1, fc_to = 10;
	bool fc_exact = false;
	FunSatConfig fcfg;
	auto *fcs = app.add_subcommand("fc-scan", "FC as a function of the unrolling depth");
	fcs->add_option("encrypted", fc_enc, "encrypted .bench")->required()->check(CLI::ExistingFile);
	fcs->add_option("--oracle", fc_oracle, "unlocked .bench")->required()->check(CLI::ExistingFile);
	fcs->add_option("--tk", fc_tk, "key sequence length")->required();
	fcs->add_option("--from", fc_from, "first depth")->check(CLI::PositiveNumber);
	fcs->add_option("--to", fc_to, "last depth")->check(CLI::PositiveNumber);
	fcs->add_option("--samples", fcfg.samples, "sample size")->check(CLI::PositiveNumber);
	fcs->add_option("--seed", fcfg.seed, "sampling seed");
	fcs->add_option("--threads", fcfg.threads, "sampling threads")->check(CLI::PositiveNumber);
	fcs->add_flag("--exact", fc_exact, "enumerate every (input, key) pair");
	fcs->add_option("--csv", fc_csv, "CSV path (default stdout)");
	fcs->add_option("--json", fc_json, "JSON path");

	// bench
	BenchConfig bcfg;
	std::vector<std::string> b_schemes{"harpoon", "interlocking"};
	std::string b_csv, b_json, b_budget;
	bool b_no_timing = false;
	auto *ben = app.add_subcommand("bench", "attack a grid of encrypted instances with every mode");
	ben->add_option("--circuits", bcfg.circuits, "original .bench files")->required()->check(CLI::ExistingFile);
	ben->add_option("--schemes", b_schemes, "schemes")->check(CLI::IsMember({"harpoon", "interlocking"}));
	ben->add_option("--tk", bcfg.t_k, "key sequence lengths");
	ben->add_option("--rmkf", bcfg.r_mkf, "HARPOON MKF ratios")->check(CLI::Range(0.0, 1.0));
	ben->add_option("--dmax", bcfg.d_max, "Interlocking D_max values");
	ben->add_option("--modes", bcfg.modes, "attack modes")
		->check(CLI::IsMember({"funsat", "reference", "reference-double"}));
	ben->add_option("--seed", bcfg.seed, "top-level seed");
	ben->add_option("--jobs", bcfg.jobs, "instances attacked concurrently")->check(CLI::PositiveNumber);
	ben->add_option("--csv", b_csv, "campaign CSV (default stdout)");
	ben->add_option("--json", b_json, "campaign JSON");
	ben->add_flag("--no-timing", b_no_timing, "omit wall-clock columns");
	add_attack_options(*ben, bcfg.attack, b_budget);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int code = app.exit(e);
		return code == 0 ? kSuccess : kError;
	}

	try {
		if (*enc)
			return cmd_encrypt(enc_in, enc_out, *parse_scheme(enc_scheme), enc_tk, enc_rmkf, enc_dmax, enc_seed,
					   enc_traps, enc_distance);
		if (*att) {
			apply_budget(acfg, abudget);
			acfg.validate();
			return cmd_attack(aa, acfg);
		}
		if (*fcs)
			return cmd_fc_scan(fc_enc, fc_oracle, fc_tk, fc_from, fc_to, fcfg, fc_exact, fc_csv, fc_json);
		if (*ben) {
			apply_budget(bcfg.attack, b_budget);
			bcfg.attack.validate();
			bcfg.schemes.clear();
			for (const auto &s : b_schemes)
				bcfg.schemes.push_back(*parse_scheme(s));
			auto rows = run_bench(bcfg);
			if (!b_json.empty())
				write_text(b_json, bench_json(rows, !b_no_timing).dump(2) + "\n");
			write_text(b_csv, bench_csv(rows, !b_no_timing));
			return kSuccess;
		}
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << "\n";
		return kError;
	}
	return kError;
}

} // namespace funsat::cli
