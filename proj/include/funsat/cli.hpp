#pragma once

#include "funsat/attack.hpp"
#include "funsat/encrypt.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace funsat::cli {

enum ExitCode : int { kSuccess = 0, kError = 1, kFailed = 2, kTimeout = 3 };

/// 0 on success, 3 on timeout, 2 for every other unsuccessful termination.
int exit_code(Termination t);

/// Bit j of the string is input j.
std::string bits_string(const Bits &b);
Bits parse_bits(std::string_view s);
nlohmann::json frames_json(const std::vector<Bits> &frames);
std::vector<Bits> frames_from_json(const nlohmann::json &j);

nlohmann::json fc_trace_json(const FcTrace &t);
nlohmann::json config_json(const FunSatConfig &cfg);
nlohmann::json verify_json(const VerifyReport &v);
/// Attack report; wall-clock fields are omitted when `timing` is false.
nlohmann::json report_json(const AttackReport &r, bool timing = true);
/// Key sidecar of an encryption run. Holds the secret key and trap data.
nlohmann::json sidecar_json(const EncryptionArtifact &a);

/// Trap count used when none is given: one per 32 keys, at least one.
std::size_t default_traps(std::size_t width, std::size_t t_k);

/// "1.5s", "200ms", "2m" or a plain number of seconds.
std::chrono::milliseconds parse_duration(std::string_view s);

struct BenchConfig
{
	std::vector<std::string> circuits;
	std::vector<Scheme> schemes{Scheme::Harpoon, Scheme::Interlocking};
	std::vector<std::size_t> t_k{1, 2};
	std::vector<double> r_mkf{0.1, 0.2};
	std::vector<std::size_t> d_max{2, 4};
	std::vector<std::string> modes{"funsat", "reference"};
	std::uint64_t seed = 1;
	unsigned jobs = 1;
	FunSatConfig attack;
};

struct BenchRun
{
	std::string mode;
	AttackReport report;
	bool equivalent = false; ///< key checked by bounded equivalence against the original
};

struct BenchRow
{
	std::string circuit;
	Scheme scheme = Scheme::Harpoon;
	std::size_t t_k = 0;
	double param = 0.0; ///< r_mkf for HARPOON, d_max for Interlocking
	std::uint64_t seed = 0;
	std::size_t witness_depth = 0; ///< Interlocking only
	std::vector<BenchRun> runs;
};

/// Seed of grid instance `index`: first output of mt19937_64 seeded with seed_seq{seed, index}.
std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t index);

std::vector<BenchRow> run_bench(const BenchConfig &cfg);
std::string bench_csv(const std::vector<BenchRow> &rows, bool timing);
nlohmann::json bench_json(const std::vector<BenchRow> &rows, bool timing);

/// Entry point of the `funsat` tool.
int run(int argc, const char *const *argv);

} // namespace funsat::cli
