#pragma once

#include "erosion/conformal_domain.hpp"
#include "erosion/erosion.hpp"
#include "erosion/lattice.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace erosion {

struct RunConfig {
    std::string experiment;
    DomainSpec domain;
    int m = 6;
    // Non-dyadic compatibility mesh; 0 means n = 2^m.
    int n = 0;
    double alpha = 0.5;
    double delta = 0.2;
    SourceMode sources = SourceMode::Blob;
    std::int64_t steps = 0;
    // Trajectory rows every this many steps (0: only the endpoints).
    std::int64_t snapshot_interval = 0;
    std::vector<std::uint64_t> seeds{1};
    std::string out = "out";
    InitialKind initial = InitialKind::UniformExact;
    double bernoulli_p = 1.0 / 3.0;
    double eps = 0.05;
    double eps1 = 0.05;
    double eps2 = 0.05;
    // IDLA
    double idla_eps = 0.02;
    double eps_prime = 0.0;  // 0 means idla_eps / D
    double C = 8.0;
    double D = 10.0;
    std::int64_t replicas = 10000;
    int circulations = 100;
};

inline const std::vector<std::string> kSubcommands = {
    "discretize", "simulate", "idla", "green", "predict", "drift", "flows-check", "report"};

// Throws ConfigError naming the offending key. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);
// Validates ranges, the subcommand and the domain/mesh combination.
void validate(const RunConfig& cfg);

// git-style object hash: SHA-1 of "blob <len>\0" + canonical JSON.
std::string config_hash(const RunConfig& cfg);

LatticeDomain build_lattice(const RunConfig& cfg);

// EROSION_LAB_THREADS if set, else the hardware concurrency.
int worker_count();
// Calls fn(i) for i in [0, count) on up to workers threads. The exception of
// the lowest failing index is rethrown.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace erosion
