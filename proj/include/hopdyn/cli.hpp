// cli.hpp: Batch command-line driver: verify, spectrum, evolve, kmc, mott, sample

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hopdyn/io.hpp"
#include "hopdyn/lindblad.hpp"
#include "hopdyn/model.hpp"
#include "hopdyn/mott.hpp"

namespace hopdyn {

inline constexpr const char* kRunSchema = "hopdyn.run/1";
inline constexpr const char* kManifestSchema = "hopdyn.manifest/1";
inline constexpr const char* kThreadsEnv = "HOPDYN_THREADS";

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitConfig = 2 };

struct Tolerances {
    double identity{1e-10};
    double gap{1e-10};
    double mott{0.01};
    double kmc_sigmas{4.0};
    double kmc_fraction{0.99};
};

struct KmcSettings {
    std::size_t events{1000000};   // target per replica; sets t_max when t_max is 0
    double t_max{0.0};
    int batches{10};
    std::string initial{"equilibrium"};
    std::string events_csv;        // path prefix; one file per seed
};

struct EvolveSettings {
    std::vector<double> times;     // in units of 1/Γ★; empty = {0.5, 1, 2, 5, 10, 40}
    std::uint64_t observable_seed{1};
};

struct MottSettings {
    MottInputs inputs{silicon_preset()};
    std::vector<double> temperatures{1.0, 2.0, 5.0, 10.0, 30.0, 100.0};
};

struct RunConfig {
    std::string command;
    std::string preset;
    ModelParams params{};
    std::vector<std::uint64_t> seeds{7};
    std::string output_path;
    std::string format{"json"};
    int threads{1};
    Parts parts{};
    std::size_t verify_samples{8};
    Tolerances tol{};
    KmcSettings kmc{};
    EvolveSettings evolve{};
    MottSettings mott{};
};

json config_to_json(const RunConfig& c);
/// Overlays the keys present in `j` on `base`; unknown keys throw ConfigError.
RunConfig config_from_json(const json& j, RunConfig base);
/// silicon, desk-small or desk-kmc.
void apply_preset(RunConfig& c, const std::string& name);

/// Writes the report to `out`; returns an ExitCode.
int run(const RunConfig& config, std::ostream& out);

/// Parses argv, runs, writes outputs and the manifest.
int cli_main(int argc, char** argv);

} // namespace hopdyn
