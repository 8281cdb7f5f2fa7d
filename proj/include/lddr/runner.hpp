#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/master.hpp"
#include "lddr/policy.hpp"
#include "lddr/stats.hpp"

namespace lddr {

// Experiment configuration shared by the CLI and the acceptance harness.
struct RunConfig {
    // Instance generation.
    int T = 3;
    int J = 3;
    double rho = 0.6;
    double rhoY = 0.2;
    uint64_t seed = 1;
    double muLow = 40.0;
    double muHigh = 160.0;
    MslotKnobs knobs;

    // Dual training.
    DualKind dual = DualKind::Stagewise;
    int basisOption = 0;  // 0: catalog default (SW 1, NA 3)
    NaVarSet naVars = NaVarSet::XOnly;
    bool liftFromSw = false;
    double coeffBound = 1e3;
    double masterTolerance = 1e-3;
    int masterMaxIters = 500;
    bool resumeTraining = false;  // continue from the checkpoint file when present
    int trainScenarios = 0;  // 0: sample-size rule from the coefficient count
    int evalScenarios = 0;

    // Policies.
    double lambda = 0.25;
    int rawSamples = 100;
    int clusters = 24;
    long nodeLimit = 10000;
    double timeLimitSec = 60.0;
    int naPolicyStageCap = 6;

    // Artifacts.
    std::string out = "out";
    std::string instancePath;  // defaults to <out>/instance.json
    bool recordTiming = false;  // real wall times make CSVs nondeterministic
    ExecMode mode = ExecMode::Parallel;

    std::string instanceFile() const;
    std::string coefficientFile(DualKind kind) const;
    std::string resultsFile() const;
};

// Deterministic instance from the config seed; demand means drawn once from
// [muLow, muHigh] under a dedicated stream and stored in the instance file.
MslotInstance generate_instance(const RunConfig& config);

void cmd_gen(const RunConfig& config);

TrainResult cmd_train(const RunConfig& config);

enum class BoundMethod { Pi, Sw, Na };
BoundEstimate cmd_bound(const RunConfig& config, BoundMethod method);

BoundEstimate cmd_simulate(const RunConfig& config, PolicyKind policy);

// Named verification suites; prints one line per check.
bool cmd_verify(const std::string& suite, uint64_t seed = 2024);

std::vector<GapReport> cmd_report(const std::string& dir);

// Shared evaluation sample and its provenance hash.
std::vector<ScenarioPath> evaluation_sample(const RunConfig& config, const MslotInstance& inst);
std::string evaluation_hash(const RunConfig& config, const MslotInstance& inst);

// JSON round trip for config files; absent keys keep their defaults.
RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json_text(const RunConfig& config);

}  // namespace lddr
