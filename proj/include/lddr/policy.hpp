#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/mip.hpp"
#include "lddr/process.hpp"

namespace lddr {

enum class PolicyKind { CondExp, SwDriven, NaDriven };

// Conditional continuations after an observed history; the AR sampler wraps
// conditional_sample, the tree sampler draws leaves of the matching subtree.
using ContinuationSampler = std::function<std::vector<ScenarioPath>(
    const ScenarioPath& path, int t, int n, std::string_view tag)>;

ContinuationSampler ar_continuation_sampler(const ProcessParams& params);
ContinuationSampler tree_continuation_sampler(const FiniteSupportProcess& tree, uint64_t seed);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::CondExp;
    double lambda = 0.25;  // SwDriven penalty weight
    int rawSamples = 100;  // NaDriven conditional sample size
    int clusters = 24;
    std::optional<DualCoefficients> coeffs;
    SolveOptions stageMip;     // rolling-horizon deterministic stage models
    SolveOptions twoStageMip;  // NaDriven embedded two-stage model
    uint64_t clusterSeed = 7;
    std::string sampleTag = "policy";

    PolicyConfig() {
        twoStageMip.nodeLimit = 10000;
        twoStageMip.timeLimitSec = 60.0;
    }
};

struct PolicyRun {
    int scenario = 0;
    std::vector<double> stageCost;
    double total = 0.0;
    std::vector<std::vector<double>> decisions;  // per stage, block layout
    std::vector<SolveStatus> status;
    std::vector<long> nodes;  // branch-and-bound nodes per stage decision
};

// Rolling-horizon model at stage t with future demands replaced by their
// conditional means; the previous stage decision enters the linking rows'
// right-hand side. The stage-t block sits at variable offset zero.
MipModel condexp_stage_model(const MslotInstance& inst, const ScenarioPath& path, int t,
                             const std::vector<double>& prevState, const CondMean& condMean);

// Same constraints with the dual-driven objective: the stage-t cost picks up
// lambda times the expected next-stage multiplier pressure and future-stage
// costs are scaled by (1 - lambda).
MipModel swdriven_stage_model(const MslotInstance& inst, const ScenarioPath& path, int t,
                              const std::vector<double>& prevState,
                              const DualCoefficients& coeffs, double lambda,
                              const CondMean& condMean);

// Two-stage approximation: sampled continuations are clustered, the
// conditional-mean trajectory is appended, and the second-stage costs carry
// the centered multiplier adjustments. Returns the stage-t decisions.
std::vector<double> nadriven_stage_decision(const MslotInstance& inst, const ScenarioPath& path,
                                            int t, const std::vector<double>& prevState,
                                            const DualCoefficients& coeffs,
                                            const PolicyConfig& config, const CondMean& condMean,
                                            const ContinuationSampler& sampler,
                                            SolveStatus* statusOut = nullptr,
                                            long* nodesOut = nullptr);

PolicyRun simulate(const PolicyConfig& config, const MslotInstance& inst,
                   const ScenarioPath& path, const CondMean& condMean,
                   const ContinuationSampler& sampler = {});

struct WeightedTrajectory {
    Matrix demands;
    double weight = 0.0;
};

// Deterministic k-means over flattened trajectories; weights are member
// fractions. Empty clusters restart with a fresh seed.
std::vector<WeightedTrajectory> cluster_scenarios(const std::vector<Matrix>& raw, int k,
                                                  uint64_t seed);

}  // namespace lddr
