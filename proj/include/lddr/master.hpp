#pragma once

#include <span>
#include <string>
#include <vector>

#include "lddr/parallel.hpp"

namespace lddr {

// Per-scenario optimality cut theta_w <= intercept + gradient . coeffs.
struct Cut {
    int scenario = 0;
    double intercept = 0.0;
    std::vector<double> gradient;
    int iterate = 0;

    double value(std::span<const double> coeffs) const {
        double v = intercept;
        for (size_t k = 0; k < gradient.size(); ++k) v += gradient[k] * coeffs[k];
        return v;
    }
};

struct ScenarioCut {
    double value = 0.0;
    std::vector<double> gradient;
};

// Sampled concave dual function: per-scenario value and subgradient at a
// coefficient point. Implementations must be safe to call concurrently for
// distinct scenarios.
class DualOracle {
  public:
    virtual ~DualOracle() = default;
    virtual int scenarioCount() const = 0;
    virtual double probability(int scenario) const = 0;
    virtual int dimension() const = 0;
    virtual ScenarioCut evaluate(int scenario, std::span<const double> coeffs) const = 0;
};

struct MasterOptions {
    double tolerance = 1e-3;  // stop when model - incumbent <= tol*(1+|incumbent|)
    int maxIterations = 500;
    double trustRadius0 = 10.0;
    double trustRadiusMin = 1e-3;
    double trustRadiusMax = 1e3;
    double growFactor = 2.0;
    double shrinkFactor = 0.5;
    double seriousRatio = 0.1;
    double coeffBound = 1e3;
    ExecMode mode = ExecMode::Parallel;
    bool auditCuts = false;
    int auditProbes = 50;
    uint64_t auditSeed = 17;
    std::string logPath;         // training log CSV when nonempty
    std::string cutLogPath;      // per-cut CSV when nonempty
    std::string checkpointPath;  // state JSON when nonempty
    bool recordTiming = false;   // real wall times in the log CSV break reproducibility
};

struct TrainLogRow {
    int iter = 0;
    double candidateValue = 0.0;
    double incumbentValue = 0.0;
    double modelValue = 0.0;
    double trustRadius = 0.0;
    char step = 'i';  // s(erous) / n(ull) / i(nit)
    double wallSec = 0.0;
};

struct CutAudit {
    long cuts = 0;
    long tightFailures = 0;
    long probes = 0;
    long validityFailures = 0;
};

struct MasterState {
    std::vector<double> incumbent;
    double incumbentValue = 0.0;
    double trustRadius = 0.0;
    int iteration = 0;
    std::vector<Cut> pool;
    std::vector<double> gapHistory;
};

struct TrainResult {
    std::vector<double> coeffs;
    double value = 0.0;       // SAA objective at the incumbent
    double modelValue = 0.0;  // last master model value
    int iterations = 0;
    bool converged = false;
    std::vector<TrainLogRow> log;
    CutAudit audit;
    MasterState state;
};

struct MasterLpSolution {
    std::vector<double> coeffs;
    double modelValue = 0.0;
    std::vector<double> theta;
};

// LP over the current cut pool with box bounds and an infinity-norm trust
// region around the center. Every scenario needs at least one cut.
MasterLpSolution master_lp(const std::vector<Cut>& pool, std::span<const double> prob, int dim,
                           std::span<const double> center, double radius, double box);

// Regularized cutting-plane maximization of the sampled dual.
TrainResult train(const DualOracle& oracle, const MasterOptions& opts = {},
                  const MasterState* resume = nullptr);

}  // namespace lddr
