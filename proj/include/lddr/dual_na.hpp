#pragma once

#include <span>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/master.hpp"
#include "lddr/mip.hpp"
#include "lddr/stats.hpp"

namespace lddr {

struct NaEvaluation {
    double value = 0.0;
    std::vector<std::vector<double>> stageSolution;  // per stage, block layout
};

// Deterministic T-stage problem over the path with penalized variables carrying
// the centered-basis coefficient additions.
NaEvaluation evaluate_na(const DualCoefficients& coeffs, const MslotInstance& inst,
                         const ScenarioPath& path, const CondMean& condMean,
                         const SolveOptions& opts = {});

std::vector<double> na_scenario_gradient(const DualCoefficients& coeffs,
                                         const MslotInstance& inst, const ScenarioPath& path,
                                         const CondMean& condMean, const NaEvaluation& eval);

std::vector<Cut> na_cuts(const DualCoefficients& at, const MslotInstance& inst,
                         std::span<const ScenarioPath> paths, const CondMean& condMean,
                         const SolveOptions& opts = {}, ExecMode mode = ExecMode::Parallel);

// Optimum of the plain path problem (all multipliers zero).
double perfect_information_value(const MslotInstance& inst, const ScenarioPath& path,
                                 const SolveOptions& opts = {});

BoundEstimate pi_bound(const MslotInstance& inst, std::span<const ScenarioPath> paths,
                       double level = 0.95, const SolveOptions& opts = {},
                       ExecMode mode = ExecMode::Parallel);

class NaOracle final : public DualOracle {
  public:
    NaOracle(const MslotInstance& inst, std::vector<ScenarioPath> paths,
             std::shared_ptr<const DualLayout> layout, CondMean condMean,
             SolveOptions opts = {});

    int scenarioCount() const override { return static_cast<int>(paths_.size()); }
    double probability(int scenario) const override;
    int dimension() const override { return layout_->dim; }
    ScenarioCut evaluate(int scenario, std::span<const double> coeffs) const override;

    const std::vector<ScenarioPath>& paths() const { return paths_; }
    const std::shared_ptr<const DualLayout>& layout() const { return layout_; }

  private:
    const MslotInstance& inst_;
    std::vector<ScenarioPath> paths_;
    std::shared_ptr<const DualLayout> layout_;
    CondMean condMean_;
    SolveOptions opts_;
};

}  // namespace lddr
