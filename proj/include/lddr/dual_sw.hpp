#pragma once

#include <span>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/master.hpp"
#include "lddr/mip.hpp"

namespace lddr {

// Stage-t subproblem objective after relaxing the state equations: the costs
// pick up A_t' pi_t plus the conditional expectation of B_{t+1}' pi_{t+1},
// and the constant folds in -pi_t' b_t.
struct SwStageObjective {
    std::vector<double> cost;
    double constant = 0.0;
};

SwStageObjective sw_stage_objective(const DualCoefficients& coeffs, const MslotInstance& inst,
                                    const ScenarioPath& path, int t, const CondMean& condMean);

struct SwEvaluation {
    std::vector<double> stageValue;     // folded: subproblem optimum + constant, index t-1
    std::vector<double> stageConstant;  // -pi_t' b_t
    std::vector<std::vector<double>> argmin;
    double total = 0.0;
};

SwEvaluation evaluate_sw(const DualCoefficients& coeffs, const MslotInstance& inst,
                         const ScenarioPath& path, const CondMean& condMean,
                         const SolveOptions& opts = {});

// Subgradient of the scenario value with respect to the flat coefficient
// vector, read off the stage argmins.
std::vector<double> sw_scenario_gradient(const DualCoefficients& coeffs,
                                         const MslotInstance& inst, const ScenarioPath& path,
                                         const CondMean& condMean, const SwEvaluation& eval);

std::vector<Cut> sw_cuts(const DualCoefficients& at, const MslotInstance& inst,
                         std::span<const ScenarioPath> paths, const CondMean& condMean,
                         const SolveOptions& opts = {}, ExecMode mode = ExecMode::Parallel);

class SwOracle final : public DualOracle {
  public:
    SwOracle(const MslotInstance& inst, std::vector<ScenarioPath> paths,
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
