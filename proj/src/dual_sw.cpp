#include "lddr/dual_sw.hpp"

#include <stdexcept>

namespace lddr {

namespace {

MipModel stage_subproblem(const MslotInstance& inst, const StageBlock& block,
                          const SwStageObjective& obj, bool keepStateRows) {
    MipModel m;
    for (int v = 0; v < block.n; ++v)
        m.addVar(block.lower[v], block.upper[v], obj.cost[v], block.integer[v]);
    if (keepStateRows)
        for (int r = 0; r < block.stateRows(); ++r)
            m.addRow(block.stateA[r], Sense::EQ, block.stateRhs[r]);
    for (const RowDef& row : block.recourse) m.rows.push_back(row);
    return m;
}

}  // namespace

SwStageObjective sw_stage_objective(const DualCoefficients& coeffs, const MslotInstance& inst,
                                    const ScenarioPath& path, int t, const CondMean& condMean) {
    if (coeffs.kind() != DualKind::Stagewise)
        throw std::invalid_argument("sw_stage_objective: coefficients are not stagewise");
    const VariableLayout lay = inst.layout();
    std::vector<double> demand(inst.J);
    for (int j = 1; j <= inst.J; ++j) demand[j - 1] = path.demands(t, j);
    const StageBlock block = stage_block(inst, t, demand);

    SwStageObjective out;
    out.cost = block.cost;
    for (int j = 1; j <= inst.J; ++j) {
        const double pi = sw_multiplier(coeffs, t, j, path);
        const double lookahead =
            (t < inst.T) ? sw_multiplier_cond_expect(coeffs, t + 1, j, path, t, condMean) : 0.0;
        out.cost[lay.inventory(j)] += -pi + lookahead;
        out.cost[lay.backlog(j)] += pi - lookahead;
        out.cost[lay.production(j)] += lookahead;
        out.constant -= pi * path.demands(t, j);
    }
    return out;
}

SwEvaluation evaluate_sw(const DualCoefficients& coeffs, const MslotInstance& inst,
                         const ScenarioPath& path, const CondMean& condMean,
                         const SolveOptions& opts) {
    const bool keepStage1 = coeffs.layout->spec.keepStage1;
    SwEvaluation eval;
    eval.stageValue.resize(inst.T);
    eval.stageConstant.resize(inst.T);
    eval.argmin.resize(inst.T);
    for (int t = 1; t <= inst.T; ++t) {
        std::vector<double> demand(inst.J);
        for (int j = 1; j <= inst.J; ++j) demand[j - 1] = path.demands(t, j);
        const StageBlock block = stage_block(inst, t, demand);
        const SwStageObjective obj = sw_stage_objective(coeffs, inst, path, t, condMean);
        const bool keepRows = (t == 1 && keepStage1);
        const MipModel model = stage_subproblem(inst, block, obj, keepRows);
        const SolveResult r = solve(model, opts);
        if (r.status != SolveStatus::Optimal)
            throw SolverError("evaluate_sw: stage " + std::to_string(t) + " scenario " +
                              std::to_string(path.id) + " not solved to optimality");
        eval.stageValue[t - 1] = r.objective + obj.constant;
        eval.stageConstant[t - 1] = obj.constant;
        eval.argmin[t - 1] = r.x;
    }
    for (double v : eval.stageValue) eval.total += v;
    return eval;
}

std::vector<double> sw_scenario_gradient(const DualCoefficients& coeffs,
                                         const MslotInstance& inst, const ScenarioPath& path,
                                         const CondMean& condMean, const SwEvaluation& eval) {
    const DualLayout& layout = *coeffs.layout;
    const VariableLayout lay = inst.layout();
    std::vector<double> g(layout.dim, 0.0);
    for (const DualRow& row : layout.rows) {
        const int t = row.t;
        const int j = row.j;
        const std::vector<double>& xt = eval.argmin[t - 1];
        // (A_t x_t)_j - b_tj from the stage-t argmin.
        const double own = xt[lay.backlog(j)] - xt[lay.inventory(j)] - path.demands(t, j);
        // (B_t x_{t-1})_j from the stage-(t-1) argmin, entering through the
        // lookahead term of the previous subproblem.
        double linked = 0.0;
        if (t >= 2) {
            const std::vector<double>& xp = eval.argmin[t - 2];
            linked = xp[lay.inventory(j)] - xp[lay.backlog(j)] + xp[lay.production(j)];
        }
        for (size_t k = 0; k < row.basis.size(); ++k) {
            const double phi = basis_value(row.basis[k], path);
            double expectPhi = 0.0;
            if (t >= 2) expectPhi = basis_cond_expect(row.basis[k], path, t - 1, condMean);
            g[row.offset + k] = phi * own + expectPhi * linked;
        }
    }
    return g;
}

std::vector<Cut> sw_cuts(const DualCoefficients& at, const MslotInstance& inst,
                         std::span<const ScenarioPath> paths, const CondMean& condMean,
                         const SolveOptions& opts, ExecMode mode) {
    std::vector<Cut> cuts(paths.size());
    for_each_index(
        static_cast<int>(paths.size()),
        [&](int i) {
            const SwEvaluation eval = evaluate_sw(at, inst, paths[i], condMean, opts);
            const std::vector<double> g = sw_scenario_gradient(at, inst, paths[i], condMean, eval);
            double dot = 0.0;
            for (size_t k = 0; k < g.size(); ++k) dot += g[k] * at.w[k];
            cuts[i] = Cut{i, eval.total - dot, g, 0};
        },
        mode);
    return cuts;
}

SwOracle::SwOracle(const MslotInstance& inst, std::vector<ScenarioPath> paths,
                   std::shared_ptr<const DualLayout> layout, CondMean condMean, SolveOptions opts)
    : inst_(inst),
      paths_(std::move(paths)),
      layout_(std::move(layout)),
      condMean_(std::move(condMean)),
      opts_(std::move(opts)) {
    if (layout_->spec.kind != DualKind::Stagewise)
        throw std::invalid_argument("SwOracle: layout is not stagewise");
}

double SwOracle::probability(int scenario) const {
    double total = 0.0;
    for (const ScenarioPath& p : paths_) total += p.prob;
    return paths_[scenario].prob / total;
}

ScenarioCut SwOracle::evaluate(int scenario, std::span<const double> coeffs) const {
    DualCoefficients c;
    c.layout = layout_;
    c.w.assign(coeffs.begin(), coeffs.end());
    const SwEvaluation eval = evaluate_sw(c, inst_, paths_[scenario], condMean_, opts_);
    ScenarioCut cut;
    cut.value = eval.total;
    cut.gradient = sw_scenario_gradient(c, inst_, paths_[scenario], condMean_, eval);
    return cut;
}

}  // namespace lddr
