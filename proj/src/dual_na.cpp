#include "lddr/dual_na.hpp"

#include <stdexcept>

namespace lddr {

namespace {

// Path problem with coefficient additions on penalized variables. Centered
// basis values are computed once per (path, row, basis index); the alpha
// dependence is a dot product.
MipModel path_problem(const DualCoefficients* coeffs, const MslotInstance& inst,
                      const ScenarioPath& path, const CondMean* condMean,
                      std::vector<int>* stageOffsets) {
    const VariableLayout lay = inst.layout();
    MipModel model;
    std::vector<int> offsets(inst.T + 1, 0);
    for (int t = 1; t <= inst.T; ++t) {
        std::vector<double> demand(inst.J);
        for (int j = 1; j <= inst.J; ++j) demand[j - 1] = path.demands(t, j);
        const StageBlock block = stage_block(inst, t, demand);
        offsets[t] = model.numVars();

        std::vector<double> cost = block.cost;
        if (coeffs) {
            const DualLayout& layout = *coeffs->layout;
            auto add = [&](NaVar var, int local, int j) {
                const int row = layout.rowAt(t, var, j);
                if (row < 0) return;
                const DualRow& r = layout.rows[row];
                double acc = 0.0;
                for (size_t k = 0; k < r.basis.size(); ++k)
                    acc += coeffs->w[r.offset + k] *
                           basis_centered(r.basis[k], path, t, *condMean);
                cost[local] += acc;
            };
            for (int j = 1; j <= inst.J; ++j) {
                add(NaVar::Production, lay.production(j), j);
                add(NaVar::Inventory, lay.inventory(j), j);
                add(NaVar::Backlog, lay.backlog(j), j);
            }
        }
        for (int v = 0; v < block.n; ++v)
            model.addVar(block.lower[v], block.upper[v], cost[v], block.integer[v]);
        for (int r = 0; r < block.stateRows(); ++r) {
            RowDef row;
            for (const LinTerm& term : block.stateA[r])
                row.terms.push_back({offsets[t] + term.var, term.coef});
            for (const LinTerm& term : block.stateB[r])
                row.terms.push_back({offsets[t - 1] + term.var, term.coef});
            row.sense = Sense::EQ;
            row.rhs = block.stateRhs[r];
            model.rows.push_back(std::move(row));
        }
        for (const RowDef& rec : block.recourse) {
            RowDef row = rec;
            for (LinTerm& term : row.terms) term.var += offsets[t];
            model.rows.push_back(std::move(row));
        }
    }
    if (stageOffsets) *stageOffsets = offsets;
    return model;
}

}  // namespace

NaEvaluation evaluate_na(const DualCoefficients& coeffs, const MslotInstance& inst,
                         const ScenarioPath& path, const CondMean& condMean,
                         const SolveOptions& opts) {
    if (coeffs.kind() != DualKind::Nonanticipative)
        throw std::invalid_argument("evaluate_na: coefficients are not nonanticipative");
    std::vector<int> offsets;
    const MipModel model = path_problem(&coeffs, inst, path, &condMean, &offsets);
    const SolveResult r = solve(model, opts);
    if (r.status != SolveStatus::Optimal)
        throw SolverError("evaluate_na: scenario " + std::to_string(path.id) +
                          " not solved to optimality");
    NaEvaluation eval;
    eval.value = r.objective;
    const int perStage = inst.layout().numVars();
    eval.stageSolution.resize(inst.T);
    for (int t = 1; t <= inst.T; ++t)
        eval.stageSolution[t - 1].assign(r.x.begin() + offsets[t],
                                         r.x.begin() + offsets[t] + perStage);
    return eval;
}

std::vector<double> na_scenario_gradient(const DualCoefficients& coeffs,
                                         const MslotInstance& inst, const ScenarioPath& path,
                                         const CondMean& condMean, const NaEvaluation& eval) {
    const DualLayout& layout = *coeffs.layout;
    const VariableLayout lay = inst.layout();
    std::vector<double> g(layout.dim, 0.0);
    for (const DualRow& row : layout.rows) {
        int local = 0;
        switch (row.var) {
            case NaVar::Production: local = lay.production(row.j); break;
            case NaVar::Inventory: local = lay.inventory(row.j); break;
            case NaVar::Backlog: local = lay.backlog(row.j); break;
        }
        const double y = eval.stageSolution[row.t - 1][local];
        for (size_t k = 0; k < row.basis.size(); ++k)
            g[row.offset + k] = basis_centered(row.basis[k], path, row.t, condMean) * y;
    }
    return g;
}

std::vector<Cut> na_cuts(const DualCoefficients& at, const MslotInstance& inst,
                         std::span<const ScenarioPath> paths, const CondMean& condMean,
                         const SolveOptions& opts, ExecMode mode) {
    std::vector<Cut> cuts(paths.size());
    for_each_index(
        static_cast<int>(paths.size()),
        [&](int i) {
            const NaEvaluation eval = evaluate_na(at, inst, paths[i], condMean, opts);
            const std::vector<double> g = na_scenario_gradient(at, inst, paths[i], condMean, eval);
            double dot = 0.0;
            for (size_t k = 0; k < g.size(); ++k) dot += g[k] * at.w[k];
            cuts[i] = Cut{i, eval.value - dot, g, 0};
        },
        mode);
    return cuts;
}

double perfect_information_value(const MslotInstance& inst, const ScenarioPath& path,
                                 const SolveOptions& opts) {
    const MipModel model = path_problem(nullptr, inst, path, nullptr, nullptr);
    const SolveResult r = solve(model, opts);
    if (r.status != SolveStatus::Optimal)
        throw SolverError("perfect_information_value: path problem not solved");
    return r.objective;
}

BoundEstimate pi_bound(const MslotInstance& inst, std::span<const ScenarioPath> paths,
                       double level, const SolveOptions& opts, ExecMode mode) {
    if (paths.empty()) throw std::invalid_argument("pi_bound: empty path set");
    std::vector<double> values(paths.size());
    for_each_index(
        static_cast<int>(paths.size()),
        [&](int i) { values[i] = perfect_information_value(inst, paths[i], opts); }, mode);
    return confidence_interval(values, level, BoundSide::Lower, "pi");
}

NaOracle::NaOracle(const MslotInstance& inst, std::vector<ScenarioPath> paths,
                   std::shared_ptr<const DualLayout> layout, CondMean condMean, SolveOptions opts)
    : inst_(inst),
      paths_(std::move(paths)),
      layout_(std::move(layout)),
      condMean_(std::move(condMean)),
      opts_(std::move(opts)) {
    if (layout_->spec.kind != DualKind::Nonanticipative)
        throw std::invalid_argument("NaOracle: layout is not nonanticipative");
}

double NaOracle::probability(int scenario) const {
    double total = 0.0;
    for (const ScenarioPath& p : paths_) total += p.prob;
    return paths_[scenario].prob / total;
}

ScenarioCut NaOracle::evaluate(int scenario, std::span<const double> coeffs) const {
    DualCoefficients c;
    c.layout = layout_;
    c.w.assign(coeffs.begin(), coeffs.end());
    const NaEvaluation eval = evaluate_na(c, inst_, paths_[scenario], condMean_, opts_);
    ScenarioCut cut;
    cut.value = eval.value;
    cut.gradient = na_scenario_gradient(c, inst_, paths_[scenario], condMean_, eval);
    return cut;
}

}  // namespace lddr
