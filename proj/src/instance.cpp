#include "lddr/instance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lddr {

MslotInstance build_mslot(const ProcessParams& process, const MslotKnobs& knobs) {
    process.validate();
    if (knobs.util <= 0.0 || knobs.tbTime < 0.0 || knobs.holdingCost < 0.0 ||
        knobs.overtimeCost < 0.0 || knobs.deltaIminus < 0.0 || knobs.tsRel < 0.0 ||
        knobs.tbo < 0.0 || knobs.deltaY < 0.0 || knobs.deltaI < 0.0 || knobs.deltaO < 0.0 ||
        knobs.bigMFactor < 0.0 || knobs.capFactor < 0.0 || knobs.lastBacklogCost < 0.0)
        throw std::invalid_argument("build_mslot: knobs must be nonnegative (util > 0)");

    MslotInstance inst;
    inst.T = process.T;
    inst.J = process.J;
    inst.process = process;
    inst.knobs = knobs;

    const int T = inst.T, J = inst.J;
    inst.meanDemand.assign(J + 1, 0.0);
    for (int j = 1; j <= J; ++j) {
        double sum = 0.0;
        for (int t = 1; t <= T; ++t) sum += process.mu(t, j);
        inst.meanDemand[j] = sum / T;
    }

    inst.holdCost = Matrix(T, J, knobs.holdingCost);
    inst.backlogCost = Matrix(T, J);
    inst.setupCost = Matrix(T, J);
    inst.invCap = Matrix(T, J);
    inst.overtimeCost.assign(T + 1, knobs.overtimeCost);
    inst.capacity.assign(T + 1, 0.0);
    inst.overtimeCap.assign(T + 1, 0.0);
    inst.setupTime.assign(J + 1, 0.0);
    inst.unitTime.assign(J + 1, knobs.tbTime);
    inst.bigM.assign(J + 1, 0.0);

    for (int j = 1; j <= J; ++j) {
        inst.setupTime[j] = knobs.tsRel * inst.meanDemand[j] * knobs.tbTime;
        inst.bigM[j] = knobs.bigMFactor * inst.meanDemand[j];
    }
    for (int t = 1; t <= T; ++t) {
        double stageMean = 0.0;
        for (int j = 1; j <= J; ++j) stageMean += process.mu(t, j);
        inst.capacity[t] = knobs.capFactor * stageMean / knobs.util;
        inst.overtimeCap[t] = knobs.deltaO * inst.capacity[t];
        for (int j = 1; j <= J; ++j) {
            inst.backlogCost(t, j) =
                (t == T) ? knobs.lastBacklogCost : knobs.deltaIminus * inst.holdCost(t, j);
            inst.setupCost(t, j) =
                knobs.deltaY * inst.meanDemand[j] * knobs.tbo * knobs.tbo * inst.holdCost(t, j);
            inst.invCap(t, j) = knobs.deltaI * inst.meanDemand[j];
        }
    }

    double invTotal = 0.0;
    for (int j = 1; j <= J; ++j) invTotal += inst.invCap(1, j);
    inst.backlogUpper = 10.0 * invTotal;
    return inst;
}

StageBlock stage_block(const MslotInstance& inst, int t, std::span<const double> demand) {
    if (t < 1 || t > inst.T) throw std::out_of_range("stage_block: stage out of range");
    if (static_cast<int>(demand.size()) != inst.J)
        throw std::invalid_argument("stage_block: demand vector must have length J");
    for (double d : demand)
        if (d < 0.0) throw std::invalid_argument("stage_block: demand must be nonnegative");

    const VariableLayout lay = inst.layout();
    const int J = inst.J;
    StageBlock block;
    block.t = t;
    block.n = lay.numVars();
    block.cost.assign(block.n, 0.0);
    block.lower.assign(block.n, 0.0);
    block.upper.assign(block.n, 0.0);
    block.integer.assign(block.n, false);

    for (int j = 1; j <= J; ++j) {
        block.cost[lay.inventory(j)] = inst.holdCost(t, j);
        block.cost[lay.backlog(j)] = inst.backlogCost(t, j);
        block.cost[lay.setup(j)] = inst.setupCost(t, j);
        block.upper[lay.production(j)] = inst.bigM[j];
        block.upper[lay.inventory(j)] = inst.invCap(t, j);
        block.upper[lay.backlog(j)] = inst.backlogUpper;
        block.upper[lay.setup(j)] = 1.0;
        block.integer[lay.setup(j)] = true;
    }
    block.cost[lay.overtime()] = inst.overtimeCost[t];
    block.upper[lay.overtime()] = inst.overtimeCap[t];

    // State equations: i-_tj - i+_tj + i+_{t-1,j} - i-_{t-1,j} + x_{t-1,j} = D_tj.
    for (int j = 1; j <= J; ++j) {
        block.stateA.push_back({{lay.backlog(j), 1.0}, {lay.inventory(j), -1.0}});
        if (t > 1) {
            block.stateB.push_back({{lay.inventory(j), 1.0},
                                    {lay.backlog(j), -1.0},
                                    {lay.production(j), 1.0}});
        } else {
            block.stateB.emplace_back();
        }
        block.stateRhs.push_back(demand[j - 1]);
    }

    // Capacity with overtime relief.
    RowDef cap;
    for (int j = 1; j <= J; ++j) {
        cap.terms.push_back({lay.setup(j), inst.setupTime[j]});
        cap.terms.push_back({lay.production(j), inst.unitTime[j]});
    }
    cap.terms.push_back({lay.overtime(), -1.0});
    cap.sense = Sense::LE;
    cap.rhs = inst.capacity[t];
    block.recourse.push_back(std::move(cap));

    for (int j = 1; j <= J; ++j) {
        block.recourse.push_back(
            {{{lay.setup(j), inst.bigM[j]}, {lay.production(j), -1.0}}, Sense::GE, 0.0});
        const int tNext = std::min(t + 1, inst.T);
        block.recourse.push_back({{{lay.inventory(j), 1.0}, {lay.production(j), 1.0}},
                                  Sense::LE,
                                  inst.invCap(tNext, j)});
    }
    return block;
}

namespace {

void append_block_vars(MipModel& model, const StageBlock& block, double probWeight,
                       const std::vector<double>& costOverride) {
    for (int v = 0; v < block.n; ++v) {
        const double c = costOverride.empty() ? block.cost[v] : costOverride[v];
        model.addVar(block.lower[v], block.upper[v], probWeight * c, block.integer[v]);
    }
}

void append_block_rows(MipModel& model, const StageBlock& block, int offset, int prevOffset) {
    for (int r = 0; r < block.stateRows(); ++r) {
        RowDef row;
        for (const LinTerm& term : block.stateA[r]) row.terms.push_back({offset + term.var, term.coef});
        if (!block.stateB[r].empty()) {
            if (prevOffset < 0) throw StructureError("extensive_form: missing parent block");
            for (const LinTerm& term : block.stateB[r])
                row.terms.push_back({prevOffset + term.var, term.coef});
        }
        row.sense = Sense::EQ;
        row.rhs = block.stateRhs[r];
        model.rows.push_back(std::move(row));
    }
    for (const RowDef& rec : block.recourse) {
        RowDef row = rec;
        for (LinTerm& term : row.terms) term.var += offset;
        model.rows.push_back(std::move(row));
    }
}

}  // namespace

ExtensiveForm extensive_form(const MslotInstance& inst, const std::vector<ScenarioPath>& paths) {
    if (paths.empty()) throw StructureError("extensive_form: empty path set");
    for (const ScenarioPath& p : paths) {
        if (p.demands.rows() != inst.T || p.demands.cols() != inst.J)
            throw StructureError("extensive_form: path dimensions do not match instance");
        if (!(p.prob > 0.0)) throw StructureError("extensive_form: path weights must be > 0");
    }
    double totalProb = 0.0;
    for (const ScenarioPath& p : paths) totalProb += p.prob;

    ExtensiveForm ef;
    const int nPaths = static_cast<int>(paths.size());
    ef.nodeOfPathStage.assign(nPaths, std::vector<int>(inst.T, -1));

    // Grow the prefix tree stage by stage; paths with bitwise-equal demand
    // histories share a node.
    std::vector<std::pair<int, std::vector<int>>> frontier;  // (parent node, member paths)
    {
        std::vector<int> all(nPaths);
        for (int i = 0; i < nPaths; ++i) all[i] = i;
        frontier.push_back({-1, std::move(all)});
    }
    for (int t = 1; t <= inst.T; ++t) {
        std::vector<std::pair<int, std::vector<int>>> next;
        for (auto& [parent, members] : frontier) {
            // Partition members by stage-t demand vector, preserving order.
            std::vector<std::vector<int>> groups;
            for (int p : members) {
                bool placed = false;
                for (auto& g : groups) {
                    bool same = true;
                    for (int j = 1; j <= inst.J; ++j)
                        if (paths[g.front()].demands(t, j) != paths[p].demands(t, j)) {
                            same = false;
                            break;
                        }
                    if (same) {
                        g.push_back(p);
                        placed = true;
                        break;
                    }
                }
                if (!placed) groups.push_back({p});
            }
            for (auto& g : groups) {
                ExtensiveForm::Node node;
                node.t = t;
                node.parent = parent;
                for (int p : g) node.prob += paths[p].prob / totalProb;
                node.paths = g;
                const int nodeIdx = static_cast<int>(ef.nodes.size());
                for (int p : g) ef.nodeOfPathStage[p][t - 1] = nodeIdx;
                ef.nodes.push_back(node);
                next.push_back({nodeIdx, std::move(g)});
            }
        }
        frontier = std::move(next);
    }

    for (ExtensiveForm::Node& node : ef.nodes) {
        std::vector<double> demand(inst.J);
        for (int j = 1; j <= inst.J; ++j) demand[j - 1] = paths[node.paths.front()].demands(node.t, j);
        const StageBlock block = stage_block(inst, node.t, demand);
        node.varOffset = ef.model.numVars();
        append_block_vars(ef.model, block, node.prob, {});
        const int prevOffset = node.parent >= 0 ? ef.nodes[node.parent].varOffset : -1;
        append_block_rows(ef.model, block, node.varOffset, prevOffset);
    }
    return ef;
}

}  // namespace lddr
