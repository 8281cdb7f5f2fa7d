#include "lddr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lddr/rng.hpp"

namespace lddr {

namespace {

std::vector<double> stage_demand(const MslotInstance& inst, const ScenarioPath& path, int t) {
    std::vector<double> d(inst.J);
    for (int j = 1; j <= inst.J; ++j) d[j - 1] = path.demands(t, j);
    return d;
}

double linked_rhs_shift(const MslotInstance& inst, const std::vector<double>& prevState, int j) {
    if (prevState.empty()) return 0.0;
    const VariableLayout lay = inst.layout();
    return prevState[lay.inventory(j)] - prevState[lay.backlog(j)] +
           prevState[lay.production(j)];
}

// Shared scaffold: stage blocks t..T with given per-stage demands, the
// previous decision folded into the first linking row.
MipModel horizon_model(const MslotInstance& inst, int t,
                       const std::vector<std::vector<double>>& demands,
                       const std::vector<double>& prevState, std::vector<int>* offsets) {
    MipModel model;
    std::vector<int> off(inst.T + 1, -1);
    for (int s = t; s <= inst.T; ++s) {
        const StageBlock block = stage_block(inst, s, demands[s - t]);
        off[s] = model.numVars();
        for (int v = 0; v < block.n; ++v)
            model.addVar(block.lower[v], block.upper[v], block.cost[v], block.integer[v]);
        for (int r = 0; r < block.stateRows(); ++r) {
            RowDef row;
            for (const LinTerm& term : block.stateA[r])
                row.terms.push_back({off[s] + term.var, term.coef});
            double rhs = block.stateRhs[r];
            if (s == t) {
                rhs -= linked_rhs_shift(inst, prevState, r + 1);
            } else {
                for (const LinTerm& term : block.stateB[r])
                    row.terms.push_back({off[s - 1] + term.var, term.coef});
            }
            row.sense = Sense::EQ;
            row.rhs = rhs;
            model.rows.push_back(std::move(row));
        }
        for (const RowDef& rec : block.recourse) {
            RowDef row = rec;
            for (LinTerm& term : row.terms) term.var += off[s];
            model.rows.push_back(std::move(row));
        }
    }
    if (offsets) *offsets = off;
    return model;
}

std::vector<std::vector<double>> forecast_demands(const MslotInstance& inst,
                                                  const ScenarioPath& path, int t,
                                                  const CondMean& condMean) {
    std::vector<std::vector<double>> demands;
    demands.push_back(stage_demand(inst, path, t));
    for (int s = t + 1; s <= inst.T; ++s) {
        std::vector<double> d(inst.J);
        for (int j = 1; j <= inst.J; ++j) d[j - 1] = condMean(path, t, s - t, j);
        demands.push_back(std::move(d));
    }
    return demands;
}

double stage_cost(const MslotInstance& inst, int t, const std::vector<double>& decision) {
    const VariableLayout lay = inst.layout();
    double cost = 0.0;
    for (int j = 1; j <= inst.J; ++j) {
        cost += inst.holdCost(t, j) * decision[lay.inventory(j)];
        cost += inst.backlogCost(t, j) * decision[lay.backlog(j)];
        cost += inst.setupCost(t, j) * decision[lay.setup(j)];
    }
    cost += inst.overtimeCost[t] * decision[lay.overtime()];
    return cost;
}

}  // namespace

ContinuationSampler ar_continuation_sampler(const ProcessParams& params) {
    return [params](const ScenarioPath& path, int t, int n, std::string_view tag) {
        return conditional_sample(params, path, t, n, tag);
    };
}

ContinuationSampler tree_continuation_sampler(const FiniteSupportProcess& tree, uint64_t seed) {
    return [tree, seed](const ScenarioPath& path, int t, int n, std::string_view tag) {
        const auto leaves = tree.enumerate_paths();
        std::vector<int> matching;
        for (size_t i = 0; i < leaves.size(); ++i) {
            bool same = true;
            for (int s = 1; s <= t && same; ++s)
                for (int j = 1; j <= tree.J; ++j)
                    if (leaves[i].demands(s, j) != path.demands(s, j)) {
                        same = false;
                        break;
                    }
            if (same) matching.push_back(static_cast<int>(i));
        }
        if (matching.empty())
            throw StructureError("tree sampler: path history not found in the tree");
        double mass = 0.0;
        for (int idx : matching) mass += leaves[idx].prob;
        const StreamKey key(seed, tag);
        std::vector<ScenarioPath> out;
        out.reserve(n);
        for (int i = 0; i < n; ++i) {
            double u = key.uniform(static_cast<uint64_t>(path.id), t, i) * mass;
            int pick = matching.back();
            for (int idx : matching) {
                u -= leaves[idx].prob;
                if (u <= 0.0) {
                    pick = idx;
                    break;
                }
            }
            ScenarioPath p = leaves[pick];
            p.prob = 1.0 / n;
            p.id = i;
            out.push_back(std::move(p));
        }
        return out;
    };
}

MipModel condexp_stage_model(const MslotInstance& inst, const ScenarioPath& path, int t,
                             const std::vector<double>& prevState, const CondMean& condMean) {
    if (t < 1 || t > inst.T) throw std::out_of_range("condexp_stage_model: stage out of range");
    return horizon_model(inst, t, forecast_demands(inst, path, t, condMean), prevState, nullptr);
}

MipModel swdriven_stage_model(const MslotInstance& inst, const ScenarioPath& path, int t,
                              const std::vector<double>& prevState,
                              const DualCoefficients& coeffs, double lambda,
                              const CondMean& condMean) {
    if (coeffs.kind() != DualKind::Stagewise)
        throw std::invalid_argument("swdriven_stage_model: coefficients are not stagewise");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("swdriven_stage_model: lambda in [0,1]");
    std::vector<int> offsets;
    MipModel model =
        horizon_model(inst, t, forecast_demands(inst, path, t, condMean), prevState, &offsets);
    const VariableLayout lay = inst.layout();
    for (int s = t + 1; s <= inst.T; ++s)
        for (int v = 0; v < lay.numVars(); ++v)
            model.objective[offsets[s] + v] *= (1.0 - lambda);
    if (t < inst.T)
        for (int j = 1; j <= inst.J; ++j) {
            const double piExp = sw_multiplier_cond_expect(coeffs, t + 1, j, path, t, condMean);
            model.objective[offsets[t] + lay.inventory(j)] += lambda * piExp;
            model.objective[offsets[t] + lay.backlog(j)] -= lambda * piExp;
            model.objective[offsets[t] + lay.production(j)] += lambda * piExp;
        }
    return model;
}

std::vector<double> nadriven_stage_decision(const MslotInstance& inst, const ScenarioPath& path,
                                            int t, const std::vector<double>& prevState,
                                            const DualCoefficients& coeffs,
                                            const PolicyConfig& config, const CondMean& condMean,
                                            const ContinuationSampler& sampler,
                                            SolveStatus* statusOut, long* nodesOut) {
    if (coeffs.kind() != DualKind::Nonanticipative)
        throw std::invalid_argument("nadriven_stage_decision: coefficients are not NA");
    const VariableLayout lay = inst.layout();
    const int perStage = lay.numVars();

    if (t == inst.T) {
        const MipModel model = condexp_stage_model(inst, path, t, prevState, condMean);
        const SolveResult r = solve(model, config.stageMip);
        if (r.status != SolveStatus::Optimal)
            throw SolverError("nadriven_stage_decision: final stage not solved");
        if (statusOut) *statusOut = r.status;
        if (nodesOut) *nodesOut = r.nodes;
        return {r.x.begin(), r.x.begin() + perStage};
    }
    if (!sampler) throw std::invalid_argument("nadriven_stage_decision: sampler required");

    const std::string tag =
        config.sampleTag + "-s" + std::to_string(path.id) + "-t" + std::to_string(t);
    const auto raw = sampler(path, t, config.rawSamples, tag);

    std::vector<Matrix> futures;
    futures.reserve(raw.size());
    for (const ScenarioPath& p : raw) {
        Matrix m(inst.T - t, inst.J);
        for (int s = t + 1; s <= inst.T; ++s)
            for (int j = 1; j <= inst.J; ++j) m(s - t, j) = p.demands(s, j);
        futures.push_back(std::move(m));
    }
    const int k = std::min<int>(config.clusters, static_cast<int>(futures.size()));
    std::vector<WeightedTrajectory> scenarios = cluster_scenarios(futures, k, config.clusterSeed);
    for (WeightedTrajectory& w : scenarios) w.weight *= static_cast<double>(k) / (k + 1);
    WeightedTrajectory mean;
    mean.demands = Matrix(inst.T - t, inst.J);
    for (int s = t + 1; s <= inst.T; ++s)
        for (int j = 1; j <= inst.J; ++j) mean.demands(s - t, j) = condMean(path, t, s - t, j);
    mean.weight = 1.0 / (k + 1);
    scenarios.push_back(std::move(mean));

    // Two-stage extensive form: the stage-t block plus one chain per scenario,
    // second-stage costs carrying the centered multiplier adjustments.
    MipModel model;
    {
        const StageBlock block = stage_block(inst, t, stage_demand(inst, path, t));
        for (int v = 0; v < block.n; ++v)
            model.addVar(block.lower[v], block.upper[v], block.cost[v], block.integer[v]);
        for (int r = 0; r < block.stateRows(); ++r) {
            RowDef row;
            for (const LinTerm& term : block.stateA[r]) row.terms.push_back({term.var, term.coef});
            row.sense = Sense::EQ;
            row.rhs = block.stateRhs[r] - linked_rhs_shift(inst, prevState, r + 1);
            model.rows.push_back(std::move(row));
        }
        for (const RowDef& rec : block.recourse) model.rows.push_back(rec);
    }
    const DualLayout& layout = *coeffs.layout;
    for (const WeightedTrajectory& scen : scenarios) {
        // Synthetic full path: realized history then the scenario trajectory;
        // the copied latent state keeps conditional means those of the
        // observed history.
        ScenarioPath synth = path;
        for (int s = t + 1; s <= inst.T; ++s)
            for (int j = 1; j <= inst.J; ++j) synth.demands(s, j) = scen.demands(s - t, j);

        int prevOffset = 0;
        for (int s = t + 1; s <= inst.T; ++s) {
            std::vector<double> demand(inst.J);
            for (int j = 1; j <= inst.J; ++j) demand[j - 1] = synth.demands(s, j);
            const StageBlock block = stage_block(inst, s, demand);
            const int offset = model.numVars();
            for (int v = 0; v < block.n; ++v)
                model.addVar(block.lower[v], block.upper[v], scen.weight * block.cost[v],
                             block.integer[v]);
            auto addCentered = [&](NaVar var, int local, int j) {
                const int rowIdx = layout.rowAt(s, var, j);
                if (rowIdx < 0) return;
                const DualRow& row = layout.rows[rowIdx];
                double acc = 0.0;
                for (size_t b = 0; b < row.basis.size(); ++b)
                    acc += coeffs.w[row.offset + b] *
                           basis_centered(row.basis[b], synth, t, condMean);
                model.objective[offset + local] += scen.weight * acc;
            };
            for (int j = 1; j <= inst.J; ++j) {
                addCentered(NaVar::Production, lay.production(j), j);
                addCentered(NaVar::Inventory, lay.inventory(j), j);
                addCentered(NaVar::Backlog, lay.backlog(j), j);
            }
            for (int r = 0; r < block.stateRows(); ++r) {
                RowDef row;
                for (const LinTerm& term : block.stateA[r])
                    row.terms.push_back({offset + term.var, term.coef});
                for (const LinTerm& term : block.stateB[r])
                    row.terms.push_back({prevOffset + term.var, term.coef});
                row.sense = Sense::EQ;
                row.rhs = block.stateRhs[r];
                model.rows.push_back(std::move(row));
            }
            for (const RowDef& rec : block.recourse) {
                RowDef row = rec;
                for (LinTerm& term : row.terms) term.var += offset;
                model.rows.push_back(std::move(row));
            }
            prevOffset = offset;
        }
    }

    const SolveResult r = solve(model, config.twoStageMip);
    if (statusOut) *statusOut = r.status;
    if (nodesOut) *nodesOut = r.nodes;
    if (r.status != SolveStatus::Optimal && r.status != SolveStatus::LimitReached)
        throw SolverError("nadriven_stage_decision: two-stage model infeasible");
    if (r.x.empty())
        throw SolverError("nadriven_stage_decision: no incumbent within the solve limits");
    return {r.x.begin(), r.x.begin() + perStage};
}

PolicyRun simulate(const PolicyConfig& config, const MslotInstance& inst,
                   const ScenarioPath& path, const CondMean& condMean,
                   const ContinuationSampler& sampler) {
    const VariableLayout lay = inst.layout();
    const int perStage = lay.numVars();
    PolicyRun run;
    run.scenario = path.id;
    std::vector<double> prev;
    for (int t = 1; t <= inst.T; ++t) {
        std::vector<double> decision;
        SolveStatus status = SolveStatus::Optimal;
        long nodes = 0;
        switch (config.kind) {
            case PolicyKind::CondExp: {
                const MipModel model = condexp_stage_model(inst, path, t, prev, condMean);
                const SolveResult r = solve(model, config.stageMip);
                if (r.status != SolveStatus::Optimal)
                    throw SolverError("simulate: stage " + std::to_string(t) + " scenario " +
                                      std::to_string(path.id) + " failed");
                decision.assign(r.x.begin(), r.x.begin() + perStage);
                status = r.status;
                nodes = r.nodes;
                break;
            }
            case PolicyKind::SwDriven: {
                if (!config.coeffs) throw std::invalid_argument("simulate: missing coefficients");
                const MipModel model = swdriven_stage_model(inst, path, t, prev, *config.coeffs,
                                                            config.lambda, condMean);
                const SolveResult r = solve(model, config.stageMip);
                if (r.status != SolveStatus::Optimal)
                    throw SolverError("simulate: stage " + std::to_string(t) + " scenario " +
                                      std::to_string(path.id) + " failed");
                decision.assign(r.x.begin(), r.x.begin() + perStage);
                status = r.status;
                nodes = r.nodes;
                break;
            }
            case PolicyKind::NaDriven: {
                if (!config.coeffs) throw std::invalid_argument("simulate: missing coefficients");
                decision = nadriven_stage_decision(inst, path, t, prev, *config.coeffs, config,
                                                   condMean, sampler, &status, &nodes);
                break;
            }
        }
        const double cost = stage_cost(inst, t, decision);
        run.stageCost.push_back(cost);
        run.total += cost;
        run.status.push_back(status);
        run.nodes.push_back(nodes);
        run.decisions.push_back(decision);
        prev = std::move(decision);
    }
    return run;
}

std::vector<WeightedTrajectory> cluster_scenarios(const std::vector<Matrix>& raw, int k,
                                                  uint64_t seed) {
    const int n = static_cast<int>(raw.size());
    if (n < 1 || k < 1 || k > n) throw std::invalid_argument("cluster_scenarios: need 1 <= k <= n");
    const int dim = raw[0].rows() * raw[0].cols();
    for (const Matrix& m : raw)
        if (m.rows() != raw[0].rows() || m.cols() != raw[0].cols())
            throw std::invalid_argument("cluster_scenarios: inconsistent trajectories");

    auto makeResult = [&](const std::vector<int>& assign) {
        std::vector<WeightedTrajectory> out(k);
        std::vector<int> count(k, 0);
        for (int c = 0; c < k; ++c) out[c].demands = Matrix(raw[0].rows(), raw[0].cols());
        for (int i = 0; i < n; ++i) {
            ++count[assign[i]];
            for (int e = 0; e < dim; ++e) out[assign[i]].demands.data()[e] += raw[i].data()[e];
        }
        for (int c = 0; c < k; ++c) {
            for (int e = 0; e < dim; ++e) out[c].demands.data()[e] /= count[c];
            out[c].weight = static_cast<double>(count[c]) / n;
        }
        return out;
    };

    if (k == n) {
        std::vector<int> assign(n);
        for (int i = 0; i < n; ++i) assign[i] = i;
        return makeResult(assign);
    }

    const StreamKey key(seed, "kmeans");
    double bestSse = kInfinity;
    std::vector<int> bestAssign;
    for (int restart = 0; restart < 50; ++restart) {
        std::vector<int> centerIdx;
        for (int attempt = 0; attempt < 1000 && static_cast<int>(centerIdx.size()) < k;
             ++attempt) {
            const int cand = static_cast<int>(key.bits(restart, attempt) % n);
            if (std::find(centerIdx.begin(), centerIdx.end(), cand) == centerIdx.end())
                centerIdx.push_back(cand);
        }
        if (static_cast<int>(centerIdx.size()) < k) continue;
        std::vector<std::vector<double>> centers(k, std::vector<double>(dim));
        for (int c = 0; c < k; ++c)
            for (int e = 0; e < dim; ++e) centers[c][e] = raw[centerIdx[c]].data()[e];

        std::vector<int> assign(n, -1);
        bool ok = true;
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int best = 0;
                double bestDist = kInfinity;
                for (int c = 0; c < k; ++c) {
                    double d = 0.0;
                    for (int e = 0; e < dim; ++e) {
                        const double diff = raw[i].data()[e] - centers[c][e];
                        d += diff * diff;
                    }
                    if (d < bestDist - 1e-15) {
                        bestDist = d;
                        best = c;
                    }
                }
                if (assign[i] != best) {
                    assign[i] = best;
                    changed = true;
                }
            }
            std::vector<int> count(k, 0);
            for (int i = 0; i < n; ++i) ++count[assign[i]];
            if (std::find(count.begin(), count.end(), 0) != count.end()) {
                ok = false;
                break;
            }
            for (int c = 0; c < k; ++c) std::fill(centers[c].begin(), centers[c].end(), 0.0);
            for (int i = 0; i < n; ++i)
                for (int e = 0; e < dim; ++e) centers[assign[i]][e] += raw[i].data()[e];
            for (int c = 0; c < k; ++c) {
                int cnt = 0;
                for (int i = 0; i < n; ++i) cnt += assign[i] == c ? 1 : 0;
                for (int e = 0; e < dim; ++e) centers[c][e] /= cnt;
            }
            if (!changed) break;
        }
        if (!ok) continue;
        double sse = 0.0;
        for (int i = 0; i < n; ++i)
            for (int e = 0; e < dim; ++e) {
                const double diff = raw[i].data()[e] - centers[assign[i]][e];
                sse += diff * diff;
            }
        if (sse < bestSse - 1e-12) {
            bestSse = sse;
            bestAssign = assign;
        }
    }
    if (bestAssign.empty()) {
        bestAssign.resize(n);
        for (int i = 0; i < n; ++i) bestAssign[i] = i % k;
    }
    return makeResult(bestAssign);
}

}  // namespace lddr
