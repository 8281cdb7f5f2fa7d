#include "lddr/master.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lddr/io.hpp"
#include "lddr/rng.hpp"
#include "lddr/simplex.hpp"

namespace lddr {

MasterLpSolution master_lp(const std::vector<Cut>& pool, std::span<const double> prob, int dim,
                           std::span<const double> center, double radius, double box) {
    const int n = static_cast<int>(prob.size());
    std::vector<std::vector<int>> byScenario(n);
    for (size_t c = 0; c < pool.size(); ++c) {
        if (pool[c].scenario < 0 || pool[c].scenario >= n)
            throw std::invalid_argument("master_lp: cut references unknown scenario");
        byScenario[pool[c].scenario].push_back(static_cast<int>(c));
    }
    for (int w = 0; w < n; ++w)
        if (byScenario[w].empty())
            throw std::invalid_argument("master_lp: scenario " + std::to_string(w) +
                                        " has no cuts; the model is unbounded");

    std::vector<double> lo(dim), hi(dim);
    for (int k = 0; k < dim; ++k) {
        lo[k] = std::max(-box, center[k] - radius);
        hi[k] = std::min(box, center[k] + radius);
        if (lo[k] > hi[k]) lo[k] = hi[k] = std::clamp(center[k], -box, box);
    }

    // LP dual of the multi-cut master: one column per cut plus two bound
    // columns per coefficient; rows are scenario convexity plus one balance
    // row per coefficient. The primal (theta, coeffs) comes back as the row
    // duals. Cut columns are scaled to unit infinity norm, which leaves the
    // row duals unchanged.
    MipModel dual;
    const int nCuts = static_cast<int>(pool.size());
    std::vector<double> scale(nCuts, 1.0);
    for (int c = 0; c < nCuts; ++c) {
        double norm = 1.0;
        for (double g : pool[c].gradient) norm = std::max(norm, std::abs(g));
        scale[c] = norm;
        dual.addVar(0.0, kInfinity, pool[c].intercept / norm, false);
    }
    for (int k = 0; k < dim; ++k) dual.addVar(0.0, kInfinity, hi[k], false);
    for (int k = 0; k < dim; ++k) dual.addVar(0.0, kInfinity, -lo[k], false);

    for (int w = 0; w < n; ++w) {
        RowDef row;
        for (int c : byScenario[w]) row.terms.push_back({c, 1.0 / scale[c]});
        row.sense = Sense::EQ;
        row.rhs = prob[w];
        dual.rows.push_back(std::move(row));
    }
    for (int k = 0; k < dim; ++k) {
        RowDef row;
        for (int c = 0; c < nCuts; ++c) {
            const double g = pool[c].gradient[k];
            if (g != 0.0) row.terms.push_back({c, -g / scale[c]});
        }
        row.terms.push_back({nCuts + k, 1.0});
        row.terms.push_back({nCuts + dim + k, -1.0});
        row.sense = Sense::EQ;
        row.rhs = 0.0;
        dual.rows.push_back(std::move(row));
    }

    const LpResult lp = solve_lp(dual);
    if (lp.status != LpStatus::Optimal)
        throw SolverError("master_lp: dual LP not solved to optimality");

    MasterLpSolution sol;
    sol.modelValue = lp.objective;
    sol.theta.assign(n, 0.0);
    for (int w = 0; w < n; ++w) sol.theta[w] = lp.rowDual[w];
    sol.coeffs.assign(dim, 0.0);
    for (int k = 0; k < dim; ++k) sol.coeffs[k] = std::clamp(lp.rowDual[n + k], lo[k], hi[k]);
    return sol;
}

namespace {

struct Evaluation {
    double value = 0.0;
    std::vector<ScenarioCut> cuts;
};

Evaluation evaluate_all(const DualOracle& oracle, std::span<const double> prob,
                        std::span<const double> coeffs, ExecMode mode) {
    const int n = oracle.scenarioCount();
    Evaluation ev;
    ev.cuts.resize(n);
    for_each_index(
        n, [&](int i) { ev.cuts[i] = oracle.evaluate(i, coeffs); }, mode);
    for (int i = 0; i < n; ++i) ev.value += prob[i] * ev.cuts[i].value;
    return ev;
}

void append_cuts(MasterState& st, const Evaluation& ev, std::span<const double> at, int iterate,
                 CutAudit& audit) {
    for (int i = 0; i < static_cast<int>(ev.cuts.size()); ++i) {
        const ScenarioCut& sc = ev.cuts[i];
        double dot = 0.0;
        for (size_t k = 0; k < sc.gradient.size(); ++k) dot += sc.gradient[k] * at[k];
        Cut cut{i, sc.value - dot, sc.gradient, iterate};
        ++audit.cuts;
        if (std::abs(cut.value(at) - sc.value) > 1e-6 * (1.0 + std::abs(sc.value)))
            ++audit.tightFailures;
        st.pool.push_back(std::move(cut));
    }
}

void write_cut_log(const std::string& path, const std::vector<Cut>& pool) {
    if (path.empty()) return;
    std::ostringstream out;
    out << "iter,scenario,const,gradientNorm\n";
    for (const Cut& c : pool) {
        double norm = 0.0;
        for (double g : c.gradient) norm += g * g;
        out << c.iterate << ',' << c.scenario << ',' << format_double(c.intercept) << ','
            << format_double(std::sqrt(norm)) << '\n';
    }
    atomic_write_text(path, out.str());
}

void write_log(const std::string& path, const std::vector<TrainLogRow>& log,
               bool recordTiming) {
    if (path.empty()) return;
    std::ostringstream out;
    out << "iter,candidateValue,incumbentValue,modelValue,trustRadius,step,wallSec\n";
    for (const TrainLogRow& r : log)
        out << r.iter << ',' << format_double(r.candidateValue) << ','
            << format_double(r.incumbentValue) << ',' << format_double(r.modelValue) << ','
            << format_double(r.trustRadius) << ',' << r.step << ','
            << (recordTiming ? format_double(r.wallSec) : std::string("0")) << '\n';
    atomic_write_text(path, out.str());
}

}  // namespace

TrainResult train(const DualOracle& oracle, const MasterOptions& opts,
                  const MasterState* resume) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    const int n = oracle.scenarioCount();
    const int dim = oracle.dimension();
    if (n < 1) throw std::invalid_argument("train: no scenarios");
    std::vector<double> prob(n);
    for (int i = 0; i < n; ++i) prob[i] = oracle.probability(i);

    TrainResult out;

    if (dim == 0) {
        const Evaluation ev = evaluate_all(oracle, prob, {}, opts.mode);
        out.value = ev.value;
        out.modelValue = ev.value;
        out.converged = true;
        out.state.incumbentValue = ev.value;
        out.log.push_back({0, ev.value, ev.value, ev.value, 0.0, 'i', elapsed()});
        write_log(opts.logPath, out.log, opts.recordTiming);
        return out;
    }

    MasterState st;
    if (resume) {
        st = *resume;
    } else {
        st.incumbent.assign(dim, 0.0);
        st.trustRadius = opts.trustRadius0;
        st.iteration = 0;
        const Evaluation ev = evaluate_all(oracle, prob, st.incumbent, opts.mode);
        st.incumbentValue = ev.value;
        append_cuts(st, ev, st.incumbent, 0, out.audit);
        out.log.push_back({0, ev.value, ev.value, ev.value, st.trustRadius, 'i', elapsed()});
    }

    bool converged = false;
    double modelValue = st.incumbentValue;
    while (st.iteration < opts.maxIterations) {
        ++st.iteration;
        const MasterLpSolution lp =
            master_lp(st.pool, prob, dim, st.incumbent, st.trustRadius, opts.coeffBound);
        modelValue = lp.modelValue;
        const double gap = lp.modelValue - st.incumbentValue;
        st.gapHistory.push_back(gap);
        if (gap <= opts.tolerance * (1.0 + std::abs(st.incumbentValue))) {
            // A binding trust region caps the model value, so the small gap may
            // be an artifact of the region, not of the cut model. Expand and
            // re-solve until the region is slack or at its ceiling.
            bool binding = false;
            for (int k = 0; k < dim && !binding; ++k) {
                const double loK = std::max(-opts.coeffBound, st.incumbent[k] - st.trustRadius);
                const double hiK = std::min(opts.coeffBound, st.incumbent[k] + st.trustRadius);
                const double tolK = 1e-9 * (1.0 + st.trustRadius);
                if ((lp.coeffs[k] - loK <= tolK && loK > -opts.coeffBound + tolK) ||
                    (hiK - lp.coeffs[k] <= tolK && hiK < opts.coeffBound - tolK))
                    binding = true;
            }
            if (!binding || st.trustRadius >= opts.trustRadiusMax) {
                converged = true;
                break;
            }
            st.trustRadius = std::min(st.trustRadius * opts.growFactor, opts.trustRadiusMax);
            out.log.push_back({st.iteration, st.incumbentValue, st.incumbentValue, lp.modelValue,
                               st.trustRadius, 'e', elapsed()});
            continue;
        }

        const Evaluation ev = evaluate_all(oracle, prob, lp.coeffs, opts.mode);
        append_cuts(st, ev, lp.coeffs, st.iteration, out.audit);

        const double actual = ev.value - st.incumbentValue;
        char step = 'n';
        if (actual >= opts.seriousRatio * gap) {
            step = 's';
            st.incumbent = lp.coeffs;
            st.incumbentValue = ev.value;
            st.trustRadius = std::min(st.trustRadius * opts.growFactor, opts.trustRadiusMax);
        } else {
            st.trustRadius = std::max(st.trustRadius * opts.shrinkFactor, opts.trustRadiusMin);
        }
        out.log.push_back(
            {st.iteration, ev.value, st.incumbentValue, lp.modelValue, st.trustRadius, step,
             elapsed()});
        if (!opts.checkpointPath.empty())
            atomic_write_text(opts.checkpointPath, master_state_to_json(st).dump());
    }

    if (opts.auditCuts && dim > 0) {
        const StreamKey key(opts.auditSeed, "cut-probe");
        for (int p = 0; p < opts.auditProbes; ++p) {
            std::vector<double> probe(dim);
            for (int k = 0; k < dim; ++k)
                probe[k] = (2.0 * key.uniform(p, k) - 1.0) * opts.coeffBound;
            const Evaluation ev = evaluate_all(oracle, prob, probe, opts.mode);
            for (const Cut& cut : st.pool) {
                ++out.audit.probes;
                const double fval = ev.cuts[cut.scenario].value;
                if (fval > cut.value(probe) + 1e-6 * (1.0 + std::abs(fval)))
                    ++out.audit.validityFailures;
            }
        }
    }

    out.coeffs = st.incumbent;
    out.value = st.incumbentValue;
    out.modelValue = modelValue;
    out.iterations = st.iteration;
    out.converged = converged;
    out.state = std::move(st);
    write_log(opts.logPath, out.log, opts.recordTiming);
    write_cut_log(opts.cutLogPath, out.state.pool);
    if (!opts.checkpointPath.empty())
        atomic_write_text(opts.checkpointPath, master_state_to_json(out.state).dump());
    return out;
}

}  // namespace lddr
