#include "lddr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lddr/dual_na.hpp"
#include "lddr/dual_sw.hpp"
#include "lddr/master.hpp"
#include "lddr/simplex.hpp"

namespace lddr {

namespace {

double log_gamma(double x) { return std::lgamma(x); }

// Continued-fraction incomplete beta, modified Lentz.
double betacf(double a, double b, double x) {
    const int maxIt = 300;
    const double eps = 3e-16, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= maxIt; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int dof) {
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double p, int dof) {
    if (dof < 1) throw std::invalid_argument("student_t_quantile: dof must be >= 1");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p in (0,1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
    double lo = 0.0, hi = 2.0;
    while (student_t_cdf(hi, dof) < p && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

BoundEstimate confidence_interval(std::span<const double> values, double level, BoundSide side,
                                  std::string method) {
    if (values.empty()) throw std::invalid_argument("confidence_interval: no values");
    if (level < 0.0 || level >= 1.0)
        throw std::invalid_argument("confidence_interval: level in [0,1)");
    BoundEstimate out;
    out.n = static_cast<int>(values.size());
    out.level = level;
    out.side = side;
    out.method = std::move(method);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= out.n;
    out.mean = mean;
    if (out.n == 1) {
        out.halfwidth = 0.0;
        out.degenerate = true;
        return out;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (out.n - 1));
    if (level == 0.0 || sd == 0.0) {
        out.halfwidth = 0.0;
        return out;
    }
    const double q = student_t_quantile(0.5 * (1.0 + level), out.n - 1);
    out.halfwidth = q * sd / std::sqrt(static_cast<double>(out.n));
    return out;
}

BoundEstimate lower_bound(const DualCoefficients& coeffs, const MslotInstance& inst,
                          std::span<const ScenarioPath> evalPaths, const CondMean& condMean,
                          double level, const SolveOptions& opts, ExecMode mode) {
    if (evalPaths.empty()) throw std::invalid_argument("lower_bound: empty evaluation sample");
    std::vector<double> values(evalPaths.size());
    if (coeffs.kind() == DualKind::Stagewise) {
        for_each_index(
            static_cast<int>(evalPaths.size()),
            [&](int i) {
                values[i] = evaluate_sw(coeffs, inst, evalPaths[i], condMean, opts).total;
            },
            mode);
    } else {
        for_each_index(
            static_cast<int>(evalPaths.size()),
            [&](int i) {
                values[i] = evaluate_na(coeffs, inst, evalPaths[i], condMean, opts).value;
            },
            mode);
    }
    return confidence_interval(values, level, BoundSide::Lower,
                               coeffs.kind() == DualKind::Stagewise ? "sw" : "na");
}

double extensive_optimum(const FiniteSupportProcess& tree, const MslotInstance& inst,
                         const SolveOptions& opts, int leafGuard) {
    tree.validate();
    if (tree.leafCount() > leafGuard)
        throw std::invalid_argument("extensive_optimum: tree exceeds the leaf guard");
    const ExtensiveForm ef = extensive_form(inst, tree.enumerate_paths());
    const SolveResult r = solve(ef.model, opts);
    if (r.status != SolveStatus::Optimal)
        throw SolverError("extensive_optimum: deterministic equivalent not solved");
    return r.objective;
}

namespace {

std::vector<std::vector<double>> enumerate_lattice(const SmallMip& mip) {
    const int n = mip.numVars();
    long boxCount = 1;
    for (int j = 0; j < n; ++j) {
        if (mip.lo[j] > mip.hi[j]) throw std::invalid_argument("restricted_dual_check: empty box");
        boxCount *= mip.hi[j] - mip.lo[j] + 1;
        if (boxCount > 200000) throw std::invalid_argument("restricted_dual_check: box too large to enumerate");
    }
    std::vector<std::vector<double>> X;
    std::vector<int> x(n);
    for (int j = 0; j < n; ++j) x[j] = mip.lo[j];
    while (true) {
        bool ok = true;
        for (const RowDef& row : mip.side) {
            double act = 0.0;
            for (const LinTerm& term : row.terms) act += term.coef * x[term.var];
            if (row.sense == Sense::LE && act > row.rhs + 1e-9) ok = false;
            if (row.sense == Sense::GE && act < row.rhs - 1e-9) ok = false;
            if (row.sense == Sense::EQ && std::abs(act - row.rhs) > 1e-9) ok = false;
            if (!ok) break;
        }
        if (ok) {
            X.emplace_back(x.begin(), x.end());
            if (X.size() > 500) throw std::invalid_argument("restricted_dual_check: more than 500 lattice points");
        }
        int j = n - 1;
        while (j >= 0 && ++x[j] > mip.hi[j]) x[j--] = mip.lo[j];
        if (j < 0) break;
    }
    return X;
}

// z(G a) evaluated by enumeration; a single-scenario concave oracle.
class RestrictedDualOracle final : public DualOracle {
  public:
    RestrictedDualOracle(const SmallMip& mip, const Matrix& G,
                         std::vector<std::vector<double>> X)
        : mip_(mip), G_(G), X_(std::move(X)) {}

    int scenarioCount() const override { return 1; }
    double probability(int) const override { return 1.0; }
    int dimension() const override { return G_.cols(); }

    ScenarioCut evaluate(int, std::span<const double> alpha) const override {
        const int m = static_cast<int>(mip_.d.size());
        std::vector<double> lambda(m, 0.0);
        for (int i = 1; i <= m; ++i)
            for (int k = 1; k <= G_.cols(); ++k) lambda[i - 1] += G_(i, k) * alpha[k - 1];
        double best = kInfinity;
        const std::vector<double>* argmin = nullptr;
        for (const auto& x : X_) {
            double v = 0.0;
            for (int j = 0; j < mip_.numVars(); ++j) v += mip_.c[j] * x[j];
            for (int i = 1; i <= m; ++i) {
                double slack = mip_.d[i - 1];
                for (int j = 0; j < mip_.numVars(); ++j) slack -= mip_.D(i, j + 1) * x[j];
                v += lambda[i - 1] * slack;
            }
            if (v < best - 1e-15) {
                best = v;
                argmin = &x;
            }
        }
        ScenarioCut cut;
        cut.value = best;
        cut.gradient.assign(G_.cols(), 0.0);
        for (int k = 1; k <= G_.cols(); ++k)
            for (int i = 1; i <= m; ++i) {
                double slack = mip_.d[i - 1];
                for (int j = 0; j < mip_.numVars(); ++j)
                    slack -= mip_.D(i, j + 1) * (*argmin)[j];
                cut.gradient[k - 1] += G_(i, k) * slack;
            }
        return cut;
    }

  private:
    const SmallMip& mip_;
    const Matrix& G_;
    std::vector<std::vector<double>> X_;
};

}  // namespace

RestrictedDualCheck restricted_dual_check(const SmallMip& mip, const Matrix& G,
                                          double tol) {
    const auto X = enumerate_lattice(mip);
    if (X.empty()) throw std::invalid_argument("restricted_dual_check: X is empty");
    const int m = static_cast<int>(mip.d.size());
    if (mip.D.rows() != m || mip.D.cols() != mip.numVars())
        throw std::invalid_argument("restricted_dual_check: D dimensions");
    if (G.rows() != m) throw std::invalid_argument("restricted_dual_check: G row count");

    RestrictedDualOracle oracle(mip, G, X);
    MasterOptions opts;
    opts.tolerance = 1e-10;
    opts.maxIterations = 5000;
    opts.trustRadius0 = 1e3;
    opts.coeffBound = 1e3;
    opts.mode = ExecMode::Serial;
    const TrainResult trained = train(oracle, opts);

    // Hull route: convex multipliers over the enumerated points with the
    // aggregated equalities G'(Dx - d) = 0.
    MipModel lp;
    for (const auto& x : X) {
        double cost = 0.0;
        for (int j = 0; j < mip.numVars(); ++j) cost += mip.c[j] * x[j];
        lp.addVar(0.0, 1.0, cost, false);
    }
    {
        RowDef conv;
        for (int i = 0; i < static_cast<int>(X.size()); ++i) conv.terms.push_back({i, 1.0});
        conv.sense = Sense::EQ;
        conv.rhs = 1.0;
        lp.rows.push_back(std::move(conv));
    }
    for (int k = 1; k <= G.cols(); ++k) {
        RowDef row;
        double rhs = 0.0;
        for (int i = 1; i <= m; ++i) rhs += G(i, k) * mip.d[i - 1];
        for (int idx = 0; idx < static_cast<int>(X.size()); ++idx) {
            double coef = 0.0;
            for (int i = 1; i <= m; ++i) {
                double dx = 0.0;
                for (int j = 0; j < mip.numVars(); ++j) dx += mip.D(i, j + 1) * X[idx][j];
                coef += G(i, k) * dx;
            }
            if (coef != 0.0) row.terms.push_back({idx, coef});
        }
        row.sense = Sense::EQ;
        row.rhs = rhs;
        lp.rows.push_back(std::move(row));
    }
    const LpResult hull = solve_lp(lp);
    if (hull.status != LpStatus::Optimal)
        throw SolverError("restricted_dual_check: hull LP not solved to optimality");

    RestrictedDualCheck out;
    out.cuttingPlane = trained.value;
    out.primalHull = hull.objective;
    out.pass = std::abs(out.cuttingPlane - out.primalHull) <= tol * (1.0 + std::abs(out.primalHull));
    return out;
}

double na_primal_characterization_value(const FiniteSupportProcess& tree,
                                        const MslotInstance& inst, const DualLayout& layout) {
    tree.validate();
    const auto leaves = tree.enumerate_paths();
    const CondMean condMean = tree_cond_mean(tree);
    const VariableLayout lay = inst.layout();
    const int q = inst.T * inst.J;
    if (leaves.size() > 16 || q > 10)
        throw std::invalid_argument("na_primal_characterization: instance too large");
    const int patterns = 1 << q;
    const int perStage = lay.numVars();

    MipModel lp;
    // z variables per (leaf, pattern, stage, var); mu per (leaf, pattern).
    const int perPattern = inst.T * perStage;
    std::vector<int> zBase(leaves.size() * patterns), muIdx(leaves.size() * patterns);
    std::vector<std::vector<StageBlock>> blocks(leaves.size());
    for (size_t L = 0; L < leaves.size(); ++L) {
        blocks[L].reserve(inst.T);
        for (int t = 1; t <= inst.T; ++t) {
            std::vector<double> demand(inst.J);
            for (int j = 1; j <= inst.J; ++j) demand[j - 1] = leaves[L].demands(t, j);
            blocks[L].push_back(stage_block(inst, t, demand));
        }
    }
    for (size_t L = 0; L < leaves.size(); ++L)
        for (int k = 0; k < patterns; ++k) {
            const size_t cell = L * patterns + k;
            zBase[cell] = lp.numVars();
            for (int t = 1; t <= inst.T; ++t) {
                const StageBlock& block = blocks[L][t - 1];
                for (int v = 0; v < perStage; ++v)
                    lp.addVar(0.0, kInfinity, leaves[L].prob * block.cost[v], false);
            }
            muIdx[cell] = lp.addVar(0.0, 1.0, 0.0, false);
        }

    auto zVar = [&](size_t cell, int t, int v) { return zBase[cell] + (t - 1) * perStage + v; };

    for (size_t L = 0; L < leaves.size(); ++L) {
        for (int k = 0; k < patterns; ++k) {
            const size_t cell = L * patterns + k;
            const int mu = muIdx[cell];
            for (int t = 1; t <= inst.T; ++t) {
                const StageBlock& block = blocks[L][t - 1];
                for (int r = 0; r < block.stateRows(); ++r) {
                    RowDef row;
                    for (const LinTerm& term : block.stateA[r])
                        row.terms.push_back({zVar(cell, t, term.var), term.coef});
                    for (const LinTerm& term : block.stateB[r])
                        row.terms.push_back({zVar(cell, t - 1, term.var), term.coef});
                    row.terms.push_back({mu, -block.stateRhs[r]});
                    row.sense = Sense::EQ;
                    row.rhs = 0.0;
                    lp.rows.push_back(std::move(row));
                }
                for (const RowDef& rec : block.recourse) {
                    RowDef row;
                    for (const LinTerm& term : rec.terms)
                        row.terms.push_back({zVar(cell, t, term.var), term.coef});
                    row.terms.push_back({mu, -rec.rhs});
                    row.sense = rec.sense;
                    row.rhs = 0.0;
                    lp.rows.push_back(std::move(row));
                }
                for (int v = 0; v < perStage; ++v) {
                    if (block.upper[v] >= kInfinity) continue;
                    RowDef row;
                    row.terms.push_back({zVar(cell, t, v), 1.0});
                    row.terms.push_back({mu, -block.upper[v]});
                    row.sense = Sense::LE;
                    row.rhs = 0.0;
                    lp.rows.push_back(std::move(row));
                }
                // Setup pattern fixing: z_y = bit * mu.
                for (int j = 1; j <= inst.J; ++j) {
                    const int bit = (k >> ((t - 1) * inst.J + (j - 1))) & 1;
                    const int zy = zVar(cell, t, lay.setup(j));
                    if (bit == 0) {
                        lp.upper[zy] = 0.0;
                    } else {
                        RowDef row;
                        row.terms.push_back({zy, 1.0});
                        row.terms.push_back({mu, -1.0});
                        row.sense = Sense::EQ;
                        row.rhs = 0.0;
                        lp.rows.push_back(std::move(row));
                    }
                }
            }
        }
        RowDef conv;
        for (int k = 0; k < patterns; ++k) conv.terms.push_back({muIdx[L * patterns + k], 1.0});
        conv.sense = Sense::EQ;
        conv.rhs = 1.0;
        lp.rows.push_back(std::move(conv));
    }

    // Aggregated nonanticipativity in expectation per penalized row and basis.
    for (const DualRow& row : layout.rows) {
        int local = 0;
        switch (row.var) {
            case NaVar::Production: local = lay.production(row.j); break;
            case NaVar::Inventory: local = lay.inventory(row.j); break;
            case NaVar::Backlog: local = lay.backlog(row.j); break;
        }
        for (size_t b = 0; b < row.basis.size(); ++b) {
            RowDef cons;
            for (size_t L = 0; L < leaves.size(); ++L) {
                const double w =
                    leaves[L].prob * basis_centered(row.basis[b], leaves[L], row.t, condMean);
                if (w == 0.0) continue;
                for (int k = 0; k < patterns; ++k)
                    cons.terms.push_back({zVar(L * patterns + k, row.t, local), w});
            }
            if (cons.terms.empty()) continue;
            cons.sense = Sense::EQ;
            cons.rhs = 0.0;
            lp.rows.push_back(std::move(cons));
        }
    }

    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
        throw SolverError("na_primal_characterization: hull LP not solved");
    return r.objective;
}

GapReport ordering_report(const std::string& instanceId,
                          const std::optional<BoundEstimate>& piLb,
                          const std::optional<BoundEstimate>& swLb,
                          const std::optional<BoundEstimate>& naLb,
                          const std::optional<BoundEstimate>& condExpUb,
                          const std::optional<BoundEstimate>& swUb,
                          const std::optional<BoundEstimate>& naUb) {
    GapReport r;
    r.instance = instanceId;
    r.piLb = piLb;
    r.swLb = swLb;
    r.naLb = naLb;
    r.condExpUb = condExpUb;
    r.swUb = swUb;
    r.naUb = naUb;

    auto missing = [&](const char* name, const std::optional<BoundEstimate>& b) {
        if (!b) r.flags.push_back(std::string("missing:") + name);
        return !b;
    };
    const bool partial = missing("pi", piLb) | missing("sw", swLb) | missing("na", naLb) |
                         missing("condexp", condExpUb) | missing("swUb", swUb) |
                         missing("naUb", naUb);

    auto clearlyAbove = [](const BoundEstimate& a, const BoundEstimate& b) {
        return a.mean - b.mean > a.halfwidth + b.halfwidth;
    };
    if (swLb && naLb && clearlyAbove(*swLb, *naLb)) r.flags.push_back("sw_lb_above_na_lb");
    if (piLb && naLb && clearlyAbove(*piLb, *naLb)) r.flags.push_back("pi_above_na_lb");
    const BoundEstimate* bestLb = nullptr;
    for (const auto* lb : {piLb ? &*piLb : nullptr, swLb ? &*swLb : nullptr,
                           naLb ? &*naLb : nullptr})
        if (lb && (!bestLb || lb->mean > bestLb->mean)) bestLb = lb;
    for (const auto& [name, ub] :
         {std::pair{"condexp", condExpUb ? &*condExpUb : nullptr},
          std::pair{"swUb", swUb ? &*swUb : nullptr}, std::pair{"naUb", naUb ? &*naUb : nullptr}})
        if (bestLb && ub && clearlyAbove(*bestLb, *ub))
            r.flags.push_back(std::string("ub_below_lb:") + name);

    if (piLb && condExpUb && naLb && swUb) {
        const double gap = condExpUb->mean - piLb->mean;
        r.relativeGapPct = piLb->mean != 0.0 ? 100.0 * gap / std::abs(piLb->mean) : 0.0;
        if (std::abs(gap) <= 1e-9 * (1.0 + std::abs(condExpUb->mean))) {
            r.degenerate = true;
        } else {
            r.gapClosureFraction =
                ((naLb->mean - piLb->mean) + (condExpUb->mean - swUb->mean)) / gap;
        }
    } else if (!partial) {
        r.degenerate = true;
    }
    return r;
}

}  // namespace lddr
