#include "lddr/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "lddr/simplex.hpp"

namespace lddr {

void MipModel::validate() const {
    const size_t n = objective.size();
    if (lower.size() != n || upper.size() != n || integer.size() != n)
        throw std::invalid_argument("model: inconsistent variable arrays");
    for (size_t j = 0; j < n; ++j) {
        if (lower[j] > upper[j]) throw std::invalid_argument("model: lower > upper");
        if (!std::isfinite(objective[j])) throw std::invalid_argument("model: objective not finite");
    }
    for (const RowDef& row : rows) {
        if (!std::isfinite(row.rhs)) throw std::invalid_argument("model: rhs not finite");
        for (const LinTerm& term : row.terms) {
            if (term.var < 0 || term.var >= static_cast<int>(n))
                throw std::invalid_argument("model: row term out of range");
            if (!std::isfinite(term.coef)) throw std::invalid_argument("model: coef not finite");
        }
    }
}

double MipModel::evaluateObjective(const std::vector<double>& x) const {
    double v = 0.0;
    for (size_t j = 0; j < objective.size(); ++j) v += objective[j] * x[j];
    return v;
}

double MipModel::infeasibility(const std::vector<double>& x) const {
    double worst = 0.0;
    for (size_t j = 0; j < objective.size(); ++j) {
        worst = std::max(worst, lower[j] - x[j]);
        worst = std::max(worst, x[j] - upper[j]);
        if (integer[j]) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (const RowDef& row : rows) {
        double act = 0.0;
        for (const LinTerm& term : row.terms) act += term.coef * x[term.var];
        switch (row.sense) {
            case Sense::LE: worst = std::max(worst, act - row.rhs); break;
            case Sense::GE: worst = std::max(worst, row.rhs - act); break;
            case Sense::EQ: worst = std::max(worst, std::abs(act - row.rhs)); break;
        }
    }
    return worst;
}

namespace {

struct BranchNode {
    std::vector<double> lo, up;
    double bound = 0.0;
    long id = 0;
};

struct NodeOrder {
    bool operator()(const BranchNode& a, const BranchNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

int pick_fractional(const MipModel& model, const std::vector<double>& x) {
    int best = -1;
    double bestDist = kIntegralityTol;
    for (int j = 0; j < model.numVars(); ++j) {
        if (!model.integer[j]) continue;
        const double dist = std::abs(x[j] - std::round(x[j]));
        if (dist > bestDist + 1e-12) {
            bestDist = dist;
            best = j;
        }
    }
    return best;
}

}  // namespace

SolveResult solve(const MipModel& model, const SolveOptions& opts) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    model.validate();
    if (opts.dumpModel && !opts.dumpPath.empty()) {
        std::ofstream out(opts.dumpPath);
        out << to_lp_format(model);
    }
    for (int j = 0; j < model.numVars(); ++j)
        if (model.integer[j] && (model.lower[j] <= -kInfinity || model.upper[j] >= kInfinity))
            throw std::invalid_argument("solve: integer variables need finite bounds");

    // Internally always minimize.
    MipModel work = model;
    if (model.maximize) {
        work.maximize = false;
        for (double& c : work.objective) c = -c;
    }

    SolveResult res;
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    auto finish = [&](SolveStatus st) {
        res.status = st;
        res.wallSec = elapsed();
        if (model.maximize) res.objective = -res.objective;
        return res;
    };

    double incumbent = std::numeric_limits<double>::infinity();
    std::vector<double> incumbentX;

    std::priority_queue<BranchNode, std::vector<BranchNode>, NodeOrder> open;
    long nextId = 0;
    BranchNode root{work.lower, work.upper, -std::numeric_limits<double>::infinity(), nextId++};
    bool haveCurrent = true;
    BranchNode current = std::move(root);
    double bestOpenBound = -std::numeric_limits<double>::infinity();
    bool anyLpSolved = false;
    bool limitHit = false;

    while (haveCurrent || !open.empty()) {
        if (!haveCurrent) {
            current = open.top();
            open.pop();
        }
        haveCurrent = false;

        const double gapEps = opts.relGap * (1.0 + std::abs(incumbent));
        if (std::isfinite(incumbent) && current.bound >= incumbent - gapEps) continue;
        if ((opts.nodeLimit > 0 && res.nodes >= opts.nodeLimit) ||
            (opts.timeLimitSec > 0 && elapsed() > opts.timeLimitSec)) {
            limitHit = true;
            bestOpenBound = current.bound;
            break;
        }

        ++res.nodes;
        work.lower = current.lo;
        work.upper = current.up;
        LpResult lp = solve_lp(work);
        anyLpSolved = true;
        if (lp.status == LpStatus::Infeasible) continue;
        if (lp.status == LpStatus::Unbounded) {
            if (!std::isfinite(incumbent)) return finish(SolveStatus::Unbounded);
            continue;
        }
        if (lp.status == LpStatus::IterLimit)
            throw SolverError("solve: LP iteration limit inside branch and bound");
        if (std::isfinite(incumbent) && lp.objective >= incumbent - gapEps) continue;

        const int frac = pick_fractional(work, lp.x);
        if (frac < 0) {
            if (lp.objective < incumbent - 1e-12) {
                incumbent = lp.objective;
                incumbentX = lp.x;
            }
            continue;
        }

        const double v = lp.x[frac];
        BranchNode down{current.lo, current.up, lp.objective, nextId++};
        down.up[frac] = std::floor(v);
        BranchNode upNode{current.lo, current.up, lp.objective, nextId++};
        upNode.lo[frac] = std::ceil(v);
        // Plunge into the down branch, queue the other.
        open.push(std::move(upNode));
        current = std::move(down);
        haveCurrent = true;
    }

    if (!anyLpSolved && limitHit) {
        // Limits prevented even the root solve.
        res.objective = 0.0;
        return finish(SolveStatus::LimitReached);
    }

    if (!std::isfinite(incumbent)) {
        if (limitHit) {
            res.objective = 0.0;
            return finish(SolveStatus::LimitReached);
        }
        res.objective = 0.0;
        return finish(SolveStatus::Infeasible);
    }

    res.objective = incumbent;
    res.x = incumbentX;
    if (limitHit) {
        double lowBound = std::min(bestOpenBound, incumbent);
        if (!open.empty()) lowBound = std::min(lowBound, open.top().bound);
        res.gap = (incumbent - lowBound) / (1.0 + std::abs(incumbent));
        return finish(SolveStatus::LimitReached);
    }
    res.gap = 0.0;
    return finish(SolveStatus::Optimal);
}

std::string to_lp_format(const MipModel& model) {
    std::ostringstream out;
    out.precision(12);
    out << (model.maximize ? "Maximize" : "Minimize") << "\n obj:";
    for (int j = 0; j < model.numVars(); ++j) {
        const double c = model.objective[j];
        if (c == 0.0) continue;
        out << (c >= 0 ? " + " : " - ") << std::abs(c) << " x" << j;
    }
    out << "\nSubject To\n";
    for (size_t i = 0; i < model.rows.size(); ++i) {
        const RowDef& row = model.rows[i];
        out << " r" << i << ":";
        for (const LinTerm& term : row.terms)
            out << (term.coef >= 0 ? " + " : " - ") << std::abs(term.coef) << " x" << term.var;
        switch (row.sense) {
            case Sense::LE: out << " <= "; break;
            case Sense::GE: out << " >= "; break;
            case Sense::EQ: out << " = "; break;
        }
        out << row.rhs << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < model.numVars(); ++j) {
        if (model.lower[j] <= -kInfinity)
            out << " -inf";
        else
            out << " " << model.lower[j];
        out << " <= x" << j << " <= ";
        if (model.upper[j] >= kInfinity)
            out << "+inf\n";
        else
            out << model.upper[j] << "\n";
    }
    bool anyInt = false;
    for (int j = 0; j < model.numVars(); ++j)
        if (model.integer[j]) {
            if (!anyInt) out << "Generals\n";
            anyInt = true;
            out << " x" << j << "\n";
        }
    out << "End\n";
    return out.str();
}

}  // namespace lddr
