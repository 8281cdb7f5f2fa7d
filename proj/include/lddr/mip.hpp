#pragma once

#include <string>
#include <vector>

#include "lddr/common.hpp"

namespace lddr {

enum class Sense { LE, EQ, GE };

struct LinTerm {
    int var = 0;
    double coef = 0.0;
};

struct RowDef {
    std::vector<LinTerm> terms;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

struct MipModel {
    std::vector<double> lower, upper, objective;
    std::vector<bool> integer;
    std::vector<RowDef> rows;
    bool maximize = false;

    int numVars() const { return static_cast<int>(objective.size()); }

    int addVar(double lo, double hi, double obj, bool isInteger = false) {
        lower.push_back(lo);
        upper.push_back(hi);
        objective.push_back(obj);
        integer.push_back(isInteger);
        return numVars() - 1;
    }

    void addRow(std::vector<LinTerm> terms, Sense sense, double rhs) {
        rows.push_back({std::move(terms), sense, rhs});
    }

    void validate() const;
    double evaluateObjective(const std::vector<double>& x) const;
    // Max violation over rows and bounds (0 when feasible).
    double infeasibility(const std::vector<double>& x) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, LimitReached };

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    double gap = 0.0;
    double wallSec = 0.0;
    long nodes = 0;
};

struct SolveOptions {
    double relGap = 1e-6;
    double timeLimitSec = -1.0;  // <= 0: none
    long nodeLimit = -1;         // <= 0: none
    bool dumpModel = false;
    std::string dumpPath;
};

// Deterministic exact solve: LP relaxations by bounded-variable simplex,
// integrality by best-bound branch and bound. Optimal results satisfy all
// rows within 1e-6 and integrality within 1e-5.
SolveResult solve(const MipModel& model, const SolveOptions& opts = {});

// LP-format text dump for debugging.
std::string to_lp_format(const MipModel& model);

}  // namespace lddr
