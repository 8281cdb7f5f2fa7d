#pragma once

#include <vector>

#include "lddr/mip.hpp"

namespace lddr {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;        // structural variable values
    std::vector<double> rowDual;  // simplex multipliers per row (minimization sign)
    long iterations = 0;
};

// Bounded-variable primal simplex with a two-phase start, explicit basis
// inverse and periodic refactorization. Deterministic pivoting (Dantzig with
// fixed tie-breaks, Bland fallback under degeneracy). Integrality flags are
// ignored; `maximize` is honored.
LpResult solve_lp(const MipModel& model);

}  // namespace lddr
