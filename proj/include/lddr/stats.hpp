#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/mip.hpp"
#include "lddr/parallel.hpp"
#include "lddr/process.hpp"

namespace lddr {

enum class BoundSide { Lower, Upper };

struct BoundEstimate {
    double mean = 0.0;
    double halfwidth = 0.0;
    int n = 0;
    double level = 0.95;
    BoundSide side = BoundSide::Lower;
    std::string method;
    bool degenerate = false;  // single observation, halfwidth undefined

    double bound() const { return side == BoundSide::Lower ? mean - halfwidth : mean + halfwidth; }
};

double student_t_quantile(double p, int dof);

BoundEstimate confidence_interval(std::span<const double> values, double level, BoundSide side,
                                  std::string method = {});

// Statistically valid lower bound from fixed dual coefficients evaluated on an
// independent sample.
BoundEstimate lower_bound(const DualCoefficients& coeffs, const MslotInstance& inst,
                          std::span<const ScenarioPath> evalPaths, const CondMean& condMean,
                          double level = 0.95, const SolveOptions& opts = {},
                          ExecMode mode = ExecMode::Parallel);

// Exact optimum of the tree's deterministic equivalent (verification oracle).
double extensive_optimum(const FiniteSupportProcess& tree, const MslotInstance& inst,
                         const SolveOptions& opts = {}, int leafGuard = 64);

// Exact restricted-dual value via the primal characterization on a tree: the
// per-leaf feasible sets are replaced by their convex hulls (disjunction over
// setup patterns) and the penalized rows become aggregated expectation
// equalities. Independent of the cutting-plane route.
double na_primal_characterization_value(const FiniteSupportProcess& tree,
                                        const MslotInstance& inst, const DualLayout& layout);

// Small pure-integer MIP min{c'x : Dx = d, x in X} with X an enumerable
// lattice set; the equality system is the one being dualized.
struct SmallMip {
    std::vector<double> c;
    Matrix D;
    std::vector<double> d;
    std::vector<int> lo, hi;
    std::vector<RowDef> side;

    int numVars() const { return static_cast<int>(c.size()); }
};

struct RestrictedDualCheck {
    bool pass = false;
    double cuttingPlane = 0.0;
    double primalHull = 0.0;
};

// Restricted-dual equivalence check: cutting-plane maximization of z(G a)
// against the hull LP with aggregated constraints G'(Dx - d) = 0.
RestrictedDualCheck restricted_dual_check(const SmallMip& mip, const Matrix& G,
                                          double tol = 1e-6);

struct GapReport {
    std::string instance;
    std::optional<BoundEstimate> piLb, swLb, naLb, condExpUb, swUb, naUb;
    double relativeGapPct = 0.0;
    double gapClosureFraction = 0.0;
    bool degenerate = false;
    std::vector<std::string> flags;
};

GapReport ordering_report(const std::string& instanceId,
                          const std::optional<BoundEstimate>& piLb,
                          const std::optional<BoundEstimate>& swLb,
                          const std::optional<BoundEstimate>& naLb,
                          const std::optional<BoundEstimate>& condExpUb,
                          const std::optional<BoundEstimate>& swUb,
                          const std::optional<BoundEstimate>& naUb);

}  // namespace lddr
