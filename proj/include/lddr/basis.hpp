#pragma once

#include <memory>
#include <vector>

#include "lddr/instance.hpp"
#include "lddr/process.hpp"

namespace lddr {

enum class DualKind { Stagewise, Nonanticipative };
enum class NaVar { Production = 0, Inventory = 1, Backlog = 2 };
enum class NaVarSet { XOnly, StateOnly, All };

// One scalar basis function: the constant 1 or the demand observation D_{s,j}.
struct BasisFn {
    bool constant = false;
    int s = 0;
    int j = 0;

    bool operator==(const BasisFn&) const = default;
};

// Catalog choice for the multiplier decision rules. Options 1..4 trade basis
// richness against dimension; lifted specs embed a stagewise catalog into the
// nonanticipative dual so that the bound-ordering guarantee applies.
struct BasisSpec {
    DualKind kind = DualKind::Stagewise;
    int option = 1;
    NaVarSet naVars = NaVarSet::XOnly;
    bool includeConstant = true;  // stagewise rows only
    bool keepStage1 = true;       // stagewise: stage-1 state rows stay in the subproblem
    bool liftedFromSw = false;
    int liftOption = 4;
    bool liftIncludeConstant = true;

    void validate() const;
};

BasisSpec lift_sw_to_na(const BasisSpec& swSpec);

// A penalized row: a state-equation row (stagewise) or a variable row
// (nonanticipative), together with its basis list and flat weight offset.
struct DualRow {
    int t = 0;
    NaVar var = NaVar::Production;  // meaningful for the NA dual only
    int j = 0;
    int offset = 0;
    std::vector<BasisFn> basis;
};

struct DualLayout {
    BasisSpec spec;
    int T = 0, J = 0;
    std::vector<DualRow> rows;
    int dim = 0;

    int rowAt(int t, NaVar var, int j) const;  // -1 when absent

  private:
    friend DualLayout make_layout(const BasisSpec&, int T, int J);
    std::vector<int> index_;
};

DualLayout make_layout(const BasisSpec& spec, int T, int J);

inline DualLayout make_layout(const BasisSpec& spec, const MslotInstance& inst) {
    return make_layout(spec, inst.T, inst.J);
}

struct DualCoefficients {
    std::shared_ptr<const DualLayout> layout;
    std::vector<double> w;

    DualKind kind() const { return layout->spec.kind; }
    double weight(int row, int k) const { return w[layout->rows[row].offset + k]; }
};

DualCoefficients zero_coefficients(std::shared_ptr<const DualLayout> layout);

// Pointwise basis evaluations.
double basis_value(const BasisFn& fn, const ScenarioPath& path);
// E[fn | history up to tObs].
double basis_cond_expect(const BasisFn& fn, const ScenarioPath& path, int tObs,
                         const CondMean& condMean);
// fn - E[fn | history up to tObs]; observed entries and constants give exact 0.
double basis_centered(const BasisFn& fn, const ScenarioPath& path, int tObs,
                      const CondMean& condMean);

std::vector<double> sw_basis_values(const DualLayout& layout, int row, const ScenarioPath& path);
std::vector<double> na_centered_values(const DualLayout& layout, int row,
                                       const ScenarioPath& path, const CondMean& condMean);

// Stagewise multiplier pi_{tj}(xi^t) and its conditional expectation given an
// earlier observation stage.
double sw_multiplier(const DualCoefficients& coeffs, int t, int j, const ScenarioPath& path);
double sw_multiplier_cond_expect(const DualCoefficients& coeffs, int t, int j,
                                 const ScenarioPath& path, int tObs, const CondMean& condMean);

}  // namespace lddr
