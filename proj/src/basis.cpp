#include "lddr/basis.hpp"

#include <algorithm>
#include <stdexcept>

namespace lddr {

namespace {

// Table-style stagewise catalog for row (t, j).
std::vector<BasisFn> sw_catalog(int option, bool includeConstant, int t, int j, int J) {
    std::vector<BasisFn> fns;
    if (includeConstant) fns.push_back({true, 0, 0});
    switch (option) {
        case 1:
            for (int s = 1; s <= t; ++s)
                for (int jj = 1; jj <= J; ++jj) fns.push_back({false, s, jj});
            break;
        case 2:
            for (int jj = 1; jj <= J; ++jj) fns.push_back({false, t, jj});
            break;
        case 3:
            for (int s = 1; s <= t; ++s) fns.push_back({false, s, j});
            break;
        case 4:
            fns.push_back({false, t, j});
            break;
        default:
            throw std::invalid_argument("basis: option must be 1..4");
    }
    return fns;
}

// Nonanticipative catalog for row (t, j): strictly future demands. Constants
// and observed demands center to zero, so they are omitted.
std::vector<BasisFn> na_catalog(int option, int t, int j, int J, int T) {
    std::vector<BasisFn> fns;
    switch (option) {
        case 1:
            for (int s = t + 1; s <= T; ++s)
                for (int jj = 1; jj <= J; ++jj) fns.push_back({false, s, jj});
            break;
        case 2:
            if (t + 1 <= T)
                for (int jj = 1; jj <= J; ++jj) fns.push_back({false, t + 1, jj});
            break;
        case 3:
            for (int s = t + 1; s <= T; ++s) fns.push_back({false, s, j});
            break;
        case 4:
            if (t + 1 <= T) fns.push_back({false, t + 1, j});
            break;
        default:
            throw std::invalid_argument("basis: option must be 1..4");
    }
    return fns;
}

void append_unique(std::vector<BasisFn>& dst, const std::vector<BasisFn>& src) {
    for (const BasisFn& fn : src)
        if (std::find(dst.begin(), dst.end(), fn) == dst.end()) dst.push_back(fn);
}

std::vector<NaVar> selected_vars(NaVarSet set) {
    switch (set) {
        case NaVarSet::XOnly: return {NaVar::Production};
        case NaVarSet::StateOnly: return {NaVar::Inventory, NaVar::Backlog};
        case NaVarSet::All: return {NaVar::Production, NaVar::Inventory, NaVar::Backlog};
    }
    return {};
}

}  // namespace

void BasisSpec::validate() const {
    if (option < 1 || option > 4) throw std::invalid_argument("basis: option must be 1..4");
    if (liftedFromSw && (liftOption < 1 || liftOption > 4))
        throw std::invalid_argument("basis: lift option must be 1..4");
    if (liftedFromSw && kind != DualKind::Nonanticipative)
        throw std::invalid_argument("basis: lifted specs are nonanticipative");
}

BasisSpec lift_sw_to_na(const BasisSpec& swSpec) {
    if (swSpec.kind != DualKind::Stagewise)
        throw std::invalid_argument("lift_sw_to_na: source must be stagewise");
    swSpec.validate();
    BasisSpec na;
    na.kind = DualKind::Nonanticipative;
    na.naVars = NaVarSet::All;
    na.liftedFromSw = true;
    na.liftOption = swSpec.option;
    na.liftIncludeConstant = swSpec.includeConstant;
    na.keepStage1 = swSpec.keepStage1;
    return na;
}

DualLayout make_layout(const BasisSpec& spec, int T, int J) {
    spec.validate();
    DualLayout layout;
    layout.spec = spec;
    layout.T = T;
    layout.J = J;
    layout.index_.assign(static_cast<size_t>(T) * 3 * J, -1);

    auto put = [&](int t, NaVar var, int j, std::vector<BasisFn> basis) {
        DualRow row;
        row.t = t;
        row.var = var;
        row.j = j;
        row.offset = layout.dim;
        row.basis = std::move(basis);
        layout.dim += static_cast<int>(row.basis.size());
        layout.index_[((static_cast<size_t>(t) - 1) * 3 + static_cast<int>(var)) * J + (j - 1)] =
            static_cast<int>(layout.rows.size());
        layout.rows.push_back(std::move(row));
    };

    if (spec.kind == DualKind::Stagewise) {
        const int firstStage = spec.keepStage1 ? 2 : 1;
        for (int t = firstStage; t <= T; ++t)
            for (int j = 1; j <= J; ++j)
                put(t, NaVar::Production, j,
                    sw_catalog(spec.option, spec.includeConstant, t, j, J));
        return layout;
    }

    if (!spec.liftedFromSw) {
        for (int t = 1; t <= T; ++t)
            for (NaVar var : selected_vars(spec.naVars))
                for (int j = 1; j <= J; ++j)
                    put(t, var, j, na_catalog(spec.option, t, j, J, T));
        return layout;
    }

    // Lifted layout: the state-equation pattern routes the stagewise basis of
    // stage t onto the (inventory, backlog) rows of stage t and onto the
    // (inventory, backlog, production) rows of stage t-1.
    const int firstRelaxed = spec.keepStage1 ? 2 : 1;
    for (int t = 1; t <= T; ++t)
        for (NaVar var : selected_vars(NaVarSet::All))
            for (int j = 1; j <= J; ++j) {
                std::vector<BasisFn> fns;
                if (var != NaVar::Production && t >= firstRelaxed)
                    append_unique(fns,
                                  sw_catalog(spec.liftOption, spec.liftIncludeConstant, t, j, J));
                if (t + 1 <= T)
                    append_unique(fns, sw_catalog(spec.liftOption, spec.liftIncludeConstant,
                                                  t + 1, j, J));
                put(t, var, j, std::move(fns));
            }
    return layout;
}

int DualLayout::rowAt(int t, NaVar var, int j) const {
    if (t < 1 || t > T || j < 1 || j > J) return -1;
    return index_[((static_cast<size_t>(t) - 1) * 3 + static_cast<int>(var)) * J + (j - 1)];
}

DualCoefficients zero_coefficients(std::shared_ptr<const DualLayout> layout) {
    DualCoefficients c;
    c.w.assign(layout->dim, 0.0);
    c.layout = std::move(layout);
    return c;
}

double basis_value(const BasisFn& fn, const ScenarioPath& path) {
    return fn.constant ? 1.0 : path.demands(fn.s, fn.j);
}

double basis_cond_expect(const BasisFn& fn, const ScenarioPath& path, int tObs,
                         const CondMean& condMean) {
    if (fn.constant) return 1.0;
    if (fn.s <= tObs) return path.demands(fn.s, fn.j);
    return condMean(path, tObs, fn.s - tObs, fn.j);
}

double basis_centered(const BasisFn& fn, const ScenarioPath& path, int tObs,
                      const CondMean& condMean) {
    if (fn.constant || fn.s <= tObs) return 0.0;
    return path.demands(fn.s, fn.j) - condMean(path, tObs, fn.s - tObs, fn.j);
}

std::vector<double> sw_basis_values(const DualLayout& layout, int row, const ScenarioPath& path) {
    const DualRow& r = layout.rows[row];
    std::vector<double> out(r.basis.size());
    for (size_t k = 0; k < r.basis.size(); ++k) out[k] = basis_value(r.basis[k], path);
    return out;
}

std::vector<double> na_centered_values(const DualLayout& layout, int row,
                                       const ScenarioPath& path, const CondMean& condMean) {
    const DualRow& r = layout.rows[row];
    std::vector<double> out(r.basis.size());
    for (size_t k = 0; k < r.basis.size(); ++k)
        out[k] = basis_centered(r.basis[k], path, r.t, condMean);
    return out;
}

double sw_multiplier(const DualCoefficients& coeffs, int t, int j, const ScenarioPath& path) {
    const DualLayout& layout = *coeffs.layout;
    const int row = layout.rowAt(t, NaVar::Production, j);
    if (row < 0) return 0.0;
    const DualRow& r = layout.rows[row];
    double acc = 0.0;
    for (size_t k = 0; k < r.basis.size(); ++k)
        acc += coeffs.w[r.offset + k] * basis_value(r.basis[k], path);
    return acc;
}

double sw_multiplier_cond_expect(const DualCoefficients& coeffs, int t, int j,
                                 const ScenarioPath& path, int tObs, const CondMean& condMean) {
    const DualLayout& layout = *coeffs.layout;
    const int row = layout.rowAt(t, NaVar::Production, j);
    if (row < 0) return 0.0;
    const DualRow& r = layout.rows[row];
    double acc = 0.0;
    for (size_t k = 0; k < r.basis.size(); ++k)
        acc += coeffs.w[r.offset + k] * basis_cond_expect(r.basis[k], path, tObs, condMean);
    return acc;
}

}  // namespace lddr
