#include "lddr/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lddr {

namespace {

constexpr double kDualTol = 1e-7;
constexpr double kBoundTol = 1e-7;
constexpr double kArtifTol = 1e-7;
constexpr int kRefactorEvery = 128;
constexpr int kBlandTrigger = 400;

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

struct SimplexParams {
    double pivotTol = 1e-9;
    bool blandAlways = false;
    int refactorEvery = kRefactorEvery;
};

struct Col {
    std::vector<int> row;
    std::vector<double> val;
};

class Simplex {
  public:
    Simplex(const MipModel& model, const SimplexParams& params)
        : model_(model), params_(params) {
        build();
    }

    LpResult run() {
        LpResult res;
        if (m_ > 0) {
            phase_ = 1;
            const LpStatus s1 = iterate();
            if (s1 == LpStatus::IterLimit) {
                res.status = LpStatus::IterLimit;
                res.iterations = iters_;
                return res;
            }
            double infeas = 0.0;
            for (int a = 0; a < m_; ++a) infeas += varValue(artStart_ + a);
            if (infeas > kArtifTol * (1.0 + bScale_)) {
                res.status = LpStatus::Infeasible;
                res.iterations = iters_;
                return res;
            }
            // Pin artificials for phase 2.
            for (int a = 0; a < m_; ++a) up_[artStart_ + a] = 0.0;
            refactor();
        }
        phase_ = 2;
        const LpStatus s2 = iterate();
        res.status = s2;
        res.iterations = iters_;
        if (s2 != LpStatus::Optimal) return res;
        if (m_ > 0) {
            refactor();
            double viol = 0.0;
            for (int k = 0; k < m_; ++k) {
                const int b = basis_[k];
                viol = std::max(viol, lo_[b] - xB_[k]);
                viol = std::max(viol, xB_[k] - up_[b]);
            }
            if (viol > 1e-6 * (1.0 + bScale_))
                throw SolverError("simplex: basic solution drifted out of bounds");
        }

        res.x.assign(nStruct_, 0.0);
        for (int j = 0; j < nStruct_; ++j) res.x[j] = varValue(j);
        double obj = 0.0;
        for (int j = 0; j < nStruct_; ++j) obj += model_.objective[j] * res.x[j];
        res.objective = obj;
        res.rowDual.assign(m_, 0.0);
        computeDuals(res.rowDual);
        if (model_.maximize)
            for (double& y : res.rowDual) y = -y;
        return res;
    }

  private:
    const MipModel& model_;
    SimplexParams params_;
    int nStruct_ = 0, m_ = 0, nTotal_ = 0, slackStart_ = 0, artStart_ = 0;
    std::vector<Col> cols_;
    std::vector<double> lo_, up_, cost_;  // cost_ is the phase-2 objective (sign-adjusted)
    std::vector<double> rhs_;
    std::vector<VarState> state_;
    std::vector<int> basis_;       // basis_[k] = variable in basis position k
    std::vector<int> basisPos_;    // variable -> basis position or -1
    std::vector<double> xB_;
    std::vector<double> binv_;     // row-major m x m
    double bScale_ = 1.0;
    int phase_ = 1;
    long iters_ = 0;
    int sinceRefactor_ = 0;
    int degenStreak_ = 0;
    int pricingCursor_ = 0;
    bool bland_ = false;

    double& binv(int r, int c) { return binv_[static_cast<size_t>(r) * m_ + c]; }

    void build() {
        nStruct_ = model_.numVars();
        m_ = static_cast<int>(model_.rows.size());
        slackStart_ = nStruct_;
        artStart_ = nStruct_ + m_;
        nTotal_ = nStruct_ + 2 * m_;

        cols_.assign(nTotal_, {});
        lo_.assign(nTotal_, 0.0);
        up_.assign(nTotal_, 0.0);
        cost_.assign(nTotal_, 0.0);
        rhs_.assign(m_, 0.0);

        const double sign = model_.maximize ? -1.0 : 1.0;
        for (int j = 0; j < nStruct_; ++j) {
            lo_[j] = model_.lower[j];
            up_[j] = model_.upper[j];
            cost_[j] = sign * model_.objective[j];
        }
        // Row-wise terms scattered into merged sparse columns.
        std::vector<double> work(nStruct_, 0.0);
        std::vector<int> touched;
        for (int i = 0; i < m_; ++i) {
            const RowDef& row = model_.rows[i];
            touched.clear();
            for (const LinTerm& term : row.terms) {
                if (work[term.var] == 0.0) touched.push_back(term.var);
                work[term.var] += term.coef;
            }
            std::sort(touched.begin(), touched.end());
            for (int v : touched) {
                if (work[v] != 0.0) {
                    cols_[v].row.push_back(i);
                    cols_[v].val.push_back(work[v]);
                }
                work[v] = 0.0;
            }
            rhs_[i] = row.rhs;
            bScale_ = std::max(bScale_, std::abs(row.rhs));

            const int s = slackStart_ + i;
            cols_[s].row.push_back(i);
            cols_[s].val.push_back(1.0);
            switch (row.sense) {
                case Sense::LE: lo_[s] = 0.0; up_[s] = kInfinity; break;
                case Sense::GE: lo_[s] = -kInfinity; up_[s] = 0.0; break;
                case Sense::EQ: lo_[s] = up_[s] = 0.0; break;
            }
        }

        // Nonbasic starting point.
        state_.assign(nTotal_, VarState::AtLower);
        for (int j = 0; j < nTotal_; ++j) state_[j] = defaultState(j);

        // Residuals decide which rows need an artificial in the basis.
        std::vector<double> resid = rhs_;
        for (int j = 0; j < nStruct_ + m_; ++j) {
            const double v = nonbasicValue(j);
            if (v == 0.0) continue;
            const Col& col = cols_[j];
            for (size_t k = 0; k < col.row.size(); ++k) resid[col.row[k]] -= col.val[k] * v;
        }

        basis_.assign(m_, -1);
        basisPos_.assign(nTotal_, -1);
        xB_.assign(m_, 0.0);
        binv_.assign(static_cast<size_t>(m_) * m_, 0.0);

        for (int i = 0; i < m_; ++i) {
            const int s = slackStart_ + i;
            const int a = artStart_ + i;
            const double nb = nonbasicValue(s);
            const double free = resid[i] + nb;  // slack value if it were basic
            if (free >= lo_[s] - kBoundTol && free <= up_[s] + kBoundTol) {
                basis_[i] = s;
                xB_[i] = std::clamp(free, lo_[s], up_[s]);
                state_[s] = VarState::Basic;
                // Matching artificial stays fixed at zero.
                cols_[a].row.push_back(i);
                cols_[a].val.push_back(1.0);
                lo_[a] = up_[a] = 0.0;
            } else {
                const double short_ = resid[i];
                cols_[a].row.push_back(i);
                cols_[a].val.push_back(short_ >= 0.0 ? 1.0 : -1.0);
                lo_[a] = 0.0;
                up_[a] = kInfinity;
                basis_[i] = a;
                xB_[i] = std::abs(short_);
                state_[a] = VarState::Basic;
            }
            basisPos_[basis_[i]] = i;
            binv(i, i) = 1.0;
        }
        // Slack starting basis is the identity only if artificial coefficients
        // are +1; flip the inverse row where they are -1.
        for (int i = 0; i < m_; ++i)
            if (basis_[i] == artStart_ + i && cols_[artStart_ + i].val[0] < 0.0) binv(i, i) = -1.0;
    }

    VarState defaultState(int j) const {
        if (lo_[j] <= -kInfinity && up_[j] >= kInfinity) return VarState::FreeZero;
        if (lo_[j] > -kInfinity) return VarState::AtLower;
        return VarState::AtUpper;
    }

    double nonbasicValue(int j) const {
        switch (state_[j]) {
            case VarState::AtLower: return lo_[j];
            case VarState::AtUpper: return up_[j];
            case VarState::FreeZero: return 0.0;
            case VarState::Basic: break;
        }
        return 0.0;
    }

    double varValue(int j) const {
        return state_[j] == VarState::Basic ? xB_[basisPos_[j]] : nonbasicValue(j);
    }

    double phaseCost(int j) const {
        if (phase_ == 2) return cost_[j];
        return j >= artStart_ ? 1.0 : 0.0;
    }

    void computeDuals(std::vector<double>& y) const {
        for (int i = 0; i < m_; ++i) y[i] = 0.0;
        for (int k = 0; k < m_; ++k) {
            const double cb = phaseCost(basis_[k]);
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int i = 0; i < m_; ++i) y[i] += cb * row[i];
        }
    }

    double reducedCost(int j, const std::vector<double>& y) const {
        double d = phaseCost(j);
        const Col& col = cols_[j];
        for (size_t k = 0; k < col.row.size(); ++k) d -= y[col.row[k]] * col.val[k];
        return d;
    }

    void refactor() {
        // Gauss-Jordan inverse of the basis matrix with partial pivoting.
        std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            const Col& col = cols_[basis_[k]];
            for (size_t e = 0; e < col.row.size(); ++e)
                B[static_cast<size_t>(col.row[e]) * m_ + k] = col.val[e];
        }
        std::fill(binv_.begin(), binv_.end(), 0.0);
        for (int i = 0; i < m_; ++i) binv(i, i) = 1.0;
        std::vector<int> perm(m_);
        for (int i = 0; i < m_; ++i) perm[i] = i;
        for (int c = 0; c < m_; ++c) {
            int best = -1;
            double bestAbs = 1e-11;
            for (int r = c; r < m_; ++r) {
                const double v = std::abs(B[static_cast<size_t>(perm[r]) * m_ + c]);
                if (v > bestAbs) {
                    bestAbs = v;
                    best = r;
                }
            }
            if (best < 0) throw SolverError("simplex: singular basis during refactorization");
            std::swap(perm[c], perm[best]);
            const int pr = perm[c];
            const double piv = B[static_cast<size_t>(pr) * m_ + c];
            for (int cc = 0; cc < m_; ++cc) {
                B[static_cast<size_t>(pr) * m_ + cc] /= piv;
                binv(pr, cc) /= piv;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == pr) continue;
                const double f = B[static_cast<size_t>(r) * m_ + c];
                if (f == 0.0) continue;
                for (int cc = 0; cc < m_; ++cc) {
                    B[static_cast<size_t>(r) * m_ + cc] -= f * B[static_cast<size_t>(pr) * m_ + cc];
                    binv(r, cc) -= f * binv(pr, cc);
                }
            }
        }
        // binv rows currently correspond to permuted equations; B has been
        // reduced to a row permutation of the identity. Reorder so that
        // binv * Bcol_k = e_k.
        std::vector<double> fixed(static_cast<size_t>(m_) * m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            // After elimination, row perm[k] of B holds e_k.
            for (int cc = 0; cc < m_; ++cc)
                fixed[static_cast<size_t>(k) * m_ + cc] = binv_[static_cast<size_t>(perm[k]) * m_ + cc];
        }
        binv_.swap(fixed);
        recomputeBasics();
        sinceRefactor_ = 0;
    }

    void recomputeBasics() {
        std::vector<double> r = rhs_;
        for (int j = 0; j < nTotal_; ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = nonbasicValue(j);
            if (v == 0.0) continue;
            const Col& col = cols_[j];
            for (size_t k = 0; k < col.row.size(); ++k) r[col.row[k]] -= col.val[k] * v;
        }
        for (int k = 0; k < m_; ++k) {
            double v = 0.0;
            const double* row = &binv_[static_cast<size_t>(k) * m_];
            for (int i = 0; i < m_; ++i) v += row[i] * r[i];
            xB_[k] = v;
        }
    }

    LpStatus iterate() {
        std::vector<double> y(m_), w(m_);
        const long iterLimit = 20000 + 400L * (m_ + 1);
        bland_ = params_.blandAlways;
        degenStreak_ = 0;
        for (long localIters = 0; localIters < iterLimit; ++localIters, ++iters_) {
            computeDuals(y);

            int enter = -1, dir = 0;
            double bestScore = kDualTol;
            auto priceColumn = [&](int j) {
                if (state_[j] == VarState::Basic) return false;
                if (up_[j] - lo_[j] <= 0.0) return false;  // fixed
                const double d = reducedCost(j, y);
                int cand = 0;
                if ((state_[j] == VarState::AtLower || state_[j] == VarState::FreeZero) &&
                    d < -kDualTol)
                    cand = +1;
                else if ((state_[j] == VarState::AtUpper || state_[j] == VarState::FreeZero) &&
                         d > kDualTol)
                    cand = -1;
                if (cand == 0) return false;
                if (std::abs(d) > bestScore) {
                    bestScore = std::abs(d);
                    enter = j;
                    dir = cand;
                }
                return true;
            };
            if (bland_) {
                // Anti-cycling: lowest eligible index, full scan.
                for (int j = 0; j < nTotal_ && enter < 0; ++j) priceColumn(j);
            } else {
                // Block partial pricing over a rotating window; a full wrap
                // with no candidate certifies optimality.
                const int blockSize = std::max(256, nTotal_ / 16);
                int scanned = 0;
                while (scanned < nTotal_ && enter < 0) {
                    const int begin = pricingCursor_ % nTotal_;
                    const int len = std::min(blockSize, nTotal_ - begin);
                    for (int j = begin; j < begin + len; ++j) priceColumn(j);
                    pricingCursor_ = (begin + len) % nTotal_;
                    scanned += len;
                }
            }
            if (enter < 0) return LpStatus::Optimal;

            // FTRAN of the entering column.
            std::fill(w.begin(), w.end(), 0.0);
            const Col& col = cols_[enter];
            for (size_t e = 0; e < col.row.size(); ++e) {
                const double v = col.val[e];
                const int r = col.row[e];
                for (int k = 0; k < m_; ++k) w[k] += binv_[static_cast<size_t>(k) * m_ + r] * v;
            }

            // Ratio test over basics plus the entering variable's own range.
            double limit = (lo_[enter] > -kInfinity && up_[enter] < kInfinity)
                               ? up_[enter] - lo_[enter]
                               : std::numeric_limits<double>::infinity();
            int leave = -1;       // basis position
            int leaveDir = 0;     // +1: leaving hits upper, -1: lower
            double leavePiv = 0.0;
            for (int k = 0; k < m_; ++k) {
                if (std::abs(w[k]) <= params_.pivotTol) continue;
                const int b = basis_[k];
                const double rate = -dir * w[k];
                double room;
                int hits;
                if (rate > 0.0) {
                    if (up_[b] >= kInfinity) continue;
                    room = (up_[b] - xB_[k]) / rate;
                    hits = +1;
                } else {
                    if (lo_[b] <= -kInfinity) continue;
                    room = (xB_[k] - lo_[b]) / (-rate);
                    hits = -1;
                }
                if (room < 0.0) room = 0.0;
                bool better = false;
                if (room < limit - 1e-12) {
                    better = true;
                } else if (room < limit + 1e-12 && leave >= 0) {
                    if (bland_)
                        better = basis_[k] < basis_[leave];
                    else
                        better = std::abs(w[k]) > std::abs(leavePiv);
                }
                if (better || (leave < 0 && room < limit)) {
                    limit = room;
                    leave = k;
                    leaveDir = hits;
                    leavePiv = w[k];
                }
            }

            if (!std::isfinite(limit)) return LpStatus::Unbounded;

            if (limit <= 1e-12) {
                if (++degenStreak_ > kBlandTrigger) bland_ = true;
            } else {
                degenStreak_ = 0;
                if (!params_.blandAlways) bland_ = false;
            }

            const double step = dir * limit;
            if (leave < 0) {
                // Bound flip: the entering variable crosses its range.
                for (int k = 0; k < m_; ++k) xB_[k] -= w[k] * step;
                state_[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
                continue;
            }

            const double enterValue = nonbasicValue(enter) + step;
            for (int k = 0; k < m_; ++k) xB_[k] -= w[k] * step;
            const int leavingVar = basis_[leave];
            state_[leavingVar] = leaveDir > 0 ? VarState::AtUpper : VarState::AtLower;
            basisPos_[leavingVar] = -1;
            basis_[leave] = enter;
            basisPos_[enter] = leave;
            state_[enter] = VarState::Basic;
            xB_[leave] = enterValue;

            // Eta update of the explicit inverse.
            const double piv = leavePiv;
            double* pivotRow = &binv_[static_cast<size_t>(leave) * m_];
            for (int i = 0; i < m_; ++i) pivotRow[i] /= piv;
            for (int k = 0; k < m_; ++k) {
                if (k == leave) continue;
                const double f = w[k];
                if (f == 0.0) continue;
                double* row = &binv_[static_cast<size_t>(k) * m_];
                for (int i = 0; i < m_; ++i) row[i] -= f * pivotRow[i];
            }

            if (++sinceRefactor_ >= params_.refactorEvery) refactor();
        }
        return LpStatus::IterLimit;
    }
};

}  // namespace

LpResult solve_lp(const MipModel& model) {
    model.validate();
    try {
        Simplex solver(model, SimplexParams{});
        return solver.run();
    } catch (const SolverError&) {
        // Numerical trouble: restart with conservative pivoting.
        Simplex solver(model, SimplexParams{1e-7, true, 32});
        return solver.run();
    }
}

}  // namespace lddr
