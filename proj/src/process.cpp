#include "lddr/process.hpp"

#include <cmath>
#include <stdexcept>

namespace lddr {

namespace {

// Draw indices within a (scenario, stage, product) cell.
constexpr uint64_t kDrawEps = 0;
constexpr uint64_t kDrawDelta = 1;

ScenarioPath sample_one(const ProcessParams& p, const StreamKey& key, uint64_t scenarioKey,
                        int id, const ScenarioPath* prefix, int prefixStages) {
    ScenarioPath path;
    path.demands = Matrix(p.T, p.J);
    path.latentY = Matrix(p.T, p.J);
    path.latentDelta = Matrix(p.T, p.J);
    path.id = id;

    for (int j = 1; j <= p.J; ++j) {
        for (int t = 1; t <= p.T; ++t) {
            if (prefix && t <= prefixStages) {
                path.demands(t, j) = prefix->demands(t, j);
                path.latentY(t, j) = prefix->latentY(t, j);
                path.latentDelta(t, j) = prefix->latentDelta(t, j);
                continue;
            }
            const LognormalParams epsDist = lognormal_from_mean_std(1.0, p.epsStd);
            const double eps = epsDist.value(
                inverse_normal_cdf(key.uniform(scenarioKey, t, j, kDrawEps)));
            double y;
            if (t == 1) {
                y = eps;
            } else {
                y = p.rho * path.latentY(t - 1, j) + (1.0 - p.rho) * eps;
            }
            const double mu = p.mu(t, j);
            const LognormalParams deltaDist =
                lognormal_from_mean_std(mu, p.deltaStdFactor * t * mu);
            const double delta = deltaDist.value(
                inverse_normal_cdf(key.uniform(scenarioKey, t, j, kDrawDelta)));
            path.latentY(t, j) = y;
            path.latentDelta(t, j) = delta;
            path.demands(t, j) = p.rhoY * y * mu + (1.0 - p.rhoY) * delta;
        }
    }
    return path;
}

}  // namespace

void ProcessParams::validate() const {
    if (T < 2) throw std::invalid_argument("process: T must be >= 2");
    if (J < 1) throw std::invalid_argument("process: J must be >= 1");
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("process: rho must be in [0,1)");
    if (rhoY < 0.0 || rhoY > 1.0) throw std::invalid_argument("process: rhoY must be in [0,1]");
    if (epsStd < 0.0) throw std::invalid_argument("process: epsStd must be >= 0");
    if (deltaStdFactor < 0.0)
        throw std::invalid_argument("process: deltaStdFactor must be >= 0");
    if (mu.rows() != T || mu.cols() != J)
        throw std::invalid_argument("process: mu must be T x J");
    for (int t = 1; t <= T; ++t)
        for (int j = 1; j <= J; ++j)
            if (!(mu(t, j) > 0.0)) throw std::invalid_argument("process: mu entries must be > 0");
}

double LognormalParams::value(double z) const {
    if (normalSigma == 0.0) return std::exp(normalMu);
    return std::exp(normalMu + normalSigma * z);
}

LognormalParams lognormal_from_mean_std(double mean, double std) {
    if (!(mean > 0.0)) throw std::invalid_argument("lognormal: mean must be > 0");
    if (std < 0.0) throw std::invalid_argument("lognormal: std must be >= 0");
    LognormalParams out;
    if (std == 0.0) {
        out.normalMu = std::log(mean);
        out.normalSigma = 0.0;
        return out;
    }
    const double sigma2 = std::log(1.0 + (std * std) / (mean * mean));
    out.normalSigma = std::sqrt(sigma2);
    out.normalMu = std::log(mean) - 0.5 * sigma2;
    return out;
}

std::vector<ScenarioPath> sample_paths(const ProcessParams& params, int n,
                                       std::string_view streamTag) {
    params.validate();
    if (n < 1) throw std::invalid_argument("sample_paths: n must be >= 1");
    const StreamKey key(params.seed, streamTag);
    std::vector<ScenarioPath> paths(n);
    for (int i = 0; i < n; ++i) {
        paths[i] = sample_one(params, key, static_cast<uint64_t>(i), i, nullptr, 0);
        paths[i].prob = 1.0 / n;
    }
    return paths;
}

double conditional_mean_demand(const ProcessParams& params, const ScenarioPath& path, int t,
                               int h, int j) {
    if (t < 1 || h < 1 || j < 1 || j > params.J)
        throw std::out_of_range("conditional_mean_demand: index out of range");
    if (t + h > params.T) throw std::out_of_range("conditional_mean_demand: t+h exceeds T");
    const double y = path.latentY(t, j);
    return params.mu(t + h, j) * (params.rhoY * std::pow(params.rho, h) * (y - 1.0) + 1.0);
}

std::vector<ScenarioPath> conditional_sample(const ProcessParams& params,
                                             const ScenarioPath& path, int t, int n,
                                             std::string_view streamTag) {
    params.validate();
    if (t < 1 || t >= params.T)
        throw std::out_of_range("conditional_sample: t must satisfy 1 <= t < T");
    if (n < 1) throw std::invalid_argument("conditional_sample: n must be >= 1");
    const StreamKey key(params.seed, streamTag);
    std::vector<ScenarioPath> out(n);
    for (int i = 0; i < n; ++i) {
        // Continuation draws are keyed by (continuation index, original id) so
        // different histories do not share variates.
        const uint64_t scenarioKey =
            key.bits(0x636f6e74ULL, static_cast<uint64_t>(path.id), static_cast<uint64_t>(i));
        out[i] = sample_one(params, key, scenarioKey, i, &path, t);
        out[i].prob = 1.0 / n;
    }
    return out;
}

void FiniteSupportProcess::validate() const {
    if (T < 1 || J < 1) throw std::invalid_argument("tree: T and J must be positive");
    if (static_cast<int>(outcomes.size()) != T)
        throw std::invalid_argument("tree: need outcome list per stage");
    for (const auto& stage : outcomes) {
        if (stage.empty()) throw std::invalid_argument("tree: empty stage outcome list");
        double total = 0.0;
        for (const auto& o : stage) {
            if (static_cast<int>(o.demand.size()) != J)
                throw std::invalid_argument("tree: outcome dimension mismatch");
            if (!(o.prob > 0.0)) throw std::invalid_argument("tree: probabilities must be > 0");
            total += o.prob;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("tree: stage probabilities must sum to 1");
    }
}

int FiniteSupportProcess::leafCount() const {
    int n = 1;
    for (const auto& stage : outcomes) n *= static_cast<int>(stage.size());
    return n;
}

std::vector<ScenarioPath> FiniteSupportProcess::enumerate_paths() const {
    validate();
    std::vector<ScenarioPath> leaves;
    std::vector<int> pick(T, 0);
    int id = 0;
    while (true) {
        ScenarioPath path;
        path.demands = Matrix(T, J);
        path.latentY = Matrix(T, J, 1.0);
        path.latentDelta = Matrix(T, J);
        path.prob = 1.0;
        path.id = id++;
        for (int t = 1; t <= T; ++t) {
            const Outcome& o = outcomes[t - 1][pick[t - 1]];
            path.prob *= o.prob;
            for (int j = 1; j <= J; ++j) path.demands(t, j) = o.demand[j - 1];
        }
        leaves.push_back(std::move(path));
        int t = T - 1;
        while (t >= 0) {
            if (++pick[t] < static_cast<int>(outcomes[t].size())) break;
            pick[t] = 0;
            --t;
        }
        if (t < 0) break;
    }
    return leaves;
}

double FiniteSupportProcess::stage_mean(int t, int j) const {
    double m = 0.0;
    for (const auto& o : outcomes[t - 1]) m += o.prob * o.demand[j - 1];
    return m;
}

CondMean ar_cond_mean(const ProcessParams& params) {
    return [params](const ScenarioPath& path, int t, int h, int j) {
        return conditional_mean_demand(params, path, t, h, j);
    };
}

CondMean tree_cond_mean(const FiniteSupportProcess& tree) {
    return [tree](const ScenarioPath&, int t, int h, int j) {
        return tree.stage_mean(t + h, j);
    };
}

}  // namespace lddr
