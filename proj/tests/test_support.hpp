#pragma once

#include <memory>

#include "lddr/basis.hpp"
#include "lddr/instance.hpp"
#include "lddr/process.hpp"
#include "lddr/rng.hpp"

namespace testsupport {

// Four-leaf verification tree: deterministic first stage, two outcomes at
// stages two and three.
inline lddr::FiniteSupportProcess oracle_tree() {
    lddr::FiniteSupportProcess tree;
    tree.T = 3;
    tree.J = 1;
    tree.outcomes = {{{{75.0}, 1.0}},
                     {{{40.0}, 0.5}, {{110.0}, 0.5}},
                     {{{30.0}, 0.4}, {{130.0}, 0.6}}};
    return tree;
}

inline lddr::MslotInstance oracle_instance(const lddr::FiniteSupportProcess& tree) {
    lddr::ProcessParams p;
    p.T = tree.T;
    p.J = tree.J;
    p.rho = 0.5;
    p.rhoY = 0.5;
    p.seed = 99;
    p.mu = lddr::Matrix(tree.T, tree.J);
    for (int t = 1; t <= tree.T; ++t)
        for (int j = 1; j <= tree.J; ++j) p.mu(t, j) = tree.stage_mean(t, j);
    return lddr::build_mslot(p);
}

inline std::vector<double> random_coeffs(int dim, double box, uint64_t seed, uint64_t round) {
    const lddr::StreamKey key(seed, "random-coeffs");
    std::vector<double> w(dim);
    for (int k = 0; k < dim; ++k) w[k] = (2.0 * key.uniform(round, k) - 1.0) * box;
    return w;
}

inline lddr::DualCoefficients with_weights(std::shared_ptr<const lddr::DualLayout> layout,
                                           std::vector<double> w) {
    lddr::DualCoefficients c;
    c.layout = std::move(layout);
    c.w = std::move(w);
    return c;
}

}  // namespace testsupport
