#pragma once

// Test-only oracles: finite differences, naive reference kernels, random data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "medn/array.hpp"
#include "medn/losses.hpp"
#include "medn/network.hpp"
#include "medn/optimizer.hpp"
#include "medn/rng.hpp"

namespace medn::testing {

inline DenseArray random_array(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    DenseArray a(std::move(shape));
    for (double& v : a.data()) {
        v = rng.uniform(lo, hi);
    }
    return a;
}

// Naive triple-loop x·W + b; x is {rows, n}.
inline DenseArray reference_dense(const DenseArray& x, const DenseArray& w, const DenseArray& b) {
    const std::size_t rows = x.rows();
    const std::size_t n = w.shape()[0];
    const std::size_t m = w.shape()[1];
    DenseArray out({rows, m});
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double total = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                total += x[i * n + k] * w[k * m + j];
            }
            out[i * m + j] = total + b[j];
        }
    }
    return out;
}

// Central differences of f at every entry of every array in params.
inline ParamMap finite_difference(const std::function<double(const ParamMap&)>& f,
                                  const ParamMap& params, double h = 1e-5) {
    ParamMap grads;
    ParamMap probe = params;
    for (auto& [name, array] : probe) {
        DenseArray g(array.shape());
        for (std::size_t i = 0; i < array.size(); ++i) {
            const double original = array[i];
            array[i] = original + h;
            const double up = f(probe);
            array[i] = original - h;
            const double down = f(probe);
            array[i] = original;
            g[i] = (up - down) / (2.0 * h);
        }
        grads.emplace(name, std::move(g));
    }
    return grads;
}

// Largest |analytic - numeric| / max(1, |numeric|) over all entries.
inline double max_relative_error(const ParamMap& analytic, const ParamMap& numeric) {
    double worst = 0.0;
    for (const auto& [name, num] : numeric) {
        const DenseArray& ana = analytic.at(name);
        for (std::size_t i = 0; i < num.size(); ++i) {
            worst = std::max(worst, std::abs(ana[i] - num[i]) / std::max(1.0, std::abs(num[i])));
        }
    }
    return worst;
}

inline TDBatch random_batch(std::size_t batch, std::size_t obs_dim, std::size_t actions, Rng& rng,
                            double gamma = 0.9) {
    TDBatch b;
    b.states = random_array({batch, obs_dim}, rng);
    b.next_states = random_array({batch, obs_dim}, rng);
    b.gamma = gamma;
    for (std::size_t i = 0; i < batch; ++i) {
        b.actions.push_back(static_cast<std::size_t>(rng.index(actions)));
        b.rewards.push_back(rng.uniform(-1.0, 1.0));
        b.terminal.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    return b;
}

// Worst relative error between the loss gradient of the taped graph and
// central differences of the loss value, for one random network and batch.
inline double loss_gradient_error(const NetworkSpec& spec, const LossOptions& options,
                                  std::uint64_t seed) {
    Rng rng(seed);
    QNetwork online(spec, seed);
    QNetwork target(spec, seed + 1000);
    // Random biases too: zero biases make the max aggregator sit on a tie.
    for (QNetwork* net : {&online, &target}) {
        for (auto& [name, array] : net->params()) {
            array = random_array(array.shape(), rng);
        }
    }
    const TDBatch batch = random_batch(5, spec.input_dim, spec.action_count, rng);
    const LossGraph graph = build_loss(batch, online, target, options);
    auto loss_of = [&](const ParamMap& p) {
        return build_loss(batch, QNetwork(spec, p), target, options).loss_value();
    };
    return max_relative_error(graph.gradients(), finite_difference(loss_of, online.params()));
}

} // namespace medn::testing
