#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "flexsac/nn.hpp"

namespace flexsac::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::int64_t parameters = 0;
    int rejected_inputs = 0;  // redrawn because a hidden unit sat near the ReLU kink
};

// Smallest |pre-activation| over the hidden layers.
inline double min_hidden_margin(const nn::Mlp& net, const nn::Matrix& x) {
    nn::ForwardCache cache;
    net.forward(x, cache);
    double m = std::numeric_limits<double>::infinity();
    for (int l = 0; l + 1 < net.layer_count(); ++l) m = std::min(m, cache.pre[l].cwiseAbs().minCoeff());
    return m;
}

/// Compares backward() against central differences of L = sum(c .* f(x)) for
/// every parameter. Relative error is |a - f| / max(|a|, |f|, 1e-6). For
/// ReLU nets the input batch is redrawn until every hidden pre-activation is
/// at least `kink_margin` away from zero, so no probe straddles a kink.
inline GradCheckResult check_gradients(nn::Mlp& net, Rng& rng, int batch, double h = 1e-5,
                                       double kink_margin = 1e-3) {
    GradCheckResult res;
    res.parameters = net.parameter_count();
    nn::Matrix x(net.input_size(), batch);
    auto draw = [&] {
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    };
    draw();
    while (net.activation() == nn::Activation::Relu && min_hidden_margin(net, x) < kink_margin) {
        ++res.rejected_inputs;
        draw();
    }
    nn::Matrix c(net.output_size(), batch);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(-1.0, 1.0);

    auto loss = [&] { return net.predict(x).cwiseProduct(c).sum(); };
    nn::ForwardCache cache;
    net.forward(x, cache);
    const nn::Vector analytic = net.backward(cache, c);

    nn::Vector& p = net.params();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        const double up = loss();
        p[i] = saved - h;
        const double down = loss();
        p[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double a = analytic[i];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
        res.max_rel_error = std::max(res.max_rel_error, rel);
    }
    return res;
}

}  // namespace flexsac::testing
