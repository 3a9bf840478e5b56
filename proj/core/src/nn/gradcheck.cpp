#include "blockbench/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockbench::nn {

namespace {

struct Probe {
    Matrix coeff;

    // Loss and the ReLU activation pattern of every hidden layer.
    double eval(const Mlp& m, const Matrix& x, std::vector<bool>* pattern) const {
        ForwardCache cache;
        const Matrix out = m.forward(x, &cache);
        if (pattern) {
            pattern->clear();
            for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
                for (Eigen::Index i = 0; i < cache.pre[l].size(); ++i) pattern->push_back(cache.pre[l].data()[i] > 0.0);
        }
        return (coeff.array() * out.array()).sum();
    }
};

std::vector<std::size_t> pick(std::size_t begin, std::size_t count, std::size_t limit, Rng& rng) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), begin);
    if (limit == 0 || limit >= count) return idx;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

GradCheckResult check_gradients(const std::string& name, const Mlp& net, Rng& rng, const GradCheckOptions& options) {
    GradCheckResult res;
    res.name = name;
    Matrix x(net.input_size(), options.batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    Probe probe{Matrix(net.output_size(), options.batch)};
    for (Eigen::Index i = 0; i < probe.coeff.size(); ++i) probe.coeff.data()[i] = uniform(rng, -1.0, 1.0);

    ForwardCache cache;
    net.forward(x, &cache);
    Matrix grad_input;
    const Gradients g = net.backward(cache, probe.coeff, &grad_input);

    auto compare = [&](double analytic, double numeric) {
        const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
        const double rel = std::abs(analytic - numeric) / denom;
        res.max_relative_error = std::max(res.max_relative_error, rel);
        ++res.checked;
        if (!(rel <= options.tolerance)) res.passed = false;
    };

    std::vector<bool> base;
    probe.eval(net, x, &base);
    std::vector<bool> pat_plus;
    std::vector<bool> pat_minus;
    const double h = options.step;

    Mlp work = net;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& w = net.weights()[l];
        const auto nw = static_cast<std::size_t>(w.size());
        const auto nb = static_cast<std::size_t>(net.biases()[l].size());
        auto check_range = [&](std::size_t begin, std::size_t count, auto analytic_at) {
            for (std::size_t p : pick(begin, count, options.per_layer, rng)) {
                const double orig = work.parameter(p);
                work.set_parameter(p, orig + h);
                const double fp = probe.eval(work, x, &pat_plus);
                work.set_parameter(p, orig - h);
                const double fm = probe.eval(work, x, &pat_minus);
                work.set_parameter(p, orig);
                if (pat_plus != base || pat_minus != base) {
                    ++res.skipped;
                    continue;
                }
                compare(analytic_at(p - begin), (fp - fm) / (2.0 * h));
            }
        };
        check_range(offset, nw, [&](std::size_t k) { return g.weights[l].data()[k]; });
        check_range(offset + nw, nb, [&](std::size_t k) { return g.biases[l](static_cast<Eigen::Index>(k)); });
        offset += nw + nb;
    }

    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Matrix xp = x;
        Matrix xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        const double fp = probe.eval(net, xp, &pat_plus);
        const double fm = probe.eval(net, xm, &pat_minus);
        if (pat_plus != base || pat_minus != base) {
            ++res.skipped;
            continue;
        }
        compare(grad_input.data()[i], (fp - fm) / (2.0 * h));
    }
    return res;
}

} // namespace blockbench::nn
