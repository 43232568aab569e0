#include "cavity/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cavity {

namespace {

struct Run {
    std::vector<double> x;
    double value;
    int evaluations;
    bool converged;
};

Run descend(const std::function<double(const std::vector<double>&)>& raw, const std::vector<double>& x0, double step,
            const SimplexOptions& opts, int budget) {
    const std::size_t n = x0.size();
    int evals = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals;
        double v = raw(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    std::vector<std::vector<double>> p(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) p[i + 1][i] += (x0[i] != 0 ? step * std::max(1.0, std::abs(x0[i])) : step);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(p[i]);

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        double diam = 0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d) diam = std::max(diam, std::abs(p[i][d] - p[0][d]));
        double spread = std::abs(fv[worst] - fv[best]);
        if (std::isfinite(fv[worst]) && spread <= opts.f_tol * std::max(1.0, std::abs(fv[best])) &&
            diam <= opts.x_tol) {
            converged = true;
            break;
        }
        if (diam <= 1e-14) {
            converged = std::isfinite(fv[best]);
            break;
        }
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < n; ++d) c[d] += p[i][d] / n;
        auto along = [&](double t) {
            std::vector<double> y(n);
            for (std::size_t d = 0; d < n; ++d) y[d] = c[d] + t * (p[worst][d] - c[d]);
            return y;
        };
        auto xr = along(-1.0);
        double fr = f(xr);
        if (fr < fv[best]) {
            auto xe = along(-2.0);
            double fe = f(xe);
            if (fe < fr)
                p[worst] = xe, fv[worst] = fe;
            else
                p[worst] = xr, fv[worst] = fr;
        } else if (fr < fv[second]) {
            p[worst] = xr, fv[worst] = fr;
        } else {
            auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fv[worst])) {
                p[worst] = xc, fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d) p[i][d] = p[best][d] + 0.5 * (p[i][d] - p[best][d]);
                    fv[i] = f(p[i]);
                }
            }
        }
    }
    std::size_t b = std::min_element(fv.begin(), fv.end()) - fv.begin();
    return {p[b], fv[b], evals, converged};
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const SimplexOptions& opts) {
    SimplexResult out;
    out.x = std::move(x0);
    out.value = f(out.x);
    if (!std::isfinite(out.value)) out.value = std::numeric_limits<double>::infinity();
    double step = opts.initial_step;
    for (int r = 0; r <= opts.restarts && out.evaluations < opts.max_evaluations; ++r) {
        Run run = descend(f, out.x, step, opts, opts.max_evaluations - out.evaluations);
        out.evaluations += run.evaluations;
        bool improved = run.value < out.value - opts.f_tol * (std::abs(out.value) + 1e-12);
        if (run.value <= out.value) {
            out.x = run.x;
            out.value = run.value;
        }
        out.converged = run.converged;
        if (!improved && r > 0) break;
        step = std::max(opts.initial_step * 0.1, 1e-4);
    }
    return out;
}

}  // namespace cavity
