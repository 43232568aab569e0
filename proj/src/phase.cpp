#include "cavity/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "cavity/errors.hpp"
#include "cavity/simplex.hpp"

namespace cavity {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- separatrices

std::optional<double> separatrix_ordinate(ModelKind kind, double w21, double w31, double a) {
    if (!std::isfinite(a)) throw ValidationError("abscissa must be finite");
    switch (kind) {
        case ModelKind::TCM: return a * a;
        case ModelKind::Dicke:
            if (a < 0) return std::nullopt;
            return 0.5 * std::sqrt(a);
        default: break;
    }
    if (!(w21 > 0) || !(w31 > 0)) throw ValidationError("separatrix needs positive detunings w21, w31");
    if (is_full3(kind)) {
        ModelKind rwa = kind == ModelKind::XiFull       ? ModelKind::XiRwa
                        : kind == ModelKind::LambdaFull ? ModelKind::LambdaRwa
                                                        : ModelKind::VRwa;
        auto v = separatrix_ordinate(rwa, w21, w31, 2 * a);
        if (!v) return std::nullopt;
        return 0.5 * *v;
    }
    double v;
    if (kind == ModelKind::XiRwa) {
        double d = std::abs(a) - std::sqrt(w31);
        v = w21 - (d > 0 ? d * d : 0.0);
    } else if (kind == ModelKind::LambdaRwa) {
        double d = std::abs(a) - std::sqrt(w21);
        v = w31 - (d > 0 ? d * d : 0.0);
    } else {
        v = w21 * (1 - a * a / w31);
    }
    if (v < 0) return std::nullopt;
    return std::sqrt(v);
}

std::vector<std::pair<double, double>> separatrix_polyline(const ModelSpec& spec, double lo, double hi, int samples) {
    if (samples < 1) throw ValidationError("separatrix polyline needs at least one sample");
    const auto& w = spec.level_freqs;
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < samples; ++i) {
        double a = samples > 1 ? lo + (hi - lo) * i / (samples - 1) : lo;
        auto o = separatrix_ordinate(spec.kind, w[1] - w[0], w[2] - w[0], a);
        if (o) out.emplace_back(a, *o);
    }
    return out;
}

// -------------------------------------------------------------------- fidelity

double susceptibility(double fidelity, double dtau) { return 2 * (1 - fidelity) / (dtau * dtau); }

std::vector<FidelitySample> fidelity_and_susceptibility(const std::vector<StateVector>& states, double dtau) {
    if (!(dtau != 0) || !std::isfinite(dtau)) throw ValidationError("dtau must be non-zero");
    std::vector<FidelitySample> out;
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        double f = std::min(1.0, std::norm(inner(states[i], states[i + 1])));
        out.push_back({f, susceptibility(f, dtau)});
    }
    return out;
}

// --------------------------------------------------------------- exact grounds

namespace {

bool has_blocks(ModelKind k) { return k == ModelKind::TCM || is_rwa3(k); }

SectorSpec block_sector(ModelKind k, int v) {
    return k == ModelKind::TCM ? SectorSpec::lambda_block(v) : SectorSpec::m_block(v);
}

struct BlockSolve {
    double energy;
    StateVector state;
    Eigen::VectorXd vec;
};

BlockSolve solve_block(const ModelSpec& spec, const SectorSpec& sector, const GroundOptions& opts,
                       const Eigen::VectorXd* warm) {
    Basis b = enumerate_basis(spec, sector);
    auto h = assemble_hamiltonian(spec, b);
    SolverOptions so;
    so.exec = opts.exec;
    so.complete_multiplet = false;
    so.dense_threshold = opts.dense_threshold;
    if (warm && warm->size() == h.dimension()) so.start = warm;
    auto r = lowest_eigenpairs(h, 1, opts.tol, so);
    return {spec.per_particle(r.energies[0]), r.states[0], r.states[0].amplitudes.real()};
}

}  // namespace

PathGround exact_ground(const ModelSpec& spec, const GroundOptions& opts, int hint,
                        std::vector<Eigen::VectorXd>* warm) {
    spec.validate();
    auto warm_for = [&](int label) -> Eigen::VectorXd* {
        if (!warm || label < 0) return nullptr;
        if (int(warm->size()) <= label) warm->resize(label + 1);
        return &(*warm)[label];
    };
    if (!has_blocks(spec.kind)) {
        if (!opts.fock_cutoff) throw ValidationError("a Fock cutoff is required for " + to_string(spec.kind));
        Eigen::VectorXd* w = warm_for(0);
        auto s = solve_block(spec, SectorSpec::parity(1, *opts.fock_cutoff), opts, w);
        if (w) *w = s.vec;
        return {s.energy, 1, s.state};
    }
    std::map<int, BlockSolve> done;
    auto eval = [&](int v) {
        if (v < 0 || done.count(v)) return;
        Eigen::VectorXd* w = warm_for(v);
        auto s = solve_block(spec, block_sector(spec.kind, v), opts, w);
        if (w) *w = s.vec;
        done.emplace(v, std::move(s));
    };
    eval(0);
    for (int v = hint - 2; v <= hint + 2; ++v) eval(v);
    auto best = [&] {
        auto it = std::min_element(done.begin(), done.end(),
                                   [](const auto& a, const auto& b) { return a.second.energy < b.second.energy; });
        return it->first;
    };
    for (;;) {
        int b = best();
        int hi = done.rbegin()->first;
        if (b == hi) {
            eval(hi + 1);
            eval(hi + 2);
            continue;
        }
        // widen downward when the best sits on the lower edge of a contiguous window
        if (b > 0 && !done.count(b - 1)) {
            eval(b - 1);
            eval(b - 2);
            continue;
        }
        break;
    }
    int b = best();
    return {done.at(b).energy, b, done.at(b).state};
}

// ----------------------------------------------------------------- transitions

std::string to_string(TransitionMethod m) {
    switch (m) {
        case TransitionMethod::Quantum: return "QUANTUM";
        case TransitionMethod::Sas: return "SAS";
        case TransitionMethod::Projected: return "PROJECTED";
    }
    return "?";
}

TransitionMethod transition_method_from_string(const std::string& s) {
    for (auto m : {TransitionMethod::Quantum, TransitionMethod::Sas, TransitionMethod::Projected})
        if (to_string(m) == s) return m;
    throw ValidationError("unknown transition method '" + s + "'");
}

std::string to_string(TransitionOrder o) { return o == TransitionOrder::First ? "FIRST" : "SECOND"; }

double derivative_jump(const std::function<double(double)>& energy, double tau_c, double h) {
    const double e0 = energy(tau_c);
    const double left = (e0 - energy(tau_c - h)) / h;
    const double right = (energy(tau_c + h) - e0) / h;
    return std::abs(right - left);
}

TransitionOrder classify_order(const std::function<double(double)>& energy, double tau_c) {
    // A kink keeps its slope jump as h shrinks; a smooth curve's one-sided difference jump scales with h.
    const double coarse = derivative_jump(energy, tau_c, 1e-3);
    const double fine = derivative_jump(energy, tau_c, 1e-4);
    return (fine > 1e-3 && fine > 0.5 * coarse) ? TransitionOrder::First : TransitionOrder::Second;
}

std::vector<std::size_t> chi_peaks(const std::vector<double>& chi, double prominence) {
    std::vector<double> finite;
    for (double c : chi)
        if (std::isfinite(c)) finite.push_back(c);
    if (finite.empty()) return {};
    std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
    const double median = finite[finite.size() / 2];
    const double threshold = std::max(prominence * median, 1e-6);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < chi.size(); ++i) {
        if (!std::isfinite(chi[i]) || chi[i] <= threshold) continue;
        bool left = i == 0 || !std::isfinite(chi[i - 1]) || chi[i] > chi[i - 1];
        bool right = i + 1 >= chi.size() || !std::isfinite(chi[i + 1]) || chi[i] >= chi[i + 1];
        if (left && right) out.push_back(i);
    }
    return out;
}

namespace {

std::vector<double> coordinates_of(const VariationalPoint& p) {
    return std::visit(
        [&](const auto& v) -> std::vector<double> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TwoLevelParams>) return {v.q, v.theta};
            if constexpr (std::is_same_v<T, ProjectedParams>) return {v.eta};
            if constexpr (std::is_same_v<T, ThreeLevelParams>) return {v.rho, v.rho2, v.rho3};
            if constexpr (std::is_same_v<T, VReducedParams>) return {v.rho, v.xi};
            return {};
        },
        p.params);
}

int pattern_label(const ThreeLevelParams& p, int n) {
    const double tol = 1e-4;
    return (p.rho > tol * std::sqrt(double(n)) ? 1 : 0) + (p.rho2 > tol ? 2 : 0) + (p.rho3 > tol ? 4 : 0);
}

VariationalGround minimize_family(const ModelSpec& spec, Family family, const TransitionOptions& opts,
                                  const VariationalGround* previous, int m_block = -1,
                                  std::vector<std::vector<double>> extra = {}) {
    auto seeds = default_seeds(spec, family, opts.seeds, opts.seed);
    for (auto& e : extra) seeds.push_back(std::move(e));
    if (previous && previous->point.family == family) seeds.push_back(coordinates_of(previous->point));
    MinimizeOptions mo;
    mo.exec = Execution::Serial;
    mo.m_block = m_block;
    auto r = minimize_energy(spec, family, seeds, mo);
    return {r.best.energy, 0, r.best};
}

}  // namespace

VariationalGround variational_ground(const ModelSpec& spec, TransitionMethod method, const TransitionOptions& opts,
                                     const VariationalGround* previous) {
    spec.validate();
    if (method == TransitionMethod::Quantum) throw ValidationError("variational_ground needs SAS or PROJECTED");
    const int n = spec.n_atoms;
    if (spec.kind == ModelKind::TCM) {
        if (method == TransitionMethod::Projected) {
            auto g = tcm_projected_ground(spec);
            return {g.point.energy, g.lambda, g.point};
        }
        auto c = tcm_critical_data(spec);
        VariationalPoint p{Family::TcmCoh, spec, TwoLevelParams{c.q_c, 0.0, c.theta_c, 0.0}, c.energy};
        return {c.energy, int(c.region), p};
    }
    if (spec.kind == ModelKind::Dicke) {
        if (method == TransitionMethod::Projected)
            throw ValidationError("projected states need a conserved excitation number (TCM or 3-level RWA)");
        const TwoLevelParams normal{};
        const double en = energy_surface_2level(spec, Family::DickeSasPlus, normal);
        auto cp = dicke_critical_point(spec);
        std::vector<std::vector<double>> extra{{cp.q, cp.theta}};
        auto g = minimize_family(spec, Family::DickeSasPlus, opts, previous, -1, extra);
        const auto& q = std::get<TwoLevelParams>(g.point.params);
        if (g.energy < en - 1e-13 && std::abs(q.q) > 1e-3) {
            g.label = 1;
            return g;
        }
        return {en, 0, VariationalPoint{Family::DickeSasPlus, spec, normal, en}};
    }
    if (is_rwa3(spec.kind)) {
        if (method == TransitionMethod::Sas) {
            auto g = minimize_family(spec, Family::Rwa3Coh, opts, previous, -1, {{0, 0, 0}});
            g.label = pattern_label(std::get<ThreeLevelParams>(g.point.params), n);
            return g;
        }
        VariationalGround best;
        best.energy = std::numeric_limits<double>::infinity();
        int rising = 0;
        for (int m = 0;; ++m) {
            VariationalGround g;
            if (m == 0) {
                ThreeLevelParams p;
                p.m_block = 0;
                double e = energy_surface_3level(spec, Family::Rwa3Proj, p);
                g = {e, 0, VariationalPoint{Family::Rwa3Proj, spec, p, e}};
            } else {
                const VariationalGround* prev =
                    (previous && previous->label == m) ? previous : (best.label == m - 1 ? &best : nullptr);
                g = minimize_family(spec, Family::Rwa3Proj, opts, prev, m);
                g.label = m;
            }
            if (g.energy < best.energy - 1e-13) {
                best = g;
                rising = 0;
            } else if (++rising >= 3 && m > (previous ? previous->label + 2 : 2)) {
                break;
            }
            if (m > 4 * n + 40) break;
        }
        return best;
    }
    if (method == TransitionMethod::Projected)
        throw ValidationError("projected states need a conserved excitation number (TCM or 3-level RWA)");
    auto g = minimize_family(spec, Family::Full3SasPlus, opts, previous, -1, {{0, 0, 0}});
    g.label = pattern_label(std::get<ThreeLevelParams>(g.point.params), n);
    return g;
}

namespace {

std::optional<int> parity_cutoff_for_path(const ParameterPath& path) {
    if (has_blocks(path.base.kind)) return std::nullopt;
    int best = 1;
    for (double t : {path.start, path.end}) {
        ModelSpec s = path.at(t);
        CutoffOptions co;
        co.solver.complete_multiplet = false;
        auto g = converged_ground(s, SectorSpec::parity(1, 1), 1e-9, co);
        best = std::max(best, g.cutoff);
    }
    return best;
}

}  // namespace

TransitionReport locate_transitions(const ParameterPath& path, TransitionMethod method,
                                    const TransitionOptions& opts) {
    path.validate();
    TransitionReport rep;
    rep.path = path;
    rep.method = method;
    const auto taus = path.taus();
    const double dt = path.step();
    const std::size_t ns = taus.size();
    const double lo = std::min(path.start, path.end), hi = std::max(path.start, path.end);
    auto clamp = [&](double t) { return std::clamp(t, lo, hi); };

    if (method == TransitionMethod::Quantum) {
        GroundOptions go = opts.ground;
        if (!go.fock_cutoff) go.fock_cutoff = parity_cutoff_for_path(path);
        std::vector<Eigen::VectorXd> warm;
        std::vector<PathGround> g;
        int hint = 0;
        for (double t : taus) {
            g.push_back(exact_ground(path.at(t), go, hint, &warm));
            hint = g.back().label;
        }
        auto fid = [&](const PathGround& a, const PathGround& b) {
            return a.label != b.label ? 0.0 : std::min(1.0, std::norm(inner(a.state, b.state)));
        };
        std::vector<double> chi(ns > 0 ? ns - 1 : 0);
        for (std::size_t i = 0; i + 1 < ns; ++i) chi[i] = susceptibility(fid(g[i], g[i + 1]), dt);
        auto peaks = chi_peaks(chi, opts.prominence);
        auto ground_at = [&](double t, int h) { return exact_ground(path.at(t), go, h, &warm); };
        auto energy = [&](double t) { return ground_at(clamp(t), hint).energy; };
        for (std::size_t k = 0; k < peaks.size(); ++k) {
            const std::size_t i = peaks[k];
            Transition tr;
            tr.chi_peak = chi[i];
            tr.ambiguous = (k > 0 && peaks[k - 1] + 1 == i) || (k + 1 < peaks.size() && peaks[k + 1] == i + 1);
            if (g[i].label != g[i + 1].label) {
                double a = taus[i], b = taus[i + 1];
                const int la = g[i].label;
                for (int it = 0; it < 60 && std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
                    double m = 0.5 * (a + b);
                    (ground_at(m, la).label == la ? a : b) = m;
                }
                tr.tau_c = 0.5 * (a + b);
                tr.delta_label = g[i + 1].label - g[i].label;
                if (!has_blocks(path.base.kind)) tr.delta_label.reset();
            } else {
                const double d = opts.refine_delta;
                auto chi_at = [&](double t) {
                    auto x = ground_at(t - 0.5 * d, g[i].label);
                    auto y = ground_at(t + 0.5 * d, g[i].label);
                    return susceptibility(fid(x, y), d);
                };
                double a = clamp(taus[i] - 0.5 * dt), b = clamp(taus[i + 1] + 0.5 * dt);
                const double r = 0.5 * (std::sqrt(5.0) - 1);
                double c = b - r * (b - a), e = a + r * (b - a);
                double fc = chi_at(c), fe = chi_at(e);
                while (std::abs(b - a) > 1e-7 * std::max(1.0, std::abs(a))) {
                    if (fc > fe) {
                        b = e, e = c, fe = fc;
                        c = b - r * (b - a), fc = chi_at(c);
                    } else {
                        a = c, c = e, fc = fe;
                        e = a + r * (b - a), fe = chi_at(e);
                    }
                }
                tr.tau_c = 0.5 * (a + b);
                tr.chi_peak = std::max({tr.chi_peak, fc, fe});
            }
            hint = g[i].label;
            tr.order = classify_order(energy, tr.tau_c);
            rep.transitions.push_back(tr);
        }
        return rep;
    }

    std::vector<VariationalGround> g;
    for (double t : taus) g.push_back(variational_ground(path.at(t), method, opts, g.empty() ? nullptr : &g.back()));
    const bool conserved = has_blocks(path.base.kind) && method == TransitionMethod::Projected;
    for (std::size_t i = 0; i + 1 < ns; ++i) {
        if (g[i].label == g[i + 1].label) continue;
        double a = taus[i], b = taus[i + 1];
        VariationalGround ga = g[i];
        for (int it = 0; it < 60 && std::abs(b - a) > 1e-11 * std::max(1.0, std::abs(a)); ++it) {
            double m = 0.5 * (a + b);
            auto gm = variational_ground(path.at(m), method, opts, &ga);
            if (gm.label == g[i].label)
                a = m, ga = gm;
            else
                b = m;
        }
        Transition tr;
        tr.tau_c = 0.5 * (a + b);
        tr.chi_peak = susceptibility(0.0, dt);  // discontinuity of the minimizing state
        if (conserved) tr.delta_label = g[i + 1].label - g[i].label;
        auto energy = [&](double t) { return variational_ground(path.at(clamp(t)), method, opts, &ga).energy; };
        tr.order = classify_order(energy, tr.tau_c);
        rep.transitions.push_back(tr);
    }
    return rep;
}

// ----------------------------------------------------------- critical couplings

CriticalEstimate dicke_quantum_critical(int n, double omega_a, const DickeCriticalOptions& opts) {
    if (n < 1) throw ValidationError("n_atoms must be positive");
    if (opts.coarse_points < 3) throw ValidationError("need at least three coarse points");
    const double gc = 0.5 * std::sqrt(omega_a);
    const double lo = gc, hi = gc * (1 + std::max(0.03, 3 * std::pow(double(n), -2.0 / 3)));
    ModelSpec top = ModelSpec::dicke(n, omega_a, hi);
    CutoffOptions co;
    co.initial_cutoff = 16;
    co.solver.complete_multiplet = false;
    co.solver.exec = opts.exec;
    const int cutoff = converged_ground(top, SectorSpec::parity(1, 1), opts.energy_tol, co).cutoff;

    GroundOptions go;
    go.fock_cutoff = cutoff;
    go.exec = opts.exec;
    go.tol = 1e-12;
    std::vector<Eigen::VectorXd> warm;
    auto chi_at = [&](double g) {
        auto a = exact_ground(ModelSpec::dicke(n, omega_a, g - 0.5 * opts.delta), go, 0, &warm);
        auto b = exact_ground(ModelSpec::dicke(n, omega_a, g + 0.5 * opts.delta), go, 0, &warm);
        return susceptibility(std::min(1.0, std::norm(inner(a.state, b.state))), opts.delta);
    };
    const int P = opts.coarse_points;
    std::vector<double> chis(P);
    for (int i = 0; i < P; ++i) chis[i] = chi_at(lo + (hi - lo) * i / (P - 1));
    int im = int(std::max_element(chis.begin(), chis.end()) - chis.begin());
    const double step = (hi - lo) / (P - 1);
    double a = lo + step * std::max(0, im - 1), b = lo + step * std::min(P - 1, im + 1);
    const double r = 0.5 * (std::sqrt(5.0) - 1);
    double c = b - r * (b - a), e = a + r * (b - a);
    double fc = chi_at(c), fe = chi_at(e);
    while (b - a > 1e-6) {
        if (fc > fe) {
            b = e, e = c, fe = fc;
            c = b - r * (b - a), fc = chi_at(c);
        } else {
            a = c, c = e, fc = fe;
            e = a + r * (b - a), fe = chi_at(e);
        }
    }
    return {0.5 * (a + b), std::max(fc, fe), cutoff};
}

namespace {

using Surface = std::function<double(double, const std::vector<double>&)>;
using SeedFn = std::function<std::vector<std::vector<double>>(double)>;

struct Descent {
    std::vector<double> x;
    double e;
};

Descent descend(const Surface& f, double c, const std::vector<double>& x0) {
    SimplexOptions so;
    so.f_tol = 1e-16;
    so.x_tol = 1e-11;
    auto r = nelder_mead([&](const std::vector<double>& x) { return f(c, x); }, x0, so);
    return {r.x, r.value};
}

// Coupling at which the global minimizer of f(c, .) jumps between two separated branches.
// Coarse scan of the global minimum (order parameter = |x[k]|), then bisection on the energy
// difference of the two branches continued from either side of the largest jump.
double minimizer_jump(const Surface& f, const SeedFn& seeds, double lo, double hi, int points, std::size_t k) {
    std::vector<Descent> g(points);
    std::vector<double> cs(points);
    for (int i = 0; i < points; ++i) {
        cs[i] = lo + (hi - lo) * i / (points - 1);
        auto ss = seeds(cs[i]);
        if (i > 0) ss.push_back(g[i - 1].x);
        Descent best{{}, std::numeric_limits<double>::infinity()};
        for (const auto& s : ss) {
            auto d = descend(f, cs[i], s);
            if (d.e < best.e) best = d;
        }
        if (!std::isfinite(best.e)) throw ComputeError("energy surface not finite at any seed");
        g[i] = best;
    }
    int jump = -1;
    double size = 0;
    for (int i = 0; i + 1 < points; ++i) {
        double d = std::abs(std::abs(g[i + 1].x[k]) - std::abs(g[i].x[k]));
        if (d > size) size = d, jump = i;
    }
    if (jump < 0) throw ComputeError("no discontinuity of the minimizing parameters in the scan window");
    double a = cs[jump], b = cs[jump + 1];
    auto xa = g[jump].x, xb = g[jump + 1].x;
    const double sep = 0.25 * size;
    for (int it = 0; it < 60 && b - a > 1e-12 * std::max(1.0, b); ++it) {
        double m = 0.5 * (a + b);
        auto da = descend(f, m, xa), db = descend(f, m, xb);
        double dist = std::abs(std::abs(da.x[k]) - std::abs(db.x[k]));
        if (dist < sep) {
            // one branch has disappeared at m: both descents landed on the survivor
            double to_a = std::abs(std::abs(da.x[k]) - std::abs(xa[k]));
            double to_b = std::abs(std::abs(da.x[k]) - std::abs(xb[k]));
            if (to_a < to_b) a = m, xa = da.x; else b = m, xb = db.x;
        } else if (da.e < db.e) {
            a = m, xa = da.x;
        } else {
            b = m, xb = db.x;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double dicke_sas_critical(int n, double omega_a) {
    if (n < 1) throw ValidationError("n_atoms must be positive");
    const double gc = 0.5 * std::sqrt(omega_a);
    Surface f = [&](double g, const std::vector<double>& x) {
        ModelSpec s = ModelSpec::dicke(n, omega_a, g);
        try {
            return energy_surface_2level(s, Family::DickeSasPlus, TwoLevelParams{x[0], 0, x[1], 0});
        } catch (const ComputeError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    SeedFn seeds = [&](double g) {
        auto cp = dicke_critical_point(ModelSpec::dicke(n, omega_a, g));
        std::vector<std::vector<double>> out;
        for (double t : {0.1, 0.3, 0.6, 1.0}) out.push_back({t * cp.q, t * cp.theta});
        return out;
    };
    return minimizer_jump(f, seeds, gc * (1 + 1e-4), gc * (1 + 4 / std::sqrt(double(n))), 81, 0);
}

double v_sas_critical(int n, double chi) {
    if (n < 1) throw ValidationError("n_atoms must be positive");
    Surface f = [&](double mu, const std::vector<double>& x) {
        if (x[0] < 0 || x[1] < 0 || x[1] >= 1) return std::numeric_limits<double>::infinity();
        ModelSpec s = ModelSpec::three_level(ModelKind::VFull, n, {0, 1, 1}, mu, 0, 0);
        return v_sas_plus_energy(s, VReducedParams{x[0], x[1], chi});
    };
    SeedFn seeds = [](double mu) {
        // mean-field scale of the superradiant branch grows like sqrt(mu - 1/2)
        double r = std::sqrt(std::max(mu * mu - 0.25, 1e-4));
        std::vector<std::vector<double>> out;
        for (double t : {0.05, 0.2, 0.5, 1.0, 1.5}) out.push_back({t * r, std::min(0.9, t * r)});
        return out;
    };
    return minimizer_jump(f, seeds, 0.5 + 1e-4, 0.5 + 3 / std::sqrt(double(n)), 81, 0);
}

// ---------------------------------------------------------------- exponent fit

FitResult fit_critical_exponent(const std::vector<std::pair<double, double>>& samples, double offset) {
    if (samples.size() < 4) throw ValidationError("exponent fit needs at least 4 samples");
    const std::size_t n = samples.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto [nn, c] = samples[i];
        if (!(nn > 0)) throw ValidationError("system sizes must be positive");
        if (!(c > offset)) throw ValidationError("critical couplings must exceed the offset");
        x[i] = std::log(nn);
        y[i] = std::log(c - offset);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i] / n, my += y[i] / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw ValidationError("degenerate abscissas in exponent fit");
    FitResult r;
    r.exponent = sxy / sxx;
    r.log_prefactor = my - r.exponent * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = y[i] - (r.log_prefactor + r.exponent * x[i]);
        ssr += e * e;
    }
    r.r_squared = syy > 0 ? std::clamp(1 - ssr / syy, 0.0, 1.0) : 1.0;
    r.stderr_slope = std::sqrt(ssr / double(n - 2) / sxx);
    boost::math::students_t dist(double(n - 2));
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    r.confidence_interval = {r.exponent - t * r.stderr_slope, r.exponent + t * r.stderr_slope};
    return r;
}

// ---------------------------------------------------------------- triple point

ModelSpec triple_point_spec(int n) {
    return ModelSpec::three_level(ModelKind::XiRwa, n, {0, 1, 2}, 1.0, 0.0, std::sqrt(2.0));
}

int printed_ket_phase(const Label& label, int n_atoms) { return ((n_atoms - label.q()) % 2) ? -1 : 1; }

TriplePointState triple_point_ground_state(int n, int m) {
    if (n < 2) throw ValidationError("triple-point states need N_A >= 2");
    if (m < 0 || m > 2) throw ValidationError("triple-point states are tabulated for M = 0, 1, 2 only");
    Basis b = enumerate_basis(triple_point_spec(n), SectorSpec::m_block(m));
    std::vector<std::pair<Label, double>> printed;
    auto put = [&](int nu, int n1, int n2, int n3, double c) { printed.push_back({Label{nu, {n1, n2, n3}}, c}); };
    const double dn = n;
    if (m == 0) {
        put(0, n, 0, 0, 1);
    } else if (m == 1) {
        put(0, n - 1, 1, 0, M_SQRT1_2);
        put(1, n, 0, 0, M_SQRT1_2);
    } else {
        put(0, n - 1, 0, 1, -0.5 / std::sqrt(dn));           // |0; N-1, N-1>
        put(0, n - 2, 2, 0, 0.5 * std::sqrt((dn - 1) / dn));  // |0; N, N-2>
        put(1, n - 1, 1, 0, M_SQRT1_2);                      // |1; N, N-1>
        put(2, n, 0, 0, 0.5);                                // |2; N, N>
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b.size());
    for (const auto& [l, c] : printed) v[*b.find(l)] = c * printed_ket_phase(l, n);
    auto id = b.id();
    auto state = StateVector::make(std::move(v), id);
    return {std::move(b), std::move(state), std::move(printed)};
}

// ------------------------------------------------------------------------ grid

std::vector<std::optional<double>> PhaseGrid::first_peaks() const {
    std::vector<std::optional<double>> out;
    for (const auto& row : rows) {
        std::vector<double> chi;
        for (const auto& c : row) chi.push_back(c.chi);
        auto p = chi_peaks(chi, 10.0);
        if (p.empty())
            out.emplace_back();
        else
            out.emplace_back(row[p[0]].x + 0.5 * x.step());
    }
    return out;
}

namespace {

int mean_field_label(const ModelSpec& spec, std::vector<double>& warm) {
    std::vector<std::vector<double>> seeds{{0, 0, 0}, {std::sqrt(double(spec.n_atoms)), 1, 1}};
    if (!warm.empty()) seeds.push_back(warm);
    MinimizeOptions mo;
    mo.exec = Execution::Serial;
    auto r = minimize_energy(spec, Family::Rwa3Coh, seeds, mo);
    const auto& p = std::get<ThreeLevelParams>(r.best.params);
    warm = {p.rho, p.rho2, p.rho3};
    auto w = excitation_weights(spec.kind);
    double g = 1 + p.rho2 * p.rho2 + p.rho3 * p.rho3;
    double m = p.rho * p.rho + spec.n_atoms * (w[0] * p.rho2 * p.rho2 + w[1] * p.rho3 * p.rho3) / g;
    return int(std::lround(m));
}

std::vector<GridCell> grid_row(const ModelSpec& base, const GridAxis& xa, const GridAxis& ya, int iy,
                               const GridOptions& opts) {
    std::vector<GridCell> row;
    std::vector<Eigen::VectorXd> warm;
    std::vector<double> mf_warm;
    const bool blocks = has_blocks(base.kind);
    PathGround prev;
    int after_change = -1;
    const double y = ya.at(iy);
    for (int ix = 0; ix < xa.samples; ++ix) {
        ModelSpec s = base;
        set_coupling(s, ya.coupling, y);
        set_coupling(s, xa.coupling, xa.at(ix));
        int hint = ix == 0 ? 0 : prev.label;
        PathGround g = exact_ground(s, opts.ground, hint, &warm);
        if (blocks) {
            int mf = mean_field_label(s, mf_warm);
            if (std::abs(mf - g.label) > 2) {
                PathGround alt = exact_ground(s, opts.ground, mf, &warm);
                if (alt.energy < g.energy) g = alt;
            }
        }
        if (ix > 0) {
            double f = prev.label != g.label ? 0.0 : std::min(1.0, std::norm(inner(prev.state, g.state)));
            row.back().chi = susceptibility(f, xa.step());
            if (opts.stop_at_first_peak && after_change < 0 && prev.label != g.label) after_change = 0;
        }
        row.push_back({xa.at(ix), y, g.energy, g.label, kNaN});
        prev = std::move(g);
        if (after_change >= 0 && ++after_change > 2) break;
    }
    return row;
}

}  // namespace

PhaseGrid compute_phase_grid(const ModelSpec& base, const GridAxis& x, const GridAxis& y, const GridOptions& opts,
                             Execution exec) {
    base.validate();
    if (x.samples < 1 || y.samples < 1) throw ValidationError("grid axes need at least one sample");
    if (x.coupling == y.coupling) throw ValidationError("grid axes must vary different couplings");
    PhaseGrid grid{base, x, y, std::vector<std::vector<GridCell>>(y.samples)};
    GridOptions row_opts = opts;
    if (exec == Execution::Parallel) {
        row_opts.ground.exec = Execution::Serial;  // parallelism lives at the row level
#pragma omp parallel for schedule(dynamic)
        for (int iy = 0; iy < y.samples; ++iy) grid.rows[iy] = grid_row(base, x, y, iy, row_opts);
    } else {
        for (int iy = 0; iy < y.samples; ++iy) grid.rows[iy] = grid_row(base, x, y, iy, row_opts);
    }
    return grid;
}

}  // namespace cavity
