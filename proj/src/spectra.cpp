#include "cavity/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace cavity {

void fix_global_phase(Eigen::VectorXcd& v) {
    if (v.size() == 0) return;
    double best = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) best = std::max(best, std::abs(v[i]));
    if (best == 0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= best * (1 - 1e-9)) {
            v *= std::conj(v[i]) / std::abs(v[i]);
            v[i] = std::abs(v[i]);
            return;
        }
    }
}

StateVector StateVector::make(Eigen::VectorXcd amplitudes, std::uint64_t basis_id) {
    double n = amplitudes.norm();
    if (!(n > 0)) throw ComputeError("cannot normalize a zero state");
    amplitudes /= n;
    fix_global_phase(amplitudes);
    return {std::move(amplitudes), basis_id};
}

std::complex<double> inner(const StateVector& bra, const StateVector& ket) {
    if (bra.basis_id != ket.basis_id || bra.amplitudes.size() != ket.amplitudes.size())
        throw ValidationError("states live on different bases");
    return bra.amplitudes.dot(ket.amplitudes);
}

namespace {

EigenResult dense_solve(const OperatorMatrix& h, int k) {
    EigenResult out;
    out.basis_id = h.basis_id;
    if (h.is_real()) {
        Eigen::MatrixXd m = Eigen::MatrixXd(h.re);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        if (es.info() != Eigen::Success) throw ComputeError("dense eigensolver failed");
        for (int i = 0; i < k; ++i) {
            out.energies.push_back(es.eigenvalues()[i]);
            out.states.push_back(StateVector::make(es.eigenvectors().col(i).cast<std::complex<double>>(), h.basis_id));
        }
    } else {
        Eigen::MatrixXcd m = Eigen::MatrixXd(h.re).cast<std::complex<double>>();
        m += std::complex<double>(0, 1) * Eigen::MatrixXd(h.im).cast<std::complex<double>>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        if (es.info() != Eigen::Success) throw ComputeError("dense eigensolver failed");
        for (int i = 0; i < k; ++i) {
            out.energies.push_back(es.eigenvalues()[i]);
            out.states.push_back(StateVector::make(es.eigenvectors().col(i), h.basis_id));
        }
    }
    return out;
}

// Thick-restart Lanczos with full reorthogonalization (real symmetric operators).
EigenResult lanczos_solve(const OperatorMatrix& h, int k, double tol, const SolverOptions& opts) {
    if (!h.is_real()) throw ComputeError("iterative solver supports real Hamiltonians only");
    const Eigen::Index n = h.dimension();
    const auto exec = opts.exec;
    Eigen::Index m = opts.subspace > 0 ? opts.subspace : std::max<Eigen::Index>(2 * k + 30, 60);
    m = std::min(m, n);

    Eigen::MatrixXd v(n, m), w(n, m), t = Eigen::MatrixXd::Zero(m, m);
    Eigen::Index cols = 0;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    auto project = [&](Eigen::VectorXd& x) {
        if (cols == 0) return;
        if (exec == Execution::Parallel) {
            project_out_parallel(v, cols, x);
            project_out_parallel(v, cols, x);
        } else {
            project_out_serial(v, cols, x);
            project_out_serial(v, cols, x);
        }
    };
    // Appends x (after orthogonalization); false when x is (numerically) in span(V).
    auto append = [&](Eigen::VectorXd x) {
        double before = x.norm();
        project(x);
        double after = x.norm();
        if (!(after > 1e-10 * std::max(before, 1e-300))) return false;
        x /= after;
        v.col(cols) = x;
        Eigen::VectorXd ax;
        spmv(h.re, x, ax, exec);
        w.col(cols) = ax;
        for (Eigen::Index i = 0; i <= cols; ++i) {
            double s = v.col(i).dot(ax);
            t(i, cols) = s;
            t(cols, i) = s;
        }
        ++cols;
        return true;
    };
    auto random_vector = [&] {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = uni(rng);
        return x;
    };

    Eigen::VectorXd x0 = (opts.start && opts.start->size() == n) ? *opts.start : random_vector();
    if (opts.start && opts.start->size() == n) x0 += 1e-3 * x0.norm() / std::sqrt(double(n)) * random_vector();
    if (!append(x0)) append(random_vector());

    EigenResult out;
    out.basis_id = h.basis_id;
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        // Krylov expansion
        bool exhausted = false;
        while (cols < m) {
            if (!append(w.col(cols - 1))) {
                bool ok = false;
                for (int tries = 0; tries < 3 && !ok && cols < n; ++tries) ok = append(random_vector());
                if (!ok) {
                    exhausted = true;
                    break;
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(cols, cols));
        const Eigen::MatrixXd& s = es.eigenvectors();
        const Eigen::VectorXd& theta = es.eigenvalues();
        // residuals are judged relative to the spectral scale seen so far
        const double scale = std::max(1.0, theta.cwiseAbs().maxCoeff());
        double worst = 0;
        int first_unconverged = -1;
        Eigen::VectorXd first_residual;
        const int kk = std::min<int>(k, cols);
        std::vector<Eigen::VectorXd> ritz(kk);
        for (int i = 0; i < kk; ++i) {
            ritz[i] = v.leftCols(cols) * s.col(i);
            Eigen::VectorXd r = w.leftCols(cols) * s.col(i) - theta[i] * ritz[i];
            double rn = r.norm();
            worst = std::max(worst, rn / scale);
            if (rn > tol * scale && first_unconverged < 0) {
                first_unconverged = i;
                first_residual = r;
            }
        }
        if (kk == k && (first_unconverged < 0 || cols == n || exhausted)) {
            for (int i = 0; i < k; ++i) {
                out.energies.push_back(theta[i]);
                out.states.push_back(StateVector::make(ritz[i].cast<std::complex<double>>(), h.basis_id));
            }
            out.max_residual = worst;
            if (first_unconverged >= 0 && worst > std::max(tol, 1e-8))
                throw ComputeError("Lanczos stagnated (residual " + std::to_string(worst) + ")");
            return out;
        }
        // Thick restart: keep the lowest p Ritz vectors, continue from the residual direction.
        const Eigen::Index p = std::min<Eigen::Index>(cols - 1, k + (m - k) / 2);
        Eigen::MatrixXd vn = v.leftCols(cols) * s.leftCols(p);
        Eigen::MatrixXd wn = w.leftCols(cols) * s.leftCols(p);
        v.leftCols(p) = vn;
        w.leftCols(p) = wn;
        t.setZero();
        for (Eigen::Index i = 0; i < p; ++i) t(i, i) = theta[i];
        cols = p;
        if (first_unconverged < 0) first_residual = random_vector();
        if (!append(first_residual)) append(random_vector());
    }
    throw ComputeError("Lanczos did not converge within the restart budget");
}

}  // namespace

EigenResult lowest_eigenpairs(const OperatorMatrix& h, int k, double tol, const SolverOptions& opts) {
    const Eigen::Index n = h.dimension();
    if (k < 1 || k > n) throw ValidationError("requested eigenpair count must lie in [1, dimension]");
    if (!(tol > 0)) throw ValidationError("tolerance must be positive");
    bool dense = opts.solver == SolverKind::Dense ||
                 (opts.solver == SolverKind::Auto && (n <= opts.dense_threshold || !h.is_real()));
    if (!dense && n <= 2 * k + 2) dense = true;
    int want = k;
    for (;;) {
        EigenResult r = dense ? dense_solve(h, want) : lanczos_solve(h, want, tol, opts);
        int mult = 1;
        while (mult < int(r.energies.size()) && r.energies[mult] - r.energies[0] < kDegeneracyTol) ++mult;
        bool open_multiplet = opts.complete_multiplet && mult == int(r.energies.size()) && want < n;
        if (!open_multiplet) {
            r.ground_multiplicity = mult;
            if (int(r.energies.size()) < std::max(k, mult)) {
                r.energies.resize(std::max(k, mult));
                r.states.resize(std::max(k, mult));
            }
            return r;
        }
        ++want;
    }
}

int initial_cutoff_guess(const ModelSpec& spec) {
    double g = spec.effective_coupling();
    return static_cast<int>(std::ceil(4.0 * spec.n_atoms * g * g + 10.0));
}

ConvergedGround converged_ground(const ModelSpec& spec, const SectorSpec& sector, double tol, const CutoffOptions& opts) {
    if (!(tol > 0)) throw ValidationError("tolerance must be positive");
    if (sector.finite_block()) {
        Basis b = enumerate_basis(spec, sector);
        if (b.size() == 0) throw ValidationError("empty sector " + sector.describe());
        auto h = assemble_hamiltonian(spec, b);
        return {lowest_eigenpairs(h, 1, 1e-10, opts.solver), -1, std::move(b)};
    }
    auto solve = [&](int cutoff) {
        SectorSpec s = sector;
        s.fock_cutoff = cutoff;
        Basis b = enumerate_basis(spec, s);
        if (Eigen::Index(b.size()) > opts.max_dimension)
            throw ComputeError("dimension cap exceeded");
        auto h = assemble_hamiltonian(spec, b);
        return ConvergedGround{lowest_eigenpairs(h, 1, 1e-10, opts.solver), cutoff, std::move(b)};
    };
    int n = std::max(1, opts.initial_cutoff.value_or(initial_cutoff_guess(spec)));
    ConvergedGround half = solve(std::max(1, (n + 1) / 2));
    ConvergedGround cur = solve(n);
    while (std::abs(cur.result.energies[0] - half.result.energies[0]) >= tol) {
        if (2 * n > opts.hard_cap)
            throw CutoffCapError("Fock cutoff cap reached before convergence", cur.result.energies[0], n);
        n *= 2;
        half = std::move(cur);
        try {
            cur = solve(n);
        } catch (const ComputeError&) {
            throw CutoffCapError("dimension cap reached before convergence", half.result.energies[0], n / 2);
        }
    }
    return cur;
}

std::string to_string(Coupling c) {
    switch (c) {
        case Coupling::Gamma: return "gamma";
        case Coupling::AtomicFreq: return "omega_a";
        case Coupling::Mu12: return "mu12";
        case Coupling::Mu13: return "mu13";
        case Coupling::Mu23: return "mu23";
    }
    return "?";
}

Coupling coupling_from_string(const std::string& name) {
    for (auto c : {Coupling::Gamma, Coupling::AtomicFreq, Coupling::Mu12, Coupling::Mu13, Coupling::Mu23})
        if (to_string(c) == name) return c;
    throw ValidationError("unknown coupling '" + name + "'");
}

double get_coupling(const ModelSpec& s, Coupling c) {
    switch (c) {
        case Coupling::Gamma: return s.gamma;
        case Coupling::AtomicFreq: return s.atomic_freq;
        case Coupling::Mu12: return s.mu[0];
        case Coupling::Mu13: return s.mu[1];
        case Coupling::Mu23: return s.mu[2];
    }
    return 0;
}

void set_coupling(ModelSpec& s, Coupling c, double value) {
    switch (c) {
        case Coupling::Gamma: s.gamma = value; break;
        case Coupling::AtomicFreq: s.atomic_freq = value; break;
        case Coupling::Mu12: s.mu[0] = value; break;
        case Coupling::Mu13: s.mu[1] = value; break;
        case Coupling::Mu23: s.mu[2] = value; break;
    }
}

std::vector<double> ParameterPath::taus() const {
    std::vector<double> out(samples);
    for (int i = 0; i < samples; ++i) out[i] = samples == 1 ? start : start + (end - start) * i / (samples - 1);
    return out;
}

ModelSpec ParameterPath::at(double tau) const {
    ModelSpec s = base;
    for (const auto& c : couplings) set_coupling(s, c.target, c.offset + c.slope * tau);
    return s;
}

void ParameterPath::validate() const {
    if (samples < 1) throw ValidationError("path.samples must be >= 1");
    if (!std::isfinite(start) || !std::isfinite(end)) throw ValidationError("path bounds must be finite");
    if (couplings.empty()) throw ValidationError("path must drive at least one coupling");
    at(start).validate();
    at(end).validate();
}

ScanTable spectrum_scan(const ParameterPath& path, const std::vector<SectorSpec>& sectors, int k, Execution exec,
                        double tol) {
    path.validate();
    if (sectors.empty()) throw ValidationError("spectrum scan needs at least one sector");
    ScanTable table;
    table.taus = path.taus();
    table.sectors = sectors;
    const int ns = static_cast<int>(table.taus.size());
    std::vector<Basis> bases;
    for (const auto& s : sectors) bases.push_back(enumerate_basis(path.at(table.taus[0]), s));

    std::vector<std::vector<EigenResult>> results(sectors.size(), std::vector<EigenResult>(ns));
    const int tasks = ns * int(sectors.size());
    SolverOptions so;
    so.exec = Execution::Serial;  // parallelism lives at the sample level
    so.complete_multiplet = false;
    std::string error;
    auto run = [&](int task) {
        int si = task / ns, i = task % ns;
        const Basis& b = bases[si];
        int kk = std::min<int>(k, int(b.size()));
        auto h = assemble_hamiltonian(path.at(table.taus[i]), b);
        results[si][i] = lowest_eigenpairs(h, kk, tol, so);
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int task = 0; task < tasks; ++task) {
            try {
                run(task);
            } catch (const std::exception& e) {
#pragma omp critical
                error = e.what();
            }
        }
    } else {
        for (int task = 0; task < tasks; ++task) run(task);
    }
    if (!error.empty()) throw ComputeError("spectrum scan: " + error);

    for (std::size_t si = 0; si < sectors.size(); ++si) {
        const int kk = static_cast<int>(results[si][0].energies.size());
        std::vector<std::vector<double>> curves(kk, std::vector<double>(ns));
        std::vector<int> owner(kk);  // curve -> index at current sample
        for (int c = 0; c < kk; ++c) owner[c] = c, curves[c][0] = results[si][0].energies[c];
        for (int i = 1; i < ns; ++i) {
            const auto& prev = results[si][i - 1];
            const auto& cur = results[si][i];
            std::vector<bool> taken(kk, false);
            std::vector<int> next(kk, -1);
            for (int c = 0; c < kk; ++c) {
                int best = -1;
                double best_ov = -1;
                for (int j = 0; j < kk; ++j) {
                    if (taken[j]) continue;
                    double ov = std::norm(inner(prev.states[owner[c]], cur.states[j]));
                    if (ov > best_ov + 1e-9) best_ov = ov, best = j;  // ties keep energy order
                }
                taken[best] = true;
                next[c] = best;
                curves[c][i] = cur.energies[best];
            }
            owner = next;
        }
        table.energies.push_back(std::move(curves));
    }
    return table;
}

}  // namespace cavity
