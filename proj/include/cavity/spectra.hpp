#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cavity/kernels.hpp"
#include "cavity/model.hpp"

namespace cavity {

struct StateVector {
    Eigen::VectorXcd amplitudes;
    std::uint64_t basis_id = 0;

    // Normalizes and fixes the global phase (largest-magnitude amplitude real positive).
    static StateVector make(Eigen::VectorXcd amplitudes, std::uint64_t basis_id);
    double norm() const { return amplitudes.norm(); }
};

void fix_global_phase(Eigen::VectorXcd& v);
std::complex<double> inner(const StateVector& bra, const StateVector& ket);

struct EigenResult {
    std::vector<double> energies;  // ascending, printed convention
    std::vector<StateVector> states;
    std::uint64_t basis_id = 0;
    int ground_multiplicity = 1;
    double max_residual = 0;  // Lanczos: largest ||Hx - theta x|| / max(1, |theta|_max)
};

enum class SolverKind { Auto, Dense, Iterative };

struct SolverOptions {
    SolverKind solver = SolverKind::Auto;
    Eigen::Index dense_threshold = 2000;
    int max_restarts = 500;
    int subspace = 0;  // 0: automatic
    const Eigen::VectorXd* start = nullptr;
    Execution exec = Execution::Parallel;
    bool complete_multiplet = true;
};

constexpr double kDegeneracyTol = 1e-9;

EigenResult lowest_eigenpairs(const OperatorMatrix& h, int k, double tol = 1e-10, const SolverOptions& opts = {});

struct ConvergedGround {
    EigenResult result;
    int cutoff = -1;  // -1 for finite blocks (cutoff-independent)
    Basis basis;
};

struct CutoffOptions {
    std::optional<int> initial_cutoff;  // default: ceil(4 N gamma_eff^2 + 10)
    int hard_cap = 4096;
    Eigen::Index max_dimension = 4'000'000;
    SolverOptions solver;
};

struct CutoffCapError : ComputeError {
    CutoffCapError(const std::string& what, double best, int cutoff)
        : ComputeError(what), best_estimate(best), last_cutoff(cutoff) {}
    double best_estimate;
    int last_cutoff;
};

int initial_cutoff_guess(const ModelSpec& spec);

ConvergedGround converged_ground(const ModelSpec& spec, const SectorSpec& sector, double tol,
                                 const CutoffOptions& opts = {});

enum class Coupling { Gamma, AtomicFreq, Mu12, Mu13, Mu23 };
std::string to_string(Coupling c);
Coupling coupling_from_string(const std::string& name);
double get_coupling(const ModelSpec& spec, Coupling c);
void set_coupling(ModelSpec& spec, Coupling c, double value);

// Each listed coupling follows offset + slope * tau along the path.
struct AffineCoupling {
    Coupling target = Coupling::Gamma;
    double offset = 0;
    double slope = 1;
};

struct ParameterPath {
    ModelSpec base;
    std::vector<AffineCoupling> couplings;
    double start = 0;
    double end = 1;
    int samples = 2;

    std::vector<double> taus() const;
    double step() const { return samples > 1 ? (end - start) / (samples - 1) : 0.0; }
    ModelSpec at(double tau) const;
    void validate() const;
};

struct ScanTable {
    std::vector<double> taus;
    std::vector<SectorSpec> sectors;
    // energies[sector][curve][sample], printed convention; curves tracked by eigenvector overlap
    std::vector<std::vector<std::vector<double>>> energies;
};

ScanTable spectrum_scan(const ParameterPath& path, const std::vector<SectorSpec>& sectors, int k,
                        Execution exec = Execution::Parallel, double tol = 1e-10);

}  // namespace cavity
