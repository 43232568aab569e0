#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavity/spectra.hpp"
#include "cavity/variational.hpp"

namespace cavity {

// ---- separatrices ----
// Ordinate convention per kind (abscissa -> ordinate):
//   XI: mu23 -> mu12;  LAMBDA: mu23 -> mu13;  V: mu13 -> mu12;
//   TCM: gamma -> omega_A (upper branch, +gamma^2);  DICKE: omega_A -> gamma_c.
// FULL kinds use the RWA curve at doubled coordinates (i.e. halved loci).
std::optional<double> separatrix_ordinate(ModelKind kind, double w21, double w31, double abscissa);
// Curve points (ordinate, abscissa) for abscissa in [lo, hi]; unsolvable samples are skipped.
std::vector<std::pair<double, double>> separatrix_polyline(const ModelSpec& spec, double lo, double hi, int samples);

// ---- fidelity ----
struct FidelitySample {
    double fidelity;
    double chi;
};
// One entry per adjacent pair (size n - 1).
std::vector<FidelitySample> fidelity_and_susceptibility(const std::vector<StateVector>& states, double dtau);
double susceptibility(double fidelity, double dtau);

// ---- exact ground states along a path ----
struct PathGround {
    double energy = 0;  // per particle (printed convention)
    int label = 0;      // lambda (TCM), M (3-level RWA), parity otherwise
    StateVector state;
};

struct GroundOptions {
    std::optional<int> fock_cutoff;  // required for parity-sector models
    Execution exec = Execution::Parallel;
    double tol = 1e-11;
    Eigen::Index dense_threshold = 300;  // ground-only solves above this go to Lanczos
};

// Searches conserved blocks around `hint` (and 0) and widens while the edge wins.
PathGround exact_ground(const ModelSpec& spec, const GroundOptions& opts, int hint = 0,
                        std::vector<Eigen::VectorXd>* warm = nullptr);

// ---- transitions ----
enum class TransitionMethod { Quantum, Sas, Projected };
enum class TransitionOrder { First, Second };
std::string to_string(TransitionMethod m);
TransitionMethod transition_method_from_string(const std::string& s);
std::string to_string(TransitionOrder o);

struct Transition {
    double tau_c = 0;
    TransitionOrder order = TransitionOrder::Second;
    double chi_peak = 0;
    std::optional<int> delta_label;  // change of lambda or M
    bool ambiguous = false;          // two candidate peaks inside one path step
};

struct TransitionReport {
    ParameterPath path;
    TransitionMethod method = TransitionMethod::Quantum;
    std::vector<Transition> transitions;
};

struct TransitionOptions {
    double prominence = 10;      // chi_peak > prominence * median(chi)
    double refine_delta = 1e-4;  // fidelity step used while refining smooth peaks
    GroundOptions ground;
    int seeds = 12;  // variational multi-start count
    std::uint64_t seed = 0;
};

TransitionReport locate_transitions(const ParameterPath& path, TransitionMethod method,
                                    const TransitionOptions& opts = {});

// One-sided derivative jump of E/N at tau_c, with steps h.
double derivative_jump(const std::function<double(double)>& energy, double tau_c, double h);
TransitionOrder classify_order(const std::function<double(double)>& energy, double tau_c);

// ---- variational ground states along a path ----
struct VariationalGround {
    double energy = 0;
    int label = 0;
    VariationalPoint point;
};
VariationalGround variational_ground(const ModelSpec& spec, TransitionMethod method, const TransitionOptions& opts,
                                     const VariationalGround* previous = nullptr);

// ---- critical couplings ----
struct DickeCriticalOptions {
    int coarse_points = 40;
    double delta = 1e-4;
    double energy_tol = 1e-9;  // cutoff convergence at the window top
    Execution exec = Execution::Parallel;
};
struct CriticalEstimate {
    double coupling;
    double chi_peak;
    int cutoff;
};
// chi-peak of the Dicke ground state (even parity) in gamma at fixed omega_A.
CriticalEstimate dicke_quantum_critical(int n_atoms, double omega_a = 1.0, const DickeCriticalOptions& opts = {});
// Coupling where the global SAS+ minimiser jumps from the small- to the large-amplitude branch.
double dicke_sas_critical(int n_atoms, double omega_a = 1.0);
// Same for the V-configuration reduced SAS+ surface (double resonance), in mu = |(mu12, mu13)|.
double v_sas_critical(int n_atoms, double chi = 0.0);

// ---- exponent fit ----
struct FitResult {
    double exponent = 0;
    double log_prefactor = 0;
    double r_squared = 0;
    std::pair<double, double> confidence_interval;  // 95%
    double stderr_slope = 0;
};
FitResult fit_critical_exponent(const std::vector<std::pair<double, double>>& samples, double offset = 0.5);

// ---- triple point ----
ModelSpec triple_point_spec(int n_atoms);
struct TriplePointState {
    Basis basis;
    StateVector state;  // in the occupation basis
    // Amplitudes as tabulated on the |nu; q, r> kets (q, r = N - n3, N - n3 - n2).
    std::vector<std::pair<Label, double>> printed;
};
// Phase between a |nu; q, r> ket and the occupation state with the same label: (-1)^(N - q).
int printed_ket_phase(const Label& label, int n_atoms);
TriplePointState triple_point_ground_state(int n_atoms, int m);

// ---- phase-diagram grid (3-level RWA) ----
struct GridAxis {
    Coupling coupling = Coupling::Mu12;
    double start = 0, end = 1;
    int samples = 2;
    double at(int i) const { return samples > 1 ? start + (end - start) * i / (samples - 1) : start; }
    double step() const { return samples > 1 ? (end - start) / (samples - 1) : 0.0; }
};

struct GridCell {
    double x, y;
    double energy;  // per particle
    int label;      // M (RWA) or parity
    double chi;     // towards the next x sample; NaN on the last column
};

struct GridOptions {
    GroundOptions ground;
    bool stop_at_first_peak = false;  // rows end after their first chi peak
    double prominence = 10;
};

struct PhaseGrid {
    ModelSpec base;
    GridAxis x, y;
    std::vector<std::vector<GridCell>> rows;  // rows[iy][ix]
    // First chi peak per row (x location, midpoint of the pair), if any.
    std::vector<std::optional<double>> first_peaks() const;
};

PhaseGrid compute_phase_grid(const ModelSpec& base, const GridAxis& x, const GridAxis& y, const GridOptions& opts = {},
                             Execution exec = Execution::Parallel);
// Peaks of chi along a row: indices i with chi[i] a local maximum above prominence * median.
std::vector<std::size_t> chi_peaks(const std::vector<double>& chi, double prominence);

}  // namespace cavity
