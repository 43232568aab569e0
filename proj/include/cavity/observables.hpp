#pragma once

#include <string>
#include <utility>

#include "cavity/model.hpp"
#include "cavity/spectra.hpp"

namespace cavity {

enum class ObservableId {
    Q, P, Jx, Jy, Jz, NPh, Lambda,
    VarQ, VarP, VarJx, VarJy, VarJz, VarNPh, VarLambda,
    JzNPhCorr, JxQCorr,
    A11, A22, A33, AtomicExcitation,
};

enum class StateFamily { Quantum, Coherent, SasPlus, SasMinus };

std::string to_string(ObservableId id);
ObservableId observable_from_string(const std::string& s);
std::string to_string(StateFamily f);
StateFamily state_family_from_string(const std::string& s);

struct ObservableReport {
    ObservableId id;
    double value;
    StateFamily family;
};

struct MeanVariance {
    double mean;
    double variance;
};

// <O> and <O^2> - <O>^2 for a Hermitian operator.
MeanVariance expectation_and_fluctuation(const StateVector& psi, const OperatorMatrix& op,
                                         Execution exec = Execution::Serial);
// Re <A B>.
double correlation(const StateVector& psi, const OperatorMatrix& a, const OperatorMatrix& b,
                   Execution exec = Execution::Serial);

// Numeric value of any 2-level observable id on a state living in `basis`.
double numeric_observable(const StateVector& psi, const Basis& basis, ObservableId id);

// Closed-form superradiant-regime table, evaluated at max(x, 1).  `tcm` applies gamma_c -> gamma_c/2.
double closed_form_observable(StateFamily family, ObservableId id, double x, double gamma_c, int n_atoms,
                              bool tcm = false);
bool has_closed_form(ObservableId id);

// (1 + F)/2, (1 - F)/2.
std::pair<double, double> coherent_sas_overlap(double x, double gamma_c, int n_atoms);

struct NormalRatios {
    double atomic_ratio;  // <lambda_2 A22 + lambda_3 A33> / <A11>
    double field_ratio;   // <N_ph> / N
    bool normal(double tol = 0.02) const;
};

NormalRatios normal_criterion(const StateVector& psi, const Basis& basis, const ModelSpec& spec);
// From populations and photon number directly (closed-form SAS moments).
NormalRatios normal_criterion(const ModelSpec& spec, double photons, const std::array<double, 3>& populations);

}  // namespace cavity
