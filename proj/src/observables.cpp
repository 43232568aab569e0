#include "cavity/observables.hpp"

#include <cmath>
#include <map>

#include "cavity/errors.hpp"
#include "cavity/kernels.hpp"
#include "cavity/variational.hpp"

namespace cavity {

namespace {

const std::map<ObservableId, std::string>& observable_names() {
    static const std::map<ObservableId, std::string> m{
        {ObservableId::Q, "q"},
        {ObservableId::P, "p"},
        {ObservableId::Jx, "J_x"},
        {ObservableId::Jy, "J_y"},
        {ObservableId::Jz, "J_z"},
        {ObservableId::NPh, "n_ph"},
        {ObservableId::Lambda, "Lambda"},
        {ObservableId::VarQ, "var_q"},
        {ObservableId::VarP, "var_p"},
        {ObservableId::VarJx, "var_Jx"},
        {ObservableId::VarJy, "var_Jy"},
        {ObservableId::VarJz, "var_Jz"},
        {ObservableId::VarNPh, "var_nph"},
        {ObservableId::VarLambda, "var_Lambda"},
        {ObservableId::JzNPhCorr, "Jz_nph_corr"},
        {ObservableId::JxQCorr, "Jx_q_corr"},
        {ObservableId::A11, "A_11"},
        {ObservableId::A22, "A_22"},
        {ObservableId::A33, "A_33"},
        {ObservableId::AtomicExcitation, "atomic_excitation"},
    };
    return m;
}

}  // namespace

std::string to_string(ObservableId id) { return observable_names().at(id); }

ObservableId observable_from_string(const std::string& s) {
    for (const auto& [id, name] : observable_names())
        if (name == s) return id;
    throw ValidationError("unknown observable '" + s + "'");
}

std::string to_string(StateFamily f) {
    switch (f) {
        case StateFamily::Quantum: return "QUANTUM";
        case StateFamily::Coherent: return "COHERENT";
        case StateFamily::SasPlus: return "SAS_PLUS";
        case StateFamily::SasMinus: return "SAS_MINUS";
    }
    return "?";
}

StateFamily state_family_from_string(const std::string& s) {
    for (auto f : {StateFamily::Quantum, StateFamily::Coherent, StateFamily::SasPlus, StateFamily::SasMinus})
        if (to_string(f) == s) return f;
    throw ValidationError("unknown state family '" + s + "'");
}

MeanVariance expectation_and_fluctuation(const StateVector& psi, const OperatorMatrix& op, Execution exec) {
    if (psi.basis_id != op.basis_id) throw ValidationError("state and operator live in different bases");
    Eigen::VectorXcd o = apply(op, psi.amplitudes, exec);
    double mean = std::real(psi.amplitudes.dot(o));
    double var = o.squaredNorm() - mean * mean;
    return {mean, std::max(var, 0.0)};
}

double correlation(const StateVector& psi, const OperatorMatrix& a, const OperatorMatrix& b, Execution exec) {
    if (psi.basis_id != a.basis_id || psi.basis_id != b.basis_id)
        throw ValidationError("state and operator live in different bases");
    Eigen::VectorXcd bpsi = apply(b, psi.amplitudes, exec);
    Eigen::VectorXcd apsi = apply(a, psi.amplitudes, exec);
    return std::real(apsi.dot(bpsi));  // <psi|A B|psi> for Hermitian A
}

double numeric_observable(const StateVector& psi, const Basis& basis, ObservableId id) {
    auto op = [&](OperatorId o, int i = 0, int j = 0) { return operator_matrix(o, basis, i, j); };
    auto mv = [&](OperatorId o) { return expectation_and_fluctuation(psi, op(o)); };
    switch (id) {
        case ObservableId::Q: return mv(OperatorId::Q).mean;
        case ObservableId::P: return mv(OperatorId::P).mean;
        case ObservableId::Jx: return mv(OperatorId::Jx).mean;
        case ObservableId::Jy: return mv(OperatorId::Jy).mean;
        case ObservableId::Jz: return mv(OperatorId::Jz).mean;
        case ObservableId::NPh: return mv(OperatorId::NPh).mean;
        case ObservableId::Lambda: return mv(OperatorId::LambdaHat).mean;
        case ObservableId::VarQ: return mv(OperatorId::Q).variance;
        case ObservableId::VarP: return mv(OperatorId::P).variance;
        case ObservableId::VarJx: return mv(OperatorId::Jx).variance;
        case ObservableId::VarJy: return mv(OperatorId::Jy).variance;
        case ObservableId::VarJz: return mv(OperatorId::Jz).variance;
        case ObservableId::VarNPh: return mv(OperatorId::NPh).variance;
        case ObservableId::VarLambda: return mv(OperatorId::LambdaHat).variance;
        case ObservableId::JzNPhCorr: return correlation(psi, op(OperatorId::Jz), op(OperatorId::NPh));
        case ObservableId::JxQCorr: return correlation(psi, op(OperatorId::Jx), op(OperatorId::Q));
        case ObservableId::A11: return expectation_and_fluctuation(psi, op(OperatorId::Aij, 1, 1)).mean;
        case ObservableId::A22: return expectation_and_fluctuation(psi, op(OperatorId::Aij, 2, 2)).mean;
        case ObservableId::A33: return expectation_and_fluctuation(psi, op(OperatorId::Aij, 3, 3)).mean;
        case ObservableId::AtomicExcitation: {
            auto w = excitation_weights(basis.kind());
            return w[0] * expectation_and_fluctuation(psi, op(OperatorId::Aij, 2, 2)).mean +
                   w[1] * expectation_and_fluctuation(psi, op(OperatorId::Aij, 3, 3)).mean;
        }
    }
    throw ValidationError("unknown observable");
}

bool has_closed_form(ObservableId id) {
    switch (id) {
        case ObservableId::A11:
        case ObservableId::A22:
        case ObservableId::A33:
        case ObservableId::AtomicExcitation: return false;
        default: return true;
    }
}

std::pair<double, double> coherent_sas_overlap(double x, double gamma_c, int n_atoms) {
    double f = overlap_function(x, gamma_c, n_atoms);
    return {0.5 * (1 + f), 0.5 * (1 - f)};
}

double closed_form_observable(StateFamily family, ObservableId id, double x, double gamma_c, int n_atoms, bool tcm) {
    if (!(x > 0)) throw ValidationError("x must be positive");
    if (!has_closed_form(id)) throw ValidationError("observable " + to_string(id) + " has no closed-form row");
    if (family == StateFamily::Quantum) throw ValidationError("closed forms exist only for variational families");
    const double gc = tcm ? 0.5 * gamma_c : gamma_c;
    const double n = n_atoms;
    x = std::max(x, 1.0);  // normal region: the x -> 1 limit
    const double x2 = x * x, x4 = x2 * x2;
    const double y = -std::expm1(-4 * std::log(x));  // 1 - x^{-4}
    const double g2 = gc * gc;

    if (family == StateFamily::Coherent) {
        switch (id) {
            case ObservableId::Q: return -std::sqrt(2 * n) * gc * x * std::sqrt(y);
            case ObservableId::P: return 0;
            case ObservableId::Jx: return n / 2 * std::sqrt(y);
            case ObservableId::Jy: return 0;
            case ObservableId::Jz: return -n / 2 / x2;
            case ObservableId::NPh: return n * g2 * x2 * y;
            case ObservableId::Lambda: return n / 2 * (1 - 1 / x2 + 2 * g2 * x2 * y);
            case ObservableId::VarQ:
            case ObservableId::VarP: return 0.5;
            case ObservableId::VarJx: return n / 4 / x4;
            case ObservableId::VarJy: return n / 4;
            case ObservableId::VarJz: return n / 4 * y;
            case ObservableId::VarNPh: return n * g2 * x2 * y;
            case ObservableId::VarLambda: return n * y / 4 * (1 + 4 * g2 * x2);
            case ObservableId::JzNPhCorr: return -n * n / 2 * g2 * y;
            case ObservableId::JxQCorr: return -std::sqrt(n * n * n / 2) * gc * x * y;
            default: break;
        }
    }

    const double s = family == StateFamily::SasPlus ? 1.0 : -1.0;
    const double lf = log_overlap_function(x, gc, n_atoms);
    const double f = std::exp(lf);
    // S = 1 + sF, D = 1 - sF, both accurate when F -> 1
    const double S = s > 0 ? 1 + f : -std::expm1(lf);
    const double D = s > 0 ? -std::expm1(lf) : 1 + f;
    if (!(S > 0)) throw ComputeError("the odd symmetry-adapted state vanishes in the normal region");
    switch (id) {
        case ObservableId::Q:
        case ObservableId::P:
        case ObservableId::Jx:
        case ObservableId::Jy: return 0;
        case ObservableId::Jz: return -n / 2 * x2 * (1 - y / S);
        case ObservableId::NPh: return n * g2 * x2 * y * D / S;
        case ObservableId::Lambda:
            return n / 2 * (1 - 1 / x2) / S * (1 + 2 * g2 * (1 + x2) - s * (x2 + 2 * g2 * (1 + x2)) * f);
        case ObservableId::VarQ: return 0.5 + 2 * n * g2 * x2 * y / S;
        case ObservableId::VarP: return 0.5 - s * 2 * n * g2 * x2 * y / S * f;
        case ObservableId::VarJx: return n / 4 * (1 + (n - 1) * y / S);
        case ObservableId::VarJy: return n / 4 * (1 + s * (n - 1) * (1 - x4) * f / S);
        case ObservableId::VarJz: return n / 4 * y / (S * S) * (1 - s * (n - 1) * (1 - x4) * f - x4 * f * f);
        case ObservableId::VarNPh: return n * g2 * x2 * y / S * (D + s * 4 * n * g2 * x2 * y * f / S);
        case ObservableId::JzNPhCorr: return -n * n / 2 * g2 * x4 * y * (1 / x4 - s * f) / S;
        case ObservableId::JxQCorr: return -std::sqrt(n * n * n / 2) * gc * x * y / S;
        case ObservableId::VarLambda:
            return n * y / (4 * S * S) *
                   (1 + 4 * x2 * g2 + s * f * (1 - x4) * (1 - n * (1 + 4 * g2) * (1 + 4 * g2)) -
                    x2 * f * f * (x2 + 4 * g2));
        default: break;
    }
    throw ValidationError("observable " + to_string(id) + " has no closed-form row");
}

bool NormalRatios::normal(double tol) const {
    double scale = std::max({std::abs(atomic_ratio), std::abs(field_ratio), 1e-300});
    return std::abs(atomic_ratio - field_ratio) <= tol * scale;
}

NormalRatios normal_criterion(const ModelSpec& spec, double photons, const std::array<double, 3>& populations) {
    if (!is_three_level(spec.kind)) throw ValidationError("normal criterion applies to 3-level models");
    if (!(populations[0] > 0)) throw ComputeError("<A11> = 0: atomic ratio undefined");
    auto w = excitation_weights(spec.kind);
    return {(w[0] * populations[1] + w[1] * populations[2]) / populations[0], photons / spec.n_atoms};
}

NormalRatios normal_criterion(const StateVector& psi, const Basis& basis, const ModelSpec& spec) {
    std::array<double, 3> pop;
    for (int i = 0; i < 3; ++i)
        pop[i] = expectation_and_fluctuation(psi, operator_matrix(OperatorId::Aij, basis, i + 1, i + 1)).mean;
    double ph = expectation_and_fluctuation(psi, operator_matrix(OperatorId::NPh, basis)).mean;
    return normal_criterion(spec, ph, pop);
}

}  // namespace cavity
