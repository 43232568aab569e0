#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cavity/model.hpp"
#include "cavity/spectra.hpp"

namespace cavity {

enum class Family {
    TcmCoh,
    TcmProj,
    DickeCoh,
    DickeSasPlus,
    DickeSasMinus,
    Rwa3Coh,
    Rwa3Proj,  // RWA coherent state projected onto one M block
    Full3Coh,
    Full3SasPlus,
    Full3SasMinus,
    VSasPlus,
};

std::string to_string(Family f);

// Field quadratures and Bloch angles; alpha = (q + i p)/sqrt(2), zeta = tan(theta/2) e^{i phi}.
struct TwoLevelParams {
    double q = 0, p = 0, theta = 0, phi = 0;
};

struct ProjectedParams {
    int lambda = 0;
    double eta = 0;
};

// alpha = rho e^{i phi}, gamma_1 = 1, gamma_k = rho_k e^{i phi_k}.
struct ThreeLevelParams {
    double rho = 0, phi = 0, rho2 = 0, phi2 = 0, rho3 = 0, phi3 = 0;
    int m_block = -1;  // Rwa3Proj only
};

// V configuration at double resonance: rho = |alpha|/sqrt(N), (rho2, rho3) = xi (cos eta, sin eta), chi = eta - theta.
struct VReducedParams {
    double rho = 0, xi = 0, chi = 0;
};

using Params = std::variant<TwoLevelParams, ProjectedParams, ThreeLevelParams, VReducedParams>;

struct VariationalPoint {
    Family family = Family::DickeCoh;
    ModelSpec spec;
    Params params;
    double energy = 0;  // per particle
};

// ---- two-level surfaces (per particle) ----
double energy_surface_2level(const ModelSpec& spec, Family family, const TwoLevelParams& p);

// Printed superradiant SAS form in terms of x = gamma/gamma_c; x <= 1 gives the normal-region limit.
double dicke_sas_energy(const ModelSpec& spec, double x, int sign);
double dicke_gamma_c(const ModelSpec& spec);
// ln F and F for F = x^{-2N} exp(-2N gc^2 x^2 (1 - x^{-4})), x clamped to >= 1.
double log_overlap_function(double x, double gamma_c, int n_atoms);
double overlap_function(double x, double gamma_c, int n_atoms);
// F for a general coherent point: exp(-2|alpha|^2) cos^N theta.
double dicke_overlap_at(const TwoLevelParams& p, int n_atoms);
// Coherent critical point (q_c, 0, theta_c, 0) of the Dicke surface; normal-region point when x <= 1.
TwoLevelParams dicke_critical_point(const ModelSpec& spec);

enum class TcmRegion { NorthPole, SouthPole, Parallels };
std::string to_string(TcmRegion r);

struct TcmCritical {
    TcmRegion region;
    double theta_c;
    double energy;    // per particle
    double lambda_c;  // <Lambda> at the critical point
    double q_c;
};
TcmCritical tcm_critical_data(const ModelSpec& spec);

double tcm_eta(const ModelSpec& spec);
// Laguerre-ratio energy of the lambda-projected coherent state (per particle).
double tcm_projected_energy(const ModelSpec& spec, int lambda, double eta);
// Normalized coefficients on nu = max(0, lambda - 2j) .. lambda (photon number ascending).
std::vector<double> tcm_projected_coefficients(int n_atoms, int lambda, double eta);

struct TcmProjectedGround {
    int lambda = 0;
    VariationalPoint point;
    std::vector<double> coefficients;
};
TcmProjectedGround tcm_projected_ground(const ModelSpec& spec);

// ---- three-level surfaces (per particle) ----
double energy_surface_3level(const ModelSpec& spec, Family family, const ThreeLevelParams& p);
double v_sas_plus_energy(const ModelSpec& spec, const VReducedParams& p);
ThreeLevelParams v_reduced_to_polar(const ModelSpec& spec, const VReducedParams& p);

// Closed-form SAS expectations from the same overlaps as the surface (full counts, not per particle).
struct Sas3Moments {
    double photons;
    std::array<double, 3> populations;
};
Sas3Moments sas3_moments(const ModelSpec& spec, const ThreeLevelParams& p, int sign);

double energy_of(const ModelSpec& spec, Family family, const Params& params);

// ---- minimization ----
// Free coordinates per family: 2-level (q, theta); TCM_PROJ none; 3-level (rho, rho2, rho3);
// V_SAS_PLUS (rho, xi).  Phases are fixed to 0.
std::vector<std::vector<double>> default_seeds(const ModelSpec& spec, Family family, int count = 20,
                                               std::uint64_t seed = 0);
Params params_from_coordinates(Family family, const std::vector<double>& x, int m_block = -1);

struct MinimizeResult {
    VariationalPoint best;
    std::vector<VariationalPoint> degenerate;  // distinct minima within 1e-8 of the best
    int seeds_converged = 0;
};

struct MinimizeOptions {
    Execution exec = Execution::Parallel;
    int m_block = -1;  // required for Rwa3Proj
    double degeneracy_tol = 1e-8;
};

MinimizeResult minimize_energy(const ModelSpec& spec, Family family, const std::vector<std::vector<double>>& seeds,
                               const MinimizeOptions& opts = {});

// ---- embedding ----
StateVector embed_variational_state(const VariationalPoint& point, const Basis& basis);

}  // namespace cavity
