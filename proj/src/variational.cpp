#include "cavity/variational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>

#include "cavity/simplex.hpp"

namespace cavity {

using cplx = std::complex<double>;

std::string to_string(Family f) {
    switch (f) {
        case Family::TcmCoh: return "TCM_COH";
        case Family::TcmProj: return "TCM_PROJ";
        case Family::DickeCoh: return "DICKE_COH";
        case Family::DickeSasPlus: return "DICKE_SAS+";
        case Family::DickeSasMinus: return "DICKE_SAS-";
        case Family::Rwa3Coh: return "RWA3_COH";
        case Family::Rwa3Proj: return "RWA3_PROJ";
        case Family::Full3Coh: return "FULL3_COH";
        case Family::Full3SasPlus: return "FULL3_SAS+";
        case Family::Full3SasMinus: return "FULL3_SAS-";
        case Family::VSasPlus: return "V_SAS_PLUS";
    }
    return "?";
}

std::string to_string(TcmRegion r) {
    switch (r) {
        case TcmRegion::NorthPole: return "NorthPole";
        case TcmRegion::SouthPole: return "SouthPole";
        case TcmRegion::Parallels: return "Parallels";
    }
    return "?";
}

namespace {

int sas_sign(Family f) { return (f == Family::DickeSasMinus || f == Family::Full3SasMinus) ? -1 : 1; }

// 1 + sign * r with r = s * exp(log_r), accurate when the result is small.
double one_plus(int sign, double r_sign, double log_r) {
    if (log_r < -745) return 1.0;
    double r = r_sign * std::exp(log_r);
    if (sign * r_sign < 0) return -std::expm1(log_r);
    return 1.0 + sign * r;
}

// pow(c, n) as (sign, log|c|^n); sign 0 when c == 0 and n > 0.
std::pair<double, double> signed_pow(double c, int n) {
    if (n == 0) return {1.0, 0.0};
    if (c == 0) return {0.0, -std::numeric_limits<double>::infinity()};
    double sg = (c < 0 && (n % 2)) ? -1.0 : 1.0;
    return {sg, n * std::log(std::abs(c))};
}

double log_binom(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

void require_kind(bool ok, Family f, const ModelSpec& s) {
    if (!ok) throw ValidationError("family " + to_string(f) + " does not apply to model " + to_string(s.kind));
}

}  // namespace

// ---------------------------------------------------------------- two-level

double dicke_gamma_c(const ModelSpec& spec) { return 0.5 * std::sqrt(spec.atomic_freq * spec.field_freq); }

double log_overlap_function(double x, double gc, int n) {
    if (!(x > 0)) throw ValidationError("x must be positive");
    if (x <= 1) return 0.0;
    return -2.0 * n * std::log(x) - 2.0 * n * gc * gc * x * x * (1.0 - std::pow(x, -4));
}

double overlap_function(double x, double gc, int n) { return std::exp(log_overlap_function(x, gc, n)); }

double dicke_overlap_at(const TwoLevelParams& p, int n) {
    double a2 = 0.5 * (p.q * p.q + p.p * p.p);
    auto [sg, lc] = signed_pow(std::cos(p.theta), n);
    return sg * std::exp(-2 * a2 + lc);
}

TwoLevelParams dicke_critical_point(const ModelSpec& spec) {
    double gc = dicke_gamma_c(spec);
    double x = spec.gamma / gc;
    TwoLevelParams p;
    if (x <= 1) return p;
    p.theta = std::acos(1.0 / (x * x));
    p.q = -std::sqrt(2.0 * spec.n_atoms) * gc * x * std::sqrt(1.0 - std::pow(x, -4));
    return p;
}

double dicke_sas_energy(const ModelSpec& spec, double x, int sign) {
    require_kind(spec.kind == ModelKind::Dicke, Family::DickeSasPlus, spec);
    if (!(x > 0)) throw ValidationError("x must be positive");
    const double gc = dicke_gamma_c(spec);
    const int n = spec.n_atoms;
    if (x <= 1) {
        if (sign > 0) return -2 * gc * gc;
        return -gc * gc * (2 - 4.0 / (n * (1 + 4 * gc * gc)));
    }
    double lf = log_overlap_function(x, gc, n);
    double one_minus_x4 = -std::expm1(-4 * std::log(x));
    double num = one_plus(-sign, 1.0, lf);  // 1 ∓ F
    double den = one_plus(sign, 1.0, lf);   // 1 ± F
    return -gc * gc * x * x * (2 - one_minus_x4 * num / den);
}

double energy_surface_2level(const ModelSpec& spec, Family family, const TwoLevelParams& p) {
    const int n = spec.n_atoms;
    const double sn = std::sqrt(double(n));
    const double st = std::sin(p.theta), ct = std::cos(p.theta);
    const double field = spec.field_freq * (p.q * p.q + p.p * p.p) / (2.0 * n);
    switch (family) {
        case Family::TcmCoh:
            require_kind(spec.kind == ModelKind::TCM, family, spec);
            return field - 0.5 * spec.atomic_freq * ct +
                   spec.gamma / std::sqrt(2.0 * n) * st * (p.q * std::cos(p.phi) + p.p * std::sin(p.phi));
        case Family::DickeCoh:
            require_kind(spec.kind == ModelKind::Dicke, family, spec);
            return field - 0.5 * spec.atomic_freq * ct + std::sqrt(2.0) * spec.gamma / sn * p.q * st * std::cos(p.phi);
        case Family::DickeSasPlus:
        case Family::DickeSasMinus: {
            require_kind(spec.kind == ModelKind::Dicke, family, spec);
            const int sign = sas_sign(family);
            const double j = 0.5 * n;
            const double a2 = 0.5 * (p.q * p.q + p.p * p.p);
            const double direct = n * energy_surface_2level(spec, Family::DickeCoh, p);
            auto [sn_, lcn] = signed_pow(ct, n);
            auto [sn1, lcn1] = signed_pow(ct, n - 1);
            const double e2 = std::exp(-2 * a2);
            const double cn1 = sn1 * std::exp(lcn1);
            const double cross = -spec.field_freq * a2 * e2 * sn_ * std::exp(lcn) - spec.atomic_freq * j * cn1 * e2 +
                                 spec.gamma / sn * e2 * j * st * cn1 * (-2 * std::sqrt(2.0) * p.p * std::sin(p.phi));
            const double den = one_plus(sign, sn_, -2 * a2 + lcn);
            if (!(std::abs(den) > 1e-300)) throw ComputeError("symmetry-adapted state has zero norm at this point");
            return (direct + sign * cross) / den / n;
        }
        default: throw ValidationError("family " + to_string(family) + " is not a 2-level surface");
    }
}

TcmCritical tcm_critical_data(const ModelSpec& spec) {
    require_kind(spec.kind == ModelKind::TCM, Family::TcmCoh, spec);
    const double w = spec.atomic_freq, g2 = spec.gamma * spec.gamma;
    const int n = spec.n_atoms;
    if (w >= g2) return {TcmRegion::NorthPole, 0.0, -0.5 * w, 0.0, 0.0};
    if (w <= -g2) return {TcmRegion::SouthPole, M_PI, 0.5 * w, double(n), 0.0};
    double th = std::acos(w / g2);
    double e = -(w * w + g2 * g2) / (4 * g2);
    double lc = n * (-w * (w + 2) + g2 * g2 + 2 * g2) / (4 * g2);
    double qc = -std::sqrt(n / 2.0) * spec.gamma * std::sin(th);
    return {TcmRegion::Parallels, th, e, lc, qc};
}

double tcm_eta(const ModelSpec& spec) {
    return -std::sqrt(double(spec.n_atoms)) * spec.gamma / 2 * (1 + spec.atomic_freq / (spec.gamma * spec.gamma));
}

namespace {

// ln L_n^k(-y) for y >= 0: all terms of the explicit sum are positive.
double log_laguerre_neg(int n, int k, double y) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        if (i > 0 && y == 0) break;
        double t = log_binom(n + k, n - i) - std::lgamma(i + 1.0) + (i > 0 ? i * std::log(y) : 0.0);
        terms.push_back(t);
        best = std::max(best, t);
    }
    double s = 0;
    for (double t : terms) s += std::exp(t - best);
    return best + std::log(s);
}

}  // namespace

double tcm_projected_energy(const ModelSpec& spec, int lambda, double eta) {
    require_kind(spec.kind == ModelKind::TCM, Family::TcmProj, spec);
    if (lambda < 0) throw ValidationError("lambda must be non-negative");
    const double delta = spec.field_freq - spec.atomic_freq;
    const int n = spec.n_atoms;
    const double j = 0.5 * n;
    if (lambda == 0) return -0.5 * (1 - delta);
    const double y = eta * eta;
    double ratio;
    if (lambda <= n)
        ratio = std::exp(log_laguerre_neg(lambda - 1, n - lambda, y) - log_laguerre_neg(lambda, n - lambda, y));
    else
        ratio = double(lambda) / n *
                std::exp(log_laguerre_neg(n - 1, lambda - n, y) - log_laguerre_neg(n, lambda - n, y));
    return (lambda - j + j * delta) / (2 * j) - (delta - 2 * spec.gamma / std::sqrt(2 * j) * eta) * ratio;
}

std::vector<double> tcm_projected_coefficients(int n, int lambda, double eta) {
    const int lo = std::max(0, lambda - n);
    std::vector<double> logs, signs;
    double best = -std::numeric_limits<double>::infinity();
    for (int nu = lo; nu <= lambda; ++nu) {
        double l = 0.5 * log_binom(n, lambda - nu) - 0.5 * std::lgamma(nu + 1.0);
        if (nu > 0) l += (eta == 0 ? -std::numeric_limits<double>::infinity() : nu * std::log(std::abs(eta)));
        logs.push_back(l);
        signs.push_back((eta < 0 && nu % 2) ? -1.0 : 1.0);
        best = std::max(best, l);
    }
    std::vector<double> c(logs.size());
    double norm = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = signs[i] * std::exp(logs[i] - best);
        norm += c[i] * c[i];
    }
    for (double& v : c) v /= std::sqrt(norm);
    return c;
}

TcmProjectedGround tcm_projected_ground(const ModelSpec& spec) {
    auto crit = tcm_critical_data(spec);
    const int n = spec.n_atoms;
    TcmProjectedGround out;
    out.point.family = Family::TcmProj;
    out.point.spec = spec;
    if (crit.region != TcmRegion::Parallels) {
        out.lambda = crit.region == TcmRegion::NorthPole ? 0 : n;
        // pole states carry no photons: a single amplitude on nu = 0
        out.coefficients.assign(out.lambda - std::max(0, out.lambda - n) + 1, 0.0);
        out.coefficients[0] = 1.0;
        out.point.params = ProjectedParams{out.lambda, 0.0};
        out.point.energy = crit.energy;
        return out;
    }
    const double eta = tcm_eta(spec);
    int lo = std::max(0, int(std::floor(crit.lambda_c)) - 5), hi = int(std::ceil(crit.lambda_c)) + 5;
    double best = std::numeric_limits<double>::infinity();
    for (int l = lo; l <= hi; ++l) {
        double e = tcm_projected_energy(spec, l, eta);
        if (e < best - 1e-15) best = e, out.lambda = l;
    }
    out.point.params = ProjectedParams{out.lambda, eta};
    out.point.energy = best;
    out.coefficients = tcm_projected_coefficients(n, out.lambda, eta);
    return out;
}

// -------------------------------------------------------------- three-level

namespace {

struct Coherent3 {
    cplx alpha;
    std::array<cplx, 3> g;
    double norm2;  // gamma* . gamma
};

Coherent3 make3(const ThreeLevelParams& p) {
    Coherent3 c;
    c.alpha = std::polar(p.rho, p.phi);
    c.g = {cplx(1, 0), std::polar(p.rho2, p.phi2), std::polar(p.rho3, p.phi3)};
    c.norm2 = 1 + p.rho2 * p.rho2 + p.rho3 * p.rho3;
    return c;
}

constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

// Total (not per particle) coherent expectation of H.
double coherent3_total(const ModelSpec& s, const Coherent3& c, bool rwa) {
    const int n = s.n_atoms;
    const double sn = std::sqrt(double(n));
    double e = s.field_freq * std::norm(c.alpha);
    for (int i = 0; i < 3; ++i) e += n * s.level_freqs[i] * std::norm(c.g[i]) / c.norm2;
    for (int k = 0; k < 3; ++k) {
        auto [i, j] = kPairs[k];
        if (s.mu[k] == 0) continue;
        if (rwa)
            e -= s.mu[k] / sn * n * 2 * std::real(c.alpha * std::conj(c.g[j]) * c.g[i]) / c.norm2;
        else
            e -= s.mu[k] / sn * n * 2 * std::real(std::conj(c.g[i]) * c.g[j]) / c.norm2 * 2 * std::real(c.alpha);
    }
    return e;
}

struct SasCross {
    double r_sign, log_r;  // r = <c|P|c>/<c|c>
    double cross;          // <c|H P|c>/<c|c>
    double photons_cross;
    std::array<double, 3> pop_cross;
};

SasCross sas3_cross(const ModelSpec& s, const Coherent3& c) {
    const int n = s.n_atoms;
    const double sn = std::sqrt(double(n));
    auto w = excitation_weights(s.kind);
    std::array<double, 3> par{1.0, (w[0] % 2) ? -1.0 : 1.0, (w[1] % 2) ? -1.0 : 1.0};
    double tilde = 0;
    for (int i = 0; i < 3; ++i) tilde += par[i] * std::norm(c.g[i]);
    const double ratio = tilde / c.norm2;
    const double a2 = std::norm(c.alpha);
    auto [sg_n, l_n] = signed_pow(ratio, n);
    auto [sg_n1, l_n1] = signed_pow(ratio, n - 1);
    const double e2 = std::exp(-2 * a2);
    const double sn1 = sg_n1 * std::exp(l_n1) * e2;  // s^{N-1} e^{-2|a|^2}
    SasCross x;
    x.r_sign = sg_n;
    x.log_r = -2 * a2 + l_n;
    const double r = (x.log_r < -745) ? 0.0 : sg_n * std::exp(x.log_r);
    x.photons_cross = -a2 * r;
    x.cross = s.field_freq * x.photons_cross;
    for (int i = 0; i < 3; ++i) {
        x.pop_cross[i] = n * par[i] * std::norm(c.g[i]) / c.norm2 * sn1;
        x.cross += s.level_freqs[i] * x.pop_cross[i];
    }
    const cplx da = std::conj(c.alpha) - c.alpha;
    for (int k = 0; k < 3; ++k) {
        auto [i, j] = kPairs[k];
        if (s.mu[k] == 0) continue;
        cplx t = std::conj(c.g[i]) * par[j] * c.g[j] + std::conj(c.g[j]) * par[i] * c.g[i];
        x.cross -= s.mu[k] / sn * n * std::real(t * da) / c.norm2 * sn1;
    }
    return x;
}

Basis m_block_basis(const ModelSpec& s, int m) { return enumerate_basis(s, SectorSpec::m_block(m)); }

}  // namespace

Sas3Moments sas3_moments(const ModelSpec& spec, const ThreeLevelParams& p, int sign) {
    require_kind(is_full3(spec.kind), Family::Full3SasPlus, spec);
    auto c = make3(p);
    auto x = sas3_cross(spec, c);
    double den = one_plus(sign, x.r_sign, x.log_r);
    if (!(std::abs(den) > 1e-300)) throw ComputeError("symmetry-adapted state has zero norm at this point");
    Sas3Moments m;
    m.photons = (std::norm(c.alpha) + sign * x.photons_cross) / den;
    for (int i = 0; i < 3; ++i)
        m.populations[i] = (spec.n_atoms * std::norm(c.g[i]) / c.norm2 + sign * x.pop_cross[i]) / den;
    return m;
}

ThreeLevelParams v_reduced_to_polar(const ModelSpec& spec, const VReducedParams& p) {
    const double mu = std::hypot(spec.mu12(), spec.mu13());
    const double th = mu > 0 ? std::atan2(spec.mu13(), spec.mu12()) : 0.0;
    const double eta = p.chi + th;
    ThreeLevelParams t;
    t.rho = std::sqrt(double(spec.n_atoms)) * p.rho;
    t.rho2 = p.xi * std::cos(eta);
    t.rho3 = p.xi * std::sin(eta);
    // keep the radial parameters non-negative; the sign moves into the phase
    if (t.rho2 < 0) t.rho2 = -t.rho2, t.phi2 = M_PI;
    if (t.rho3 < 0) t.rho3 = -t.rho3, t.phi3 = M_PI;
    return t;
}

double v_sas_plus_energy(const ModelSpec& spec, const VReducedParams& p) {
    if (spec.kind != ModelKind::VFull || spec.level_freqs != std::array<double, 3>{0.0, 1.0, 1.0} ||
        spec.field_freq != 1.0)
        throw ValidationError("V_SAS_PLUS requires V_FULL at double resonance (w = 0, 1, 1; Omega = 1)");
    if (p.xi < 0 || p.rho < 0) throw ValidationError("rho and xi must be non-negative");
    if (p.xi >= 1) throw ValidationError("V_SAS_PLUS requires xi < 1");
    const int n = spec.n_atoms;
    const double mu = std::hypot(spec.mu12(), spec.mu13());
    const double x2 = p.xi * p.xi, r2 = p.rho * p.rho;
    // numerator and K divided by e^{2N rho^2} (1 + xi^2)^N
    const double t = std::exp(n * (std::log1p(-x2) - std::log1p(x2)) - 2.0 * n * r2);
    const double num = -t * (1 + x2) * (-x2 + r2 * (-1 + x2)) +
                       (-1 + x2) * (x2 + r2 * (1 + x2) - 4 * p.rho * p.xi * mu * std::cos(p.chi));
    const double k = (-1 + x2 * x2) * (t + 1);
    return num / k;
}

double energy_surface_3level(const ModelSpec& spec, Family family, const ThreeLevelParams& p) {
    if (p.rho < 0 || p.rho2 < 0 || p.rho3 < 0) throw ValidationError("radial parameters must be non-negative");
    auto c = make3(p);
    const int n = spec.n_atoms;
    switch (family) {
        case Family::Rwa3Coh:
            require_kind(is_rwa3(spec.kind), family, spec);
            return coherent3_total(spec, c, true) / n;
        case Family::Full3Coh:
            require_kind(is_full3(spec.kind), family, spec);
            return coherent3_total(spec, c, false) / n;
        case Family::Full3SasPlus:
        case Family::Full3SasMinus: {
            require_kind(is_full3(spec.kind), family, spec);
            const int sign = sas_sign(family);
            auto x = sas3_cross(spec, c);
            double den = one_plus(sign, x.r_sign, x.log_r);
            if (!(std::abs(den) > 1e-300)) throw ComputeError("symmetry-adapted state has zero norm at this point");
            return (coherent3_total(spec, c, false) + sign * x.cross) / den / n;
        }
        case Family::Rwa3Proj: {
            require_kind(is_rwa3(spec.kind), family, spec);
            if (p.m_block < 0) throw ValidationError("RWA3_PROJ needs an M block");
            Basis b = m_block_basis(spec, p.m_block);
            VariationalPoint vp{family, spec, p, 0.0};
            auto psi = embed_variational_state(vp, b);
            auto h = assemble_hamiltonian(spec, b);
            return std::real(psi.amplitudes.dot(apply(h, psi.amplitudes, Execution::Serial))) / n;
        }
        default: throw ValidationError("family " + to_string(family) + " is not a 3-level surface");
    }
}

double energy_of(const ModelSpec& spec, Family family, const Params& params) {
    switch (family) {
        case Family::TcmCoh:
        case Family::DickeCoh:
        case Family::DickeSasPlus:
        case Family::DickeSasMinus: return energy_surface_2level(spec, family, std::get<TwoLevelParams>(params));
        case Family::TcmProj: {
            auto pp = std::get<ProjectedParams>(params);
            return tcm_projected_energy(spec, pp.lambda, pp.eta);
        }
        case Family::VSasPlus: return v_sas_plus_energy(spec, std::get<VReducedParams>(params));
        default: return energy_surface_3level(spec, family, std::get<ThreeLevelParams>(params));
    }
}

// ------------------------------------------------------------ minimization

namespace {

double halton(std::uint64_t index, int base) {
    double f = 1, r = 0;
    while (index > 0) {
        f /= base;
        r += f * double(index % base);
        index /= base;
    }
    return r;
}

int coordinate_count(Family f) {
    switch (f) {
        case Family::TcmCoh:
        case Family::DickeCoh:
        case Family::DickeSasPlus:
        case Family::DickeSasMinus:
        case Family::VSasPlus: return 2;
        case Family::TcmProj: return 1;
        default: return 3;
    }
}

}  // namespace

std::vector<std::vector<double>> default_seeds(const ModelSpec& spec, Family family, int count, std::uint64_t seed) {
    const int d = coordinate_count(family);
    const double n = spec.n_atoms;
    std::vector<std::pair<double, double>> box;
    switch (family) {
        case Family::TcmCoh:
        case Family::DickeCoh:
        case Family::DickeSasPlus:
        case Family::DickeSasMinus:
            box = {{-1.5 * std::sqrt(2 * n) * std::max(spec.gamma, 0.25), 0.5}, {0.0, M_PI}};
            break;
        case Family::TcmProj: box = {{tcm_eta(spec) - 2, tcm_eta(spec) + 2}}; break;
        case Family::VSasPlus: box = {{0.0, 1.5 * std::max(spec.effective_coupling(), 0.1)}, {0.0, 0.95}}; break;
        default: box = {{0.0, 2 * std::sqrt(n) * std::max(spec.effective_coupling(), 0.25)}, {0.0, 3.0}, {0.0, 3.0}};
    }
    static const int primes[] = {2, 3, 5};
    std::vector<std::vector<double>> out;
    const std::uint64_t offset = 1 + seed * 7919;
    for (int i = 0; i < count; ++i) {
        std::vector<double> x(d);
        for (int k = 0; k < d; ++k) {
            double u = halton(offset + i, primes[k]);
            x[k] = box[k].first + u * (box[k].second - box[k].first);
        }
        out.push_back(std::move(x));
    }
    return out;
}

Params params_from_coordinates(Family family, const std::vector<double>& x, int m_block) {
    switch (family) {
        case Family::TcmCoh:
        case Family::DickeCoh:
        case Family::DickeSasPlus:
        case Family::DickeSasMinus: return TwoLevelParams{x[0], 0.0, x[1], 0.0};
        case Family::TcmProj: return ProjectedParams{m_block, x[0]};
        case Family::VSasPlus: return VReducedParams{std::abs(x[0]), std::abs(x[1]), 0.0};
        default: {
            ThreeLevelParams p;
            p.rho = std::abs(x[0]);
            p.rho2 = std::abs(x[1]);
            p.rho3 = std::abs(x[2]);
            p.m_block = m_block;
            return p;
        }
    }
}

MinimizeResult minimize_energy(const ModelSpec& spec, Family family, const std::vector<std::vector<double>>& seeds,
                               const MinimizeOptions& opts) {
    if (seeds.empty()) throw ValidationError("minimize_energy needs at least one seed");
    const int d = coordinate_count(family);
    for (const auto& s : seeds)
        if (int(s.size()) != d) throw ValidationError("seed dimension does not match family " + to_string(family));

    int m_block = opts.m_block;
    std::function<double(const Params&)> eval;
    if (family == Family::Rwa3Proj) {
        if (m_block < 0) throw ValidationError("RWA3_PROJ minimization needs an M block");
        auto basis = std::make_shared<Basis>(enumerate_basis(spec, SectorSpec::m_block(m_block)));
        auto h = std::make_shared<OperatorMatrix>(assemble_hamiltonian(spec, *basis));
        eval = [basis, h, spec](const Params& p) {
            VariationalPoint vp{Family::Rwa3Proj, spec, p, 0.0};
            auto psi = embed_variational_state(vp, *basis);
            return std::real(psi.amplitudes.dot(apply(*h, psi.amplitudes, Execution::Serial))) / spec.n_atoms;
        };
    } else if (family == Family::TcmProj) {
        m_block = tcm_projected_ground(spec).lambda;
        eval = [spec, family](const Params& p) { return energy_of(spec, family, p); };
    } else {
        eval = [spec, family](const Params& p) { return energy_of(spec, family, p); };
    }
    auto objective = [&](const std::vector<double>& x) {
        try {
            if (family == Family::VSasPlus && std::abs(x[1]) >= 1) return std::numeric_limits<double>::infinity();
            return eval(params_from_coordinates(family, x, m_block));
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::vector<SimplexResult> runs(seeds.size());
    const int ns = int(seeds.size());
    if (opts.exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < ns; ++i) runs[i] = nelder_mead(objective, seeds[i]);
    } else {
        for (int i = 0; i < ns; ++i) runs[i] = nelder_mead(objective, seeds[i]);
    }

    MinimizeResult out;
    int best = -1;
    for (int i = 0; i < ns; ++i) {
        if (!std::isfinite(runs[i].value)) continue;
        out.seeds_converged += runs[i].converged;
        if (best < 0 || runs[i].value < runs[best].value) best = i;
    }
    if (best < 0) throw ComputeError("all minimizer seeds diverged for " + to_string(family));
    auto canon = [&](const std::vector<double>& x) {
        std::vector<double> c = x;
        if (family == Family::VSasPlus || d == 3)
            for (double& v : c) v = std::abs(v);
        return c;
    };
    auto to_point = [&](const SimplexResult& r) {
        return VariationalPoint{family, spec, params_from_coordinates(family, canon(r.x), m_block), r.value};
    };
    out.best = to_point(runs[best]);
    std::vector<std::vector<double>> seen;
    for (int i = 0; i < ns; ++i) {
        if (!std::isfinite(runs[i].value) || runs[i].value > runs[best].value + opts.degeneracy_tol) continue;
        auto c = canon(runs[i].x);
        bool dup = false;
        for (const auto& s : seen) {
            double dist = 0;
            for (int k = 0; k < d; ++k) dist = std::max(dist, std::abs(s[k] - c[k]));
            if (dist < 1e-4) dup = true;
        }
        if (dup) continue;
        seen.push_back(c);
        out.degenerate.push_back(to_point(runs[i]));
    }
    return out;
}

// --------------------------------------------------------------- embedding

namespace {

double poisson_tail(double mean, int cutoff) {
    if (mean <= 0) return 0.0;
    double s = 0;
    for (int nu = cutoff + 1;; ++nu) {
        double t = std::exp(-mean + nu * std::log(mean) - std::lgamma(nu + 1.0));
        s += t;
        if (nu > mean && t < 1e-18 * std::max(s, 1e-300)) break;
        if (nu > cutoff + 100000) break;
    }
    return s;
}

// log-amplitude and phase of a coherent photon component alpha^nu/sqrt(nu!) e^{-|alpha|^2/2}
cplx photon_amp(cplx alpha, int nu) {
    double a = std::abs(alpha);
    if (nu == 0) return std::exp(-0.5 * a * a);
    if (a == 0) return 0.0;
    double l = -0.5 * a * a + nu * std::log(a) - 0.5 * std::lgamma(nu + 1.0);
    return std::polar(std::exp(l), nu * std::arg(alpha));
}

void check_truncation(const Basis& basis, double photon_mean, double retained_fraction) {
    if (basis.sector().finite_block()) return;
    double tail = poisson_tail(photon_mean, *basis.sector().fock_cutoff);
    if (tail > 1e-10 * retained_fraction)
        throw ComputeError("Fock cutoff too small: truncation loses " + std::to_string(tail) + " of the norm");
}

Eigen::VectorXcd coherent2(const TwoLevelParams& p, const Basis& basis) {
    const int n = basis.n_atoms();
    const cplx alpha(p.q / std::sqrt(2.0), p.p / std::sqrt(2.0));
    const double c = std::cos(0.5 * p.theta), s = std::sin(0.5 * p.theta);
    Eigen::VectorXcd v(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& l = basis[i];
        int k = l.excited();
        auto [sc, lc] = signed_pow(c, n - k);
        auto [ss, ls] = signed_pow(s, k);
        double spin = sc * ss * std::exp(0.5 * log_binom(n, k) + lc + ls);
        v[i] = photon_amp(alpha, l.photons) * spin * std::polar(1.0, k * p.phi);
    }
    return v;
}

Eigen::VectorXcd coherent3(const ThreeLevelParams& p, const Basis& basis) {
    const int n = basis.n_atoms();
    auto c = make3(p);
    const double lnorm = 0.5 * n * std::log(c.norm2);
    Eigen::VectorXcd v(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& l = basis[i];
        double lmag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(l.n[0] + 1.0) - std::lgamma(l.n[1] + 1.0) -
                             std::lgamma(l.n[2] + 1.0)) -
                      lnorm;
        double ph = 0;
        bool zero = false;
        for (int k = 1; k < 3; ++k) {
            if (l.n[k] == 0) continue;
            double r = k == 1 ? p.rho2 : p.rho3;
            if (r == 0) {
                zero = true;
                break;
            }
            lmag += l.n[k] * std::log(r);
            ph += l.n[k] * (k == 1 ? p.phi2 : p.phi3);
        }
        v[i] = zero ? cplx(0) : photon_amp(c.alpha, l.photons) * std::polar(std::exp(lmag), ph);
    }
    return v;
}

void require_basis(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

StateVector embed_variational_state(const VariationalPoint& point, const Basis& basis) {
    const auto& spec = point.spec;
    if (spec.kind != basis.kind() || spec.n_atoms != basis.n_atoms())
        throw ValidationError("basis does not belong to the point's model");
    const auto sector = basis.sector().kind;
    Eigen::VectorXcd v;
    switch (point.family) {
        case Family::TcmCoh:
        case Family::DickeCoh: {
            require_basis(sector == SectorKind::Full, "coherent states need a FULL basis");
            const auto& p = std::get<TwoLevelParams>(point.params);
            v = coherent2(p, basis);
            check_truncation(basis, 0.5 * (p.q * p.q + p.p * p.p), 1.0);
            break;
        }
        case Family::DickeSasPlus:
        case Family::DickeSasMinus: {
            require_basis(sector == SectorKind::Full || sector == SectorKind::Parity,
                          "symmetry-adapted states need a FULL or PARITY basis");
            const auto& p = std::get<TwoLevelParams>(point.params);
            const int sign = sas_sign(point.family);
            v = coherent2(p, basis);
            for (std::size_t i = 0; i < basis.size(); ++i)
                v[i] *= 1.0 + sign * ((basis.excitation(basis[i]) % 2) ? -1.0 : 1.0);
            double frac = std::abs(1 + sign * dicke_overlap_at(p, basis.n_atoms())) / 2;
            check_truncation(basis, 0.5 * (p.q * p.q + p.p * p.p), frac);
            break;
        }
        case Family::TcmProj: {
            const auto& p = std::get<ProjectedParams>(point.params);
            require_basis(sector == SectorKind::Full || (sector == SectorKind::LambdaBlock &&
                                                         basis.sector().value == p.lambda),
                          "projected TCM state needs the matching LAMBDA_BLOCK or a FULL basis");
            const int n = basis.n_atoms();
            const auto crit = tcm_critical_data(spec);
            std::vector<double> c;
            if (crit.region == TcmRegion::Parallels || p.eta != 0)
                c = tcm_projected_coefficients(n, p.lambda, p.eta);
            else {
                c.assign(p.lambda - std::max(0, p.lambda - n) + 1, 0.0);
                c[0] = 1.0;
            }
            const int lo = std::max(0, p.lambda - n);
            v = Eigen::VectorXcd::Zero(basis.size());
            double kept = 0;
            for (std::size_t i = 0; i < basis.size(); ++i) {
                const auto& l = basis[i];
                if (l.photons + l.excited() != p.lambda) continue;
                v[i] = c[l.photons - lo];
                kept += c[l.photons - lo] * c[l.photons - lo];
            }
            if (kept < 1 - 1e-10) throw ComputeError("Fock cutoff too small for the projected state");
            break;
        }
        case Family::Rwa3Coh:
        case Family::Full3Coh: {
            require_basis(sector == SectorKind::Full, "coherent states need a FULL basis");
            const auto& p = std::get<ThreeLevelParams>(point.params);
            v = coherent3(p, basis);
            check_truncation(basis, p.rho * p.rho, 1.0);
            break;
        }
        case Family::Rwa3Proj: {
            const auto& p = std::get<ThreeLevelParams>(point.params);
            require_basis(p.m_block >= 0, "RWA3_PROJ needs an M block");
            require_basis(sector == SectorKind::Full ||
                              (sector == SectorKind::MBlock && basis.sector().value == p.m_block),
                          "projected 3-level state needs the matching M_BLOCK or a FULL basis");
            v = coherent3(p, basis);
            for (std::size_t i = 0; i < basis.size(); ++i)
                if (basis.excitation(basis[i]) != p.m_block) v[i] = 0;
            if (sector == SectorKind::Full && *basis.sector().fock_cutoff < p.m_block)
                throw ComputeError("Fock cutoff too small for the projected state");
            break;
        }
        case Family::Full3SasPlus:
        case Family::Full3SasMinus:
        case Family::VSasPlus: {
            require_basis(sector == SectorKind::Full || sector == SectorKind::Parity,
                          "symmetry-adapted states need a FULL or PARITY basis");
            ThreeLevelParams p = point.family == Family::VSasPlus
                                     ? v_reduced_to_polar(spec, std::get<VReducedParams>(point.params))
                                     : std::get<ThreeLevelParams>(point.params);
            const int sign = sas_sign(point.family);
            v = coherent3(p, basis);
            for (std::size_t i = 0; i < basis.size(); ++i)
                v[i] *= 1.0 + sign * ((basis.excitation(basis[i]) % 2) ? -1.0 : 1.0);
            auto x = sas3_cross(spec, make3(p));
            double frac = std::abs(one_plus(sign, x.r_sign, x.log_r)) / 2;
            check_truncation(basis, p.rho * p.rho, frac);
            break;
        }
    }
    if (!(v.norm() > 1e-150)) throw ComputeError("embedded state vanishes in this basis");
    return StateVector::make(std::move(v), basis.id());
}

}  // namespace cavity
