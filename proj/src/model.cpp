#include "cavity/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace cavity {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::TCM: return "TCM";
        case ModelKind::Dicke: return "DICKE";
        case ModelKind::XiRwa: return "XI_RWA";
        case ModelKind::XiFull: return "XI_FULL";
        case ModelKind::LambdaRwa: return "LAMBDA_RWA";
        case ModelKind::LambdaFull: return "LAMBDA_FULL";
        case ModelKind::VRwa: return "V_RWA";
        case ModelKind::VFull: return "V_FULL";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (auto k : {ModelKind::TCM, ModelKind::Dicke, ModelKind::XiRwa, ModelKind::XiFull, ModelKind::LambdaRwa,
                   ModelKind::LambdaFull, ModelKind::VRwa, ModelKind::VFull})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown model kind '" + name + "'");
}

bool is_two_level(ModelKind kind) { return kind == ModelKind::TCM || kind == ModelKind::Dicke; }
bool is_three_level(ModelKind kind) { return !is_two_level(kind); }
bool is_rwa3(ModelKind kind) {
    return kind == ModelKind::XiRwa || kind == ModelKind::LambdaRwa || kind == ModelKind::VRwa;
}
bool is_full3(ModelKind kind) {
    return kind == ModelKind::XiFull || kind == ModelKind::LambdaFull || kind == ModelKind::VFull;
}

std::array<int, 2> excitation_weights(ModelKind kind) {
    switch (kind) {
        case ModelKind::XiRwa:
        case ModelKind::XiFull: return {1, 2};
        case ModelKind::LambdaRwa:
        case ModelKind::LambdaFull: return {0, 1};
        case ModelKind::VRwa:
        case ModelKind::VFull: return {1, 1};
        default: throw ValidationError("excitation weights requested for a 2-level model");
    }
}

ModelSpec ModelSpec::tcm(int n, double omega_a, double gamma) {
    ModelSpec s;
    s.kind = ModelKind::TCM;
    s.n_atoms = n;
    s.atomic_freq = omega_a;
    s.gamma = gamma;
    return s;
}

ModelSpec ModelSpec::dicke(int n, double omega_a, double gamma) {
    ModelSpec s = tcm(n, omega_a, gamma);
    s.kind = ModelKind::Dicke;
    return s;
}

ModelSpec ModelSpec::three_level(ModelKind kind, int n, std::array<double, 3> omega, double mu12, double mu13,
                                 double mu23) {
    ModelSpec s;
    s.kind = kind;
    s.n_atoms = n;
    s.level_freqs = omega;
    s.mu = {mu12, mu13, mu23};
    return s;
}

double ModelSpec::effective_coupling() const {
    if (is_two_level(kind)) return std::abs(gamma);
    return std::max({mu[0], mu[1], mu[2]});
}

void ModelSpec::validate() const {
    if (n_atoms < 1) throw ValidationError("n_atoms must be positive");
    if (!std::isfinite(field_freq) || field_freq <= 0) throw ValidationError("field_freq must be positive");
    if (is_two_level(kind)) {
        if (!std::isfinite(atomic_freq) || !std::isfinite(gamma)) throw ValidationError("non-finite parameter");
        if (gamma < 0) throw ValidationError("gamma must be non-negative");
        return;
    }
    for (double w : level_freqs)
        if (!std::isfinite(w)) throw ValidationError("non-finite level frequency");
    if (!(level_freqs[0] <= level_freqs[1] && level_freqs[1] <= level_freqs[2]))
        throw ValidationError("level frequencies must satisfy w1 <= w2 <= w3");
    for (double m : mu)
        if (!std::isfinite(m) || m < 0) throw ValidationError("couplings mu_ij must be finite and non-negative");
    switch (kind) {
        case ModelKind::XiRwa:
        case ModelKind::XiFull:
            if (mu[1] != 0) throw ValidationError("Xi configuration requires mu13 = 0");
            break;
        case ModelKind::LambdaRwa:
        case ModelKind::LambdaFull:
            if (mu[0] != 0) throw ValidationError("Lambda configuration requires mu12 = 0");
            break;
        case ModelKind::VRwa:
        case ModelKind::VFull:
            if (mu[2] != 0) throw ValidationError("V configuration requires mu23 = 0");
            break;
        default: break;
    }
}

double ModelSpec::per_particle(double energy) const {
    return kind == ModelKind::TCM ? energy : energy / n_atoms;
}

std::string SectorSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case SectorKind::LambdaBlock: os << "LAMBDA_BLOCK(" << value << ")"; break;
        case SectorKind::MBlock: os << "M_BLOCK(" << value << ")"; break;
        case SectorKind::Parity: os << "PARITY(" << (value > 0 ? "+1" : "-1") << ")"; break;
        case SectorKind::Full: os << "FULL"; break;
    }
    if (!finite_block() && fock_cutoff) os << "[nmax=" << *fock_cutoff << "]";
    return os.str();
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::int64_t v) {
    for (int b = 0; b < 8; ++b) {
        h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Basis::Basis(ModelKind kind, int n_atoms, SectorSpec sector, std::vector<Label> labels)
    : kind_(kind), n_atoms_(n_atoms), sector_(sector), labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end(),
              [this](const Label& a, const Label& b) { return key(a) < key(b); });
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, static_cast<int>(kind_));
    h = fnv1a(h, n_atoms_);
    h = fnv1a(h, static_cast<int>(sector_.kind));
    h = fnv1a(h, sector_.value);
    h = fnv1a(h, sector_.finite_block() ? -1 : sector_.fock_cutoff.value_or(-1));
    h = fnv1a(h, static_cast<std::int64_t>(labels_.size()));
    id_ = h;
}

std::array<int, 3> Basis::key(const Label& l) const {
    if (is_two_level(kind_)) return {l.photons, l.excited(), 0};
    return {l.photons, l.q(), l.r()};
}

std::optional<std::size_t> Basis::find(const Label& label) const {
    auto k = key(label);
    auto it = std::lower_bound(labels_.begin(), labels_.end(), k,
                               [this](const Label& a, const std::array<int, 3>& kk) { return key(a) < kk; });
    if (it == labels_.end() || !(*it == label)) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

int Basis::excitation(const Label& l) const {
    if (is_two_level(kind_)) return l.photons + l.excited();
    auto w = excitation_weights(kind_);
    return l.photons + w[0] * l.n[1] + w[1] * l.n[2];
}

Basis enumerate_basis(const ModelSpec& spec, const SectorSpec& sector) {
    spec.validate();
    const int n = spec.n_atoms;
    const ModelKind kind = spec.kind;
    const bool ok = [&] {
        switch (sector.kind) {
            case SectorKind::LambdaBlock: return kind == ModelKind::TCM;
            case SectorKind::MBlock: return is_rwa3(kind);
            case SectorKind::Parity: return kind == ModelKind::Dicke || is_full3(kind);
            case SectorKind::Full: return true;
        }
        return false;
    }();
    if (!ok) throw ValidationError("sector " + sector.describe() + " is not compatible with " + to_string(kind));
    if (sector.finite_block() && sector.value < 0) throw ValidationError("block label must be non-negative");
    if (sector.kind == SectorKind::Parity && sector.value != 1 && sector.value != -1)
        throw ValidationError("parity must be +1 or -1");
    if (!sector.finite_block() && (!sector.fock_cutoff || *sector.fock_cutoff < 0))
        throw ValidationError("sector " + sector.describe() + " requires a non-negative Fock cutoff");

    std::vector<Label> labels;
    auto atomic_states = [&] {
        std::vector<std::array<int, 3>> out;
        if (is_two_level(kind)) {
            for (int k = 0; k <= n; ++k) out.push_back({n - k, k, 0});
        } else {
            for (int q = 0; q <= n; ++q)
                for (int r = 0; r <= q; ++r) out.push_back({r, q - r, n - q});
        }
        return out;
    }();
    Basis probe(kind, n, sector, {});
    if (sector.finite_block()) {
        for (const auto& occ : atomic_states) {
            Label l{0, occ};
            int nu = sector.value - probe.excitation(l);
            if (nu < 0) continue;
            l.photons = nu;
            labels.push_back(l);
        }
    } else {
        const int cutoff = *sector.fock_cutoff;
        for (int nu = 0; nu <= cutoff; ++nu)
            for (const auto& occ : atomic_states) {
                Label l{nu, occ};
                if (sector.kind == SectorKind::Parity) {
                    int p = (probe.excitation(l) % 2 == 0) ? 1 : -1;
                    if (p != sector.value) continue;
                }
                labels.push_back(l);
            }
    }
    return Basis(kind, n, sector, std::move(labels));
}

namespace {

struct Move {
    Label target;
    double amp;
};

using Emitter = std::function<void(const Label&, std::vector<Move>&)>;

SparseMatrix build(const Basis& basis, const Emitter& emit) {
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<Move> moves;
    for (std::size_t c = 0; c < basis.size(); ++c) {
        moves.clear();
        emit(basis[c], moves);
        for (const auto& mv : moves) {
            if (mv.amp == 0.0) continue;
            if (auto r = basis.find(mv.target))
                trips.emplace_back(static_cast<int>(*r), static_cast<int>(c), mv.amp);
        }
    }
    SparseMatrix m(basis.size(), basis.size());
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

// Elementary ladder moves; each returns false when the move annihilates the state.
bool photon_shift(Label& l, int d, double& amp) {
    if (d == -1) {
        if (l.photons == 0) return false;
        amp *= std::sqrt(double(l.photons));
        l.photons -= 1;
    } else if (d == 1) {
        amp *= std::sqrt(double(l.photons + 1));
        l.photons += 1;
    }
    return true;
}

// Two-level: d=+1 is J+, d=-1 is J-.
bool spin_shift(Label& l, int n, int d, double& amp) {
    int k = l.n[1];
    if (d == 1) {
        if (k == n) return false;
        amp *= std::sqrt(double(k + 1) * double(n - k));
        l.n[0] -= 1;
        l.n[1] += 1;
    } else if (d == -1) {
        if (k == 0) return false;
        amp *= std::sqrt(double(k) * double(n - k + 1));
        l.n[0] += 1;
        l.n[1] -= 1;
    }
    return true;
}

// Three-level A_ij with 0-based i != j: one atom from level j to level i.
bool level_move(Label& l, int i, int j, double& amp) {
    if (l.n[j] == 0) return false;
    amp *= std::sqrt(double(l.n[i] + 1) * double(l.n[j]));
    l.n[i] += 1;
    l.n[j] -= 1;
    return true;
}

void require(bool cond, const char* what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace

double OperatorMatrix::hermiticity_residual() const {
    double r = 0;
    SparseMatrix d = re - SparseMatrix(re.transpose());
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
    if (im.nonZeros() > 0) {
        SparseMatrix e = im + SparseMatrix(im.transpose());
        for (int k = 0; k < e.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(e, k); it; ++it) r = std::max(r, std::abs(it.value()));
    }
    return r;
}

OperatorMatrix operator_matrix(OperatorId op, const Basis& basis, int i, int j) {
    const int n = basis.n_atoms();
    const bool two = is_two_level(basis.kind());
    OperatorMatrix out;
    out.basis_id = basis.id();
    out.im = SparseMatrix(basis.size(), basis.size());

    auto photon = [&](int d) {
        return build(basis, [d](const Label& l, std::vector<Move>& mv) {
            Label t = l;
            double a = 1;
            if (photon_shift(t, d, a)) mv.push_back({t, a});
        });
    };
    auto spin = [&](int d) {
        return build(basis, [d, n](const Label& l, std::vector<Move>& mv) {
            Label t = l;
            double a = 1;
            if (spin_shift(t, n, d, a)) mv.push_back({t, a});
        });
    };
    auto diag = [&](std::function<double(const Label&)> f) {
        return build(basis, [&f](const Label& l, std::vector<Move>& mv) { mv.push_back({l, f(l)}); });
    };

    switch (op) {
        case OperatorId::A: out.re = photon(-1); break;
        case OperatorId::ADag: out.re = photon(1); break;
        case OperatorId::NPh: out.re = diag([](const Label& l) { return double(l.photons); }); break;
        case OperatorId::Q: out.re = (photon(-1) + photon(1)) * M_SQRT1_2; break;
        case OperatorId::P:
            out.re = SparseMatrix(basis.size(), basis.size());
            out.im = (photon(1) - photon(-1)) * M_SQRT1_2;
            break;
        case OperatorId::Jz:
            require(two, "J_z is defined only for 2-level models");
            out.re = diag([n](const Label& l) { return l.n[1] - 0.5 * n; });
            break;
        case OperatorId::JPlus:
            require(two, "J_+ is defined only for 2-level models");
            out.re = spin(1);
            break;
        case OperatorId::JMinus:
            require(two, "J_- is defined only for 2-level models");
            out.re = spin(-1);
            break;
        case OperatorId::Jx:
            require(two, "J_x is defined only for 2-level models");
            out.re = (spin(1) + spin(-1)) * 0.5;
            break;
        case OperatorId::Jy:
            require(two, "J_y is defined only for 2-level models");
            out.re = SparseMatrix(basis.size(), basis.size());
            out.im = (spin(-1) - spin(1)) * 0.5;
            break;
        case OperatorId::Aij: {
            require(!two, "A_ij is defined only for 3-level models");
            require(i >= 1 && i <= 3 && j >= 1 && j <= 3, "A_ij levels must be in 1..3");
            const int a = i - 1, b = j - 1;
            if (a == b)
                out.re = diag([a](const Label& l) { return double(l.n[a]); });
            else
                out.re = build(basis, [a, b](const Label& l, std::vector<Move>& mv) {
                    Label t = l;
                    double amp = 1;
                    if (level_move(t, a, b, amp)) mv.push_back({t, amp});
                });
            break;
        }
        case OperatorId::LambdaHat:
            require(two, "Lambda is defined only for 2-level models");
            out.re = diag([](const Label& l) { return double(l.photons + l.n[1]); });
            break;
        case OperatorId::MHat:
            require(!two, "M is defined only for 3-level models");
            out.re = diag([&basis](const Label& l) { return double(basis.excitation(l)); });
            break;
        case OperatorId::Parity:
            out.re = diag([&basis](const Label& l) { return basis.excitation(l) % 2 == 0 ? 1.0 : -1.0; });
            break;
    }
    return out;
}

OperatorMatrix assemble_hamiltonian(const ModelSpec& spec, const Basis& basis) {
    spec.validate();
    if (spec.kind != basis.kind() || spec.n_atoms != basis.n_atoms())
        throw ValidationError("basis was not built for this model (kind or atom count differ)");
    const int n = spec.n_atoms;
    const double sqn = std::sqrt(double(n));
    OperatorMatrix out;
    out.basis_id = basis.id();
    out.im = SparseMatrix(basis.size(), basis.size());

    switch (spec.kind) {
        case ModelKind::TCM: {
            // H = (1/N)[Ω a†a + ω_A J_z + (γ/√N)(a† J_- + a J_+)]
            const double g = spec.gamma / (n * sqn);
            out.re = build(basis, [&](const Label& l, std::vector<Move>& mv) {
                mv.push_back({l, (spec.field_freq * l.photons + spec.atomic_freq * (l.n[1] - 0.5 * n)) / n});
                for (int d : {1, -1}) {
                    Label t = l;
                    double a = g;
                    if (photon_shift(t, d, a) && spin_shift(t, n, -d, a)) mv.push_back({t, a});
                }
            });
            break;
        }
        case ModelKind::Dicke: {
            // H = Ω a†a + ω_A J_z + (γ/√N)(a + a†)(J_+ + J_-)
            const double g = spec.gamma / sqn;
            out.re = build(basis, [&](const Label& l, std::vector<Move>& mv) {
                mv.push_back({l, spec.field_freq * l.photons + spec.atomic_freq * (l.n[1] - 0.5 * n)});
                for (int dp : {1, -1})
                    for (int ds : {1, -1}) {
                        Label t = l;
                        double a = g;
                        if (photon_shift(t, dp, a) && spin_shift(t, n, ds, a)) mv.push_back({t, a});
                    }
            });
            break;
        }
        default: {
            // H = Ω a†a + Σ ω_i A_ii - (1/√N) Σ_{i<j} μ_ij (a A_ji + a† A_ij)         (RWA)
            //                       - (1/√N) Σ_{i<j} μ_ij (A_ij + A_ji)(a + a†)      (full)
            const bool rwa = is_rwa3(spec.kind);
            const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
            out.re = build(basis, [&](const Label& l, std::vector<Move>& mv) {
                double e = spec.field_freq * l.photons;
                for (int k = 0; k < 3; ++k) e += spec.level_freqs[k] * l.n[k];
                mv.push_back({l, e});
                for (int c = 0; c < 3; ++c) {
                    const double mu = spec.mu[c];
                    if (mu == 0) continue;
                    auto [lo, hi] = pairs[c];
                    for (int up : {1, 0}) {
                        for (int dp : {-1, 1}) {
                            // RWA keeps only photon absorption with excitation, emission with de-excitation.
                            if (rwa && ((up == 1) != (dp == -1))) continue;
                            Label t = l;
                            double a = -mu / sqn;
                            bool ok = up ? level_move(t, hi, lo, a) : level_move(t, lo, hi, a);
                            if (ok && photon_shift(t, dp, a)) mv.push_back({t, a});
                        }
                    }
                }
            });
            break;
        }
    }
    return out;
}

double commutator_norm(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix c = SparseMatrix(a * b) - SparseMatrix(b * a);
    double r = 0;
    for (int k = 0; k < c.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(c, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

}  // namespace cavity
