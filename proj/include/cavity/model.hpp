#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "cavity/errors.hpp"

namespace cavity {

enum class ModelKind { TCM, Dicke, XiRwa, XiFull, LambdaRwa, LambdaFull, VRwa, VFull };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

bool is_two_level(ModelKind kind);
bool is_three_level(ModelKind kind);
bool is_rwa3(ModelKind kind);
bool is_full3(ModelKind kind);

// Excitation weights (lambda_2, lambda_3) of levels 2 and 3 for a 3-level configuration.
std::array<int, 2> excitation_weights(ModelKind kind);

// Parameters of one model instance.  Two-level models read atomic_freq and gamma;
// three-level models read level_freqs and mu = (mu12, mu13, mu23).
struct ModelSpec {
    ModelKind kind = ModelKind::Dicke;
    int n_atoms = 1;
    double field_freq = 1.0;
    double atomic_freq = 1.0;
    std::array<double, 3> level_freqs{0.0, 1.0, 2.0};
    double gamma = 0.0;
    std::array<double, 3> mu{0.0, 0.0, 0.0};

    static ModelSpec tcm(int n, double omega_a, double gamma);
    static ModelSpec dicke(int n, double omega_a, double gamma);
    static ModelSpec three_level(ModelKind kind, int n, std::array<double, 3> omega,
                                 double mu12, double mu13, double mu23);

    double j() const { return 0.5 * n_atoms; }
    double detuning() const { return field_freq - atomic_freq; }
    double detuning(int i, int k) const { return level_freqs[i - 1] - level_freqs[k - 1] - field_freq; }
    double mu12() const { return mu[0]; }
    double mu13() const { return mu[1]; }
    double mu23() const { return mu[2]; }

    // Coupling used by the Fock-cutoff guess.
    double effective_coupling() const;

    // Throws ValidationError when an invariant is violated.
    void validate() const;

    // Energies are stored in the printed convention: TCM intrinsic, others extensive.
    double per_particle(double energy) const;
};

enum class SectorKind { LambdaBlock, MBlock, Parity, Full };

struct SectorSpec {
    SectorKind kind = SectorKind::Full;
    int value = 0;  // lambda, M, or parity (+1/-1)
    std::optional<int> fock_cutoff;

    static SectorSpec lambda_block(int lambda) { return {SectorKind::LambdaBlock, lambda, {}}; }
    static SectorSpec m_block(int m) { return {SectorKind::MBlock, m, {}}; }
    static SectorSpec parity(int p, int cutoff) { return {SectorKind::Parity, p, cutoff}; }
    static SectorSpec full(int cutoff) { return {SectorKind::Full, 0, cutoff}; }

    bool finite_block() const { return kind == SectorKind::LambdaBlock || kind == SectorKind::MBlock; }
    std::string describe() const;
};

// A basis state.  Two-level: n = (ground, excited, 0) so that j + m = n[1].
// Three-level: n = (n1, n2, n3) = (r, q - r, N - q).
struct Label {
    int photons = 0;
    std::array<int, 3> n{0, 0, 0};

    int excited() const { return n[1]; }
    int q() const { return n[0] + n[1]; }
    int r() const { return n[0]; }
    bool operator==(const Label&) const = default;
};

class Basis {
public:
    Basis(ModelKind kind, int n_atoms, SectorSpec sector, std::vector<Label> labels);

    ModelKind kind() const { return kind_; }
    int n_atoms() const { return n_atoms_; }
    const SectorSpec& sector() const { return sector_; }
    std::size_t size() const { return labels_.size(); }
    const Label& operator[](std::size_t i) const { return labels_[i]; }
    const std::vector<Label>& labels() const { return labels_; }
    std::optional<std::size_t> find(const Label& label) const;
    std::uint64_t id() const { return id_; }

    double m(std::size_t i) const { return labels_[i].excited() - 0.5 * n_atoms_; }
    // Conserved excitation number: lambda for 2-level, M for 3-level.
    int excitation(const Label& label) const;

private:
    std::array<int, 3> key(const Label& label) const;

    ModelKind kind_;
    int n_atoms_;
    SectorSpec sector_;
    std::vector<Label> labels_;
    std::uint64_t id_ = 0;
};

Basis enumerate_basis(const ModelSpec& spec, const SectorSpec& sector);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Hermitian operator restricted to a basis; imaginary part empty for real operators.
struct OperatorMatrix {
    SparseMatrix re;
    SparseMatrix im;
    std::uint64_t basis_id = 0;

    Eigen::Index dimension() const { return re.rows(); }
    bool is_real() const { return im.nonZeros() == 0; }
    double hermiticity_residual() const;
};

enum class OperatorId { A, ADag, NPh, Jz, JPlus, JMinus, Jx, Jy, Q, P, Aij, LambdaHat, MHat, Parity };

// For OperatorId::Aij, (i, j) are 1-based levels: A_ij moves one atom from level j to level i.
// Non-Hermitian ladder operators are returned as plain matrices (re/im parts of the operator itself).
OperatorMatrix operator_matrix(OperatorId op, const Basis& basis, int i = 0, int j = 0);

OperatorMatrix assemble_hamiltonian(const ModelSpec& spec, const Basis& basis);

// Max-norm of A*B - B*A (real parts only; used for symmetry checks).
double commutator_norm(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace cavity
