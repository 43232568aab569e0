#include <doctest.h>

#include <random>

#include "cavity/phase.hpp"
#include "cavity/variational.hpp"

using namespace cavity;

namespace {

struct Threads {
    int saved = worker_count();
    explicit Threads(int n) { set_worker_count(n); }
    ~Threads() { set_worker_count(saved); }
};

}  // namespace

TEST_CASE("sparse mat-vec") {
    Threads t(4);
    auto s = ModelSpec::dicke(40, 1.0, 0.9);
    auto h = assemble_hamiltonian(s, enumerate_basis(s, SectorSpec::full(300)));
    REQUIRE(h.dimension() > 4096);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Eigen::VectorXd x(h.dimension());
    for (auto& v : x) v = nd(rng);
    Eigen::VectorXd a(h.dimension()), b(h.dimension());
    spmv_serial(h.re, x.data(), a.data());
    spmv_parallel(h.re, x.data(), b.data());
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // row sums are computed in the same order
    Eigen::VectorXd ref = h.re * x;
    CHECK((a - ref).norm() <= 1e-10 * ref.norm());
}

TEST_CASE("block Gram-Schmidt step") {
    Threads t(4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const Eigen::Index n = 20000, k = 16;
    Eigen::MatrixXd v(n, k);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = nd(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    Eigen::VectorXd w(n);
    for (auto& x : w) x = nd(rng);
    Eigen::VectorXd w1 = w, w2 = w;
    auto c1 = project_out_serial(q, k, w1);
    auto c2 = project_out_parallel(q, k, w2);
    CHECK((c1 - c2).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((w1 - w2).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((q.transpose() * w2).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Lanczos with serial and parallel kernels") {
    Threads t(4);
    auto s = ModelSpec::dicke(30, 1.0, 0.7);
    auto h = assemble_hamiltonian(s, enumerate_basis(s, SectorSpec::parity(1, 200)));
    SolverOptions a, b;
    a.solver = b.solver = SolverKind::Iterative;
    a.exec = Execution::Serial;
    b.exec = Execution::Parallel;
    auto ra = lowest_eigenpairs(h, 2, 1e-11, a);
    auto rb = lowest_eigenpairs(h, 2, 1e-11, b);
    CHECK(std::abs(ra.energies[0] - rb.energies[0]) <= 1e-9);
    CHECK(std::abs(ra.energies[1] - rb.energies[1]) <= 1e-9);
}

TEST_CASE("multi-start minimization") {
    Threads t(4);
    auto s = ModelSpec::three_level(ModelKind::VFull, 20, {0, 1, 1}, 0.8, 0.3, 0);
    auto seeds = default_seeds(s, Family::Full3SasPlus, 24, 9);
    auto a = minimize_energy(s, Family::Full3SasPlus, seeds, {Execution::Serial});
    auto b = minimize_energy(s, Family::Full3SasPlus, seeds, {Execution::Parallel});
    CHECK(a.best.energy == b.best.energy);
    CHECK(a.seeds_converged == b.seeds_converged);
}

TEST_CASE("phase grid rows") {
    Threads t(4);
    auto base = ModelSpec::three_level(ModelKind::LambdaRwa, 3, {0, 0.2, 1}, 0, 0, 0);
    GridAxis x{Coupling::Mu13, 0.1, 1.5, 12}, y{Coupling::Mu23, 0.1, 1.5, 6};
    auto a = compute_phase_grid(base, x, y, {}, Execution::Serial);
    auto b = compute_phase_grid(base, x, y, {}, Execution::Parallel);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
            CHECK(a.rows[i][j].label == b.rows[i][j].label);
            CHECK(a.rows[i][j].energy == doctest::Approx(b.rows[i][j].energy).epsilon(1e-12));
        }
    CHECK(a.first_peaks() == b.first_peaks());
}
