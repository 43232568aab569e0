#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "cavity/model.hpp"

using namespace cavity;

namespace {

double element(const SparseMatrix& m, Eigen::Index r, Eigen::Index c) { return m.coeff(r, c); }

// H restricted to `block` must equal the same entries taken from the full-basis matrix.
double restriction_gap(const ModelSpec& spec, const SectorSpec& block, const SectorSpec& full) {
    Basis bb = enumerate_basis(spec, block), bf = enumerate_basis(spec, full);
    auto hb = assemble_hamiltonian(spec, bb), hf = assemble_hamiltonian(spec, bf);
    double gap = 0;
    for (std::size_t i = 0; i < bb.size(); ++i)
        for (std::size_t j = 0; j < bb.size(); ++j) {
            auto fi = bf.find(bb[i]), fj = bf.find(bb[j]);
            REQUIRE(fi);
            REQUIRE(fj);
            gap = std::max(gap, std::abs(element(hb.re, i, j) - element(hf.re, *fi, *fj)));
        }
    return gap;
}

}  // namespace

TEST_CASE("basis enumeration") {
    CHECK(enumerate_basis(ModelSpec::tcm(6, 1, 0.5), SectorSpec::lambda_block(2)).size() == 3);
    CHECK(enumerate_basis(ModelSpec::dicke(2, 1, 0.5), SectorSpec::parity(1, 2)).size() == 5);

    auto xi = ModelSpec::three_level(ModelKind::XiRwa, 2, {0, 1, 2}, 1, 0, 1);
    Basis b = enumerate_basis(xi, SectorSpec::m_block(1));
    REQUIRE(b.size() == 2);
    // |0; 2, 1> and |1; 2, 2> in (nu; q, r)
    CHECK(b.find(Label{0, {1, 1, 0}}));
    CHECK(b.find(Label{1, {2, 0, 0}}));
}

TEST_CASE("basis ids separate sectors and kinds") {
    auto d = ModelSpec::dicke(4, 1, 0.5);
    CHECK(enumerate_basis(d, SectorSpec::parity(1, 8)).id() != enumerate_basis(d, SectorSpec::parity(-1, 8)).id());
    CHECK(enumerate_basis(d, SectorSpec::full(8)).id() == enumerate_basis(d, SectorSpec::full(8)).id());
}

TEST_CASE("ladder operators") {
    Basis b = enumerate_basis(ModelSpec::dicke(2, 1, 0.5), SectorSpec::full(4));
    auto a = operator_matrix(OperatorId::A, b);
    auto i0 = *b.find(Label{0, {2, 0, 0}}), i1 = *b.find(Label{1, {2, 0, 0}}), i3 = *b.find(Label{3, {2, 0, 0}});
    auto i2 = *b.find(Label{2, {2, 0, 0}});
    CHECK(element(a.re, i0, i1) == doctest::Approx(1.0));
    CHECK(element(a.re, i2, i3) == doctest::Approx(std::sqrt(3.0)));

    auto lam = operator_matrix(OperatorId::LambdaHat, b);
    CHECK(element(lam.re, i1, i1) == doctest::Approx(1.0));
}

TEST_CASE("U(3) commutator [A12, A21] = A11 - A22") {
    auto s = ModelSpec::three_level(ModelKind::XiFull, 2, {0, 1, 2}, 1, 0, 1);
    Basis b = enumerate_basis(s, SectorSpec::full(3));
    auto a12 = operator_matrix(OperatorId::Aij, b, 1, 2).re;
    auto a21 = operator_matrix(OperatorId::Aij, b, 2, 1).re;
    SparseMatrix diff = operator_matrix(OperatorId::Aij, b, 1, 1).re - operator_matrix(OperatorId::Aij, b, 2, 2).re;
    SparseMatrix c = SparseMatrix(a12 * a21) - SparseMatrix(a21 * a12) - diff;
    double r = 0;
    for (int k = 0; k < c.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(c, k); it; ++it) r = std::max(r, std::abs(it.value()));
    CHECK(r <= 1e-12);
}

TEST_CASE("TCM blocks") {
    auto s = ModelSpec::tcm(20, 0.8, 0.3);
    auto h = assemble_hamiltonian(s, enumerate_basis(s, SectorSpec::lambda_block(0)));
    REQUIRE(h.dimension() == 1);
    CHECK(element(h.re, 0, 0) == doctest::Approx(-0.4).epsilon(1e-14));

    auto t = ModelSpec::tcm(2, 1.0, 1.0);
    auto h2 = assemble_hamiltonian(t, enumerate_basis(t, SectorSpec::lambda_block(1)));
    REQUIRE(h2.dimension() == 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h2.re));
    CHECK(es.eigenvalues()[0] == doctest::Approx(-0.5));
    CHECK(es.eigenvalues()[1] == doctest::Approx(0.5));
}

TEST_CASE("Hamiltonians are Hermitian and respect their symmetries") {
    const ModelSpec specs[] = {
        ModelSpec::tcm(5, 0.8, 0.7),
        ModelSpec::dicke(5, 1.0, 0.9),
        ModelSpec::three_level(ModelKind::XiRwa, 4, {0, 1, 2}, 0.9, 0, 1.3),
        ModelSpec::three_level(ModelKind::LambdaRwa, 4, {0, 0.2, 1}, 0, 0.6, 0.9),
        ModelSpec::three_level(ModelKind::VRwa, 4, {0, 1, 1}, 0.9, 0.6, 0),
        ModelSpec::three_level(ModelKind::XiFull, 3, {0, 1, 2}, 0.9, 0, 1.3),
        ModelSpec::three_level(ModelKind::LambdaFull, 3, {0, 0.2, 1}, 0, 0.6, 0.9),
        ModelSpec::three_level(ModelKind::VFull, 3, {0, 1, 1}, 0.9, 0.6, 0),
    };
    for (const auto& s : specs) {
        CAPTURE(to_string(s.kind));
        Basis b = enumerate_basis(s, SectorSpec::full(12));
        auto h = assemble_hamiltonian(s, b);
        CHECK(h.hermiticity_residual() <= 1e-12);
        if (s.kind == ModelKind::TCM)
            CHECK(commutator_norm(h.re, operator_matrix(OperatorId::LambdaHat, b).re) <= 1e-10);
        else if (is_rwa3(s.kind))
            CHECK(commutator_norm(h.re, operator_matrix(OperatorId::MHat, b).re) <= 1e-10);
        else
            CHECK(commutator_norm(h.re, operator_matrix(OperatorId::Parity, b).re) <= 1e-10);
    }
}

TEST_CASE("block assembly is the restriction of the full matrix") {
    CHECK(restriction_gap(ModelSpec::tcm(6, 0.8, 0.9), SectorSpec::lambda_block(4), SectorSpec::full(10)) == 0.0);
    CHECK(restriction_gap(ModelSpec::dicke(4, 1, 0.8), SectorSpec::parity(-1, 9), SectorSpec::full(9)) == 0.0);
    auto xi = ModelSpec::three_level(ModelKind::XiRwa, 3, {0, 1, 2}, 0.7, 0, 1.1);
    CHECK(restriction_gap(xi, SectorSpec::m_block(3), SectorSpec::full(8)) == 0.0);
    auto vf = ModelSpec::three_level(ModelKind::VFull, 3, {0, 1, 1}, 0.7, 0.4, 0);
    CHECK(restriction_gap(vf, SectorSpec::parity(1, 6), SectorSpec::full(6)) == 0.0);
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(ModelSpec::dicke(0, 1, 0.5).validate(), ValidationError);
    CHECK_THROWS_AS(enumerate_basis(ModelSpec::dicke(2, 1, 0.5), SectorSpec::lambda_block(1)), ValidationError);
    CHECK_THROWS_AS(enumerate_basis(ModelSpec::dicke(2, 1, 0.5), SectorSpec{SectorKind::Parity, 1, {}}), ValidationError);
    auto xi = ModelSpec::three_level(ModelKind::XiRwa, 2, {0, 1, 2}, 1, 0, 1);
    CHECK_THROWS_AS(operator_matrix(OperatorId::Jz, enumerate_basis(xi, SectorSpec::m_block(1))), ValidationError);
}
