#include <doctest.h>

#include <cmath>

#include "cavity/observables.hpp"
#include "cavity/variational.hpp"

using namespace cavity;

namespace {

const ObservableId kTableRows[] = {
    ObservableId::Q,     ObservableId::P,     ObservableId::Jx,     ObservableId::Jy,        ObservableId::Jz,
    ObservableId::NPh,   ObservableId::Lambda, ObservableId::VarQ,  ObservableId::VarP,      ObservableId::VarJx,
    ObservableId::VarJy, ObservableId::VarJz, ObservableId::VarNPh, ObservableId::VarLambda, ObservableId::JzNPhCorr,
    ObservableId::JxQCorr};

Family family_of(StateFamily f) {
    return f == StateFamily::Coherent ? Family::DickeCoh
           : f == StateFamily::SasPlus ? Family::DickeSasPlus
                                       : Family::DickeSasMinus;
}

}  // namespace

TEST_CASE("numeric expectations") {
    auto s = ModelSpec::tcm(20, 1.0, 0.0);
    Basis b = enumerate_basis(s, SectorSpec::full(4));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b.size());
    v[*b.find(Label{0, {20, 0, 0}})] = 1;
    auto psi = StateVector::make(v, b.id());
    auto jz = expectation_and_fluctuation(psi, operator_matrix(OperatorId::Jz, b));
    CHECK(jz.mean == doctest::Approx(-10.0));
    CHECK(jz.variance == doctest::Approx(0.0));
    auto nph = expectation_and_fluctuation(psi, operator_matrix(OperatorId::NPh, b));
    CHECK(nph.mean == 0.0);
    CHECK(nph.variance == 0.0);

    StateVector other = psi;
    other.basis_id ^= 1;
    CHECK_THROWS_AS(expectation_and_fluctuation(other, operator_matrix(OperatorId::Jz, b)), ValidationError);
}

TEST_CASE("closed forms at reference points") {
    for (int n : {2, 10, 50}) {
        CHECK(closed_form_observable(StateFamily::Coherent, ObservableId::Jz, 1.0, 0.5, n) == doctest::Approx(-n / 2.0));
        for (double x : {0.5, 1.5, 3.0}) {
            CHECK(closed_form_observable(StateFamily::SasPlus, ObservableId::Q, x, 0.5, n) == 0.0);
            CHECK(closed_form_observable(StateFamily::Coherent, ObservableId::VarQ, x, 0.5, n) == 0.5);
        }
    }
    CHECK_THROWS_AS(closed_form_observable(StateFamily::Coherent, ObservableId::A22, 2.0, 0.5, 10), ValidationError);
    CHECK_THROWS_AS(closed_form_observable(StateFamily::SasMinus, ObservableId::Jz, 0.8, 0.5, 10), ComputeError);
    // TCM substitution gamma_c -> gamma_c / 2
    CHECK(closed_form_observable(StateFamily::Coherent, ObservableId::NPh, 2.0, 0.5, 10, true) ==
          doctest::Approx(closed_form_observable(StateFamily::Coherent, ObservableId::NPh, 2.0, 0.25, 10)));
}

TEST_CASE("coherent/SAS overlaps") {
    auto [p0, m0] = coherent_sas_overlap(0.5, 0.5, 10);  // normal region: F = 1
    CHECK(p0 == doctest::Approx(1.0));
    CHECK(m0 == doctest::Approx(0.0));
    auto [p1, m1] = coherent_sas_overlap(50.0, 0.5, 10);
    CHECK(p1 == doctest::Approx(0.5));
    CHECK(m1 == doctest::Approx(0.5));
    auto [p2, m2] = coherent_sas_overlap(1.2, 0.5, 100000);
    CHECK(p2 == doctest::Approx(0.5));
    CHECK(m2 == doctest::Approx(0.5));
}

TEST_CASE("table rows match the embedded states") {
    for (int n : {2, 6, 10}) {
        for (double x : {0.5, 1.0, 2.0}) {
            auto s = ModelSpec::dicke(n, 1.0, 0.5 * x);
            auto cp = dicke_critical_point(s);
            const double a2 = 0.5 * cp.q * cp.q;
            Basis b = enumerate_basis(s, SectorSpec::full(int(std::ceil(a2 + 12 * std::sqrt(a2) + 30))));
            for (auto fam : {StateFamily::Coherent, StateFamily::SasPlus, StateFamily::SasMinus}) {
                if (fam == StateFamily::SasMinus && x <= 1) continue;  // no odd component at the normal point
                auto psi = embed_variational_state(VariationalPoint{family_of(fam), s, cp, 0.0}, b);
                for (auto id : kTableRows) {
                    CAPTURE(n);
                    CAPTURE(x);
                    CAPTURE(to_string(fam));
                    CAPTURE(to_string(id));
                    double closed = closed_form_observable(fam, id, x, 0.5, n);
                    CHECK(std::abs(closed - numeric_observable(psi, b, id)) <= 1e-8);
                }
            }
        }
    }
}

TEST_CASE("SAS rows approach the coherent ones as N grows") {
    const ObservableId inherit[] = {ObservableId::Jz, ObservableId::NPh, ObservableId::Lambda, ObservableId::VarNPh,
                                    ObservableId::JzNPhCorr};
    for (auto id : inherit) {
        CAPTURE(to_string(id));
        double prev = INFINITY;
        for (int n : {4, 16, 64}) {
            double c = closed_form_observable(StateFamily::Coherent, id, 1.5, 0.5, n);
            double s = closed_form_observable(StateFamily::SasPlus, id, 1.5, 0.5, n);
            double rel = std::abs(s - c) / std::max(1.0, std::abs(c));
            CHECK(rel <= prev);
            prev = rel;
        }
        CHECK(prev <= 1e-6);
    }
}

TEST_CASE("quantum ground shows no divergence across the transition") {
    for (double g : {0.3, 0.5, 0.55, 0.6, 0.8}) {
        auto s = ModelSpec::dicke(10, 1.0, g);
        auto gr = converged_ground(s, SectorSpec::parity(1, 1), 1e-10);
        auto nph = expectation_and_fluctuation(gr.result.states[0], operator_matrix(OperatorId::NPh, gr.basis));
        CHECK(std::isfinite(nph.mean));
        CHECK(std::isfinite(nph.variance));
        CHECK(nph.mean < 10 * 10);
    }
}

TEST_CASE("normal criterion") {
    SUBCASE("zero coupling") {
        auto s = ModelSpec::three_level(ModelKind::VFull, 6, {0, 1, 1}, 0, 0, 0);
        auto g = converged_ground(s, SectorSpec::parity(1, 8), 1e-10);
        auto r = normal_criterion(g.result.states[0], g.basis, s);
        CHECK(r.atomic_ratio == doctest::Approx(0.0));
        CHECK(r.field_ratio == doctest::Approx(0.0));
    }
    SUBCASE("V SAS ground on either side of the transition") {
        const int n = 200;
        auto ratios = [&](double mu) {
            auto s = ModelSpec::three_level(ModelKind::VFull, n, {0, 1, 1}, mu, 0, 0);
            auto seeds = default_seeds(s, Family::VSasPlus, 16);
            auto r = minimize_energy(s, Family::VSasPlus, seeds);
            auto p = v_reduced_to_polar(s, std::get<VReducedParams>(r.best.params));
            auto m = sas3_moments(s, p, +1);
            return normal_criterion(s, m.photons, m.populations);
        };
        auto lo = ratios(0.45);
        CHECK(lo.normal(0.02));
        auto hi = ratios(0.9);
        CHECK(hi.field_ratio > hi.atomic_ratio);
    }
    SUBCASE("empty ground level") {
        auto s = ModelSpec::three_level(ModelKind::VRwa, 2, {0, 1, 1}, 1, 0, 0);
        CHECK_THROWS_AS(normal_criterion(s, 0.0, {0.0, 1.0, 1.0}), ComputeError);
    }
}
