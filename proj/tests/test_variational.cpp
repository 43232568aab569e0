#include <doctest.h>

#include <cmath>
#include <random>

#include "cavity/variational.hpp"

using namespace cavity;

namespace {

// <psi|H|psi> per particle of the embedded state.
double embedded_energy(const VariationalPoint& p, const SectorSpec& sector) {
    Basis b = enumerate_basis(p.spec, sector);
    auto psi = embed_variational_state(p, b);
    auto h = assemble_hamiltonian(p.spec, b);
    Eigen::VectorXcd hv = apply(h, psi.amplitudes, Execution::Serial);
    return p.spec.per_particle(std::real(psi.amplitudes.dot(hv)));
}

VariationalPoint point(Family f, const ModelSpec& s, Params p) { return {f, s, p, energy_of(s, f, p)}; }

}  // namespace

TEST_CASE("two-level surfaces at reference points") {
    auto d = ModelSpec::dicke(10, 1.0, 0.7);
    CHECK(energy_surface_2level(d, Family::DickeCoh, {}) == doctest::Approx(-0.5).epsilon(1e-14));
    for (int n : {2, 10, 100}) {
        auto s = ModelSpec::dicke(n, 1.0, 0.5);
        CHECK(dicke_sas_energy(s, 1.0, +1) == doctest::Approx(-0.5).epsilon(1e-14));
    }
    auto s = ModelSpec::dicke(10, 1.0, 1.0);
    auto cp = dicke_critical_point(s);
    double ec = energy_surface_2level(s, Family::DickeCoh, cp);
    double ep = energy_surface_2level(s, Family::DickeSasPlus, cp);
    double em = energy_surface_2level(s, Family::DickeSasMinus, cp);
    CHECK(std::min(ep, em) <= ec);
    CHECK(ec == doctest::Approx(-1.0625).epsilon(1e-12));
}

TEST_CASE("TCM critical regions") {
    auto north = tcm_critical_data(ModelSpec::tcm(20, 0.8, 0.5));
    CHECK(north.region == TcmRegion::NorthPole);
    CHECK(north.energy == doctest::Approx(-0.4));
    CHECK(north.lambda_c == doctest::Approx(0.0));

    auto par = tcm_critical_data(ModelSpec::tcm(20, 0.8, 1.0));
    CHECK(par.region == TcmRegion::Parallels);
    CHECK(par.theta_c == doctest::Approx(std::acos(0.8)));
    CHECK(par.energy == doctest::Approx(-0.41));

    auto south = tcm_critical_data(ModelSpec::tcm(20, -0.5, 0.5));
    CHECK(south.region == TcmRegion::SouthPole);
    CHECK(south.lambda_c == doctest::Approx(20.0));

    // boundary |omega_A| = gamma^2 goes to the pole side
    CHECK(tcm_critical_data(ModelSpec::tcm(20, 0.25, 0.5)).region == TcmRegion::NorthPole);
}

TEST_CASE("TCM projected ground") {
    auto s = ModelSpec::tcm(20, 0.8, 0.5);
    auto g = tcm_projected_ground(s);
    CHECK(g.lambda == 0);
    CHECK(g.point.energy == doctest::Approx(-0.4).epsilon(1e-14));
    REQUIRE(g.coefficients.size() == 1);
    CHECK(g.coefficients[0] == doctest::Approx(1.0));

    Basis b0 = enumerate_basis(s, SectorSpec::lambda_block(0));
    auto psi = embed_variational_state(g.point, b0);
    CHECK(std::abs(psi.amplitudes[0]) == doctest::Approx(1.0));

    // Rayleigh-Ritz against the lambda* block, and a large-N value that needs stable Laguerre ratios
    for (double gamma : {1.0, 1.4}) {
        auto t = ModelSpec::tcm(20, 0.8, gamma);
        auto gt = tcm_projected_ground(t);
        auto blk = enumerate_basis(t, SectorSpec::lambda_block(gt.lambda));
        double e0 = lowest_eigenpairs(assemble_hamiltonian(t, blk), 1).energies[0];
        CHECK(gt.point.energy >= e0 - 1e-12);
    }
    auto big = tcm_projected_ground(ModelSpec::tcm(2000, 0.8, 1.3));
    CHECK(std::isfinite(big.point.energy));
    CHECK(big.point.energy <= tcm_critical_data(ModelSpec::tcm(2000, 0.8, 1.3)).energy + 1e-3);
}

TEST_CASE("three-level surfaces") {
    auto xi = ModelSpec::three_level(ModelKind::XiRwa, 10, {0.3, 1, 2}, 0.8, 0, 1.1);
    CHECK(energy_surface_3level(xi, Family::Rwa3Coh, {}) == doctest::Approx(0.3).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1.5);
    const ModelKind kinds[][2] = {{ModelKind::XiFull, ModelKind::XiRwa},
                                  {ModelKind::LambdaFull, ModelKind::LambdaRwa},
                                  {ModelKind::VFull, ModelKind::VRwa}};
    double worst = 0;
    for (auto [full, rwa] : kinds) {
        for (int i = 0; i < 100; ++i) {
            double a = u(rng), c = u(rng);
            std::array<double, 3> mu{}, mu2{};
            if (full == ModelKind::XiFull) mu = {a, 0, c};
            if (full == ModelKind::LambdaFull) mu = {0, a, c};
            if (full == ModelKind::VFull) mu = {a, c, 0};
            for (int k = 0; k < 3; ++k) mu2[k] = 2 * mu[k];
            auto f = ModelSpec::three_level(full, 10, {0, 1, 2}, mu[0], mu[1], mu[2]);
            auto r = ModelSpec::three_level(rwa, 10, {0, 1, 2}, mu2[0], mu2[1], mu2[2]);
            ThreeLevelParams p{u(rng), 0, u(rng), 0, u(rng), 0};
            worst = std::max(worst, std::abs(energy_surface_3level(f, Family::Full3Coh, p) -
                                             energy_surface_3level(r, Family::Rwa3Coh, p)));
        }
    }
    CHECK(worst <= 1e-12);

    auto v0 = ModelSpec::three_level(ModelKind::VFull, 50, {0, 1, 1}, 0, 0, 0);
    auto m = minimize_energy(v0, Family::VSasPlus, default_seeds(v0, Family::VSasPlus, 8));
    CHECK(std::abs(m.best.energy) <= 1e-10);

    auto v = ModelSpec::three_level(ModelKind::VFull, 50, {0, 1, 1}, 0.7, 0.2, 0);
    CHECK_THROWS_AS(v_sas_plus_energy(v, {0.3, 1.0, 0}), ValidationError);
    CHECK_THROWS_AS(energy_surface_3level(v, Family::Rwa3Coh, {}), ValidationError);
    CHECK_THROWS_AS(energy_surface_2level(v, Family::DickeCoh, {}), ValidationError);
}

TEST_CASE("minimization") {
    SUBCASE("TCM coherent against the closed form") {
        for (double gamma : {0.5, 1.0, 1.5}) {
            auto s = ModelSpec::tcm(20, 0.8, gamma);
            auto r = minimize_energy(s, Family::TcmCoh, default_seeds(s, Family::TcmCoh, 12));
            CHECK(std::abs(r.best.energy - tcm_critical_data(s).energy) <= 1e-8);
        }
    }
    SUBCASE("Dicke coherent at gamma = 1") {
        auto s = ModelSpec::dicke(10, 1.0, 1.0);
        auto seeds = default_seeds(s, Family::DickeCoh, 12);
        seeds.push_back({3, -1});
        auto r = minimize_energy(s, Family::DickeCoh, seeds);
        CHECK(r.best.energy == doctest::Approx(-1.0625).epsilon(1e-9));
        const auto& p = std::get<TwoLevelParams>(r.best.params);
        CHECK(0.5 * p.q * p.q / 10 == doctest::Approx(0.9375).epsilon(1e-6));
        CHECK(r.degenerate.size() >= 2);  // (q, theta) and (-q, -theta)
    }
    SUBCASE("deterministic") {
        auto s = ModelSpec::three_level(ModelKind::XiRwa, 10, {0, 1, 2}, 1.2, 0, 1.1);
        auto seeds = default_seeds(s, Family::Rwa3Coh, 10, 42);
        auto a = minimize_energy(s, Family::Rwa3Coh, seeds, {Execution::Serial});
        auto b = minimize_energy(s, Family::Rwa3Coh, seeds, {Execution::Parallel});
        CHECK(a.best.energy == b.best.energy);
        CHECK(default_seeds(s, Family::Rwa3Coh, 10, 42) == seeds);
    }
    SUBCASE("no seeds") {
        auto s = ModelSpec::dicke(10, 1.0, 1.0);
        CHECK_THROWS_AS(minimize_energy(s, Family::DickeCoh, {}), ValidationError);
    }
}

TEST_CASE("surfaces equal the energy of the embedded state") {
    auto tcm = ModelSpec::tcm(6, 0.8, 1.1);
    auto dk = ModelSpec::dicke(6, 1.0, 0.9);
    auto xi = ModelSpec::three_level(ModelKind::XiRwa, 4, {0, 1, 2}, 0.9, 0, 1.2);
    auto lf = ModelSpec::three_level(ModelKind::LambdaFull, 4, {0, 0.2, 1}, 0, 0.5, 0.7);
    auto vf = ModelSpec::three_level(ModelKind::VFull, 4, {0, 1, 1}, 0.6, 0.4, 0);

    const TwoLevelParams t2{-1.3, 0.4, 0.9, 0.3};
    const TwoLevelParams d2{-1.6, 0.0, 0.8, 0.0};
    const ThreeLevelParams t3{1.1, 0.0, 0.7, 0.0, 0.4, 0.0};

    struct Case {
        VariationalPoint p;
        SectorSpec sector;
    };
    std::vector<Case> cases{
        {point(Family::TcmCoh, tcm, t2), SectorSpec::full(40)},
        {point(Family::TcmProj, tcm, ProjectedParams{4, 0.7}), SectorSpec::lambda_block(4)},
        {point(Family::DickeCoh, dk, d2), SectorSpec::full(40)},
        {point(Family::DickeSasPlus, dk, d2), SectorSpec::full(40)},
        {point(Family::DickeSasMinus, dk, d2), SectorSpec::parity(-1, 40)},
        {point(Family::Rwa3Coh, xi, t3), SectorSpec::full(40)},
        {point(Family::Rwa3Proj, xi, ThreeLevelParams{1.1, 0, 0.7, 0, 0.4, 0, 3}), SectorSpec::m_block(3)},
        {point(Family::Full3Coh, lf, t3), SectorSpec::full(40)},
        {point(Family::Full3SasPlus, lf, t3), SectorSpec::full(40)},
        {point(Family::Full3SasMinus, lf, t3), SectorSpec::parity(-1, 40)},
        {point(Family::VSasPlus, vf, VReducedParams{0.5, 0.6, 0.0}), SectorSpec::full(40)},
    };
    for (const auto& c : cases) {
        CAPTURE(to_string(c.p.family));
        CHECK(std::abs(embedded_energy(c.p, c.sector) - c.p.energy) <= 1e-8);
        auto psi = embed_variational_state(c.p, enumerate_basis(c.p.spec, c.sector));
        CHECK(std::abs(psi.norm() - 1) <= 1e-10);
    }
}

TEST_CASE("truncation guard") {
    auto dk = ModelSpec::dicke(6, 1.0, 0.9);
    auto p = point(Family::DickeCoh, dk, TwoLevelParams{-4, 0, 0.8, 0});
    CHECK_THROWS_AS(embed_variational_state(p, enumerate_basis(dk, SectorSpec::full(8))), ComputeError);
}

TEST_CASE("coherent state splits into its two parity components") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uq(-3, 0), ut(0.05, 1.5), ug(0.2, 1.5);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        auto s = ModelSpec::dicke(10, 1.0, ug(rng));
        TwoLevelParams p{uq(rng), 0, ut(rng), 0};
        double f = dicke_overlap_at(p, 10);
        double ec = energy_surface_2level(s, Family::DickeCoh, p);
        double ep = energy_surface_2level(s, Family::DickeSasPlus, p);
        double em = energy_surface_2level(s, Family::DickeSasMinus, p);
        worst = std::max(worst, std::abs(ec - 0.5 * ((1 + f) * ep + (1 - f) * em)));
    }
    CHECK(worst <= 1e-10);

    // overlaps of the embedded states
    auto s = ModelSpec::dicke(6, 1.0, 0.9);
    TwoLevelParams p{-1.2, 0, 0.7, 0};
    Basis b = enumerate_basis(s, SectorSpec::full(40));
    auto coh = embed_variational_state(point(Family::DickeCoh, s, p), b);
    auto sp = embed_variational_state(point(Family::DickeSasPlus, s, p), b);
    auto sm = embed_variational_state(point(Family::DickeSasMinus, s, p), b);
    double f = dicke_overlap_at(p, 6);
    CHECK(std::abs(std::norm(inner(coh, sp)) - 0.5 * (1 + f)) <= 1e-8);
    CHECK(std::abs(std::norm(inner(coh, sm)) - 0.5 * (1 - f)) <= 1e-8);
}

TEST_CASE("TCM surface is invariant under a joint field/Bloch rotation") {
    auto s = ModelSpec::tcm(8, 0.7, 1.2);
    const double q = -1.1, p = 0.6, th = 0.9, ph = 0.4;
    for (double d : {0.3, 1.7, -2.2}) {
        double qr = q * std::cos(d) - p * std::sin(d), pr = q * std::sin(d) + p * std::cos(d);
        // a -> a e^{i d} together with phi -> phi + d leaves the interaction unchanged
        double e1 = energy_surface_2level(s, Family::TcmCoh, {q, p, th, ph});
        double e2 = energy_surface_2level(s, Family::TcmCoh, {qr, pr, th, ph + d});
        CHECK(std::abs(e1 - e2) <= 1e-12);
    }
}

TEST_CASE("variational energies never undercut the quantum ground") {
    auto s = ModelSpec::dicke(8, 1.0, 0.8);
    Basis b = enumerate_basis(s, SectorSpec::full(60));
    double e0 = s.per_particle(lowest_eigenpairs(assemble_hamiltonian(s, b), 1).energies[0]);
    for (Family f : {Family::DickeCoh, Family::DickeSasPlus}) {
        auto r = minimize_energy(s, f, default_seeds(s, f, 12));
        CHECK(r.best.energy >= e0 - 1e-10);
    }
}
