#include <doctest.h>

#include <cmath>

#include "cavity/phase.hpp"

using namespace cavity;

TEST_CASE("separatrices") {
    CHECK(*separatrix_ordinate(ModelKind::XiRwa, 1, 2, 1.0) == doctest::Approx(1.0));
    CHECK(*separatrix_ordinate(ModelKind::XiRwa, 1, 2, 2.0) == doctest::Approx(std::sqrt(1 - std::pow(2 - std::sqrt(2.0), 2))));
    CHECK(*separatrix_ordinate(ModelKind::Dicke, 0, 0, 1.0) == doctest::Approx(0.5));
    CHECK(*separatrix_ordinate(ModelKind::TCM, 0, 0, 0.7) == doctest::Approx(0.49));
    CHECK(*separatrix_ordinate(ModelKind::LambdaRwa, 0.2, 1, 0.1) == doctest::Approx(1.0));
    CHECK(*separatrix_ordinate(ModelKind::VRwa, 1, 1, 0.6) == doctest::Approx(0.8));
    CHECK_FALSE(separatrix_ordinate(ModelKind::VRwa, 1, 1, 1.2));
    // the full model lives at half the RWA coordinates
    CHECK(*separatrix_ordinate(ModelKind::XiFull, 1, 2, 1.0) ==
          doctest::Approx(0.5 * *separatrix_ordinate(ModelKind::XiRwa, 1, 2, 2.0)));

    auto line = separatrix_polyline(ModelSpec::three_level(ModelKind::VRwa, 4, {0, 1, 1}, 0, 0, 0), 0, 1.5, 16);
    for (auto [a, o] : line) CHECK(a <= 1.0 + 1e-12);
}

TEST_CASE("fidelity") {
    auto s = ModelSpec::tcm(6, 1.0, 0.5);
    Basis b = enumerate_basis(s, SectorSpec::full(10));
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(b.size()), e1 = e0;
    e0[0] = 1;
    e1[1] = 1;
    auto a = StateVector::make(e0, b.id()), c = StateVector::make(e1, b.id());
    auto same = fidelity_and_susceptibility({a, a}, 0.1);
    CHECK(same[0].fidelity == doctest::Approx(1.0));
    CHECK(same[0].chi == doctest::Approx(0.0));
    auto orth = fidelity_and_susceptibility({a, c}, 0.1);
    CHECK(orth[0].fidelity == doctest::Approx(0.0));
    CHECK(orth[0].chi == doctest::Approx(200.0));
    CHECK_THROWS_AS(fidelity_and_susceptibility({a, c}, 0.0), ValidationError);
    StateVector d = c;
    d.basis_id ^= 7;
    CHECK_THROWS_AS(fidelity_and_susceptibility({a, d}, 0.1), ValidationError);
}

TEST_CASE("TCM ground crossing from lambda = 0 to 1") {
    // the lambda = 1 block takes over just below gamma = 0.9
    auto s = ModelSpec::tcm(4, 0.8, 0.3);
    ParameterPath p{s, {{Coupling::Gamma, 0, 1}}, 0.6, 1.0, 41};
    GroundOptions go;
    std::vector<PathGround> g;
    for (double t : p.taus()) g.push_back(exact_ground(p.at(t), go));
    int cross = -1;
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        if (g[i].label == 0 && g[i + 1].label == 1) cross = int(i);
    REQUIRE(cross >= 0);
    // different blocks: orthogonal neighbours, so F = 0 and chi = 2 / dtau^2 at the crossing
    auto r = locate_transitions(p, TransitionMethod::Quantum);
    REQUIRE_FALSE(r.transitions.empty());
    const auto& t = r.transitions[0];
    CHECK(t.delta_label == 1);
    CHECK(t.order == TransitionOrder::First);
    CHECK(t.tau_c > 0.6 + cross * p.step());
    CHECK(t.tau_c < 0.6 + (cross + 1) * p.step());
    CHECK(t.chi_peak == doctest::Approx(2 / (p.step() * p.step())));
}

TEST_CASE("chi peaks") {
    std::vector<double> chi{1, 1, 1, 50, 1, 1, 30, 30, 1, NAN};
    auto p = chi_peaks(chi, 10);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == 3);
    CHECK(p[1] == 6);
}

TEST_CASE("transition order along TCM paths") {
    TransitionOptions opts;
    SUBCASE("horizontal and vertical crossings are continuous") {
        ParameterPath h{ModelSpec::tcm(20, 0.5, 0), {{Coupling::Gamma, 0, 1}}, 0.2, 1.2, 41};
        auto r = locate_transitions(h, TransitionMethod::Sas, opts);
        REQUIRE(r.transitions.size() == 1);
        CHECK(r.transitions[0].tau_c == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
        CHECK(r.transitions[0].order == TransitionOrder::Second);

        ParameterPath v{ModelSpec::tcm(20, 0, 0.8), {{Coupling::AtomicFreq, 0, 1}}, 1.0, 0.2, 41};
        auto rv = locate_transitions(v, TransitionMethod::Sas, opts);
        REQUIRE(rv.transitions.size() == 1);
        CHECK(rv.transitions[0].tau_c == doctest::Approx(0.64).epsilon(1e-6));
        CHECK(rv.transitions[0].order == TransitionOrder::Second);

        ParameterPath s{ModelSpec::tcm(20, 0, 0.8), {{Coupling::AtomicFreq, 0, 1}}, -1.0, -0.2, 41};
        auto rs = locate_transitions(s, TransitionMethod::Sas, opts);
        REQUIRE(rs.transitions.size() == 1);
        CHECK(rs.transitions[0].order == TransitionOrder::Second);
    }
    SUBCASE("the slanted line through the origin is discontinuous") {
        // couplings are non-negative, so the straight line through the origin is gamma = 0
        ParameterPath o{ModelSpec::tcm(20, 0, 0), {{Coupling::AtomicFreq, 0, 1}}, 1.0, -1.0, 40};
        auto r = locate_transitions(o, TransitionMethod::Sas, opts);
        REQUIRE(r.transitions.size() == 1);
        CHECK(r.transitions[0].tau_c == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(r.transitions[0].order == TransitionOrder::First);
    }
}

TEST_CASE("exponent fit") {
    std::vector<std::pair<double, double>> s;
    for (double n : {10.0, 20.0, 50.0, 100.0, 400.0}) s.push_back({n, 0.5 + 0.5 * std::pow(n, -2.0 / 3)});
    auto f = fit_critical_exponent(s, 0.5);
    CHECK(f.exponent == doctest::Approx(-2.0 / 3).epsilon(1e-12));
    CHECK(f.log_prefactor == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.confidence_interval.first <= f.exponent);
    CHECK(f.confidence_interval.second >= f.exponent);

    CHECK_THROWS_AS(fit_critical_exponent({{10, 0.6}, {20, 0.55}, {30, 0.54}}, 0.5), ValidationError);
    CHECK_THROWS_AS(fit_critical_exponent({{10, 0.6}, {10, 0.55}, {10, 0.54}, {10, 0.53}}, 0.5), ValidationError);
    CHECK_THROWS_AS(fit_critical_exponent({{10, 0.6}, {20, 0.45}, {30, 0.54}, {40, 0.53}}, 0.5), ValidationError);
}

TEST_CASE("SAS critical couplings") {
    // the minimizer jumps above the mean-field value and approaches it as N grows
    double prev = 1;
    for (int n : {20, 40, 100}) {
        double g = dicke_sas_critical(n);
        CHECK(g > 0.5);
        CHECK(g < prev);
        prev = g;
    }
    double mu = v_sas_critical(500);
    CHECK(mu > 0.5);
    CHECK(mu < 0.52);
}

TEST_CASE("triple point") {
    SUBCASE("printed amplitudes") {
        auto tp = triple_point_ground_state(4, 2);
        REQUIRE(tp.printed.size() == 4);
        CHECK(tp.printed[0].second == doctest::Approx(-0.25));
        CHECK(tp.printed[1].second == doctest::Approx(0.4330127019));
        CHECK(tp.printed[2].second == doctest::Approx(0.7071067812));
        CHECK(tp.printed[3].second == doctest::Approx(0.5));
        CHECK(triple_point_ground_state(4, 0).printed.size() == 1);
        CHECK_THROWS_AS(triple_point_ground_state(4, 3), ValidationError);
        CHECK_THROWS_AS(triple_point_ground_state(1, 0), ValidationError);
    }
    SUBCASE("degenerate eigenstates") {
        for (int n = 2; n <= 6; ++n) {
            auto spec = triple_point_spec(n);
            std::vector<double> es;
            for (int m = 0; m <= 2; ++m) {
                auto tp = triple_point_ground_state(n, m);
                auto h = assemble_hamiltonian(spec, tp.basis);
                Eigen::VectorXcd hv = apply(h, tp.state.amplitudes, Execution::Serial);
                double e = std::real(tp.state.amplitudes.dot(hv));
                CHECK((hv - e * tp.state.amplitudes).norm() <= 1e-10);
                es.push_back(e / n);
                auto num = lowest_eigenpairs(h, 1);
                CHECK(num.energies[0] == doctest::Approx(e).epsilon(1e-10));
            }
            CHECK(std::abs(es[0] - es[1]) <= 1e-10);
            CHECK(std::abs(es[0] - es[2]) <= 1e-10);
        }
    }
}

TEST_CASE("Xi quantum loci on the vertical branch approach mu12 = 1") {
    // M = 0 -> 1 sits at mu12 = 1 for every N; the next crossings lie to its right and move in
    double prev = INFINITY;
    for (int n : {2, 4, 8}) {
        ParameterPath p{ModelSpec::three_level(ModelKind::XiRwa, n, {0, 1, 2}, 0, 0, 0.5),
                        {{Coupling::Mu12, 0, 1}}, 0.5, 2.5, 101};
        auto r = locate_transitions(p, TransitionMethod::Quantum);
        REQUIRE(r.transitions.size() >= 2);
        CHECK(r.transitions[0].tau_c == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.transitions[0].order == TransitionOrder::First);
        CHECK(r.transitions[0].delta_label == 1);
        double second = r.transitions[1].tau_c;
        CHECK(second > 1.0);
        CHECK(second < prev);
        prev = second;
    }
}

TEST_CASE("phase grid serial and parallel agree") {
    auto base = ModelSpec::three_level(ModelKind::XiRwa, 4, {0, 1, 2}, 0, 0, 0);
    GridAxis x{Coupling::Mu12, 0.2, 1.8, 9}, y{Coupling::Mu23, 0.2, 1.8, 5};
    auto a = compute_phase_grid(base, x, y, {}, Execution::Serial);
    auto b = compute_phase_grid(base, x, y, {}, Execution::Parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
            CHECK(a.rows[i][j].label == b.rows[i][j].label);
            CHECK(a.rows[i][j].energy == b.rows[i][j].energy);
        }
}
