// Serial vs OpenMP timings for the data-parallel kernels.
#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "cavity/kernels.hpp"
#include "cavity/model.hpp"
#include "cavity/phase.hpp"

using namespace cavity;

namespace {

const OperatorMatrix& dicke_h(int cutoff) {
    static std::map<int, OperatorMatrix> cache;
    auto it = cache.find(cutoff);
    if (it == cache.end()) {
        auto s = ModelSpec::dicke(40, 1.0, 0.9);
        it = cache.emplace(cutoff, assemble_hamiltonian(s, enumerate_basis(s, SectorSpec::full(cutoff)))).first;
    }
    return it->second;
}

Eigen::VectorXd gaussian(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

template <bool Par>
void BM_spmv(benchmark::State& st) {
    const auto& h = dicke_h(int(st.range(0)));
    Eigen::VectorXd x = gaussian(h.dimension(), 1), y(h.dimension());
    for (auto _ : st) {
        if (Par) spmv_parallel(h.re, x.data(), y.data());
        else spmv_serial(h.re, x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    st.counters["dim"] = double(h.dimension());
}

template <bool Par>
void BM_project_out(benchmark::State& st) {
    const Eigen::Index n = st.range(0), k = 32;
    Eigen::MatrixXd v(n, k);
    for (Eigen::Index j = 0; j < k; ++j) v.col(j) = gaussian(n, unsigned(j + 7)).normalized();
    Eigen::VectorXd w0 = gaussian(n, 2);
    for (auto _ : st) {
        Eigen::VectorXd w = w0;
        auto c = Par ? project_out_parallel(v, k, w) : project_out_serial(v, k, w);
        benchmark::DoNotOptimize(c.data());
    }
}

template <bool Par>
void BM_lambda_grid(benchmark::State& st) {
    auto base = ModelSpec::three_level(ModelKind::LambdaRwa, 6, {0, 0.2, 1}, 0, 0, 0);
    GridAxis x{Coupling::Mu13, 0.1, 1.5, 16}, y{Coupling::Mu23, 0.1, 1.5, 8};
    for (auto _ : st) {
        auto g = compute_phase_grid(base, x, y, {}, Par ? Execution::Parallel : Execution::Serial);
        benchmark::DoNotOptimize(g.rows.data());
    }
}

}  // namespace

BENCHMARK(BM_spmv<false>)->Arg(100)->Arg(300);
BENCHMARK(BM_spmv<true>)->Arg(100)->Arg(300);
BENCHMARK(BM_project_out<false>)->Arg(20000)->Arg(200000);
BENCHMARK(BM_project_out<true>)->Arg(20000)->Arg(200000);
BENCHMARK(BM_lambda_grid<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lambda_grid<true>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
