// Compares the OpenMP kernels against their serial references: wall time per
// call (median of 5) and bitwise agreement of the outputs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "gcl/hetgraph.hpp"
#include "gcl/kernels.hpp"

using gcl::kernels::bfs_all_pairs;
using gcl::kernels::bfs_all_pairs_serial;
using gcl::kernels::four_point_delta;
using gcl::kernels::four_point_delta_serial;
using gcl::kernels::kmeans_assign;
using gcl::kernels::kmeans_assign_serial;
using gcl::kernels::matmul;
using gcl::kernels::matmul_serial;
using gcl::kernels::neighbor_aggregate;
using gcl::kernels::neighbor_aggregate_serial;

namespace {

template <typename F>
double time_median_ms(F&& f, int reps = 5) {
    std::vector<double> t(reps);
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        t[r] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                   .count();
    }
    std::sort(t.begin(), t.end());
    return t[reps / 2];
}

void report(const char* name, double serial_ms, double omp_ms, bool match) {
    std::printf("%-22s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name, serial_ms,
                omp_ms, serial_ms / omp_ms, match ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    {
        const std::size_t n = 512, k = 256, p = 512;
        std::vector<double> a(n * k), b(k * p), c1(n * p), c2(n * p);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);
        const double ts = time_median_ms([&] { matmul_serial(a.data(), b.data(), c1.data(), n, k, p); });
        const double tp = time_median_ms([&] { matmul(a.data(), b.data(), c2.data(), n, k, p); });
        report("matmul 512x256x512", ts, tp, c1 == c2);
    }

    {
        gcl::SynthSpec spec;
        spec.num_nodes = 4000;
        spec.num_classes = 4;
        spec.feature_dim = 2;
        spec.seed = 3;
        spec.metapaths = {{"sbm", false, 0.02, 0.002, 0.0}};
        gcl::HeteroGraph g = gcl::generate_synthetic(spec);
        const auto& mp = g.metapaths[0];
        const std::size_t n = spec.num_nodes, d = 64;
        std::vector<double> x(n * d), y1(n * d), y2(n * d);
        for (auto& v : x) v = u(rng);
        const double ts = time_median_ms([&] {
            neighbor_aggregate_serial(mp.indptr.data(), mp.indices.data(), x.data(), y1.data(), n,
                                      d, true);
        });
        const double tp = time_median_ms([&] {
            neighbor_aggregate(mp.indptr.data(), mp.indices.data(), x.data(), y2.data(), n, d,
                               true);
        });
        report("neighbor_agg 4000x64", ts, tp, y1 == y2);

        std::vector<std::uint16_t> d1(n * n), d2(n * n);
        const double bs = time_median_ms(
            [&] { bfs_all_pairs_serial(mp.indptr.data(), mp.indices.data(), n, d1.data()); });
        const double bp = time_median_ms(
            [&] { bfs_all_pairs(mp.indptr.data(), mp.indices.data(), n, d2.data()); });
        report("bfs_all_pairs 4000", bs, bp, d1 == d2);
    }

    {
        gcl::SynthSpec spec;
        spec.num_nodes = 220;
        spec.num_classes = 2;
        spec.feature_dim = 2;
        spec.seed = 4;
        spec.metapaths = {{"sbm", false, 0.1, 0.02, 0.0}};
        gcl::HeteroGraph g = gcl::generate_synthetic(spec);
        const auto& mp = g.metapaths[0];
        const std::size_t n = spec.num_nodes;
        std::vector<std::uint16_t> dist(n * n);
        bfs_all_pairs(mp.indptr.data(), mp.indices.data(), n, dist.data());
        std::vector<int> nodes(n);
        for (std::size_t i = 0; i < n; ++i) nodes[i] = static_cast<int>(i);
        double r1 = 0, r2 = 0;
        const double ts = time_median_ms(
            [&] { r1 = four_point_delta_serial(dist.data(), n, nodes.data(), n); }, 3);
        const double tp =
            time_median_ms([&] { r2 = four_point_delta(dist.data(), n, nodes.data(), n); }, 3);
        report("four_point 220", ts, tp, r1 == r2);
    }

    {
        const std::size_t n = 20000, d = 64, k = 8;
        std::vector<double> pts(n * d), centers(k * d);
        for (auto& x : pts) x = u(rng);
        for (auto& x : centers) x = u(rng);
        std::vector<int> a1(n), a2(n);
        const double ts = time_median_ms(
            [&] { kmeans_assign_serial(pts.data(), centers.data(), n, d, k, a1.data()); });
        const double tp =
            time_median_ms([&] { kmeans_assign(pts.data(), centers.data(), n, d, k, a2.data()); });
        report("kmeans_assign 20000", ts, tp, a1 == a2);
    }

    return 0;
}
