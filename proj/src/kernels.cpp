#include "gcl/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace gcl::kernels {

namespace {

inline void matmul_row(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                       std::size_t p) {
    double* ci = c + i * p;
    std::fill(ci, ci + p, 0.0);
    const double* ai = a + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double aik = ai[kk];
        if (aik == 0.0) continue;
        const double* bk = b + kk * p;
        for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
    }
}

inline void matmul_nt_row(const double* a, const double* b, double* c, std::size_t i,
                          std::size_t k, std::size_t p) {
    double* ci = c + i * p;
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < p; ++j) {
        const double* bj = b + j * k;
        double acc = 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
        ci[j] = acc;
    }
}

inline void matmul_tn_row(const double* a, const double* b, double* c, std::size_t i,
                          std::size_t m, std::size_t n, std::size_t p) {
    // c row i (length p) = sum_r a[r, i] * b[r, :]
    double* ci = c + i * p;
    std::fill(ci, ci + p, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const double ari = a[r * n + i];
        if (ari == 0.0) continue;
        const double* br = b + r * p;
        for (std::size_t j = 0; j < p; ++j) ci[j] += ari * br[j];
    }
}

inline void neighbor_row(const int* indptr, const int* indices, const double* x, double* y,
                         std::size_t i, std::size_t d, bool mean) {
    double* yi = y + i * d;
    const double* xi = x + i * d;
    std::memcpy(yi, xi, d * sizeof(double));
    const int beg = indptr[i], end = indptr[i + 1];
    for (int e = beg; e < end; ++e) {
        const double* xj = x + static_cast<std::size_t>(indices[e]) * d;
        for (std::size_t c = 0; c < d; ++c) yi[c] += xj[c];
    }
    if (mean) {
        const double inv = 1.0 / static_cast<double>(end - beg + 1);
        for (std::size_t c = 0; c < d; ++c) yi[c] *= inv;
    }
}

inline void bfs_from(const int* indptr, const int* indices, std::size_t n, int src,
                     std::uint16_t* row, std::vector<int>& queue) {
    std::fill(row, row + n, kUnreached);
    queue.clear();
    queue.push_back(src);
    row[src] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int u = queue[head];
        const std::uint16_t du = row[u];
        for (int e = indptr[u]; e < indptr[u + 1]; ++e) {
            const int v = indices[e];
            if (row[v] == kUnreached) {
                row[v] = static_cast<std::uint16_t>(du + 1);
                queue.push_back(v);
            }
        }
    }
}

inline double quad_delta(const std::uint16_t* dist, std::size_t n, int a, int b, int c, int d) {
    const double s1 = dist[a * n + b] + dist[c * n + d];
    const double s2 = dist[a * n + c] + dist[b * n + d];
    const double s3 = dist[a * n + d] + dist[b * n + c];
    double hi = s1, mid = s2, lo = s3;
    if (hi < mid) std::swap(hi, mid);
    if (mid < lo) std::swap(mid, lo);
    if (hi < mid) std::swap(hi, mid);
    return 0.5 * (hi - mid);
}

inline void assign_row(const double* pts, const double* centers, std::size_t i, std::size_t d,
                       std::size_t k, int* assign) {
    const double* p = pts + i * d;
    double best = -1.0;
    int besti = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double* cc = centers + c * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = p[j] - cc[j];
            acc += t * t;
        }
        if (best < 0.0 || acc < best) {
            best = acc;
            besti = static_cast<int>(c);
        }
    }
    assign[i] = besti;
}

inline void topk_row(const double* xn, const int* labels, std::size_t n, std::size_t d,
                     const int* ks, std::size_t nk, double* hit_frac, std::size_t i,
                     std::vector<double>& sims, std::vector<int>& order) {
    const double* xi = xn + i * d;
    sims.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double* xj = xn + j * d;
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) acc += xi[c] * xj[c];
        sims[j] = acc;
    }
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) order.push_back(static_cast<int>(j));
    int kmax = 0;
    for (std::size_t t = 0; t < nk; ++t) kmax = std::max(kmax, ks[t]);
    kmax = std::min<int>(kmax, static_cast<int>(order.size()));
    auto cmp = [&](int a, int b) { return sims[a] != sims[b] ? sims[a] > sims[b] : a < b; };
    std::partial_sort(order.begin(), order.begin() + kmax, order.end(), cmp);
    for (std::size_t t = 0; t < nk; ++t) {
        const int k = std::min<int>(ks[t], kmax);
        int hits = 0;
        for (int r = 0; r < k; ++r)
            if (labels[order[r]] == labels[i]) ++hits;
        hit_frac[i * nk + t] = k > 0 ? static_cast<double>(hits) / k : 0.0;
    }
}

}  // namespace

void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
            std::size_t p) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * k * p > 16384)
    for (std::int64_t i = 0; i < in; ++i) matmul_row(a, b, c, static_cast<std::size_t>(i), k, p);
}

void matmul_serial(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                   std::size_t p) {
    for (std::size_t i = 0; i < n; ++i) matmul_row(a, b, c, i, k, p);
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
               std::size_t p) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * k * p > 16384)
    for (std::int64_t i = 0; i < in; ++i)
        matmul_nt_row(a, b, c, static_cast<std::size_t>(i), k, p);
}

void matmul_nt_serial(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                      std::size_t p) {
    for (std::size_t i = 0; i < n; ++i) matmul_nt_row(a, b, c, i, k, p);
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
               std::size_t p) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (m * n * p > 16384)
    for (std::int64_t i = 0; i < in; ++i)
        matmul_tn_row(a, b, c, static_cast<std::size_t>(i), m, n, p);
}

void matmul_tn_serial(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                      std::size_t p) {
    for (std::size_t i = 0; i < n; ++i) matmul_tn_row(a, b, c, i, m, n, p);
}

void neighbor_aggregate(const int* indptr, const int* indices, const double* x, double* y,
                        std::size_t n, std::size_t d, bool mean) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * d > 8192)
    for (std::int64_t i = 0; i < in; ++i)
        neighbor_row(indptr, indices, x, y, static_cast<std::size_t>(i), d, mean);
}

void neighbor_aggregate_serial(const int* indptr, const int* indices, const double* x, double* y,
                               std::size_t n, std::size_t d, bool mean) {
    for (std::size_t i = 0; i < n; ++i) neighbor_row(indptr, indices, x, y, i, d, mean);
}

void bfs_all_pairs(const int* indptr, const int* indices, std::size_t n, std::uint16_t* dist) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel
    {
        std::vector<int> queue;
        queue.reserve(n);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t s = 0; s < in; ++s)
            bfs_from(indptr, indices, n, static_cast<int>(s), dist + s * in, queue);
    }
}

void bfs_all_pairs_serial(const int* indptr, const int* indices, std::size_t n,
                          std::uint16_t* dist) {
    std::vector<int> queue;
    queue.reserve(n);
    for (std::size_t s = 0; s < n; ++s)
        bfs_from(indptr, indices, n, static_cast<int>(s), dist + s * n, queue);
}

double four_point_delta(const std::uint16_t* dist, std::size_t n, const int* nodes,
                        std::size_t m) {
    if (m < 4) return 0.0;
    double delta = 0.0;
    const std::int64_t im = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic) reduction(max : delta)
    for (std::int64_t ia = 0; ia < im; ++ia) {
        for (std::size_t ib = ia + 1; ib < m; ++ib)
            for (std::size_t ic = ib + 1; ic < m; ++ic)
                for (std::size_t id = ic + 1; id < m; ++id) {
                    const double q =
                        quad_delta(dist, n, nodes[ia], nodes[ib], nodes[ic], nodes[id]);
                    if (q > delta) delta = q;
                }
    }
    return delta;
}

double four_point_delta_serial(const std::uint16_t* dist, std::size_t n, const int* nodes,
                               std::size_t m) {
    if (m < 4) return 0.0;
    double delta = 0.0;
    for (std::size_t ia = 0; ia < m; ++ia)
        for (std::size_t ib = ia + 1; ib < m; ++ib)
            for (std::size_t ic = ib + 1; ic < m; ++ic)
                for (std::size_t id = ic + 1; id < m; ++id) {
                    const double q =
                        quad_delta(dist, n, nodes[ia], nodes[ib], nodes[ic], nodes[id]);
                    if (q > delta) delta = q;
                }
    return delta;
}

void kmeans_assign(const double* pts, const double* centers, std::size_t n, std::size_t d,
                   std::size_t k, int* assign) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n * d * k > 8192)
    for (std::int64_t i = 0; i < in; ++i)
        assign_row(pts, centers, static_cast<std::size_t>(i), d, k, assign);
}

void kmeans_assign_serial(const double* pts, const double* centers, std::size_t n, std::size_t d,
                          std::size_t k, int* assign) {
    for (std::size_t i = 0; i < n; ++i) assign_row(pts, centers, i, d, k, assign);
}

void cosine_topk_hits(const double* xn, const int* labels, std::size_t n, std::size_t d,
                      const int* ks, std::size_t nk, double* hit_frac) {
    const std::int64_t in = static_cast<std::int64_t>(n);
#pragma omp parallel
    {
        std::vector<double> sims;
        std::vector<int> order;
        order.reserve(n);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < in; ++i)
            topk_row(xn, labels, n, d, ks, nk, hit_frac, static_cast<std::size_t>(i), sims, order);
    }
}

void cosine_topk_hits_serial(const double* xn, const int* labels, std::size_t n, std::size_t d,
                             const int* ks, std::size_t nk, double* hit_frac) {
    std::vector<double> sims;
    std::vector<int> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) topk_row(xn, labels, n, d, ks, nk, hit_frac, i, sims, order);
}

}  // namespace gcl::kernels
