#pragma once

#include <cstddef>
#include <cstdint>

// Hot data-parallel loops, OpenMP-parallelized over independent output rows.
// Every kernel has a *_serial twin used by the equality tests and the bench
// tool. Per-element accumulation order is fixed, so parallel results are
// bit-identical to serial ones for any thread count.

namespace gcl::kernels {

constexpr std::uint16_t kUnreached = 0xffff;

// C (n x p) = A (n x k) * B (k x p)
void matmul(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
            std::size_t p);
void matmul_serial(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                   std::size_t p);

// C (n x p) = A (n x k) * B^T, with B given as (p x k)
void matmul_nt(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
               std::size_t p);
void matmul_nt_serial(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                      std::size_t p);

// C (n x p) = A^T * B, with A given as (m x n) and B as (m x p)
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
               std::size_t p);
void matmul_tn_serial(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                      std::size_t p);

// y_i = sum_{j in {i} u N(i)} x_j over a CSR adjacency (self term always
// included); mean=true divides by deg(i)+1. x, y are (n x d).
void neighbor_aggregate(const int* indptr, const int* indices, const double* x, double* y,
                        std::size_t n, std::size_t d, bool mean);
void neighbor_aggregate_serial(const int* indptr, const int* indices, const double* x, double* y,
                               std::size_t n, std::size_t d, bool mean);

// Unweighted all-pairs BFS distances; dist is row-major (n x n),
// kUnreached marks disconnected pairs.
void bfs_all_pairs(const int* indptr, const int* indices, std::size_t n, std::uint16_t* dist);
void bfs_all_pairs_serial(const int* indptr, const int* indices, std::size_t n,
                          std::uint16_t* dist);

// Gromov four-point scan: max over quadruples of component nodes of
// (S1 - S2)/2 where S1 >= S2 >= S3 are the three pairwise distance sums.
// dist indexes the full n x n matrix; nodes lists the component (size m).
double four_point_delta(const std::uint16_t* dist, std::size_t n, const int* nodes, std::size_t m);
double four_point_delta_serial(const std::uint16_t* dist, std::size_t n, const int* nodes,
                               std::size_t m);

// Nearest-center assignment (squared Euclidean); ties -> lowest center index.
void kmeans_assign(const double* pts, const double* centers, std::size_t n, std::size_t d,
                   std::size_t k, int* assign);
void kmeans_assign_serial(const double* pts, const double* centers, std::size_t n, std::size_t d,
                          std::size_t k, int* assign);

// For each node, fraction of its top-k cosine neighbors (self excluded, ties
// by ascending node id) sharing its label. xn must be row-normalized (n x d);
// hit_frac is (n x nk), one column per entry of ks.
void cosine_topk_hits(const double* xn, const int* labels, std::size_t n, std::size_t d,
                      const int* ks, std::size_t nk, double* hit_frac);
void cosine_topk_hits_serial(const double* xn, const int* labels, std::size_t n, std::size_t d,
                             const int* ks, std::size_t nk, double* hit_frac);

}  // namespace gcl::kernels
