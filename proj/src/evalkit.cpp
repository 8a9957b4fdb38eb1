#include "gcl/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gcl/kernels.hpp"
#include "gcl/rng.hpp"

using nlohmann::json;

namespace gcl {

namespace {

struct F1Pair {
    double macro = 0, micro = 0;
};

F1Pair f1_scores(const std::vector<int>& truth, const std::vector<int>& pred, int num_classes) {
    std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (pred[i] == truth[i])
            tp[truth[i]]++;
        else {
            fp[pred[i]]++;
            fn[truth[i]]++;
        }
    }
    double macro = 0;
    long tp_all = 0, fp_all = 0, fn_all = 0;
    for (int c = 0; c < num_classes; ++c) {
        const long denom = 2 * tp[c] + fp[c] + fn[c];
        macro += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
        tp_all += tp[c];
        fp_all += fp[c];
        fn_all += fn[c];
    }
    macro /= num_classes;
    const long denom = 2 * tp_all + fp_all + fn_all;
    return {macro, denom > 0 ? 2.0 * tp_all / denom : 0.0};
}

double mean_of(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mu) {
    double s = 0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

ProbeResult logistic_probe(const Tensor& h, const std::vector<int>& labels,
                           const std::vector<Split>& splits, std::size_t runs,
                           std::uint64_t seed, Split eval_split, std::size_t iters) {
    if (labels.empty() || splits.empty())
        throw std::invalid_argument("logistic_probe: labels and splits are required");
    const std::size_t n = h.rows(), d = h.cols();
    std::vector<int> train_idx, eval_idx;
    int num_classes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        num_classes = std::max(num_classes, labels[i] + 1);
        if (splits[i] == Split::kTrain) train_idx.push_back(static_cast<int>(i));
        if (splits[i] == eval_split) eval_idx.push_back(static_cast<int>(i));
    }
    if (train_idx.empty() || eval_idx.empty())
        throw std::invalid_argument("logistic_probe: empty train or eval split");
    std::vector<bool> in_train(num_classes, false);
    for (int i : train_idx) in_train[labels[i]] = true;
    for (int c = 0; c < num_classes; ++c)
        if (!in_train[c])
            throw std::invalid_argument("logistic_probe: class " + std::to_string(c) +
                                        " absent from train split");

    const std::size_t ntr = train_idx.size(), nev = eval_idx.size();
    std::vector<double> xtr(ntr * d), xev(nev * d);
    for (std::size_t r = 0; r < ntr; ++r)
        std::copy(h.data() + train_idx[r] * d, h.data() + (train_idx[r] + 1) * d, xtr.begin() + r * d);
    for (std::size_t r = 0; r < nev; ++r)
        std::copy(h.data() + eval_idx[r] * d, h.data() + (eval_idx[r] + 1) * d, xev.begin() + r * d);
    std::vector<int> ytr(ntr), yev(nev);
    for (std::size_t r = 0; r < ntr; ++r) ytr[r] = labels[train_idx[r]];
    for (std::size_t r = 0; r < nev; ++r) yev[r] = labels[eval_idx[r]];

    const double lr = 0.1, l2 = 1e-4;
    const std::size_t C = static_cast<std::size_t>(num_classes);
    std::vector<double> macros(runs), micros(runs);

    for (std::size_t run = 0; run < runs; ++run) {
        std::mt19937_64 rng = make_rng(derive_seed(seed, rngtag::kProbe, run));
        std::normal_distribution<double> gauss(0.0, 0.01);
        std::vector<double> w(d * C), b(C, 0.0);
        for (double& x : w) x = gauss(rng);

        std::vector<double> logits(ntr * C), probs(ntr * C), gw(d * C), gb(C);
        for (std::size_t it = 0; it < iters; ++it) {
            kernels::matmul(xtr.data(), w.data(), logits.data(), ntr, d, C);
            for (std::size_t i = 0; i < ntr; ++i) {
                double mx = -1e300;
                for (std::size_t c = 0; c < C; ++c) {
                    logits[i * C + c] += b[c];
                    mx = std::max(mx, logits[i * C + c]);
                }
                double z = 0;
                for (std::size_t c = 0; c < C; ++c) {
                    probs[i * C + c] = std::exp(logits[i * C + c] - mx);
                    z += probs[i * C + c];
                }
                for (std::size_t c = 0; c < C; ++c) probs[i * C + c] /= z;
                probs[i * C + ytr[i]] -= 1.0;
            }
            const double inv = 1.0 / static_cast<double>(ntr);
            kernels::matmul_tn(xtr.data(), probs.data(), gw.data(), ntr, d, C);
            std::fill(gb.begin(), gb.end(), 0.0);
            for (std::size_t i = 0; i < ntr; ++i)
                for (std::size_t c = 0; c < C; ++c) gb[c] += probs[i * C + c];
            for (std::size_t k = 0; k < d * C; ++k) w[k] -= lr * (gw[k] * inv + l2 * w[k]);
            for (std::size_t c = 0; c < C; ++c) b[c] -= lr * gb[c] * inv;
        }

        std::vector<double> elog(nev * C);
        kernels::matmul(xev.data(), w.data(), elog.data(), nev, d, C);
        std::vector<int> pred(nev);
        for (std::size_t i = 0; i < nev; ++i) {
            int bestc = 0;
            double bestv = elog[i * C] + b[0];
            for (std::size_t c = 1; c < C; ++c) {
                const double v = elog[i * C + c] + b[c];
                if (v > bestv) {
                    bestv = v;
                    bestc = static_cast<int>(c);
                }
            }
            pred[i] = bestc;
        }
        const F1Pair f1 = f1_scores(yev, pred, num_classes);
        macros[run] = f1.macro;
        micros[run] = f1.micro;
    }

    ProbeResult res;
    res.macro_f1_mean = mean_of(macros);
    res.macro_f1_std = std_of(macros, res.macro_f1_mean);
    res.micro_f1_mean = mean_of(micros);
    res.micro_f1_std = std_of(micros, res.micro_f1_mean);
    return res;
}

double nmi_score(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("nmi: size mismatch");
    const double n = static_cast<double>(a.size());
    std::map<int, long> ca, cb;
    std::map<std::pair<int, int>, long> cab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]]++;
        cb[b[i]]++;
        cab[{a[i], b[i]}]++;
    }
    double mi = 0;
    for (const auto& [key, nij] : cab) {
        const double pij = nij / n;
        const double pi = ca[key.first] / n;
        const double pj = cb[key.second] / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    double ha = 0, hb = 0;
    for (const auto& [k, c] : ca) ha -= c / n * std::log(c / n);
    for (const auto& [k, c] : cb) hb -= c / n * std::log(c / n);
    const double denom = 0.5 * (ha + hb);
    if (denom <= 0) return 1.0;  // both partitions are a single cluster
    return std::max(0.0, mi / denom);
}

double ari_score(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("ari: size mismatch");
    std::map<int, long> ca, cb;
    std::map<std::pair<int, int>, long> cab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]]++;
        cb[b[i]]++;
        cab[{a[i], b[i]}]++;
    }
    auto comb2 = [](long x) { return 0.5 * x * (x - 1); };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, c] : cab) sum_ij += comb2(c);
    for (const auto& [k, c] : ca) sum_a += comb2(c);
    for (const auto& [k, c] : cb) sum_b += comb2(c);
    const double total = comb2(static_cast<long>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double maxidx = 0.5 * (sum_a + sum_b);
    if (maxidx == expected) return 0.0;
    return (sum_ij - expected) / (maxidx - expected);
}

KmeansResult kmeans_eval(const Tensor& h, const std::vector<int>& labels, std::size_t k,
                         std::size_t runs, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kmeans_eval: k must be >= 2");
    const std::size_t d = h.cols();
    std::vector<int> node_idx, truth;
    for (std::size_t i = 0; i < h.rows(); ++i)
        if (labels.empty() || labels[i] >= 0) {
            node_idx.push_back(static_cast<int>(i));
            if (!labels.empty()) truth.push_back(labels[i]);
        }
    const std::size_t n = node_idx.size();
    if (n < k) throw std::invalid_argument("kmeans_eval: fewer points than clusters");
    std::vector<double> pts(n * d);
    for (std::size_t r = 0; r < n; ++r)
        std::copy(h.data() + node_idx[r] * d, h.data() + (node_idx[r] + 1) * d, pts.begin() + r * d);

    KmeansResult res;
    {
        std::set<std::vector<double>> distinct;
        for (std::size_t r = 0; r < n && distinct.size() <= k; ++r)
            distinct.emplace(pts.begin() + r * d, pts.begin() + (r + 1) * d);
        if (distinct.size() < k) res.degenerate = true;
    }

    std::vector<double> nmis(runs), aris(runs);
    for (std::size_t run = 0; run < runs; ++run) {
        std::mt19937_64 rng = make_rng(derive_seed(seed, rngtag::kKmeans, run));

        // k-means++ seeding
        std::vector<double> centers(k * d);
        std::uniform_int_distribution<std::size_t> first(0, n - 1);
        std::size_t c0 = first(rng);
        std::copy(pts.begin() + c0 * d, pts.begin() + (c0 + 1) * d, centers.begin());
        std::vector<double> d2(n);
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = 1e300;
                for (std::size_t cc = 0; cc < c; ++cc) {
                    double acc = 0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double t = pts[i * d + j] - centers[cc * d + j];
                        acc += t * t;
                    }
                    best = std::min(best, acc);
                }
                d2[i] = best;
                total += best;
            }
            std::size_t pick = 0;
            if (total > 0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double r = u(rng), acc = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = first(rng);
            }
            std::copy(pts.begin() + pick * d, pts.begin() + (pick + 1) * d,
                      centers.begin() + c * d);
        }

        // Lloyd iterations
        std::vector<int> assign(n, -1);
        std::vector<double> newc(k * d);
        std::vector<long> counts(k);
        for (std::size_t it = 0; it < 100; ++it) {
            kernels::kmeans_assign(pts.data(), centers.data(), n, d, k, assign.data());
            std::fill(newc.begin(), newc.end(), 0.0);
            std::fill(counts.begin(), counts.end(), 0L);
            for (std::size_t i = 0; i < n; ++i) {
                counts[assign[i]]++;
                for (std::size_t j = 0; j < d; ++j) newc[assign[i] * d + j] += pts[i * d + j];
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] == 0) {
                    // reassign empty cluster to the point farthest from its center
                    std::size_t far = 0;
                    double fard = -1;
                    for (std::size_t i = 0; i < n; ++i) {
                        double acc = 0;
                        for (std::size_t j = 0; j < d; ++j) {
                            const double t = pts[i * d + j] - centers[assign[i] * d + j];
                            acc += t * t;
                        }
                        if (acc > fard) {
                            fard = acc;
                            far = i;
                        }
                    }
                    std::copy(pts.begin() + far * d, pts.begin() + (far + 1) * d,
                              newc.begin() + c * d);
                    counts[c] = 1;
                } else {
                    for (std::size_t j = 0; j < d; ++j)
                        newc[c * d + j] /= static_cast<double>(counts[c]);
                }
            }
            double shift = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double acc = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double t = newc[c * d + j] - centers[c * d + j];
                    acc += t * t;
                }
                shift = std::max(shift, acc);
            }
            centers = newc;
            if (shift <= 1e-6) break;
        }
        kernels::kmeans_assign(pts.data(), centers.data(), n, d, k, assign.data());

        if (!truth.empty()) {
            nmis[run] = nmi_score(truth, assign);
            aris[run] = ari_score(truth, assign);
        }
    }
    res.nmi_mean = mean_of(nmis);
    res.ari_mean = mean_of(aris);
    return res;
}

std::vector<double> similarity_search(const Tensor& h, const std::vector<int>& labels,
                                      const std::vector<int>& ks) {
    if (labels.empty()) throw std::invalid_argument("similarity_search: labels are required");
    const std::size_t d = h.cols();
    std::vector<int> node_idx;
    for (std::size_t i = 0; i < h.rows(); ++i)
        if (labels[i] >= 0) node_idx.push_back(static_cast<int>(i));
    const std::size_t n = node_idx.size();
    for (int k : ks)
        if (n <= static_cast<std::size_t>(k))
            throw std::invalid_argument("similarity_search: need more than k labeled nodes");

    std::vector<double> xn(n * d);
    std::vector<int> lab(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double* src = h.data() + node_idx[r] * d;
        double acc = 0;
        for (std::size_t j = 0; j < d; ++j) acc += src[j] * src[j];
        const double inv = acc > 0 ? 1.0 / std::sqrt(acc) : 0.0;
        for (std::size_t j = 0; j < d; ++j) xn[r * d + j] = src[j] * inv;
        lab[r] = labels[node_idx[r]];
    }
    std::vector<double> hits(n * ks.size());
    kernels::cosine_topk_hits(xn.data(), lab.data(), n, d, ks.data(), ks.size(), hits.data());
    std::vector<double> out(ks.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t t = 0; t < ks.size(); ++t) out[t] += hits[r * ks.size() + t];
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

EvalReport evaluate(const Tensor& h, const HeteroGraph& g, std::size_t runs, std::uint64_t seed) {
    EvalReport rep;
    if (!g.has_labels()) throw std::invalid_argument("evaluate: dataset has no labels");
    if (g.has_splits())
        rep.probe = logistic_probe(h, g.labels, g.splits, runs, derive_seed(seed, rngtag::kProbe));
    rep.kmeans = kmeans_eval(h, g.labels, static_cast<std::size_t>(g.num_classes()), runs,
                             derive_seed(seed, rngtag::kKmeans));
    rep.sim_at = similarity_search(h, g.labels, rep.sim_ks);
    return rep;
}

std::string EvalReport::to_json() const {
    json j;
    j["macro_f1"] = {{"mean", probe.macro_f1_mean}, {"std", probe.macro_f1_std}};
    j["micro_f1"] = {{"mean", probe.micro_f1_mean}, {"std", probe.micro_f1_std}};
    j["nmi"] = kmeans.nmi_mean;
    j["ari"] = kmeans.ari_mean;
    for (std::size_t t = 0; t < sim_ks.size(); ++t)
        j["sim@" + std::to_string(sim_ks[t])] = sim_at[t];
    return j.dump(2);
}

}  // namespace gcl
