#ifndef UNITKIT_KMEANS_HPP
#define UNITKIT_KMEANS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "unitkit/error.hpp"
#include "unitkit/features.hpp"
#include "unitkit/rng.hpp"

namespace unitkit {

struct Codebook {
    std::vector<double> centroids;  // k * dim, row-major
    std::size_t k = 0;
    std::size_t dim = 0;
    std::size_t iterations = 0;
    double inertia = 0.0;
    std::uint64_t seed = 0;

    const double* centroid(std::size_t c) const { return centroids.data() + c * dim; }
};

namespace detail {

inline double sq_dist(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

/// Value hash of one point, used to order points independently of input order.
inline std::uint64_t point_hash(const double* p, std::size_t dim) {
    return fnv1a64(p, dim * sizeof(double));
}

}  // namespace detail

/// Nearest-centroid assignment; ties go to the lowest unit id.
inline std::vector<std::uint32_t> kmeans_assign(const FeatureMatrix& data, const Codebook& cb) {
    if (data.cols != cb.dim) {
        std::ostringstream msg;
        msg << "kmeans_assign: dimension mismatch, data has " << data.cols
            << ", codebook has " << cb.dim;
        throw Error(msg.str());
    }
    std::vector<std::uint32_t> ids(data.rows);
    std::vector<double> frame(data.cols);
    for (std::size_t t = 0; t < data.rows; ++t) {
        const float* src = data.row(t);
        for (std::size_t j = 0; j < data.cols; ++j) frame[j] = src[j];
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::size_t c = 0; c < cb.k; ++c) {
            const double d = detail::sq_dist(frame.data(), cb.centroid(c), cb.dim);
            if (d < best) {
                best = d;
                best_c = static_cast<std::uint32_t>(c);
            }
        }
        ids[t] = best_c;
    }
    return ids;
}

/// Lloyd's algorithm with k-means++ seeding. Input-order invariant: points
/// are processed in value-hash order, so permuting the frames changes
/// neither the fit nor (up to fp association) the inertia.
inline Codebook kmeans_fit(const std::vector<const FeatureMatrix*>& inputs,
                           std::size_t k, std::size_t max_iters, double tol,
                           std::uint64_t seed) {
    if (k < 1) throw Error("kmeans_fit: k must be >= 1");
    std::size_t dim = 0, total = 0;
    for (const auto* m : inputs) {
        if (dim == 0) dim = m->cols;
        else if (m->cols != dim) throw Error("kmeans_fit: inconsistent feature dims");
        total += m->rows;
    }
    if (total < k) {
        std::ostringstream msg;
        msg << "kmeans_fit: " << total << " frames < k=" << k;
        throw Error(msg.str());
    }

    // Pool all frames in double precision.
    std::vector<double> pts(total * dim);
    std::size_t off = 0;
    for (const auto* m : inputs) {
        for (std::size_t t = 0; t < m->rows; ++t) {
            const float* src = m->row(t);
            for (std::size_t j = 0; j < dim; ++j) {
                const double v = src[j];
                if (!std::isfinite(v)) throw Error("kmeans_fit: non-finite input");
                pts[off * dim + j] = v;
            }
            ++off;
        }
    }

    // Canonical order by value hash.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> hashes(total);
    for (std::size_t i = 0; i < total; ++i)
        hashes[i] = detail::point_hash(&pts[i * dim], dim);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return hashes[a] != hashes[b] ? hashes[a] < hashes[b] : false;
    });
    std::vector<double> sorted(total * dim);
    for (std::size_t i = 0; i < total; ++i)
        std::memcpy(&sorted[i * dim], &pts[order[i] * dim], dim * sizeof(double));
    pts.swap(sorted);
    sorted.clear();
    sorted.shrink_to_fit();

    auto point = [&](std::size_t i) { return pts.data() + i * dim; };

    Codebook cb;
    cb.k = k;
    cb.dim = dim;
    cb.seed = seed;
    cb.centroids.assign(k * dim, 0.0);

    // k-means++ over the hash-sorted points.
    Rng rng(mix_seed(seed, fnv1a64("kmeans++")));
    std::vector<double> min_d2(total, std::numeric_limits<double>::infinity());
    {
        std::size_t first = rng.next_index(total);
        std::memcpy(&cb.centroids[0], point(first), dim * sizeof(double));
        for (std::size_t c = 1; c < k; ++c) {
            double sum = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                const double d = detail::sq_dist(point(i), cb.centroid(c - 1), dim);
                if (d < min_d2[i]) min_d2[i] = d;
                sum += min_d2[i];
            }
            std::size_t pick = 0;
            if (sum > 0.0) {
                const double target = rng.next_double() * sum;
                double acc = 0.0;
                pick = total - 1;
                for (std::size_t i = 0; i < total; ++i) {
                    acc += min_d2[i];
                    if (acc > target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng.next_index(total);  // all points coincide
            }
            std::memcpy(&cb.centroids[c * dim], point(pick), dim * sizeof(double));
        }
    }

    std::vector<std::uint32_t> assign(total);
    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        double inertia = 0.0;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < total; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = detail::sq_dist(point(i), cb.centroid(c), dim);
                if (d < best) {
                    best = d;
                    best_c = static_cast<std::uint32_t>(c);
                }
            }
            assign[i] = best_c;
            inertia += best;
            counts[best_c]++;
            double* s = &sums[best_c * dim];
            const double* p = point(i);
            for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
        }
        cb.inertia = inertia;
        cb.iterations = iter + 1;

        // Empty clusters grab the point farthest from its own centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < total; ++i) {
                if (counts[assign[i]] <= 1) continue;
                const double d = detail::sq_dist(point(i), cb.centroid(assign[i]), dim);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            if (far_d < 0.0) continue;
            const std::uint32_t old = assign[far_i];
            counts[old]--;
            counts[c] = 1;
            double* so = &sums[old * dim];
            double* sc = &sums[c * dim];
            const double* p = point(far_i);
            for (std::size_t j = 0; j < dim; ++j) {
                so[j] -= p[j];
                sc[j] = p[j];
            }
            assign[far_i] = static_cast<std::uint32_t>(c);
        }

        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < dim; ++j)
                cb.centroids[c * dim + j] = sums[c * dim + j] * inv;
        }

        if (prev_inertia < std::numeric_limits<double>::infinity()) {
            const double rel = prev_inertia > 0.0
                                   ? (prev_inertia - inertia) / prev_inertia
                                   : 0.0;
            if (rel < tol) break;
        }
        prev_inertia = inertia;
    }
    return cb;
}

inline Codebook kmeans_fit(const FeatureMatrix& data, std::size_t k,
                           std::size_t max_iters, double tol, std::uint64_t seed) {
    std::vector<const FeatureMatrix*> v{&data};
    return kmeans_fit(v, k, max_iters, tol, seed);
}

constexpr std::size_t kKmeansDefaultMaxIters = 100;
constexpr double kKmeansDefaultTol = 1e-4;

namespace detail {
constexpr char kKmcbMagic[4] = {'K', 'M', 'C', 'B'};
}

inline void write_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write codebook: " + path);
    out.write(detail::kKmcbMagic, 4);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(cb.k));
    detail::write_u32(out, static_cast<std::uint32_t>(cb.dim));
    std::uint64_t s = cb.seed;
    out.write(reinterpret_cast<const char*>(&s), 8);
    for (double v : cb.centroids) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::write_u32(out, bits);
    }
    if (!out) throw Error("write failed: " + path);
}

inline Codebook read_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open codebook: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kKmcbMagic, 4) != 0)
        throw Error(path + ": bad magic, not a KMCB file");
    std::uint32_t version = detail::read_u32(in);
    if (version != 1) throw Error(path + ": unsupported KMCB version");
    Codebook cb;
    cb.k = detail::read_u32(in);
    cb.dim = detail::read_u32(in);
    in.read(reinterpret_cast<char*>(&cb.seed), 8);
    if (!in) throw Error(path + ": truncated header");
    cb.centroids.resize(cb.k * cb.dim);
    for (double& v : cb.centroids) {
        std::uint32_t bits = detail::read_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw Error(path + ": non-finite centroid");
        v = f;
    }
    return cb;
}

}  // namespace unitkit

#endif
