#include "qlab/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "binary_io.hpp"
#include "qlab/rng.hpp"

namespace qlab {

namespace {

constexpr double kConvergenceShift = 1e-6;
constexpr double kDedupTolerance = 1e-9;

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

// ties toward the lowest row index
std::pair<int, double> nearest_row(const Matrix& rows, std::span<const double> x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const double d = sq_dist(rows.row(r), x);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(r);
        }
    }
    return {best, best_d};
}

std::size_t count_distinct_rows(const Matrix& points) {
    std::vector<std::size_t> order(points.rows());
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](std::size_t a, std::size_t b) {
        const auto ra = points.row(a);
        const auto rb = points.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(order.begin(), order.end(), row_less);
    std::size_t distinct = points.rows() == 0 ? 0 : 1;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (row_less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

void check_no_duplicate_codewords(const Matrix& centroids) {
    for (std::size_t a = 0; a + 1 < centroids.rows(); ++a) {
        for (std::size_t b = a + 1; b < centroids.rows(); ++b) {
            if (sq_dist(centroids.row(a), centroids.row(b)) <=
                kDedupTolerance * kDedupTolerance) {
                throw std::runtime_error("codebook: duplicate codewords after training");
            }
        }
    }
}

}  // namespace

KmeansResult kmeans_detailed(const Matrix& points, int k, int max_iters, std::uint64_t seed) {
    const std::size_t n = points.rows();
    const std::size_t dim = points.cols();
    if (k < 1) throw std::invalid_argument("k: expected >= 1");
    if (n == 0 || dim == 0) throw std::invalid_argument("points: expected non-empty");
    for (double v : points.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("points: non-finite entry");
    }
    if (count_distinct_rows(points) < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("points: expected at least k distinct points");
    }

    Rng rng(seed);
    Matrix centroids(static_cast<std::size_t>(k), dim);

    // k-means++ seeding
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    {
        const std::size_t first = rng.below(n);
        std::copy(points.row(first).begin(), points.row(first).end(),
                  centroids.row(0).begin());
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sq_dist(points.row(i), centroids.row(c - 1));
                d2[i] = std::min(d2[i], d);
                total += d2[i];
            }
            // total > 0 because there are >= k distinct points
            double r = rng.next_double() * total;
            std::size_t pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;  // never re-pick an existing centroid
                pick = i;
                r -= d2[i];
                if (r <= 0.0) break;
            }
            std::copy(points.row(pick).begin(), points.row(pick).end(),
                      centroids.row(c).begin());
        }
    }

    KmeansResult result;
    std::vector<int> labels(n, 0);
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);

    int it = 0;
    for (; it < max_iters; ++it) {
        // assignment
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto [c, d] = nearest_row(centroids, points.row(i));
            labels[i] = c;
            dist[i] = d;
            ++counts[static_cast<std::size_t>(c)];
        }

        // reseed empty clusters to the farthest point from its centroid,
        // never emptying a donor cluster
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
                if (dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            if (far == n) continue;  // no donor; cluster stays where it is
            --counts[static_cast<std::size_t>(labels[far])];
            labels[far] = c;
            dist[far] = 0.0;
            counts[static_cast<std::size_t>(c)] = 1;
        }

        // update
        Matrix next(static_cast<std::size_t>(k), dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = next.row(static_cast<std::size_t>(labels[i]));
            const auto src = points.row(i);
            for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
        }
        double max_shift2 = 0.0;
        for (int c = 0; c < k; ++c) {
            const std::size_t cnt = counts[static_cast<std::size_t>(c)];
            auto row = next.row(static_cast<std::size_t>(c));
            if (cnt == 0) {
                std::copy(centroids.row(static_cast<std::size_t>(c)).begin(),
                          centroids.row(static_cast<std::size_t>(c)).end(), row.begin());
            } else {
                for (std::size_t j = 0; j < dim; ++j) row[j] /= static_cast<double>(cnt);
            }
            max_shift2 =
                std::max(max_shift2, sq_dist(row, centroids.row(static_cast<std::size_t>(c))));
        }
        centroids = std::move(next);

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sse += sq_dist(points.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
        }
        result.sse_history.push_back(sse);

        if (max_shift2 < kConvergenceShift * kConvergenceShift) {
            ++it;
            break;
        }
    }

    check_no_duplicate_codewords(centroids);
    result.codebook = RvqCodebook{std::move(centroids)};
    result.iterations = it;
    return result;
}

RvqCodebook kmeans(const Matrix& points, int k, int max_iters, std::uint64_t seed) {
    return kmeans_detailed(points, k, max_iters, seed).codebook;
}

RvqTrainResult train_rvq_detailed(const Matrix& frames, int num_codebooks, int codebook_size,
                                  int max_iters, std::uint64_t seed) {
    if (num_codebooks < 1) throw std::invalid_argument("num_codebooks: expected >= 1");
    RvqTrainResult result;
    result.spec.latent_dim = static_cast<int>(frames.cols());

    Matrix residuals = frames;
    for (int q = 0; q < num_codebooks; ++q) {
        RvqCodebook cb = kmeans(residuals, codebook_size, max_iters, splitmix_at(seed, q));
        double energy = 0.0;
        for (std::size_t i = 0; i < residuals.rows(); ++i) {
            auto row = residuals.row(i);
            auto [c, d] = nearest_row(cb.codewords, row);
            const auto cw = cb.codewords.row(static_cast<std::size_t>(c));
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] -= cw[j];
                energy += row[j] * row[j];
            }
        }
        result.residual_energy.push_back(energy / static_cast<double>(residuals.rows()));
        result.spec.codebooks.push_back(std::move(cb));
    }
    return result;
}

RvqSpec train_rvq(const Matrix& frames, int num_codebooks, int codebook_size, int max_iters,
                  std::uint64_t seed) {
    return train_rvq_detailed(frames, num_codebooks, codebook_size, max_iters, seed).spec;
}

std::vector<int> rvq_quantize(const RvqSpec& spec, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(spec.latent_dim)) {
        throw std::invalid_argument("x: dimension mismatch, expected " +
                                    std::to_string(spec.latent_dim));
    }
    std::vector<double> residual(x.begin(), x.end());
    std::vector<int> codes;
    codes.reserve(spec.codebooks.size());
    for (const auto& cb : spec.codebooks) {
        auto [c, d] = nearest_row(cb.codewords, residual);
        const auto cw = cb.codewords.row(static_cast<std::size_t>(c));
        for (std::size_t j = 0; j < residual.size(); ++j) residual[j] -= cw[j];
        codes.push_back(c);
    }
    return codes;
}

std::vector<double> rvq_dequantize(const RvqSpec& spec, std::span<const int> codes) {
    if (codes.size() != spec.codebooks.size()) {
        throw std::invalid_argument("codes: expected one code per codebook");
    }
    std::vector<double> out(static_cast<std::size_t>(spec.latent_dim), 0.0);
    for (std::size_t q = 0; q < codes.size(); ++q) {
        const auto& cb = spec.codebooks[q];
        if (codes[q] < 0 || codes[q] >= cb.size()) {
            throw std::out_of_range("codes[" + std::to_string(q) + "]: out of range");
        }
        const auto cw = cb.codewords.row(static_cast<std::size_t>(codes[q]));
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += cw[j];
    }
    return out;
}

void save_rvq(const std::string& path, const RvqSpec& spec) {
    auto os = detail::open_out(path);
    detail::write_magic(os, "RVQ1");
    const int q_count = spec.num_codebooks();
    if (q_count == 0) throw std::invalid_argument("rvq: expected at least one codebook");
    const int k = spec.codebooks.front().size();
    for (const auto& cb : spec.codebooks) {
        if (cb.size() != k || cb.dim() != spec.latent_dim) {
            throw std::invalid_argument("rvq: file format requires uniform codebook shape");
        }
    }
    detail::write_u32(os, static_cast<std::uint32_t>(q_count));
    detail::write_u32(os, static_cast<std::uint32_t>(k));
    detail::write_u32(os, static_cast<std::uint32_t>(spec.latent_dim));
    for (const auto& cb : spec.codebooks) {
        for (double v : cb.codewords.data()) detail::write_f64(os, v);
    }
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

RvqSpec load_rvq(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "RVQ1");
    const std::uint32_t q_count = detail::read_u32(is);
    const std::uint32_t k = detail::read_u32(is);
    const std::uint32_t dim = detail::read_u32(is);
    RvqSpec spec;
    spec.latent_dim = static_cast<int>(dim);
    for (std::uint32_t q = 0; q < q_count; ++q) {
        Matrix m(k, dim);
        for (double& v : m.data()) v = detail::read_f64(is);
        spec.codebooks.push_back(RvqCodebook{std::move(m)});
    }
    return spec;
}

}  // namespace qlab
