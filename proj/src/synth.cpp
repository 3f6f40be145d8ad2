#include "hv/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hv {

SeparationIndex::SeparationIndex(double cell_edge) : cell_edge_(cell_edge) {
    if (!(cell_edge > 0)) throw std::invalid_argument("SeparationIndex: cell_edge must be positive");
}

SeparationIndex::Key SeparationIndex::key_of(const Template& t) const {
    auto coord = [&](int i) {
        const double v = i < t.dim() ? t.coeffs(i) : 0.0;
        return static_cast<std::int64_t>(std::floor(v / cell_edge_));
    };
    return Key{coord(0), coord(1), coord(2)};
}

void SeparationIndex::insert(const Template& t) {
    if (dim_ < 0) dim_ = t.dim();
    if (t.dim() != dim_) throw std::invalid_argument("SeparationIndex: dimension mismatch");
    Bucket& b = buckets_[key_of(t)];
    for (int i = 0; i < kHeadCoords; ++i)
        b.head[static_cast<std::size_t>(i)].push_back(
            i < dim_ ? static_cast<float>(t.coeffs(i)) : 0.0f);
    b.items.push_back(t);
    ++size_;
}

double SeparationIndex::nearest_distance(const Template& t) const {
    if (dim_ >= 0 && t.dim() != dim_) throw std::invalid_argument("SeparationIndex: dimension mismatch");
    double best_sq = std::numeric_limits<double>::infinity();
    const double edge_sq = cell_edge_ * cell_edge_;
    float qf[kHeadCoords];
    for (int i = 0; i < kHeadCoords; ++i)
        qf[i] = i < t.dim() ? static_cast<float>(t.coeffs(i)) : 0.0f;
    const Key k = key_of(t);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
        for (std::int64_t dy = -1; dy <= 1; ++dy)
            for (std::int64_t dz = -1; dz <= 1; ++dz) {
                const auto it = buckets_.find(Key{k.x + dx, k.y + dy, k.z + dz});
                if (it == buckets_.end()) continue;
                const Bucket& bucket = it->second;
                const std::size_t n = bucket.items.size();
                // Candidates at partial squared distance >= the limit can
                // neither beat the best match nor fall below the cell edge,
                // so skipping them keeps every promise above: the minimum is
                // exact whenever it is below the cell edge, and exact
                // outright once the limit is the running best. The float
                // pre-filter keeps an extra 1e-4 relative margin so rounding
                // never prunes a genuine survivor; survivors are re-checked
                // in double precision. The block structure keeps the
                // pre-filter branch-free so it vectorizes.
                double limit = best_sq < edge_sq ? best_sq : edge_sq;
                float limitf = static_cast<float>(limit * 1.0001);
                constexpr std::size_t kBlock = 32;
                float accf[kBlock];
                const float* h0 = bucket.head[0].data();
                const float* h1 = bucket.head[1].data();
                const float* h2 = bucket.head[2].data();
                const float* h3 = bucket.head[3].data();
                for (std::size_t s = 0; s < n; s += kBlock) {
                    const std::size_t m = n - s < kBlock ? n - s : kBlock;
                    for (std::size_t j = 0; j < m; ++j) {
                        const float d0 = qf[0] - h0[s + j];
                        const float d1 = qf[1] - h1[s + j];
                        const float d2 = qf[2] - h2[s + j];
                        const float d3 = qf[3] - h3[s + j];
                        accf[j] = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
                    }
                    for (std::size_t j = 0; j < m; ++j) {
                        if (accf[j] >= limitf) continue;
                        const Vec& c = bucket.items[s + j].coeffs;
                        double acc = 0.0;
                        for (int i = 0; i < t.dim() && acc < limit; ++i) {
                            const double d = t.coeffs(i) - c(i);
                            acc += d * d;
                        }
                        if (acc < limit) {
                            best_sq = acc;
                            limit = best_sq < edge_sq ? best_sq : edge_sq;
                            limitf = static_cast<float>(limit * 1.0001);
                        }
                    }
                }
            }
    return std::sqrt(best_sq);
}

std::vector<Template> SeparationIndex::all() const {
    std::vector<Template> out;
    out.reserve(size_);
    for (const auto& [key, bucket] : buckets_)
        out.insert(out.end(), bucket.items.begin(), bucket.items.end());
    return out;
}

Template sample_template(const FaceSpace& space, RngStream& rng) {
    const int d = space.dim();
    Vec v(d);
    do {
        for (int i = 0; i < d; ++i) v(i) = rng.gaussian();
    } while (v.norm() == 0.0);  // probability-zero draw, re-drawn
    return shell_normalize(v, space);
}

std::pair<std::vector<Template>, GenerationStats> generate_honey(
    const FaceSpace& space, SeparationIndex& index, std::uint64_t count,
    double min_dist, RngStream& rng, const GenerateOptions& opts) {
    if (!(min_dist > 0)) throw std::invalid_argument("generate_honey: min_dist must be positive");
    if (index.cell_edge() < min_dist)
        throw std::invalid_argument("generate_honey: index cell_edge below min_dist");

    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t max_attempts = count * opts.max_attempts_per_face;

    std::vector<Template> accepted;
    accepted.reserve(count);
    GenerationStats stats;
    stats.requested = count;

    const std::uint64_t batch = opts.num_threads > 1 ? 1024 : 64;
    std::vector<Template> candidates(batch);

    std::uint64_t attempt = 0;
    while (accepted.size() < count && attempt < max_attempts) {
        const std::uint64_t n = std::min<std::uint64_t>(batch, max_attempts - attempt);
        // Candidate sampling is the hot loop; acceptance below is serial so
        // the output never depends on thread count.
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(opts.num_threads) if (opts.num_threads > 1)
#endif
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
            RngStream sub = rng.substream(attempt + static_cast<std::uint64_t>(j));
            candidates[static_cast<std::size_t>(j)] = sample_template(space, sub);
        }
        for (std::uint64_t j = 0; j < n && accepted.size() < count; ++j) {
            ++attempt;
            const Template& cand = candidates[j];
            if (index.nearest_distance(cand) >= min_dist) {
                index.insert(cand);
                accepted.push_back(cand);
                ++stats.accepted;
            } else {
                ++stats.rejected;
            }
        }
    }

    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (accepted.size() < count)
        throw std::runtime_error("generate_honey: exhausted attempt budget (min_dist too large for the shell?)");
    return {std::move(accepted), stats};
}

double min_pairwise_distance_serial(const std::vector<Template>& templates) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < templates.size(); ++i)
        for (std::size_t j = i + 1; j < templates.size(); ++j)
            best = std::min(best, template_distance(templates[i], templates[j]));
    return best;
}

double min_pairwise_distance(const std::vector<Template>& templates, int num_threads) {
    if (num_threads <= 1) return min_pairwise_distance_serial(templates);
    double best = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::int64_t>(templates.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 16) num_threads(num_threads) reduction(min : best)
#endif
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j)
            best = std::min(best, template_distance(templates[static_cast<std::size_t>(i)],
                                                    templates[static_cast<std::size_t>(j)]));
    return best;
}

double nearest_distance_brute(const Template& t, const std::vector<Template>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Template& s : set) best = std::min(best, template_distance(t, s));
    return best;
}

ToyCorpus make_toy_corpus(std::uint64_t seed, int n_subjects, int landmarks,
                          int texture_dim, int planted_dim, double noise_scale,
                          const Vec& stds) {
    const int shape_dim = 2 * landmarks;
    if (n_subjects < 2 || landmarks < 1 || texture_dim < 1 || planted_dim < 1)
        throw std::invalid_argument("make_toy_corpus: invalid dimensions");
    if (planted_dim > std::min(shape_dim, texture_dim))
        throw std::invalid_argument("make_toy_corpus: planted_dim exceeds ambient dimensions");
    if (noise_scale < 0) throw std::invalid_argument("make_toy_corpus: negative noise");

    ToyCorpus corpus;
    if (stds.size() == 0) {
        // Geometric ramp matching the magnitude regime of real face corpora.
        corpus.planted_stds = Vec(planted_dim);
        const double hi = 6473.7 / std::sqrt(2.0), lo = 304.17 / std::sqrt(2.0);
        for (int i = 0; i < planted_dim; ++i) {
            const double f = planted_dim == 1 ? 0.0 : static_cast<double>(i) / (planted_dim - 1);
            corpus.planted_stds(i) = hi * std::pow(lo / hi, f);
        }
    } else {
        if (stds.size() != planted_dim || (stds.array() <= 0).any())
            throw std::invalid_argument("make_toy_corpus: bad planted stds");
        corpus.planted_stds = stds;
    }

    RngStream rng(seed, 0x746f79ULL);  // fixed stream tag for corpus generation

    auto random_orthonormal = [](int rows, int cols, RngStream& r) {
        Mat g(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) g(i, j) = r.gaussian();
        Eigen::HouseholderQR<Mat> qr(g);
        Mat q = qr.householderQ() * Mat::Identity(rows, cols);
        // Deterministic sign: largest-magnitude entry of each column positive.
        for (int j = 0; j < cols; ++j) {
            Eigen::Index imax = 0;
            q.col(j).cwiseAbs().maxCoeff(&imax);
            if (q(imax, j) < 0) q.col(j) = -q.col(j);
        }
        return q;
    };

    RngStream basis_rng = rng.substream(0);
    corpus.shape_basis = random_orthonormal(shape_dim, planted_dim, basis_rng);
    corpus.texture_basis = random_orthonormal(texture_dim, planted_dim, basis_rng);

    RngStream mean_rng = rng.substream(1);
    // Mean magnitudes mimic pixel-scale landmark coordinates: large relative
    // to the per-subject deviations, so best-fit registration against the
    // mean is well conditioned (scale near 1).
    corpus.shape_mean = Vec(shape_dim);
    for (int i = 0; i < shape_dim; ++i) corpus.shape_mean(i) = 2.0e4 * mean_rng.gaussian();
    corpus.texture_mean = Vec(texture_dim);
    for (int i = 0; i < texture_dim; ++i) corpus.texture_mean(i) = 2.0e4 * mean_rng.gaussian();

    corpus.subject_coeffs = Mat(n_subjects, planted_dim);
    corpus.shapes.resize(n_subjects);
    corpus.textures.resize(n_subjects);
    for (int s = 0; s < n_subjects; ++s) {
        RngStream subj = rng.substream(2).substream(static_cast<std::uint64_t>(s));
        Vec z(planted_dim);
        for (int i = 0; i < planted_dim; ++i) z(i) = corpus.planted_stds(i) * subj.gaussian();
        corpus.subject_coeffs.row(s) = z;

        Vec shape = corpus.shape_mean + corpus.shape_basis * z;
        Vec texture = corpus.texture_mean + corpus.texture_basis * z;
        if (noise_scale > 0) {
            for (int i = 0; i < shape_dim; ++i) shape(i) += noise_scale * subj.gaussian();
            for (int i = 0; i < texture_dim; ++i) texture(i) += noise_scale * subj.gaussian();
        }
        corpus.shapes[s] = std::move(shape);
        corpus.textures[s] = std::move(texture);
    }
    return corpus;
}

Vec expected_sigma(const ToyCorpus& corpus, double w) {
    std::vector<Vec> latents(static_cast<std::size_t>(corpus.subject_coeffs.rows()));
    for (Eigen::Index i = 0; i < corpus.subject_coeffs.rows(); ++i)
        latents[static_cast<std::size_t>(i)] = corpus.subject_coeffs.row(i);
    PcaResult pca = fit_pca(latents, static_cast<int>(corpus.subject_coeffs.cols()));
    return std::sqrt(w * w + 1.0) * pca.stds;
}

}  // namespace hv
