#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hv/facespace.hpp"
#include "hv/rng.hpp"

namespace hv {

// Grid index over the first three coefficients supporting the minimum-
// separation rejection loop. Distance in a coordinate subspace lower-bounds
// full-space distance, so scanning the 3^3 neighboring cells finds every
// stored template within cell_edge of the query; anything outside them is
// farther than cell_edge in full space as well.
class SeparationIndex {
public:
    explicit SeparationIndex(double cell_edge);

    void insert(const Template& t);

    // Exact minimum distance to the stored templates in the neighboring
    // cells; +infinity when none are there. Guarantee: the result is below
    // cell_edge iff the true global minimum is, and equal to it in that case.
    double nearest_distance(const Template& t) const;

    double cell_edge() const { return cell_edge_; }
    std::size_t size() const { return size_; }

    std::vector<Template> all() const;

private:
    struct Key {
        std::int64_t x, y, z;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (std::int64_t v : {k.x, k.y, k.z}) {
                h ^= static_cast<std::uint64_t>(v);
                h *= 0x100000001b3ULL;
            }
            return static_cast<std::size_t>(h);
        }
    };

    // Per-bucket storage keeps the leading coordinates of every template in
    // one contiguous single-precision array so the scan streams through
    // memory; a candidate whose partial squared distance over those
    // coordinates already exceeds the pruning limit (with a safety margin
    // covering the float rounding) never touches its full coefficient
    // vector, and every surviving candidate is re-checked in full double
    // precision, so results stay exact.
    static constexpr int kHeadCoords = 4;
    struct Bucket {
        std::vector<Template> items;
        // One array per head coordinate (structure-of-arrays) so the filter
        // loop vectorizes; entries beyond the template dimension are zero.
        std::array<std::vector<float>, kHeadCoords> head;
    };

    Key key_of(const Template& t) const;

    double cell_edge_;
    int dim_ = -1;  // fixed by first insert
    std::size_t size_ = 0;
    std::unordered_map<Key, Bucket, KeyHash> buckets_;
};

struct GenerationStats {
    std::uint64_t requested = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    double wall_seconds = 0.0;
};

struct GenerateOptions {
    std::uint64_t max_attempts_per_face = 1000;
    int num_threads = 1;  // >1 samples candidate batches in parallel
};

// One draw from the standard d-dimensional Gaussian, shell-normalized.
Template sample_template(const FaceSpace& space, RngStream& rng);

// Rejection-samples `count` templates whose nearest distance to everything
// already in the index stays >= min_dist, inserting accepted ones as it
// goes. Attempt i always draws from rng.substream(i), so the multi-threaded
// path (speculative candidate sampling, serial acceptance scan) produces
// bit-identical output to the serial one.
//
// Throws std::runtime_error on exhaustion: fewer than count acceptances
// within count * max_attempts_per_face attempts.
std::pair<std::vector<Template>, GenerationStats> generate_honey(
    const FaceSpace& space, SeparationIndex& index, std::uint64_t count,
    double min_dist, RngStream& rng, const GenerateOptions& opts = {});

// Brute-force minimum over all unordered pairs; +infinity for < 2 templates.
// The serial variant is the reference implementation for the OpenMP one.
double min_pairwise_distance_serial(const std::vector<Template>& templates);
double min_pairwise_distance(const std::vector<Template>& templates, int num_threads);

// Brute-force nearest distance from t to a set (test oracle for the index).
double nearest_distance_brute(const Template& t, const std::vector<Template>& set);

// Synthetic ground-truth corpus standing in for the out-of-scope image
// pipeline: subject coefficients from a planted diagonal Gaussian, lifted
// through random orthonormal shape/texture bases around random means, plus
// isotropic noise.
struct ToyCorpus {
    std::vector<ShapeVector> shapes;
    std::vector<TextureVector> textures;
    Vec planted_stds;    // length planted_dim
    Mat subject_coeffs;  // n x planted_dim latent draws
    Vec shape_mean;
    Vec texture_mean;
    Mat shape_basis;    // 2L x planted_dim, orthonormal columns
    Mat texture_basis;  // P x planted_dim, orthonormal columns
};

// stds: per-dimension planted standard deviations; empty selects a default
// geometric ramp spanning the magnitudes reported for real face corpora
// (largest combined-model std ~6.5e3, smallest ~3e2).
ToyCorpus make_toy_corpus(std::uint64_t seed, int n_subjects, int landmarks,
                          int texture_dim, int planted_dim, double noise_scale,
                          const Vec& stds = Vec());

// The planted stds expressed in fitted-model units: with orthonormal lifts
// and shape weight w, the combined-model sigma of a noiseless corpus is
// sqrt(w^2 + 1) times the latent sample std, sorted non-increasing.
Vec expected_sigma(const ToyCorpus& corpus, double w);

}  // namespace hv
