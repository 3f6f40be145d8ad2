#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hv/facespace.hpp"
#include "hv/rng.hpp"
#include "hv/vault.hpp"

namespace hv {

// 2-D similarity: p -> scale * rotation * p + translation, det(rotation) = +1.
struct SimilarityTransform {
    double scale = 1.0;
    Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();

    Eigen::Vector2d operator()(const Eigen::Vector2d& p) const {
        return scale * (rotation * p) + translation;
    }
    SimilarityTransform inverse() const;
    // this after other: (this ∘ other)(p) = (*this)(other(p))
    SimilarityTransform compose(const SimilarityTransform& other) const;
};

// Least-squares similarity (Procrustes) minimizing
// sum |s R ref_i + t - test_i|^2. Throws on < 2 points, length mismatch, or
// a degenerate (all-coincident) reference set.
SimilarityTransform estimate_similarity_transform(const std::vector<Eigen::Vector2d>& ref,
                                                  const std::vector<Eigen::Vector2d>& test);

// Maps every landmark of a flat (x0,y0,x1,y1,...) shape vector.
ShapeVector apply_transform(const SimilarityTransform& tf, const ShapeVector& shape);

std::vector<Eigen::Vector2d> shape_points(const ShapeVector& shape);

// Canonical registration: the best-fit similarity mapping the landmarks onto
// the model's mean shape, applied to the shape itself. The result depends
// only on the similarity orbit of the input (any rigidly transformed copy of
// a shape registers to the same canonical shape, exactly) and the map is
// idempotent. Enrollment and verification both register through it, so a
// probe identical to the enrollment data reproduces the stored coefficients
// bit for bit regardless of the frame it arrives in.
ShapeVector canonical_shape(const FaceSpace& space, const ShapeVector& shape);

struct AuthDecision {
    bool accepted = false;
    double distance = 0.0;
    double threshold = 0.0;
};

// One-to-one verification over the image pipeline: register the probe
// landmarks into the canonical frame, re-encode with the probe texture,
// shell-normalize, and compare the L2 distance to the stored template.
// The probe texture is taken as already expressed in the registered frame.
// Throws std::out_of_range for an unknown username.
AuthDecision verify(const Vault& vault, const FaceSpace& space, const std::string& username,
                    const ShapeVector& probe_shape, const TextureVector& probe_texture,
                    double threshold);

// Credential-level verification: the probe is a raw coefficient vector (a
// replayed record, or a guess) compared directly against the stored
// template. This is the adversarial interface: whoever holds a record can
// authenticate with it, which is what the honeychecker is there to catch.
AuthDecision verify_template(const Vault& vault, const std::string& username,
                             const Template& probe, double threshold);

struct CalibrationResult {
    double threshold = 0.0;
    std::vector<double> impostor_distances;  // sorted ascending (the ROC sample)
};

// Simulates impostor pairs (independent shell samples, optional isotropic
// coefficient noise on the probe side) and returns the target_far empirical
// quantile of their distances. target_far in (0, 1]; 1 gives the maximum
// observed distance. Throws if num_pairs is too small for the quantile.
CalibrationResult calibrate_threshold(const FaceSpace& space, double target_far,
                                      std::size_t num_impostor_pairs, RngStream& rng,
                                      double genuine_noise_norm = 0.0);

// Genuine probe model used where real re-acquisitions are unavailable: the
// enrollment (shape, texture) pair displaced by isotropic coefficient-space
// noise of the given norm, mapped through the linear decode maps, so the
// probe exercises the full verify pipeline.
std::pair<ShapeVector, TextureVector> make_genuine_probe(const FaceSpace& space,
                                                         const ShapeVector& shape,
                                                         const TextureVector& texture,
                                                         double noise_norm, RngStream& rng);

}  // namespace hv
