#include "hv/authn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hv {

SimilarityTransform SimilarityTransform::inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.scale * (inv.rotation * translation));
    return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& other) const {
    SimilarityTransform out;
    out.scale = scale * other.scale;
    out.rotation = rotation * other.rotation;
    out.translation = scale * (rotation * other.translation) + translation;
    return out;
}

SimilarityTransform estimate_similarity_transform(const std::vector<Eigen::Vector2d>& ref,
                                                  const std::vector<Eigen::Vector2d>& test) {
    if (ref.size() != test.size()) throw std::invalid_argument("procrustes: point count mismatch");
    if (ref.size() < 2) throw std::invalid_argument("procrustes: need at least 2 point pairs");
    const auto n = static_cast<double>(ref.size());

    Eigen::Vector2d ref_mean = Eigen::Vector2d::Zero(), test_mean = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref_mean += ref[i];
        test_mean += test[i];
    }
    ref_mean /= n;
    test_mean /= n;

    double ref_var = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const Eigen::Vector2d r = ref[i] - ref_mean;
        const Eigen::Vector2d t = test[i] - test_mean;
        ref_var += r.squaredNorm();
        cov += t * r.transpose();
    }
    ref_var /= n;
    cov /= n;
    if (ref_var <= 0) throw std::invalid_argument("procrustes: degenerate (coincident) reference points");

    Eigen::JacobiSVD<Eigen::Matrix2d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
    // Constrain to a proper rotation (det +1).
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) s(1, 1) = -1.0;

    SimilarityTransform tf;
    tf.rotation = svd.matrixU() * s * svd.matrixV().transpose();
    tf.scale = (svd.singularValues().asDiagonal() * s).trace() / ref_var;
    if (!(tf.scale > 0)) throw std::invalid_argument("procrustes: non-positive estimated scale");
    tf.translation = test_mean - tf.scale * (tf.rotation * ref_mean);
    return tf;
}

std::vector<Eigen::Vector2d> shape_points(const ShapeVector& shape) {
    if (shape.size() % 2 != 0) throw std::invalid_argument("shape vector length must be even");
    std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(shape.size() / 2));
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = Eigen::Vector2d(shape(2 * i), shape(2 * i + 1));
    return pts;
}

ShapeVector apply_transform(const SimilarityTransform& tf, const ShapeVector& shape) {
    if (shape.size() % 2 != 0) throw std::invalid_argument("shape vector length must be even");
    ShapeVector out(shape.size());
    for (Eigen::Index i = 0; i < shape.size() / 2; ++i) {
        const Eigen::Vector2d p = tf(Eigen::Vector2d(shape(2 * i), shape(2 * i + 1)));
        out(2 * i) = p.x();
        out(2 * i + 1) = p.y();
    }
    return out;
}

ShapeVector canonical_shape(const FaceSpace& space, const ShapeVector& shape) {
    if (shape.size() != space.shape_model.mean.size())
        throw std::invalid_argument("canonical_shape: dimension mismatch");
    const SimilarityTransform tf = estimate_similarity_transform(
        shape_points(shape), shape_points(space.shape_model.mean));
    return apply_transform(tf, shape);
}

AuthDecision verify(const Vault& vault, const FaceSpace& space, const std::string& username,
                    const ShapeVector& probe_shape, const TextureVector& probe_texture,
                    double threshold) {
    const VaultRecord* rec = vault.find(username);
    if (!rec) throw std::out_of_range("unknown username: " + username);
    if (rec->tmpl.dim() != space.dim()) throw std::invalid_argument("verify: vault/model dimension mismatch");

    const ShapeVector registered = canonical_shape(space, probe_shape);
    const Template probe = shell_normalize(encode(registered, probe_texture, space), space);

    AuthDecision decision;
    decision.threshold = threshold;
    decision.distance = template_distance(probe, rec->tmpl);
    decision.accepted = decision.distance <= threshold;
    return decision;
}

AuthDecision verify_template(const Vault& vault, const std::string& username,
                             const Template& probe, double threshold) {
    const VaultRecord* rec = vault.find(username);
    if (!rec) throw std::out_of_range("unknown username: " + username);
    if (rec->tmpl.dim() != probe.dim())
        throw std::invalid_argument("verify_template: vault/probe dimension mismatch");

    AuthDecision decision;
    decision.threshold = threshold;
    decision.distance = template_distance(probe, rec->tmpl);
    decision.accepted = decision.distance <= threshold;
    return decision;
}

CalibrationResult calibrate_threshold(const FaceSpace& space, double target_far,
                                      std::size_t num_impostor_pairs, RngStream& rng,
                                      double genuine_noise_norm) {
    if (!(target_far > 0) || target_far > 1)
        throw std::invalid_argument("calibrate_threshold: target_far must be in (0, 1]");
    if (num_impostor_pairs == 0 ||
        static_cast<double>(num_impostor_pairs) * target_far < 1.0)
        throw std::invalid_argument("calibrate_threshold: insufficient pairs for the requested quantile");

    CalibrationResult out;
    out.impostor_distances.reserve(num_impostor_pairs);
    for (std::size_t i = 0; i < num_impostor_pairs; ++i) {
        RngStream sub = rng.substream(i);
        const Template stored = sample_template(space, sub);
        Vec probe_coeffs(space.dim());
        for (int j = 0; j < space.dim(); ++j) probe_coeffs(j) = sub.gaussian();
        Template probe = shell_normalize(probe_coeffs, space);
        if (genuine_noise_norm > 0) {
            Vec noise(space.dim());
            for (int j = 0; j < space.dim(); ++j) noise(j) = sub.gaussian();
            noise *= genuine_noise_norm / noise.norm();
            probe = shell_normalize(probe.coeffs + noise, space);
        }
        out.impostor_distances.push_back(template_distance(probe, stored));
    }
    std::sort(out.impostor_distances.begin(), out.impostor_distances.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(target_far * static_cast<double>(num_impostor_pairs))) - 1;
    out.threshold = out.impostor_distances[std::min(idx, num_impostor_pairs - 1)];
    return out;
}

std::pair<ShapeVector, TextureVector> make_genuine_probe(const FaceSpace& space,
                                                         const ShapeVector& shape,
                                                         const TextureVector& texture,
                                                         double noise_norm, RngStream& rng) {
    ShapeVector px = shape;
    TextureVector pg = texture;
    if (noise_norm > 0) {
        Vec noise(space.dim());
        for (int j = 0; j < space.dim(); ++j) noise(j) = rng.gaussian();
        noise *= noise_norm / noise.norm();
        px += space.shape_model.basis * (space.q_shape() * noise) / space.shape_weight;
        pg += space.texture_model.basis * (space.q_texture() * noise);
    }
    return {px, pg};
}

}  // namespace hv
