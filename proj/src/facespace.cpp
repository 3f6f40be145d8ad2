#include "hv/facespace.hpp"

#include <cmath>

namespace hv {

namespace {

// SVD of the (optionally centered) data matrix; shared by both entry points.
PcaResult pca_impl(const std::vector<Vec>& data, int num_components, bool center) {
    if (data.size() < 2) throw std::invalid_argument("fit_pca: need at least 2 vectors");
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index dim = data[0].size();
    for (const auto& v : data) {
        if (v.size() != dim) throw std::invalid_argument("fit_pca: inconsistent vector lengths");
        if (!v.allFinite()) throw std::invalid_argument("fit_pca: non-finite entry");
    }
    if (num_components < 1) throw std::invalid_argument("fit_pca: num_components must be positive");
    if (num_components > std::min<Eigen::Index>(dim, n - 1))
        throw std::invalid_argument("fit_pca: num_components too large for corpus");

    Vec mean = Vec::Zero(dim);
    if (center) {
        for (const auto& v : data) mean += v;
        mean /= static_cast<double>(n);
    }

    Mat centered(dim, n);
    for (Eigen::Index j = 0; j < n; ++j) centered.col(j) = data[j] - mean;

    Eigen::BDCSVD<Mat> svd(centered, Eigen::ComputeThinU);
    const Vec& sv = svd.singularValues();

    // Rank check: a requested component with (near-)zero variance is an error,
    // not silent truncation.
    const double tol = 1e-12 * std::max(1.0, sv(0));
    if (sv(num_components - 1) <= tol)
        throw std::runtime_error("fit_pca: rank deficiency below num_components");

    PcaResult out;
    out.mean = std::move(mean);
    out.basis = svd.matrixU().leftCols(num_components);
    out.stds = sv.head(num_components) / std::sqrt(static_cast<double>(n - 1));

    // Sign convention: largest-magnitude entry of each column positive.
    for (Eigen::Index j = 0; j < out.basis.cols(); ++j) {
        Eigen::Index imax = 0;
        out.basis.col(j).cwiseAbs().maxCoeff(&imax);
        if (out.basis(imax, j) < 0) out.basis.col(j) = -out.basis.col(j);
    }
    return out;
}

}  // namespace

PcaResult fit_pca(const std::vector<Vec>& data, int num_components) {
    return pca_impl(data, num_components, true);
}

PcaResult fit_pca_zero_mean(const std::vector<Vec>& data, int num_components) {
    return pca_impl(data, num_components, false);
}

Vec ShapeModel::project(const ShapeVector& x) const {
    if (x.size() != mean.size()) throw std::invalid_argument("shape model: dimension mismatch");
    return basis.transpose() * (x - mean);
}

ShapeVector ShapeModel::reconstruct(const Vec& coeffs) const {
    if (coeffs.size() != basis.cols()) throw std::invalid_argument("shape model: coefficient length mismatch");
    return basis * coeffs + mean;
}

Vec TextureModel::project(const TextureVector& g) const {
    if (g.size() != mean.size()) throw std::invalid_argument("texture model: dimension mismatch");
    return basis.transpose() * (g - mean);
}

TextureVector TextureModel::reconstruct(const Vec& coeffs) const {
    if (coeffs.size() != basis.cols()) throw std::invalid_argument("texture model: coefficient length mismatch");
    return basis * coeffs + mean;
}

ShapeModel build_shape_model(const std::vector<ShapeVector>& shapes, int m) {
    PcaResult pca = fit_pca(shapes, m);
    return ShapeModel{std::move(pca.mean), std::move(pca.basis), std::move(pca.stds)};
}

TextureModel build_texture_model(const std::vector<TextureVector>& textures, int t) {
    PcaResult pca = fit_pca(textures, t);
    return TextureModel{std::move(pca.mean), std::move(pca.basis), std::move(pca.stds)};
}

FaceSpace build_face_space(const ShapeModel& shape_model,
                           const TextureModel& texture_model,
                           const std::vector<ShapeVector>& shapes,
                           const std::vector<TextureVector>& textures,
                           double w, int d, double k) {
    if (shapes.size() != textures.size() || shapes.empty())
        throw std::invalid_argument("build_face_space: mismatched corpus");
    const int m = shape_model.components();
    const int t = texture_model.components();
    if (d < 1 || d > m + t) throw std::invalid_argument("build_face_space: d out of range");
    if (k <= 0) throw std::invalid_argument("build_face_space: shell factor must be positive");

    if (w <= 0) {
        // Default weight: total texture variance over total shape variance.
        const double shape_var = shape_model.stds.squaredNorm();
        const double tex_var = texture_model.stds.squaredNorm();
        if (shape_var <= 0) throw std::runtime_error("build_face_space: degenerate shape model");
        w = tex_var / shape_var;
    }

    // Stacked [w b_s; b_g]; exactly zero-mean by construction (projections of
    // centered data), so no second centering step.
    std::vector<Vec> stacked(shapes.size());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Vec y(m + t);
        y.head(m) = w * shape_model.project(shapes[i]);
        y.tail(t) = texture_model.project(textures[i]);
        stacked[i] = std::move(y);
    }

    PcaResult pca = fit_pca_zero_mean(stacked, d);

    FaceSpace space;
    space.shape_model = shape_model;
    space.texture_model = texture_model;
    space.combined_basis = std::move(pca.basis);
    space.shape_weight = w;
    space.sigma = std::move(pca.stds);
    space.shell_factor = k;
    return space;
}

Vec encode(const ShapeVector& x, const TextureVector& g, const FaceSpace& space) {
    const int m = space.shape_model.components();
    const int t = space.texture_model.components();
    Vec y(m + t);
    y.head(m) = space.shape_weight * space.shape_model.project(x);
    y.tail(t) = space.texture_model.project(g);
    return space.combined_basis.transpose() * y;
}

std::pair<ShapeVector, TextureVector> decode(const Vec& c, const FaceSpace& space) {
    if (c.size() != space.dim()) throw std::invalid_argument("decode: dimension mismatch");
    const Vec b_s = (space.q_shape() * c) / space.shape_weight;
    const Vec b_g = space.q_texture() * c;
    return {space.shape_model.reconstruct(b_s), space.texture_model.reconstruct(b_g)};
}

Template shell_normalize(const Vec& c, const FaceSpace& space) {
    if (c.size() != space.dim()) throw std::invalid_argument("shell_normalize: dimension mismatch");
    const double norm = c.norm();
    if (norm == 0.0) throw std::invalid_argument("shell_normalize: zero vector");
    Template t;
    t.coeffs = (space.shell_factor * space.sigma.array() * (c / norm).array()).matrix();
    return t;
}

double shell_residual(const Template& t, const FaceSpace& space) {
    if (t.dim() != space.dim()) throw std::invalid_argument("shell_residual: dimension mismatch");
    const Vec u = t.coeffs.array() / (space.shell_factor * space.sigma.array());
    return u.squaredNorm() - 1.0;
}

}  // namespace hv
