#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Flat landmark coordinates (2 per landmark) and shape-normalized color
// samples; fixed lengths across a corpus.
using ShapeVector = Vec;
using TextureVector = Vec;

struct PcaResult {
    Vec mean;    // empirical mean of the input vectors
    Mat basis;   // orthonormal columns, ordered by non-increasing variance
    Vec stds;    // per-component standard deviations (n-1 denominator)
};

// PCA by SVD of the centered data matrix. Columns are unit norm, ordered by
// singular value, and sign-fixed so each column's largest-magnitude entry is
// positive (bit-reproducible across runs).
//
// Throws std::invalid_argument on dimension mismatch or bad num_components,
// std::runtime_error if the data has rank below num_components.
PcaResult fit_pca(const std::vector<Vec>& data, int num_components);

// Same decomposition with the centering step skipped (data treated as
// zero-mean); used for the combined model where the stacked coefficient
// vectors are zero-mean by construction.
PcaResult fit_pca_zero_mean(const std::vector<Vec>& data, int num_components);

struct ShapeModel {
    Vec mean;    // x_bar, length 2L
    Mat basis;   // P_s, (2L) x m
    Vec stds;    // m values

    int dim() const { return static_cast<int>(mean.size()); }
    int components() const { return static_cast<int>(basis.cols()); }

    Vec project(const ShapeVector& x) const;          // b_s
    ShapeVector reconstruct(const Vec& coeffs) const; // P_s b_s + x_bar
};

struct TextureModel {
    Vec mean;    // g_bar, length P
    Mat basis;   // P_g, P x t
    Vec stds;    // t values

    int dim() const { return static_cast<int>(mean.size()); }
    int components() const { return static_cast<int>(basis.cols()); }

    Vec project(const TextureVector& g) const;
    TextureVector reconstruct(const Vec& coeffs) const;
};

// A coefficient vector lying on the k*sigma ellipsoid shell.
struct Template {
    Vec coeffs;

    int dim() const { return static_cast<int>(coeffs.size()); }
};

inline double template_distance(const Template& a, const Template& b) {
    return (a.coeffs - b.coeffs).norm();
}

// Fitted combined appearance model: shape and texture sub-models, the
// combined basis Q over stacked [w*b_s; b_g] vectors, the per-dimension
// standard deviations of the combined coefficients, the shape weight w and
// the shell factor k.
struct FaceSpace {
    ShapeModel shape_model;
    TextureModel texture_model;
    Mat combined_basis;   // Q, (m+t) x d
    double shape_weight;  // w
    Vec sigma;            // d values, strictly positive, non-increasing
    double shell_factor;  // k

    int dim() const { return static_cast<int>(combined_basis.cols()); }

    // Row-split views of Q.
    Eigen::Block<const Mat> q_shape() const {
        return combined_basis.topRows(shape_model.components());
    }
    Eigen::Block<const Mat> q_texture() const {
        return combined_basis.bottomRows(texture_model.components());
    }
};

ShapeModel build_shape_model(const std::vector<ShapeVector>& shapes, int m);
TextureModel build_texture_model(const std::vector<TextureVector>& textures, int t);

// Fits the combined model over the training corpus. w <= 0 selects the
// default weight (total texture variance over total shape variance).
FaceSpace build_face_space(const ShapeModel& shape_model,
                           const TextureModel& texture_model,
                           const std::vector<ShapeVector>& shapes,
                           const std::vector<TextureVector>& textures,
                           double w, int d, double k);

// c = Q^T [w P_s^T (x - x_bar); P_g^T (g - g_bar)]
Vec encode(const ShapeVector& x, const TextureVector& g, const FaceSpace& space);

// b_s = (1/w) Q_s c, b_g = Q_g c, then the sub-model reconstructions.
std::pair<ShapeVector, TextureVector> decode(const Vec& c, const FaceSpace& space);

// Projects c onto the shell: u = c/|c|, coeffs_i = k * sigma_i * u_i.
// Throws std::invalid_argument on a zero vector or dimension mismatch.
Template shell_normalize(const Vec& c, const FaceSpace& space);

// Residual of the shell constraint, sum((coeffs_i/(k sigma_i))^2) - 1.
double shell_residual(const Template& t, const FaceSpace& space);

}  // namespace hv
