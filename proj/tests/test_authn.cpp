#include "doctest.h"
#include "hv/authn.hpp"
#include "hv/synth.hpp"

#include <cmath>

using namespace hv;

namespace {

struct Fixture {
    ToyCorpus corpus;
    FaceSpace space;
    Vault vault;

    explicit Fixture(std::uint64_t seed = 3, int subjects = 40, int q = 6, double k = 7.0)
        : corpus(make_toy_corpus(seed, subjects, 10, 24, q, 0.0)) {
        const ShapeModel sm = build_shape_model(corpus.shapes, q);
        const TextureModel tm = build_texture_model(corpus.textures, q);
        space = build_face_space(sm, tm, corpus.shapes, corpus.textures, 1.0, q, k);
        std::vector<Enrollment> entries;
        for (int i = 0; i < subjects / 2; ++i)
            entries.push_back(Enrollment{"user" + std::to_string(i), corpus.shapes[static_cast<std::size_t>(i)],
                                         corpus.textures[static_cast<std::size_t>(i)]});
        vault = create_vault(space, entries);
    }
};

std::vector<Eigen::Vector2d> random_points(int n, RngStream& rng, double scale = 50.0) {
    std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = Eigen::Vector2d(scale * rng.gaussian(), scale * rng.gaussian());
    return pts;
}

TEST_CASE("procrustes: identity and pure translation") {
    RngStream rng(2);
    const auto pts = random_points(8, rng);

    const SimilarityTransform id = estimate_similarity_transform(pts, pts);
    CHECK(id.scale == doctest::Approx(1.0));
    CHECK((id.rotation - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(id.translation.norm() < 1e-10);

    auto shifted = pts;
    for (auto& p : shifted) p += Eigen::Vector2d(5, -3);
    const SimilarityTransform tr = estimate_similarity_transform(pts, shifted);
    CHECK(tr.scale == doctest::Approx(1.0));
    CHECK(tr.translation.x() == doctest::Approx(5.0));
    CHECK(tr.translation.y() == doctest::Approx(-3.0));
}

// Constructive oracle: apply a known (s, R, t), re-estimate, recover.
TEST_CASE("procrustes recovers a planted similarity") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = random_points(10, rng);
        SimilarityTransform planted;
        planted.scale = 0.3 + 2.0 * rng.uniform();
        const double angle = 2.0 * M_PI * rng.uniform();
        planted.rotation << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
        planted.translation = Eigen::Vector2d(10 * rng.gaussian(), 10 * rng.gaussian());

        std::vector<Eigen::Vector2d> mapped;
        for (const auto& p : pts) mapped.push_back(planted(p));

        const SimilarityTransform est = estimate_similarity_transform(pts, mapped);
        CHECK(est.scale == doctest::Approx(planted.scale).epsilon(1e-9));
        CHECK((est.rotation - planted.rotation).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((est.translation - planted.translation).norm() < 1e-9);
        CHECK(est.rotation.determinant() == doctest::Approx(1.0));
        CHECK((est.rotation.transpose() * est.rotation - Eigen::Matrix2d::Identity())
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
    }
}

TEST_CASE("procrustes degenerate inputs") {
    std::vector<Eigen::Vector2d> one{{0, 0}};
    CHECK_THROWS_AS(estimate_similarity_transform(one, one), std::invalid_argument);
    std::vector<Eigen::Vector2d> coincident{{1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS_AS(estimate_similarity_transform(coincident, coincident), std::invalid_argument);
}

TEST_CASE("apply_transform: identity, composition, inverse round trip") {
    RngStream rng(13);
    ShapeVector shape(12);
    for (int i = 0; i < 12; ++i) shape(i) = 30 * rng.gaussian();

    CHECK((apply_transform(SimilarityTransform{}, shape) - shape).norm() == 0.0);

    auto random_tf = [&rng]() {
        SimilarityTransform tf;
        tf.scale = 0.5 + rng.uniform();
        const double a = 2.0 * M_PI * rng.uniform();
        tf.rotation << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        tf.translation = Eigen::Vector2d(rng.gaussian(), rng.gaussian());
        return tf;
    };
    const SimilarityTransform t1 = random_tf(), t2 = random_tf();
    const ShapeVector chained = apply_transform(t2, apply_transform(t1, shape));
    const ShapeVector composed = apply_transform(t2.compose(t1), shape);
    CHECK((chained - composed).norm() < 1e-9);

    const ShapeVector back = apply_transform(t1.inverse(), apply_transform(t1, shape));
    CHECK((back - shape).norm() < 1e-9);
}

TEST_CASE("canonical registration is orbit-invariant and idempotent") {
    const Fixture f;
    RngStream rng(41);
    const ShapeVector canon = canonical_shape(f.space, f.corpus.shapes[4]);
    CHECK((canonical_shape(f.space, canon) - canon).norm() < 1e-6);
    for (int trial = 0; trial < 5; ++trial) {
        SimilarityTransform tf;
        tf.scale = 0.5 + rng.uniform();
        const double a = 2.0 * M_PI * rng.uniform();
        tf.rotation << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        tf.translation = Eigen::Vector2d(300 * rng.gaussian(), 300 * rng.gaussian());
        const ShapeVector moved = apply_transform(tf, f.corpus.shapes[4]);
        CHECK((canonical_shape(f.space, moved) - canon).norm() < 1e-6);
    }
}

TEST_CASE("verify_template compares credentials directly") {
    const Fixture f;
    const Template& stored = f.vault.find("user0")->tmpl;
    const AuthDecision d = verify_template(f.vault, "user0", stored, 1.0);
    CHECK(d.accepted);
    CHECK(d.distance == 0.0);
    const AuthDecision other = verify_template(f.vault, "user1", stored, 1.0);
    CHECK(!other.accepted);
    CHECK_THROWS_AS(verify_template(f.vault, "ghost", stored, 1.0), std::out_of_range);
}

TEST_CASE("verify accepts the enrollment probe at distance ~0") {
    const Fixture f;
    for (int i = 0; i < 5; ++i) {
        const auto u = "user" + std::to_string(i);
        const AuthDecision d = verify(f.vault, f.space, u, f.corpus.shapes[static_cast<std::size_t>(i)],
                                      f.corpus.textures[static_cast<std::size_t>(i)], 100.0);
        CHECK(d.accepted);
        CHECK(d.distance < 1e-9);
    }
}

TEST_CASE("verify rejects other identities and unknown usernames") {
    const Fixture f;
    RngStream rng(55);
    const CalibrationResult cal = calibrate_threshold(f.space, 0.01, 20000, rng);
    const AuthDecision d = verify(f.vault, f.space, "user0", f.corpus.shapes[1],
                                  f.corpus.textures[1], cal.threshold);
    CHECK(!d.accepted);
    CHECK(d.distance > cal.threshold);

    CHECK_THROWS_AS(verify(f.vault, f.space, "ghost", f.corpus.shapes[0], f.corpus.textures[0], 100.0),
                    std::out_of_range);
}

// Arithmetic oracle: a probe displaced by a small coefficient perturbation
// lands at a distance close to the perturbation norm.
TEST_CASE("verify distance tracks small coefficient perturbations") {
    // Shell factor near sqrt(dim) keeps the normalization map's local
    // stretch of order one, so the oracle bound stays tight.
    const Fixture f(3, 40, 6, std::sqrt(6.0));
    RngStream rng(17);
    const double scale = f.space.shell_factor * f.space.sigma.minCoeff();
    const double norm = 0.02 * scale;
    const auto [shape, texture] =
        make_genuine_probe(f.space, f.corpus.shapes[0], f.corpus.textures[0], norm, rng);
    const AuthDecision d = verify(f.vault, f.space, "user0", shape, texture, 10.0 * norm);
    CHECK(d.accepted);
    CHECK(d.distance > 0.0);
    CHECK(d.distance < 4.0 * norm);
}

TEST_CASE("verify distance is invariant under probe-frame similarity transforms") {
    const Fixture f;
    RngStream rng(23);
    const AuthDecision base = verify(f.vault, f.space, "user2", f.corpus.shapes[2],
                                     f.corpus.textures[2], 100.0);
    for (int trial = 0; trial < 10; ++trial) {
        SimilarityTransform tf;
        tf.scale = 0.5 + rng.uniform();
        const double a = 2.0 * M_PI * rng.uniform();
        tf.rotation << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        tf.translation = Eigen::Vector2d(100 * rng.gaussian(), 100 * rng.gaussian());
        const ShapeVector moved = apply_transform(tf, f.corpus.shapes[2]);
        const AuthDecision d = verify(f.vault, f.space, "user2", moved, f.corpus.textures[2], 100.0);
        CHECK(std::abs(d.distance - base.distance) < 1e-6);
    }
}

TEST_CASE("distance grows monotonically with perturbation norm") {
    const Fixture f;
    RngStream rng(29);
    Vec direction(f.space.dim());
    for (int i = 0; i < f.space.dim(); ++i) direction(i) = rng.gaussian();
    direction.normalize();
    const ShapeVector dx =
        f.space.shape_model.basis * (f.space.q_shape() * direction) / f.space.shape_weight;
    const TextureVector dg = f.space.texture_model.basis * (f.space.q_texture() * direction);

    double prev = 0.0;
    const double unit = 1e-3 * f.space.shell_factor * f.space.sigma.minCoeff();
    for (int step = 1; step <= 8; ++step) {
        const ShapeVector shape = f.corpus.shapes[1] + step * unit * dx;
        const TextureVector texture = f.corpus.textures[1] + step * unit * dg;
        const AuthDecision d = verify(f.vault, f.space, "user1", shape, texture, 1e18);
        CHECK(d.distance >= prev - 1e-9 * (1.0 + prev));
        prev = d.distance;
    }
}

TEST_CASE("calibrate_threshold: degenerate quantile, determinism, bounds") {
    const Fixture f;
    RngStream rng(31);
    const CalibrationResult max_cal = calibrate_threshold(f.space, 1.0, 500, rng);
    CHECK(max_cal.threshold == max_cal.impostor_distances.back());

    RngStream a(33), b(33);
    const CalibrationResult ca = calibrate_threshold(f.space, 0.01, 5000, a);
    const CalibrationResult cb = calibrate_threshold(f.space, 0.01, 5000, b);
    CHECK(ca.threshold == cb.threshold);

    CHECK_THROWS_AS(calibrate_threshold(f.space, 0.0001, 100, rng), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_threshold(f.space, 0.0, 100, rng), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_threshold(f.space, 1.5, 100, rng), std::invalid_argument);
}

}  // namespace
