#include "hv/model_io.hpp"

#include <fstream>

#include "hv/detail/bytes.hpp"

namespace hv {

namespace {

void write_vec(detail::ByteWriter& w, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
}

// Row-major, matching the on-disk layout.
void write_mat(detail::ByteWriter& w, const Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

Vec read_vec(detail::ByteReader& r, Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = r.f64();
    return v;
}

Mat read_mat(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
    return m;
}

constexpr std::uint32_t kModelVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_model(const FaceSpace& space) {
    detail::ByteWriter w;
    w.magic("HFM1");
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(space.shape_model.dim()));
    w.u32(static_cast<std::uint32_t>(space.texture_model.dim()));
    w.u32(static_cast<std::uint32_t>(space.shape_model.components()));
    w.u32(static_cast<std::uint32_t>(space.texture_model.components()));
    w.u32(static_cast<std::uint32_t>(space.dim()));
    w.f64(space.shape_weight);
    w.f64(space.shell_factor);
    write_vec(w, space.shape_model.mean);
    write_mat(w, space.shape_model.basis);
    write_vec(w, space.shape_model.stds);
    write_vec(w, space.texture_model.mean);
    write_mat(w, space.texture_model.basis);
    write_vec(w, space.texture_model.stds);
    write_mat(w, space.combined_basis);
    write_vec(w, space.sigma);
    return w.take();
}

FaceSpace deserialize_model(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("HFM1", "model");
    const std::uint32_t version = r.u32();
    if (version != kModelVersion) throw std::runtime_error("model: unsupported version");
    const auto l2 = static_cast<Eigen::Index>(r.u32());
    const auto p = static_cast<Eigen::Index>(r.u32());
    const auto m = static_cast<Eigen::Index>(r.u32());
    const auto t = static_cast<Eigen::Index>(r.u32());
    const auto d = static_cast<Eigen::Index>(r.u32());
    if (l2 == 0 || p == 0 || m == 0 || t == 0 || d == 0 || d > m + t)
        throw std::runtime_error("model: invalid dimensions");

    FaceSpace space;
    space.shape_weight = r.f64();
    space.shell_factor = r.f64();
    space.shape_model.mean = read_vec(r, l2);
    space.shape_model.basis = read_mat(r, l2, m);
    space.shape_model.stds = read_vec(r, m);
    space.texture_model.mean = read_vec(r, p);
    space.texture_model.basis = read_mat(r, p, t);
    space.texture_model.stds = read_vec(r, t);
    space.combined_basis = read_mat(r, m + t, d);
    space.sigma = read_vec(r, d);
    r.expect_done("model");

    if (space.shape_weight <= 0 || space.shell_factor <= 0)
        throw std::runtime_error("model: non-positive scalar");
    if ((space.sigma.array() <= 0).any())
        throw std::runtime_error("model: non-positive sigma");
    return space;
}

void save_model(const FaceSpace& space, const std::string& path) {
    const auto bytes = serialize_model(space);
    write_file_bytes(path, bytes);
}

FaceSpace load_model(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize_model(bytes);
}

std::array<std::uint8_t, 16> digest16(std::span<const std::uint8_t> bytes) {
    std::uint64_t h1 = 0xcbf29ce484222325ULL;
    std::uint64_t h2 = 0x84222325cbf29ce4ULL;
    for (std::uint8_t b : bytes) {
        h1 = (h1 ^ b) * 0x100000001b3ULL;
        h2 = (h2 ^ (b + 0x9e)) * 0x100000001b3ULL;
    }
    std::array<std::uint8_t, 16> out{};
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<std::uint8_t>(h1 >> (8 * i));
        out[8 + i] = static_cast<std::uint8_t>(h2 >> (8 * i));
    }
    return out;
}

std::array<std::uint8_t, 16> model_digest(const FaceSpace& space) {
    const auto bytes = serialize_model(space);
    return digest16(bytes);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hv
