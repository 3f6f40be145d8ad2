#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hv::detail {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

class ByteWriter {
public:
    void magic(const char (&m)[5]) { buf_.insert(buf_.end(), m, m + 4); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void str(const std::string& s) {
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    void expect_magic(const char (&m)[5], const char* what) {
        if (data_.size() - pos_ < 4 || std::memcmp(data_.data() + pos_, m, 4) != 0)
            throw std::runtime_error(std::string(what) + ": bad magic");
        pos_ += 4;
    }
    std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
    std::uint16_t u16() { std::uint16_t v; raw(&v, 2); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::string str(std::size_t n) {
        check(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void bytes(std::uint8_t* out, std::size_t n) { raw(out, n); }

    bool done() const { return pos_ == data_.size(); }
    void expect_done(const char* what) {
        if (!done()) throw std::runtime_error(std::string(what) + ": trailing bytes");
    }

private:
    void check(std::size_t n) {
        if (data_.size() - pos_ < n) throw std::runtime_error("truncated input");
    }
    void raw(void* p, std::size_t n) {
        check(n);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace hv::detail
