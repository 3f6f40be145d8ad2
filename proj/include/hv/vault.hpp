#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hv/facespace.hpp"
#include "hv/rng.hpp"
#include "hv/synth.hpp"

namespace hv {

struct VaultRecord {
    std::string username;  // UTF-8, non-empty, <= 255 bytes, unique in a vault
    Template tmpl;
};

// The biometric "password file". Records are kept sorted by username so the
// serialized ordering is a function of content alone; nothing in a record
// marks it as real or honey.
struct Vault {
    std::array<std::uint8_t, 16> space_id{};
    int dim = 0;
    std::vector<VaultRecord> records;  // sorted by username

    const VaultRecord* find(const std::string& username) const;
    std::size_t size() const { return records.size(); }
};

struct Enrollment {
    std::string username;
    ShapeVector shape;
    TextureVector texture;
};

// Encodes and shell-normalizes each entry into a record; sorts by username.
// Throws on duplicate or invalid usernames.
Vault create_vault(const FaceSpace& space, const std::vector<Enrollment>& entries);

// Name corpus for fabricating convention-conforming usernames (first letter
// of the given name followed by the family name).
struct NameCorpus {
    std::vector<std::string> given;
    std::vector<std::string> family;
};

const NameCorpus& default_name_corpus();

// Lowercase username from a name pair; non-letters dropped.
std::string make_username(const std::string& given, const std::string& family);

// Deterministic under the seeded stream; collisions (including against
// `taken`) get the smallest unused decimal suffix.
std::vector<std::string> fabricate_usernames(std::size_t count, const NameCorpus& corpus,
                                             RngStream& rng,
                                             const std::vector<std::string>& taken = {});

// Adds honey records until target_count, enforcing min_dist separation
// against every existing and previously added template. Returns a new vault.
Vault inflate(const Vault& vault, const FaceSpace& space, std::size_t target_count,
              double min_dist, RngStream& rng,
              const NameCorpus& names = default_name_corpus(),
              const GenerateOptions& opts = {}, GenerationStats* stats_out = nullptr);

// "HFV1" file: magic, u32 version = 1, 16-byte model digest, u32 d,
// u64 record count, then per record u16 username length, username bytes,
// d little-endian 64-bit floats. Stored raw (no compression).
std::vector<std::uint8_t> serialize_vault(const Vault& vault);
Vault deserialize_vault(std::span<const std::uint8_t> bytes);

void save_vault(const Vault& vault, const std::string& path);
Vault load_vault(const std::string& path);

}  // namespace hv
