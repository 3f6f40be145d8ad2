#include "hv/vault.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "hv/authn.hpp"
#include "hv/detail/bytes.hpp"
#include "hv/model_io.hpp"

namespace hv {

namespace {

bool record_less(const VaultRecord& a, const VaultRecord& b) {
    return a.username < b.username;
}

void validate_username(const std::string& u) {
    if (u.empty()) throw std::invalid_argument("username must be non-empty");
    if (u.size() > 255) throw std::invalid_argument("username exceeds 255 bytes");
}

constexpr std::uint32_t kVaultVersion = 1;

}  // namespace

const VaultRecord* Vault::find(const std::string& username) const {
    const auto it = std::lower_bound(records.begin(), records.end(), username,
                                     [](const VaultRecord& r, const std::string& u) {
                                         return r.username < u;
                                     });
    if (it == records.end() || it->username != username) return nullptr;
    return &*it;
}

Vault create_vault(const FaceSpace& space, const std::vector<Enrollment>& entries) {
    Vault vault;
    vault.space_id = model_digest(space);
    vault.dim = space.dim();
    vault.records.reserve(entries.size());
    std::set<std::string> seen;
    for (const Enrollment& e : entries) {
        validate_username(e.username);
        if (!seen.insert(e.username).second)
            throw std::invalid_argument("duplicate username: " + e.username);
        VaultRecord rec;
        rec.username = e.username;
        rec.tmpl = shell_normalize(
            encode(canonical_shape(space, e.shape), e.texture, space), space);
        vault.records.push_back(std::move(rec));
    }
    std::sort(vault.records.begin(), vault.records.end(), record_less);
    return vault;
}

const NameCorpus& default_name_corpus() {
    static const NameCorpus corpus{
        {"james", "mary",  "john",   "patricia", "robert",  "jennifer", "michael",
         "linda", "david", "elizabeth", "william", "barbara", "richard", "susan",
         "joseph", "jessica", "thomas", "sarah", "charles", "karen", "daniel",
         "nancy", "matthew", "lisa", "anthony", "betty", "mark", "margaret",
         "donald", "sandra", "steven", "ashley", "paul", "kimberly", "andrew",
         "emily", "joshua", "donna", "kenneth", "michelle", "kevin", "carol",
         "brian", "amanda", "george", "dorothy", "edward", "melissa", "ronald",
         "deborah"},
        {"smith",   "johnson",  "williams", "brown",   "jones",    "garcia",
         "miller",  "davis",    "rodriguez", "martinez", "hernandez", "lopez",
         "gonzalez", "wilson",  "anderson", "thomas",  "taylor",   "moore",
         "jackson", "martin",   "lee",      "perez",   "thompson", "white",
         "harris",  "sanchez",  "clark",    "ramirez", "lewis",    "robinson",
         "walker",  "young",    "allen",    "king",    "wright",   "scott",
         "torres",  "nguyen",   "hill",     "flores",  "green",    "adams",
         "nelson",  "baker",    "hall",     "rivera",  "campbell", "mitchell",
         "carter",  "roberts",  "gomez",    "phillips", "evans",   "turner",
         "diaz",    "parker",   "cruz",     "edwards", "collins",  "reyes",
         "stewart", "morris",   "morales",  "murphy",  "cook",     "rogers"}};
    return corpus;
}

std::string make_username(const std::string& given, const std::string& family) {
    std::string out;
    auto push_letters = [&out](const std::string& s, std::size_t limit) {
        std::size_t taken = 0;
        for (char c : s) {
            if (taken == limit) break;
            if (std::isalpha(static_cast<unsigned char>(c))) {
                out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                ++taken;
            }
        }
    };
    push_letters(given, 1);
    push_letters(family, std::string::npos);
    if (out.size() < 2) throw std::invalid_argument("name pair yields no usable username");
    return out;
}

std::vector<std::string> fabricate_usernames(std::size_t count, const NameCorpus& corpus,
                                             RngStream& rng,
                                             const std::vector<std::string>& taken) {
    if (corpus.given.empty() || corpus.family.empty())
        throw std::invalid_argument("fabricate_usernames: empty name corpus");
    std::set<std::string> used(taken.begin(), taken.end());
    std::vector<std::string> out;
    out.reserve(count);
    constexpr std::uint64_t kSuffixBound = 1000000;
    while (out.size() < count) {
        const auto& g = corpus.given[rng.below(corpus.given.size())];
        const auto& f = corpus.family[rng.below(corpus.family.size())];
        std::string base = make_username(g, f);
        std::string name = base;
        std::uint64_t suffix = 1;
        while (used.count(name)) {
            if (suffix >= kSuffixBound)
                throw std::runtime_error("fabricate_usernames: corpus too small for requested count");
            name = base + std::to_string(suffix++);
        }
        used.insert(name);
        out.push_back(std::move(name));
    }
    return out;
}

Vault inflate(const Vault& vault, const FaceSpace& space, std::size_t target_count,
              double min_dist, RngStream& rng, const NameCorpus& names,
              const GenerateOptions& opts, GenerationStats* stats_out) {
    if (target_count < vault.size())
        throw std::invalid_argument("inflate: target_count below current size");
    if (vault.dim != space.dim()) throw std::invalid_argument("inflate: vault/model dimension mismatch");
    if (target_count == vault.size()) return vault;

    SeparationIndex index(min_dist);
    for (const VaultRecord& r : vault.records) index.insert(r.tmpl);

    const std::size_t add = target_count - vault.size();
    auto [honey, stats] = generate_honey(space, index, add, min_dist, rng, opts);
    if (stats_out) *stats_out = stats;

    std::vector<std::string> existing;
    existing.reserve(vault.size());
    for (const VaultRecord& r : vault.records) existing.push_back(r.username);
    RngStream name_rng = rng.substream(0x6e616d65ULL);
    std::vector<std::string> usernames = fabricate_usernames(add, names, name_rng, existing);

    Vault out = vault;
    for (std::size_t i = 0; i < add; ++i)
        out.records.push_back(VaultRecord{std::move(usernames[i]), std::move(honey[i])});
    std::sort(out.records.begin(), out.records.end(), record_less);
    return out;
}

std::vector<std::uint8_t> serialize_vault(const Vault& vault) {
    detail::ByteWriter w;
    w.magic("HFV1");
    w.u32(kVaultVersion);
    w.bytes(std::span<const std::uint8_t>(vault.space_id.data(), vault.space_id.size()));
    w.u32(static_cast<std::uint32_t>(vault.dim));
    w.u64(vault.records.size());
    for (const VaultRecord& r : vault.records) {
        validate_username(r.username);
        if (r.tmpl.dim() != vault.dim) throw std::invalid_argument("serialize_vault: template dimension mismatch");
        w.u16(static_cast<std::uint16_t>(r.username.size()));
        w.str(r.username);
        for (int i = 0; i < vault.dim; ++i) w.f64(r.tmpl.coeffs(i));
    }
    return w.take();
}

Vault deserialize_vault(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("HFV1", "vault");
    if (r.u32() != kVaultVersion) throw std::runtime_error("vault: unsupported version");
    Vault vault;
    r.bytes(vault.space_id.data(), vault.space_id.size());
    vault.dim = static_cast<int>(r.u32());
    if (vault.dim < 1) throw std::runtime_error("vault: invalid dimension");
    const std::uint64_t count = r.u64();
    vault.records.reserve(count);
    std::string prev;
    for (std::uint64_t i = 0; i < count; ++i) {
        VaultRecord rec;
        const std::uint16_t len = r.u16();
        if (len == 0 || len > 255) throw std::runtime_error("vault: invalid username length");
        rec.username = r.str(len);
        if (i > 0 && !(prev < rec.username))
            throw std::runtime_error("vault: records unsorted or duplicate");
        prev = rec.username;
        rec.tmpl.coeffs = Vec(vault.dim);
        for (int j = 0; j < vault.dim; ++j) rec.tmpl.coeffs(j) = r.f64();
        vault.records.push_back(std::move(rec));
    }
    r.expect_done("vault");
    return vault;
}

void save_vault(const Vault& vault, const std::string& path) {
    const auto bytes = serialize_vault(vault);
    write_file_bytes(path, bytes);
}

Vault load_vault(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize_vault(bytes);
}

}  // namespace hv
