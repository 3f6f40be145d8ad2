#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hv/authn.hpp"
#include "hv/vault.hpp"

namespace hv {

// The second server's state: nothing but the set of real usernames.
struct HoneycheckerDb {
    std::set<std::string> real_usernames;
};

enum class CheckResult : std::uint8_t { Real = 0x00, Honey = 0x01 };

// Pure membership; a username outside enrollment is honey (an accepted login
// for it is by definition suspicious).
CheckResult check(const HoneycheckerDb& db, const std::string& username);

// Wire protocol "HFC1": request = magic, u8 opcode (0x01 check), u16 LE
// username length, username bytes. Response = one byte: 0x00 real,
// 0x01 honey, 0xFF error.
constexpr std::uint8_t kOpCheck = 0x01;
constexpr std::uint8_t kWireReal = 0x00;
constexpr std::uint8_t kWireHoney = 0x01;
constexpr std::uint8_t kWireError = 0xFF;

std::vector<std::uint8_t> encode_check_request(const std::string& username);

// Full server-side handling: parses the request and answers with a single
// response byte; malformed input yields kWireError, never an exception.
std::uint8_t handle_request(const HoneycheckerDb& db, std::span<const std::uint8_t> request);

enum class LoginOutcome { Rejected, AcceptedReal, AcceptedHoney, AcceptedPending };

struct AlarmEvent {
    std::string username;
    std::chrono::system_clock::time_point timestamp;
    std::string source;
};

std::string format_alarm(const AlarmEvent& event);

// Front authenticator over the inflated vault. Talks to the honeychecker
// through raw request/response bytes so the two roles can be split into
// separate processes without API change; a nullopt response means the
// checker is unreachable.
class FrontServer {
public:
    using Transport =
        std::function<std::optional<std::vector<std::uint8_t>>(std::span<const std::uint8_t>)>;

    FrontServer(const Vault& vault, const FaceSpace& space, double threshold,
                Transport transport);

    // In-process wiring of a honeychecker, still exchanging wire bytes.
    static Transport local_transport(const HoneycheckerDb& db);

    // Verify first; only on acceptance issue a check query. An accepted
    // honey login emits exactly one AlarmEvent. If the checker is
    // unreachable the acceptance is parked on the audit backlog
    // (fail-closed for the alarm pathway) unless fail_open is set.
    LoginOutcome handle_login(const std::string& username, const ShapeVector& probe_shape,
                              const TextureVector& probe_texture);

    // Credential-level login: the probe is a raw coefficient vector, as
    // submitted by whoever holds (or guessed) a stored record.
    LoginOutcome handle_login(const std::string& username, const Template& probe);

    void set_fail_open(bool v) { fail_open_ = v; }

    const std::vector<AlarmEvent>& alarms() const { return alarms_; }
    const std::vector<std::string>& audit_backlog() const { return audit_backlog_; }

private:
    LoginOutcome post_verify(const std::string& username, const AuthDecision& decision);

    const Vault* vault_;
    const FaceSpace* space_;
    double threshold_;
    Transport transport_;
    bool fail_open_ = false;
    std::vector<AlarmEvent> alarms_;
    std::vector<std::string> audit_backlog_;
};

}  // namespace hv
