#include "hv/honeycheck.hpp"

#include <cstring>
#include <ctime>

#include "hv/detail/bytes.hpp"

namespace hv {

CheckResult check(const HoneycheckerDb& db, const std::string& username) {
    return db.real_usernames.count(username) ? CheckResult::Real : CheckResult::Honey;
}

std::vector<std::uint8_t> encode_check_request(const std::string& username) {
    if (username.empty() || username.size() > 255)
        throw std::invalid_argument("check request: invalid username length");
    detail::ByteWriter w;
    w.magic("HFC1");
    w.u8(kOpCheck);
    w.u16(static_cast<std::uint16_t>(username.size()));
    w.str(username);
    return w.take();
}

std::uint8_t handle_request(const HoneycheckerDb& db, std::span<const std::uint8_t> request) {
    if (request.size() < 7) return kWireError;
    if (std::memcmp(request.data(), "HFC1", 4) != 0) return kWireError;
    if (request[4] != kOpCheck) return kWireError;
    const std::uint16_t len =
        static_cast<std::uint16_t>(request[5]) | static_cast<std::uint16_t>(request[6]) << 8;
    if (len == 0 || request.size() != 7u + len) return kWireError;
    const std::string username(reinterpret_cast<const char*>(request.data() + 7), len);
    return check(db, username) == CheckResult::Real ? kWireReal : kWireHoney;
}

std::string format_alarm(const AlarmEvent& event) {
    const std::time_t t = std::chrono::system_clock::to_time_t(event.timestamp);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf) + "\t" + event.username + "\thoney-login\t" + event.source;
}

FrontServer::FrontServer(const Vault& vault, const FaceSpace& space, double threshold,
                         Transport transport)
    : vault_(&vault), space_(&space), threshold_(threshold), transport_(std::move(transport)) {}

FrontServer::Transport FrontServer::local_transport(const HoneycheckerDb& db) {
    return [&db](std::span<const std::uint8_t> request)
               -> std::optional<std::vector<std::uint8_t>> {
        return std::vector<std::uint8_t>{handle_request(db, request)};
    };
}

LoginOutcome FrontServer::handle_login(const std::string& username,
                                       const ShapeVector& probe_shape,
                                       const TextureVector& probe_texture) {
    AuthDecision decision;
    try {
        decision = verify(*vault_, *space_, username, probe_shape, probe_texture, threshold_);
    } catch (const std::out_of_range&) {
        return LoginOutcome::Rejected;  // unknown account, same interface as a reject
    }
    return post_verify(username, decision);
}

LoginOutcome FrontServer::handle_login(const std::string& username, const Template& probe) {
    AuthDecision decision;
    try {
        decision = verify_template(*vault_, username, probe, threshold_);
    } catch (const std::out_of_range&) {
        return LoginOutcome::Rejected;
    }
    return post_verify(username, decision);
}

LoginOutcome FrontServer::post_verify(const std::string& username, const AuthDecision& decision) {
    if (!decision.accepted) return LoginOutcome::Rejected;

    const auto response = transport_(encode_check_request(username));
    if (!response || response->size() != 1 || (*response)[0] == kWireError) {
        if (fail_open_) return LoginOutcome::AcceptedReal;
        audit_backlog_.push_back(username);
        return LoginOutcome::AcceptedPending;
    }
    if ((*response)[0] == kWireReal) return LoginOutcome::AcceptedReal;

    alarms_.push_back(AlarmEvent{username, std::chrono::system_clock::now(), "front"});
    return LoginOutcome::AcceptedHoney;
}

}  // namespace hv
