#pragma once

// Session containers on disk: a directory holding
//
//   session.json  {"format": "myoctl-session/1", "id", "rate_hz", "frames",
//                  "channels": [{"name", "unit"}], "metadata": {...}}
//   data.bin      little-endian float32, channel-major (all frames of
//                 channel 0, then channel 1, ...)

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "myoctl/types.hpp"

namespace myoctl {

inline constexpr const char* kSessionFormat = "myoctl-session/1";

struct Channel {
    std::string name;
    std::string unit;

    bool operator==(const Channel&) const = default;
};

struct Session {
    std::string id;
    double rate_hz = 0.0;
    std::vector<Channel> channels;
    Eigen::MatrixXd data;  // frames x channels
    std::map<std::string, std::string> metadata;

    Index frames() const { return data.rows(); }
};

bool operator==(const Session& a, const Session& b);

enum class SessionErrorKind { io, malformed, version, truncated, length_mismatch };

class SessionError : public std::runtime_error {
public:
    SessionError(SessionErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    SessionErrorKind kind() const { return kind_; }

private:
    SessionErrorKind kind_;
};

/// Writes into `dir`, creating it if needed. Values are stored as float32.
void write_session(const Session& session, const std::filesystem::path& dir);

Session read_session(const std::filesystem::path& dir);

}  // namespace myoctl
