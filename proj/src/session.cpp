#include "myoctl/session.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace myoctl {

namespace fs = std::filesystem;
using nlohmann::json;

bool operator==(const Session& a, const Session& b) {
    return a.id == b.id && a.rate_hz == b.rate_hz && a.channels == b.channels && a.metadata == b.metadata &&
           a.data.rows() == b.data.rows() && a.data.cols() == b.data.cols() && a.data == b.data;
}

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

}  // namespace

void write_session(const Session& session, const fs::path& dir) {
    if (static_cast<Index>(session.channels.size()) != session.data.cols())
        throw SessionError(SessionErrorKind::malformed, "write_session: channel list does not match data columns");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SessionError(SessionErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

    json header;
    header["format"] = kSessionFormat;
    header["id"] = session.id;
    header["rate_hz"] = session.rate_hz;
    header["frames"] = session.frames();
    json channels = json::array();
    for (const auto& c : session.channels) channels.push_back({{"name", c.name}, {"unit", c.unit}});
    header["channels"] = channels;
    header["metadata"] = session.metadata;
    {
        std::ofstream out(dir / "session.json");
        out << header.dump(2) << "\n";
        if (!out) throw SessionError(SessionErrorKind::io, "cannot write " + (dir / "session.json").string());
    }

    std::vector<std::uint32_t> words(static_cast<std::size_t>(session.data.size()));
    std::size_t k = 0;
    for (Index c = 0; c < session.data.cols(); ++c)
        for (Index t = 0; t < session.data.rows(); ++t)
            words[k++] = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(session.data(t, c))));
    std::ofstream out(dir / "data.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
    if (!out) throw SessionError(SessionErrorKind::io, "cannot write " + (dir / "data.bin").string());
}

Session read_session(const fs::path& dir) {
    const fs::path header_path = dir / "session.json";
    std::ifstream hin(header_path);
    if (!hin) throw SessionError(SessionErrorKind::io, "cannot read " + header_path.string());
    std::stringstream ss;
    ss << hin.rdbuf();

    Session s;
    Index frames = 0;
    try {
        const json h = json::parse(ss.str());
        const auto format = h.value("format", std::string{});
        if (format != kSessionFormat)
            throw SessionError(SessionErrorKind::version, header_path.string() + ": unsupported format '" + format +
                                                              "' (expected " + kSessionFormat + ")");
        s.id = h.at("id").get<std::string>();
        s.rate_hz = h.at("rate_hz").get<double>();
        frames = h.at("frames").get<Index>();
        for (const auto& c : h.at("channels")) s.channels.push_back({c.at("name"), c.value("unit", std::string{})});
        if (h.contains("metadata")) s.metadata = h.at("metadata").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw SessionError(SessionErrorKind::malformed, header_path.string() + ": " + e.what());
    }
    if (frames < 0 || !(s.rate_hz > 0))
        throw SessionError(SessionErrorKind::malformed, header_path.string() + ": bad frame count or rate");

    const fs::path data_path = dir / "data.bin";
    std::ifstream din(data_path, std::ios::binary);
    if (!din) throw SessionError(SessionErrorKind::io, "cannot read " + data_path.string());
    const std::string bytes((std::istreambuf_iterator<char>(din)), std::istreambuf_iterator<char>());
    const auto nch = static_cast<Index>(s.channels.size());
    const auto expected = static_cast<std::size_t>(frames * nch) * 4;
    if (bytes.size() < expected)
        throw SessionError(SessionErrorKind::truncated, data_path.string() + ": payload has " +
                                                            std::to_string(bytes.size()) + " bytes, header implies " +
                                                            std::to_string(expected));
    if (bytes.size() != expected)
        throw SessionError(SessionErrorKind::length_mismatch, data_path.string() + ": payload has " +
                                                                  std::to_string(bytes.size()) +
                                                                  " bytes, header implies " + std::to_string(expected));

    s.data.resize(frames, nch);
    std::size_t k = 0;
    for (Index c = 0; c < nch; ++c) {
        for (Index t = 0; t < frames; ++t, k += 4) {
            std::uint32_t w;
            std::memcpy(&w, bytes.data() + k, 4);
            s.data(t, c) = static_cast<double>(std::bit_cast<float>(to_little_endian(w)));
        }
    }
    return s;
}

}  // namespace myoctl
