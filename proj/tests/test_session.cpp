#include <gtest/gtest.h>

#include <fstream>

#include "myoctl/session.hpp"
#include "oracles.hpp"

using namespace myoctl;

namespace {

Session sample() {
    Session s;
    s.id = "s07";
    s.rate_hz = 2000;
    s.channels = {{"flexion", "rad"}, {"deviation", "rad"}, {"pro_sup", "rad"}};
    s.data = Eigen::MatrixXd(5, 3);
    s.data << 0, 0.5, -0.25, 1, 2, 3, 0.125, 4, 5, 6, 7, 8, -9, 10, 11;
    s.metadata = {{"subject", "p3"}, {"task", "grasp"}};
    return s;
}

SessionErrorKind kind_of(const std::filesystem::path& dir) {
    try {
        read_session(dir);
    } catch (const SessionError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for " << dir;
    return SessionErrorKind::io;
}

void resize_payload(const std::filesystem::path& dir, std::uintmax_t bytes) {
    std::filesystem::resize_file(dir / "data.bin", bytes);
}

}  // namespace

TEST(Session, RoundTrip) {
    oracle::TempDir tmp("session");
    const Session s = sample();
    write_session(s, tmp.path() / "a");
    EXPECT_TRUE(read_session(tmp.path() / "a") == s);
    EXPECT_EQ(std::filesystem::file_size(tmp.path() / "a" / "data.bin"), 5u * 3u * 4u);
}

TEST(Session, ChannelMajorLittleEndianPayload) {
    oracle::TempDir tmp("session_layout");
    write_session(sample(), tmp.path());
    std::ifstream in(tmp.path() / "data.bin", std::ios::binary);
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    // frame 1 of channel 0 is 1.0f = 0x3f800000
    EXPECT_EQ(b[4], 0x00);
    EXPECT_EQ(b[7], 0x3f);
}

TEST(Session, TruncatedPayload) {
    oracle::TempDir tmp("session_trunc");
    write_session(sample(), tmp.path());
    resize_payload(tmp.path(), 5 * 3 * 4 - 4);
    EXPECT_EQ(kind_of(tmp.path()), SessionErrorKind::truncated);
}

TEST(Session, ExcessPayload) {
    oracle::TempDir tmp("session_excess");
    write_session(sample(), tmp.path());
    resize_payload(tmp.path(), 5 * 3 * 4 + 4);
    EXPECT_EQ(kind_of(tmp.path()), SessionErrorKind::length_mismatch);
}

TEST(Session, UnknownVersion) {
    oracle::TempDir tmp("session_version");
    write_session(sample(), tmp.path());
    std::ofstream(tmp.path() / "session.json")
        << R"({"format": "myoctl-session/2", "id": "x", "rate_hz": 2000, "frames": 5, "channels": []})";
    try {
        read_session(tmp.path());
        FAIL();
    } catch (const SessionError& e) {
        EXPECT_EQ(e.kind(), SessionErrorKind::version);
        EXPECT_NE(std::string(e.what()).find("myoctl-session/1"), std::string::npos);
    }
}

TEST(Session, MalformedAndMissing) {
    oracle::TempDir tmp("session_bad");
    EXPECT_EQ(kind_of(tmp.path() / "nowhere"), SessionErrorKind::io);
    std::filesystem::create_directories(tmp.path() / "m");
    std::ofstream(tmp.path() / "m" / "session.json") << "{ nope";
    EXPECT_EQ(kind_of(tmp.path() / "m"), SessionErrorKind::malformed);
}

TEST(Session, ChannelCountMismatchOnWrite) {
    oracle::TempDir tmp("session_write");
    Session s = sample();
    s.channels.pop_back();
    EXPECT_THROW(write_session(s, tmp.path()), SessionError);
}
