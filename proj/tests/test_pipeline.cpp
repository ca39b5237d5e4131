#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "myoctl/pipeline.hpp"
#include "oracles.hpp"
#include "sessions.hpp"

using namespace myoctl;
namespace fs = std::filesystem;

namespace {

const Plant& toy() {
    static const Plant p = make_fixture({FixtureKind::toy_finger});
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(ProcessSession, SimulatedSessionConverts) {
    const Session poses = fixture::pose_session(toy(), 1, 2.0, "s1");
    const auto res = process_session(poses, toy());
    ASSERT_TRUE(res.record.ok) << res.record.failure_reason;
    ASSERT_TRUE(res.output.has_value());
    EXPECT_LT(res.record.max_residual, 1e-6);
    EXPECT_EQ(res.record.frames, poses.frames());
    const Session& out = *res.output;
    EXPECT_EQ(out.rate_hz, 2000);
    EXPECT_EQ(out.frames(), poses.frames());
    EXPECT_EQ(static_cast<Index>(out.channels.size()), toy().nactuators());
    EXPECT_EQ(out.channels[0].name, toy().muscles[0].name);
    EXPECT_GE(out.data.minCoeff(), 0.0);
    EXPECT_LE(out.data.maxCoeff(), 1.0);
}

TEST(ProcessSession, NanBurstFails) {
    Session poses = fixture::pose_session(toy(), 2, 1.0);
    poses.data.block(300, 0, 40, 1).setConstant(std::nan(""));
    const auto res = process_session(poses, toy());
    EXPECT_FALSE(res.record.ok);
    EXPECT_FALSE(res.output.has_value());
    EXPECT_NE(res.record.failure_reason.find("300"), std::string::npos);
}

TEST(ProcessSession, Preconditions) {
    Session empty;
    empty.id = "e";
    empty.rate_hz = 2000;
    EXPECT_THROW(process_session(empty, toy()), std::invalid_argument);

    Session slow = fixture::pose_session(toy(), 1, 0.5);
    slow.rate_hz = 1000;
    EXPECT_THROW(process_session(slow, toy()), std::invalid_argument);

    Session renamed = fixture::pose_session(toy(), 1, 0.5);
    renamed.channels[0].name = "wrist";
    EXPECT_THROW(process_session(renamed, toy()), PipelineConfigError);
}

TEST(ProcessSession, JointMapRenames) {
    Session poses = fixture::pose_session(toy(), 1, 0.5);
    const std::string first = poses.channels[0].name;
    poses.channels[0].name = "index_mcp_raw";
    ProcessOptions o;
    o.joint_map = parse_joint_map(R"({"index_mcp_raw": ")" + first + R"("})");
    EXPECT_TRUE(process_session(poses, toy(), o).record.ok);

    o.joint_map = parse_joint_map(R"({"index_mcp_raw": ")" + poses.channels[1].name + R"("})");
    EXPECT_THROW(process_session(poses, toy(), o), PipelineConfigError);  // two channels on one joint
    EXPECT_THROW(parse_joint_map("[1, 2]"), PipelineConfigError);
}

TEST(Workers, Resolution) {
    EXPECT_EQ(resolve_workers(3), 3);
    EXPECT_THROW(resolve_workers(0), std::invalid_argument);
    ::setenv("MYOCTL_WORKERS", "5", 1);
    EXPECT_EQ(resolve_workers(std::nullopt), 5);
    ::setenv("MYOCTL_WORKERS", "many", 1);
    EXPECT_THROW(resolve_workers(std::nullopt), std::invalid_argument);
    ::unsetenv("MYOCTL_WORKERS");
    EXPECT_GE(resolve_workers(std::nullopt), 1);
}

TEST(Batch, FailureIsolationAndDeterminism) {
    oracle::TempDir tmp("batch");
    const fs::path in = tmp.path() / "in";
    fixture::write_batch_input(in, toy(), 8, 5);

    const auto m1 = run_batch(in, toy(), 1, tmp.path() / "out1");
    const auto m4 = run_batch(in, toy(), 4, tmp.path() / "out4");
    const auto m8 = run_batch(in, toy(), 8, tmp.path() / "out8");
    EXPECT_EQ(m4.ok_count(), 7);
    EXPECT_EQ(m4.failed_count(), 1);
    EXPECT_FALSE(m4.sessions[5].ok);
    EXPECT_NE(m4.sessions[5].failure_reason.find("payload"), std::string::npos);

    EXPECT_EQ(to_json(m1, false).dump(), to_json(m8, false).dump());
    EXPECT_EQ(to_json(m1, false).dump(), to_json(m4, false).dump());

    for (const auto* dir : {"out1", "out8"}) {
        EXPECT_TRUE(fs::exists(tmp.path() / dir / "manifest.json"));
        EXPECT_TRUE(fs::exists(tmp.path() / dir / "s00" / "data.bin"));
        EXPECT_FALSE(fs::exists(tmp.path() / dir / "s05"));
        for (const auto& e : fs::directory_iterator(tmp.path() / dir))
            EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos);
    }
    EXPECT_EQ(slurp(tmp.path() / "out1" / "s03" / "data.bin"), slurp(tmp.path() / "out8" / "s03" / "data.bin"));

    const auto j = nlohmann::json::parse(slurp(tmp.path() / "out1" / "manifest.json"));
    EXPECT_EQ(j["format"], kManifestFormat);
    EXPECT_EQ(j["totals"]["ok"], 7);
    EXPECT_EQ(j["totals"]["failed"], 1);
    EXPECT_EQ(j["sessions"].size(), 8u);
}

TEST(Batch, EmptyOrMissingInput) {
    oracle::TempDir tmp("batch_empty");
    EXPECT_THROW(run_batch(tmp.path(), toy(), 2, tmp.path() / "out"), BatchError);
    EXPECT_THROW(run_batch(tmp.path() / "absent", toy(), 2, tmp.path() / "out"), BatchError);
}
