#pragma once

// Session conversion (2 kHz poses -> 500 Hz inversion -> 2 kHz controls) and
// parallel batch execution with a manifest.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "myoctl/plant.hpp"
#include "myoctl/session.hpp"
#include "myoctl/trajectory.hpp"

namespace myoctl {

inline constexpr const char* kManifestFormat = "myoctl-manifest/1";

class PipelineConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SessionRecord {
    std::string id;
    std::string path;  // input directory name
    bool ok = false;
    std::string failure_reason;
    Index frames = 0;
    Index infeasible_frames = 0;
    double max_residual = 0.0;
    double wall_time_s = 0.0;
};

struct Manifest {
    std::vector<SessionRecord> sessions;

    Index ok_count() const;
    Index failed_count() const;
    Index total_frames() const;
    Index total_infeasible_frames() const;
};

nlohmann::json to_json(const Manifest& manifest, bool include_timing = true);

struct ProcessOptions {
    double input_hz = 2000.0;
    double process_hz = 500.0;
    // Session channel name -> plant joint name. Channels absent from the map
    // are matched by name; plant joints nobody maps to get zero trajectories.
    std::map<std::string, std::string> joint_map;
    InversionOptions inversion{};
};

std::map<std::string, std::string> parse_joint_map(const std::string& json_text);
std::map<std::string, std::string> read_joint_map(const std::filesystem::path& path);

/// Plant-ordered joint trajectories (frames x njoints) for a pose session.
Eigen::MatrixXd map_joints(const Session& session, const Plant& plant,
                           const std::map<std::string, std::string>& joint_map);

struct ProcessResult {
    std::optional<Session> output;  // tendon controls at input_hz; empty on failure
    SessionRecord record;
};

/// Throws on precondition violations (empty session, wrong rate, joint map
/// mismatch); inversion failures come back as a failed record.
ProcessResult process_session(const Session& poses, const Plant& plant, const ProcessOptions& opts = {});

/// Worker count from the flag, else MYOCTL_WORKERS, else hardware threads.
int resolve_workers(std::optional<int> requested);

/// Process every session directory under input_dir. Outputs and manifest.json
/// land in out_dir via temp + rename. The manifest lists sessions in
/// directory-name order regardless of the worker count.
Manifest run_batch(const std::filesystem::path& input_dir, const Plant& plant, int workers,
                   const std::filesystem::path& out_dir, const ProcessOptions& opts = {});

}  // namespace myoctl
