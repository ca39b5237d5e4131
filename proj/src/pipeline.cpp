#include "myoctl/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace myoctl {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using nlohmann::json;

Index Manifest::ok_count() const {
    return std::count_if(sessions.begin(), sessions.end(), [](const auto& r) { return r.ok; });
}

Index Manifest::failed_count() const { return static_cast<Index>(sessions.size()) - ok_count(); }

Index Manifest::total_frames() const {
    Index n = 0;
    for (const auto& r : sessions) n += r.frames;
    return n;
}

Index Manifest::total_infeasible_frames() const {
    Index n = 0;
    for (const auto& r : sessions) n += r.infeasible_frames;
    return n;
}

json to_json(const Manifest& manifest, bool include_timing) {
    json sessions = json::array();
    for (const auto& r : manifest.sessions) {
        json j{{"id", r.id},
               {"path", r.path},
               {"status", r.ok ? "ok" : "failed"},
               {"failure_reason", r.failure_reason},
               {"frames", r.frames},
               {"infeasible_frames", r.infeasible_frames},
               {"max_residual", r.max_residual}};
        if (include_timing) j["wall_time_s"] = r.wall_time_s;
        sessions.push_back(std::move(j));
    }
    return {{"format", kManifestFormat},
            {"sessions", sessions},
            {"totals",
             {{"sessions", manifest.sessions.size()},
              {"ok", manifest.ok_count()},
              {"failed", manifest.failed_count()},
              {"frames", manifest.total_frames()},
              {"infeasible_frames", manifest.total_infeasible_frames()}}}};
}

std::map<std::string, std::string> parse_joint_map(const std::string& json_text) {
    try {
        return json::parse(json_text).get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw PipelineConfigError(std::string("joint map: ") + e.what());
    }
}

std::map<std::string, std::string> read_joint_map(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw PipelineConfigError("cannot read joint map " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_joint_map(ss.str());
}

MatrixXd map_joints(const Session& session, const Plant& plant, const std::map<std::string, std::string>& joint_map) {
    MatrixXd q = MatrixXd::Zero(session.frames(), plant.njoints());
    std::vector<bool> taken(static_cast<std::size_t>(plant.njoints()), false);
    for (std::size_t c = 0; c < session.channels.size(); ++c) {
        const auto& name = session.channels[c].name;
        const auto it = joint_map.find(name);
        const std::string& target = it == joint_map.end() ? name : it->second;
        const auto jt = std::find(plant.joint_names.begin(), plant.joint_names.end(), target);
        if (jt == plant.joint_names.end())
            throw PipelineConfigError("channel '" + name + "' maps to unknown plant joint '" + target + "'");
        const auto j = static_cast<std::size_t>(jt - plant.joint_names.begin());
        if (taken[j]) throw PipelineConfigError("plant joint '" + target + "' is mapped by more than one channel");
        taken[j] = true;
        q.col(static_cast<Index>(j)) = session.data.col(static_cast<Index>(c));
    }
    return q;
}

ProcessResult process_session(const Session& poses, const Plant& plant, const ProcessOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (poses.frames() == 0 || poses.channels.empty())
        throw std::invalid_argument("process_session: session '" + poses.id + "' is empty");
    if (poses.rate_hz != opts.input_hz)
        throw std::invalid_argument("process_session: session '" + poses.id + "' is at " +
                                    std::to_string(poses.rate_hz) + " Hz, expected " + std::to_string(opts.input_hz));
    const MatrixXd q_in = map_joints(poses, plant, opts.joint_map);

    ProcessResult res;
    res.record.id = poses.id;
    res.record.frames = poses.frames();
    auto finish = [&] {
        res.record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    };

    for (Index t = 0; t < q_in.rows(); ++t) {
        if (!q_in.row(t).allFinite()) {
            res.record.failure_reason = "non-finite joint angles at input frame " + std::to_string(t);
            return finish();
        }
    }

    const MatrixXd q_low = resample(q_in, opts.input_hz, opts.process_hz);
    const auto inv = invert_trajectory(plant, q_low, opts.process_hz, opts.inversion);
    res.record.infeasible_frames = inv.infeasible_frames;
    for (Index t = 0; t < inv.residual.size(); ++t)
        if (std::isfinite(inv.residual[t])) res.record.max_residual = std::max(res.record.max_residual, inv.residual[t]);
    if (!inv.ok) {
        res.record.failure_reason = inv.failure_reason;
        return finish();
    }

    MatrixXd ctrl = resample(inv.ctrl, opts.process_hz, opts.input_hz);
    // Keep the input duration; the rate ratio can leave a few samples over or short.
    MatrixXd out(poses.frames(), plant.nactuators());
    for (Index t = 0; t < out.rows(); ++t) out.row(t) = ctrl.row(std::min(t, ctrl.rows() - 1));
    out = out.cwiseMax(0.0).cwiseMin(1.0);

    Session s;
    s.id = poses.id;
    s.rate_hz = opts.input_hz;
    for (const auto& m : plant.muscles) s.channels.push_back({m.name, "ctrl"});
    s.data = std::move(out);
    s.metadata = poses.metadata;
    s.metadata["processing_rate_hz"] = std::to_string(static_cast<long long>(opts.process_hz));
    res.output = std::move(s);
    res.record.ok = true;
    return finish();
}

int resolve_workers(std::optional<int> requested) {
    if (requested) {
        if (*requested < 1) throw std::invalid_argument("workers must be >= 1");
        return *requested;
    }
    if (const char* env = std::getenv("MYOCTL_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
        throw std::invalid_argument(std::string("MYOCTL_WORKERS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

void replace_atomically(const fs::path& tmp, const fs::path& target) {
    std::error_code ec;
    fs::remove_all(target, ec);
    fs::rename(tmp, target);
}

}  // namespace

Manifest run_batch(const fs::path& input_dir, const Plant& plant, int workers, const fs::path& out_dir,
                   const ProcessOptions& opts) {
    if (!fs::is_directory(input_dir)) throw BatchError("input directory " + input_dir.string() + " does not exist");
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.is_directory()) inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw BatchError("no session directories in " + input_dir.string());
    fs::create_directories(out_dir);

    Manifest manifest;
    manifest.sessions.resize(inputs.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
            const auto start = std::chrono::steady_clock::now();
            const std::string name = inputs[i].filename().string();
            SessionRecord rec;
            rec.id = name;
            try {
                const Session poses = read_session(inputs[i]);
                auto res = process_session(poses, plant, opts);
                rec = res.record;
                if (res.output) {
                    const fs::path tmp = out_dir / ("." + name + ".tmp");
                    fs::remove_all(tmp);
                    write_session(*res.output, tmp);
                    replace_atomically(tmp, out_dir / name);
                }
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.failure_reason = e.what();
            }
            rec.path = name;
            rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            manifest.sessions[i] = std::move(rec);  // one slot per session, one writer per slot
        }
    };

    const int n = std::clamp(workers, 1, static_cast<int>(inputs.size()));
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < n; ++w) pool.emplace_back(work);
        work();
    }

    const fs::path tmp = out_dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        out << to_json(manifest).dump(2) << "\n";
        if (!out) throw BatchError("cannot write " + tmp.string());
    }
    fs::rename(tmp, out_dir / "manifest.json");
    return manifest;
}

}  // namespace myoctl
