#include "myoctl/cli.hpp"

#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "myoctl/pipeline.hpp"

namespace myoctl::cli {

namespace fs = std::filesystem;

ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Command cmd;
    CLI::App app{"Muscle-tendon actuation toolkit: simulate, invert and batch-convert sessions", "myoctl"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic plant definition file");
    gen->add_option("--kind", cmd.kind, "toy_finger | hand_like | random")
        ->required()
        ->check(CLI::IsMember({"toy_finger", "hand_like", "random"}));
    gen->add_option("--seed", cmd.seed, "Seed for the random fixture");
    gen->add_option("--njoints", cmd.njoints, "Joints for the random fixture")->check(CLI::PositiveNumber);
    gen->add_option("--nactuators", cmd.nactuators, "Actuators for the random fixture")->check(CLI::PositiveNumber);
    gen->add_option("--out", cmd.out, "Output plant file")->required();

    auto* sim = app.add_subcommand("simulate", "Forward-simulate seeded smooth random controls");
    sim->add_option("--plant", cmd.plant, "Plant file")->required();
    sim->add_option("--out", cmd.out, "Output pose session directory")->required();
    sim->add_option("--ctrl-out", cmd.ctrl_out, "Also write the driving controls as a session");
    sim->add_option("--duration", cmd.duration, "Seconds")->check(CLI::PositiveNumber);
    sim->add_option("--dt", cmd.dt, "Integration step (s)")->check(CLI::PositiveNumber);
    sim->add_option("--seed", cmd.seed, "Control seed");
    sim->add_option("--rate-out", cmd.rate_out, "Resample the pose session to this rate (Hz)");

    auto* inv = app.add_subcommand("invert", "Recover tendon controls for one pose session");
    inv->add_option("--plant", cmd.plant, "Plant file")->required();
    inv->add_option("--in", cmd.in, "Pose session directory")->required();
    inv->add_option("--out", cmd.out, "Output control session directory")->required();
    inv->add_option("--joint-map", cmd.joint_map, "JSON object: session channel -> plant joint");
    inv->add_option("--process-hz", cmd.process_hz, "Inversion rate (Hz)")->check(CLI::PositiveNumber);

    auto* rt = app.add_subcommand("roundtrip", "Simulate, invert, re-simulate and compare trajectories");
    auto* rt_plant = rt->add_option("--plant", cmd.plant, "Plant file");
    rt->add_option("--kind", cmd.kind, "Fixture kind instead of a plant file")
        ->excludes(rt_plant)
        ->check(CLI::IsMember({"toy_finger", "hand_like", "random"}));
    rt->add_option("--seed", cmd.seed, "Control seed (and random fixture seed)");
    rt->add_option("--duration", cmd.duration, "Seconds")->check(CLI::PositiveNumber);
    rt->add_option("--dt", cmd.dt, "Integration step (s)")->check(CLI::PositiveNumber);
    rt->add_option("--rmse-tol", cmd.rmse_tol, "Trajectory RMSE tolerance (rad)");
    rt->add_option("--residual-tol", cmd.residual_tol, "Per-frame |AM x + k| tolerance");
    rt->add_option("--min-fraction", cmd.min_fraction, "Fraction of frames that must meet --residual-tol");

    auto* batch = app.add_subcommand("batch", "Convert every session directory under --in");
    batch->add_option("--in", cmd.in, "Directory of pose sessions")->required();
    batch->add_option("--plant", cmd.plant, "Plant file")->required();
    batch->add_option("--out", cmd.out, "Output directory")->required();
    batch->add_option("--workers", cmd.workers, "Worker threads (default: MYOCTL_WORKERS or CPU count)")
        ->check(CLI::PositiveNumber);
    batch->add_option("--joint-map", cmd.joint_map, "JSON object: session channel -> plant joint");
    batch->add_option("--process-hz", cmd.process_hz, "Inversion rate (Hz)")->check(CLI::PositiveNumber);

    auto* rs = app.add_subcommand("resample", "Resample a session by an integer factor");
    rs->add_option("--in", cmd.in, "Input session directory")->required();
    rs->add_option("--out", cmd.out, "Output session directory")->required();
    rs->add_option("--to-hz", cmd.to_hz, "Target rate (Hz)")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {std::nullopt, code == 0 ? kExitOk : kExitUsage};
    }

    if (*gen) cmd.sub = Subcommand::gen_fixture;
    else if (*sim) cmd.sub = Subcommand::simulate;
    else if (*inv) cmd.sub = Subcommand::invert;
    else if (*rt) cmd.sub = Subcommand::roundtrip;
    else if (*batch) cmd.sub = Subcommand::batch;
    else cmd.sub = Subcommand::resample;

    if (cmd.sub == Subcommand::roundtrip && cmd.plant.empty() && cmd.kind.empty()) {
        err << "roundtrip: one of --plant or --kind is required\n";
        return {std::nullopt, kExitUsage};
    }
    return {cmd, kExitOk};
}

namespace {

Plant plant_for(const Command& cmd) {
    if (!cmd.plant.empty()) return read_plant(cmd.plant);
    return make_fixture({parse_fixture_kind(cmd.kind), cmd.seed, cmd.njoints, cmd.nactuators});
}

ProcessOptions process_options(const Command& cmd, double input_hz) {
    ProcessOptions o;
    o.input_hz = input_hz;
    o.process_hz = cmd.process_hz;
    if (!cmd.joint_map.empty()) o.joint_map = read_joint_map(cmd.joint_map);
    return o;
}

int gen_fixture(const Command& cmd, std::ostream& out) {
    const Plant p = plant_for(cmd);
    write_plant(p, cmd.out);
    out << "wrote " << to_string(parse_fixture_kind(cmd.kind)) << " plant (" << p.njoints() << " joints, "
        << p.nactuators() << " actuators) to " << cmd.out << "\n";
    return kExitOk;
}

int simulate_cmd(const Command& cmd, std::ostream& out) {
    const Plant p = plant_for(cmd);
    const Index frames = static_cast<Index>(std::llround(cmd.duration / cmd.dt)) + 1;
    const Eigen::MatrixXd ctrl = smooth_random_ctrl(frames, p.nactuators(), cmd.dt, cmd.seed);
    const auto roll = simulate(p, PlantState::rest(p), ctrl, cmd.dt);
    const double rate = 1.0 / cmd.dt;

    Session poses;
    poses.id = fs::path(cmd.out).filename().string();
    poses.rate_hz = cmd.rate_out > 0 ? cmd.rate_out : rate;
    for (const auto& j : p.joint_names) poses.channels.push_back({j, "rad"});
    poses.data = cmd.rate_out > 0 ? resample(roll.q, rate, cmd.rate_out) : roll.q;
    poses.metadata = {{"source", "simulate"}, {"seed", std::to_string(cmd.seed)}};
    write_session(poses, cmd.out);

    if (!cmd.ctrl_out.empty()) {
        Session c;
        c.id = poses.id + "_ctrl";
        c.rate_hz = rate;
        for (const auto& m : p.muscles) c.channels.push_back({m.name, "ctrl"});
        c.data = ctrl;
        c.metadata = poses.metadata;
        write_session(c, cmd.ctrl_out);
    }
    out << "simulated " << frames << " frames at " << rate << " Hz; wrote " << poses.frames() << " frames at "
        << poses.rate_hz << " Hz to " << cmd.out << "\n";
    return kExitOk;
}

int invert_cmd(const Command& cmd, std::ostream& out, std::ostream& err) {
    const Plant p = plant_for(cmd);
    const Session poses = read_session(cmd.in);
    const auto res = process_session(poses, p, process_options(cmd, poses.rate_hz));
    out << "session " << res.record.id << ": frames " << res.record.frames << ", infeasible "
        << res.record.infeasible_frames << ", max residual " << res.record.max_residual << "\n";
    if (!res.output) {
        err << "inversion failed: " << res.record.failure_reason << "\n";
        return kExitFailure;
    }
    write_session(*res.output, cmd.out);
    return kExitOk;
}

int roundtrip_cmd(const Command& cmd, std::ostream& out) {
    const Plant p = plant_for(cmd);
    const auto rep = round_trip(p, cmd.duration, cmd.dt, cmd.seed, cmd.residual_tol);
    const bool pass = rep.inversion_ok && rep.rmse < cmd.rmse_tol && rep.fraction_small_residual >= cmd.min_fraction;
    out << std::setprecision(6) << "frames " << rep.frames << "\n"
        << "trajectory_rmse_rad " << rep.rmse << " (tol " << cmd.rmse_tol << ")\n"
        << "max_residual " << rep.max_residual << "\n"
        << "frames_below_residual_tol " << rep.fraction_small_residual << " (need " << cmd.min_fraction << ")\n"
        << "infeasible_frames " << rep.infeasible_frames << "\n"
        << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitOk : kExitFailure;
}

int batch_cmd(const Command& cmd, std::ostream& out) {
    const Plant p = plant_for(cmd);
    const int workers = resolve_workers(cmd.workers);
    const auto m = run_batch(cmd.in, p, workers, cmd.out, process_options(cmd, 2000.0));
    out << "sessions " << m.sessions.size() << ": " << m.ok_count() << " ok, " << m.failed_count() << " failed\n";
    for (const auto& r : m.sessions)
        if (!r.ok) out << "  failed " << r.path << ": " << r.failure_reason << "\n";
    return m.failed_count() == 0 ? kExitOk : kExitFailure;
}

int resample_cmd(const Command& cmd, std::ostream& out) {
    Session s = read_session(cmd.in);
    const double from = s.rate_hz;
    s.data = resample(s.data, from, cmd.to_hz);
    s.rate_hz = cmd.to_hz;
    write_session(s, cmd.out);
    out << "resampled " << cmd.in << " from " << from << " Hz to " << cmd.to_hz << " Hz (" << s.frames()
        << " frames)\n";
    return kExitOk;
}

}  // namespace

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
    try {
        switch (cmd.sub) {
            case Subcommand::gen_fixture: return gen_fixture(cmd, out);
            case Subcommand::simulate: return simulate_cmd(cmd, out);
            case Subcommand::invert: return invert_cmd(cmd, out, err);
            case Subcommand::roundtrip: return roundtrip_cmd(cmd, out);
            case Subcommand::batch: return batch_cmd(cmd, out);
            case Subcommand::resample: return resample_cmd(cmd, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace myoctl::cli
