#include "myoctl/plant.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "myoctl/random.hpp"

namespace myoctl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

PlantState PlantState::rest(const Plant& plant) {
    return {VectorXd::Zero(plant.njoints()), VectorXd::Zero(plant.njoints()), VectorXd::Zero(plant.nactuators())};
}

void validate(const Plant& plant) {
    const Index nj = plant.njoints();
    const Index na = plant.nactuators();
    auto fail = [](const std::string& what) { throw PlantConfigError("plant: " + what); };
    if (nj < 1 || na < 1) fail("needs at least one joint and one actuator");
    if (static_cast<Index>(plant.joint_names.size()) != nj || plant.joint_lo.size() != nj ||
        plant.joint_hi.size() != nj || plant.inertia.size() != nj || plant.damping.size() != nj ||
        plant.gravity.size() != nj)
        fail("per-joint arrays do not match njoints");
    if (plant.length_offsets.size() != na || static_cast<Index>(plant.muscles.size()) != na)
        fail("per-actuator arrays do not match nactuators");
    if (!plant.moment_arms.allFinite() || !plant.length_offsets.allFinite() || !plant.inertia.allFinite() ||
        !plant.damping.allFinite() || !plant.gravity.allFinite() || !plant.joint_lo.allFinite() ||
        !plant.joint_hi.allFinite())
        fail("non-finite entries");
    for (Index j = 0; j < nj; ++j) {
        const auto& name = plant.joint_names[static_cast<std::size_t>(j)];
        if (!(plant.joint_lo[j] < plant.joint_hi[j])) fail("empty range for joint " + name);
        const auto row = plant.moment_arms.row(j);
        if (!((row.array() > 0).any() && (row.array() < 0).any()))
            fail("joint " + name + " lacks an antagonist pair (needs positive and negative moment arms)");
        if (!(plant.inertia[j] > 0)) fail("non-positive inertia for joint " + name);
        if (!(plant.damping[j] >= 0)) fail("negative damping for joint " + name);
    }
    const auto [lo, hi] = tendon_length_range(plant);
    for (Index i = 0; i < na; ++i) {
        const auto& m = plant.muscles[static_cast<std::size_t>(i)];
        if (!(lo[i] > 0)) fail("tendon " + m.name + " reaches non-positive length inside the joint range");
        try {
            m.params.validate();
            m.geometry.validate();
        } catch (const ContractViolation& e) {
            fail("muscle " + m.name + ": " + e.what());
        }
    }
}

std::pair<VectorXd, VectorXd> tendon_length_range(const Plant& plant) {
    const Index na = plant.nactuators();
    VectorXd lo = plant.length_offsets;
    VectorXd hi = plant.length_offsets;
    for (Index i = 0; i < na; ++i) {
        for (Index j = 0; j < plant.njoints(); ++j) {
            const double a = plant.moment_arms(j, i);
            const double at_lo = -a * plant.joint_lo[j];
            const double at_hi = -a * plant.joint_hi[j];
            lo[i] += std::min(at_lo, at_hi);
            hi[i] += std::max(at_lo, at_hi);
        }
    }
    return {lo, hi};
}

double acc0(const Plant& plant, Index actuator) {
    if (actuator < 0 || actuator >= plant.nactuators()) throw std::out_of_range("acc0: actuator index");
    return plant.moment_arms.col(actuator).cwiseQuotient(plant.inertia).norm();
}

void calibrate(Plant& plant) {
    const auto [lo, hi] = tendon_length_range(plant);
    for (Index i = 0; i < plant.nactuators(); ++i) {
        auto& m = plant.muscles[static_cast<std::size_t>(i)];
        m.geometry = calibrate_geometry(lo[i], hi[i], m.params, acc0(plant, i), m.name);
    }
}

TendonState tendon_kinematics(const Plant& plant, const VectorXd& q, const VectorXd& qdot) {
    if (q.size() != plant.njoints() || qdot.size() != plant.njoints())
        throw ContractViolation("tendon_kinematics: state dimension mismatch");
    TendonState t{plant.length_offsets - plant.moment_arms.transpose() * q, -plant.moment_arms.transpose() * qdot};
    for (Index i = 0; i < t.lengths.size(); ++i)
        if (!(t.lengths[i] > 0))
            throw PlantConfigError("tendon " + plant.muscles[static_cast<std::size_t>(i)].name +
                                   " has non-positive length");
    return t;
}

ActuatorGains actuator_gains(const Plant& plant, const TendonState& tendons) {
    const Index na = plant.nactuators();
    ActuatorGains g{VectorXd(na), VectorXd(na)};
    for (Index i = 0; i < na; ++i) {
        const auto& m = plant.muscles[static_cast<std::size_t>(i)];
        const auto s = normalized_state(tendons.lengths[i], tendons.velocities[i], m.geometry);
        const auto gb = gain_bias(s.L, s.V, m.geometry, m.params);
        g.gain[i] = gb.gain;
        g.bias[i] = gb.bias;
    }
    return g;
}

VectorXd gravity_torque(const Plant& plant, const VectorXd& q) {
    return plant.gravity.cwiseProduct(q.array().sin().matrix());
}

VectorXd inverse_dynamics(const Plant& plant, const VectorXd& q, const VectorXd& qdot, const VectorXd& qddot) {
    return plant.inertia.cwiseProduct(qddot) + plant.damping.cwiseProduct(qdot) + gravity_torque(plant, q);
}

TauMode<double> tau_mode_for(const Muscle& muscle, TauModeKind kind) {
    if (kind == TauModeKind::hard) return TauMode<double>::hard();
    return TauMode<double>::smooth(muscle.params.tau_smooth);
}

StepTrace forward_step_traced(const Plant& plant, const PlantState& state, const VectorXd& ctrl, double dt,
                              TauModeKind mode) {
    const Index nj = plant.njoints();
    const Index na = plant.nactuators();
    if (state.q.size() != nj || state.qdot.size() != nj || state.act.size() != na || ctrl.size() != na)
        throw ContractViolation("forward_step: dimension mismatch");
    if (!(dt > 0)) throw ContractViolation("forward_step: dt must be positive");
    if (!((ctrl.array() >= 0).all() && (ctrl.array() <= 1).all()))
        throw ContractViolation("forward_step: ctrl outside [0, 1]");
    if (!state.q.allFinite() || !state.qdot.allFinite() || !state.act.allFinite())
        throw SimulationError("forward_step: non-finite state");

    StepTrace tr;
    tr.next.act.resize(na);
    for (Index i = 0; i < na; ++i) {
        const auto& m = plant.muscles[static_cast<std::size_t>(i)];
        tr.next.act[i] = step_activation(state.act[i], ctrl[i], dt, m.params.tau_act, m.params.tau_deact,
                                         tau_mode_for(m, mode));
    }
    tr.tendons = tendon_kinematics(plant, state.q, state.qdot);
    const auto g = actuator_gains(plant, tr.tendons);
    tr.forces = g.gain.cwiseProduct(tr.next.act) + g.bias;
    tr.torques = plant.moment_arms * tr.forces;

    const VectorXd qddot =
        (tr.torques - plant.damping.cwiseProduct(state.qdot) - gravity_torque(plant, state.q)).cwiseQuotient(plant.inertia);
    tr.next.qdot = state.qdot + dt * qddot;
    tr.next.q = state.q + dt * tr.next.qdot;
    if (!tr.next.q.allFinite() || !tr.next.qdot.allFinite()) throw SimulationError("forward_step: state diverged");
    return tr;
}

PlantState forward_step(const Plant& plant, const PlantState& state, const VectorXd& ctrl, double dt,
                        TauModeKind mode) {
    return forward_step_traced(plant, state, ctrl, dt, mode).next;
}

// ---------------------------------------------------------------------------
// Fixtures

FixtureKind parse_fixture_kind(const std::string& name) {
    if (name == "toy_finger") return FixtureKind::toy_finger;
    if (name == "hand_like") return FixtureKind::hand_like;
    if (name == "random") return FixtureKind::random;
    throw std::invalid_argument("unknown fixture kind '" + name + "' (expected toy_finger, hand_like or random)");
}

std::string to_string(FixtureKind kind) {
    switch (kind) {
        case FixtureKind::toy_finger: return "toy_finger";
        case FixtureKind::hand_like: return "hand_like";
        case FixtureKind::random: return "random";
    }
    return "unknown";
}

namespace {

constexpr double kFixtureRestoring = 300.0;  // gravity coefficient per unit inertia (1/s^2)

struct MuscleSpec {
    std::string name;
    std::vector<std::pair<Index, double>> arms;  // (joint, moment arm)
};

Plant assemble(std::vector<std::string> joints, VectorXd lo, VectorXd hi, VectorXd inertia, VectorXd damping,
               const std::vector<MuscleSpec>& specs, double slack) {
    Plant p;
    const auto nj = static_cast<Index>(joints.size());
    const auto na = static_cast<Index>(specs.size());
    p.joint_names = std::move(joints);
    p.joint_lo = std::move(lo);
    p.joint_hi = std::move(hi);
    p.inertia = std::move(inertia);
    p.damping = std::move(damping);
    // Joint-centering load; without it the passive curves drive the joints
    // away from the calibrated range.
    p.gravity = kFixtureRestoring * p.inertia;
    p.moment_arms = MatrixXd::Zero(nj, na);
    p.length_offsets = VectorXd::Zero(na);
    for (Index i = 0; i < na; ++i) {
        const auto& s = specs[static_cast<std::size_t>(i)];
        for (const auto& [j, a] : s.arms) p.moment_arms(j, i) = a;
        p.muscles.push_back({s.name, MuscleParams<double>{}, MuscleGeometry<double>{}});
    }
    // Place each tendon so its shortest length maps to range_lo with a
    // tendon slack of `slack` metres.
    const auto [min_len, max_len] = tendon_length_range(p);
    for (Index i = 0; i < na; ++i) {
        const auto& prm = p.muscles[static_cast<std::size_t>(i)].params;
        const double L0 = (max_len[i] - min_len[i]) / (prm.range_hi - prm.range_lo);
        p.length_offsets[i] = slack + prm.range_lo * L0 - min_len[i];
    }
    calibrate(p);
    validate(p);
    return p;
}

Plant toy_finger() {
    const std::vector<std::string> joints{"mcp_flexion", "pip_flexion"};
    VectorXd lo(2), hi(2), inertia(2), damping(2);
    lo << -1.0, -1.0;
    hi << 1.0, 1.0;
    inertia << 2e-3, 1e-3;
    damping << 0.1, 0.05;
    const std::vector<MuscleSpec> specs{
        {"flexor_long", {{0, 0.010}, {1, 0.008}}},
        {"extensor", {{0, -0.009}, {1, -0.006}}},
        {"flexor_mcp", {{0, 0.007}}},
        {"extensor_pip", {{1, -0.007}}},
    };
    return assemble(joints, lo, hi, inertia, damping, specs, 0.05);
}

Plant hand_like() {
    std::vector<std::string> joints{"pro_sup", "deviation", "flexion"};
    const char* fingers[] = {"thumb", "index", "middle", "ring", "little"};
    for (const char* f : fingers)
        for (const char* j : {"abduction", "mcp_flexion", "pip_flexion", "dip_flexion"})
            joints.push_back(std::string(f) + "_" + j);
    const Index nj = static_cast<Index>(joints.size());

    VectorXd lo = VectorXd::Constant(nj, -1.0);
    VectorXd hi = VectorXd::Constant(nj, 1.0);
    VectorXd inertia(nj);
    inertia.head(3).setConstant(5e-3);
    for (Index f = 0; f < 5; ++f) {
        const Index b = 3 + 4 * f;
        inertia.segment(b, 4) << 5e-4, 1e-3, 5e-4, 3e-4;
        lo[b] = -0.5;
        hi[b] = 0.5;
    }
    const VectorXd damping = 50.0 * inertia;

    // Wrist: pro_sup = 0, deviation = 1, flexion = 2.
    std::vector<MuscleSpec> specs{
        {"fcr", {{2, 0.015}, {1, 0.008}}},
        {"fcu", {{2, 0.015}, {1, -0.010}}},
        {"ecrl", {{2, -0.012}, {1, 0.010}}},
        {"ecrb", {{2, -0.013}, {1, 0.004}}},
        {"ecu", {{2, -0.010}, {1, -0.012}}},
        {"pronator_teres", {{0, 0.010}, {2, 0.003}}},
        {"pronator_quadratus", {{0, 0.008}}},
        {"supinator", {{0, -0.011}}},
        {"brachioradialis", {{0, -0.005}, {2, 0.004}}},
    };
    for (Index f = 0; f < 5; ++f) {
        const std::string n = fingers[f];
        const Index a = 3 + 4 * f, m = a + 1, p = a + 2, d = a + 3;
        specs.push_back({n + "_fdp", {{m, 0.010}, {p, 0.008}, {d, 0.006}}});
        specs.push_back({n + "_fds", {{m, 0.009}, {p, 0.007}}});
        specs.push_back({n + "_ext", {{m, -0.008}, {p, -0.005}, {d, -0.004}}});
        specs.push_back({n + "_dorsal_int", {{a, 0.006}, {m, 0.003}}});
        specs.push_back({n + "_palmar_int", {{a, -0.006}, {m, 0.003}}});
        specs.push_back({n + "_lumbrical", {{m, 0.005}, {p, -0.003}, {d, -0.003}}});
    }
    return assemble(joints, lo, hi, inertia, damping, specs, 0.05);
}

Plant random_plant(std::uint64_t seed, Index nj, Index na) {
    if (nj < 1 || na < 2 * nj)
        throw std::invalid_argument("random fixture needs njoints >= 1 and nactuators >= 2 * njoints");
    SplitMix64 rng(seed);
    std::vector<std::string> joints;
    for (Index j = 0; j < nj; ++j) joints.push_back("joint_" + std::to_string(j));
    VectorXd lo(nj), hi(nj), inertia(nj);
    for (Index j = 0; j < nj; ++j) {
        lo[j] = -rng.uniform(0.5, 1.0);
        hi[j] = rng.uniform(0.5, 1.0);
        inertia[j] = rng.uniform(5e-4, 2e-3);
    }
    const VectorXd damping = 50.0 * inertia;

    std::vector<MuscleSpec> specs;
    // One agonist/antagonist pair per joint, optionally crossing the next joint.
    for (Index j = 0; j < nj; ++j) {
        for (double sign : {1.0, -1.0}) {
            MuscleSpec s{"m" + std::to_string(specs.size()), {{j, sign * rng.uniform(0.005, 0.015)}}};
            if (j + 1 < nj && rng.uniform(0.0, 1.0) < 0.5) s.arms.push_back({j + 1, sign * rng.uniform(0.002, 0.008)});
            specs.push_back(std::move(s));
        }
    }
    while (static_cast<Index>(specs.size()) < na) {
        MuscleSpec s{"m" + std::to_string(specs.size()), {}};
        const Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(nj)));
        const Index span = 1 + static_cast<Index>(rng.below(3));
        const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        for (Index j = first; j < std::min(nj, first + span); ++j) s.arms.push_back({j, sign * rng.uniform(0.003, 0.012)});
        specs.push_back(std::move(s));
    }
    return assemble(joints, lo, hi, inertia, damping, specs, rng.uniform(0.03, 0.08));
}

}  // namespace

Plant make_fixture(const FixtureSpec& spec) {
    switch (spec.kind) {
        case FixtureKind::toy_finger: return toy_finger();
        case FixtureKind::hand_like: return hand_like();
        case FixtureKind::random: return random_plant(spec.seed, spec.njoints, spec.nactuators);
    }
    throw std::invalid_argument("make_fixture: unknown kind");
}

// ---------------------------------------------------------------------------
// Plant files

namespace {

json to_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

VectorXd vector_from(const json& j, const char* key, Index expected) {
    if (!j.contains(key)) throw PlantConfigError(std::string("plant file: missing '") + key + "'");
    const auto v = j.at(key).get<std::vector<double>>();
    if (static_cast<Index>(v.size()) != expected)
        throw PlantConfigError(std::string("plant file: '") + key + "' has wrong length");
    return Eigen::Map<const VectorXd>(v.data(), expected);
}

}  // namespace

std::string plant_to_text(const Plant& plant) {
    json j;
    j["format"] = kPlantFormat;
    j["njoints"] = plant.njoints();
    j["nactuators"] = plant.nactuators();
    j["joint_names"] = plant.joint_names;
    json range = json::array();
    for (Index k = 0; k < plant.njoints(); ++k) range.push_back({plant.joint_lo[k], plant.joint_hi[k]});
    j["joint_range"] = range;
    json am = json::array();
    for (Index r = 0; r < plant.njoints(); ++r) am.push_back(to_json(plant.moment_arms.row(r).transpose()));
    j["moment_arms"] = am;
    j["length_offsets"] = to_json(plant.length_offsets);
    j["inertia"] = to_json(plant.inertia);
    j["damping"] = to_json(plant.damping);
    j["gravity"] = to_json(plant.gravity);
    json muscles = json::array();
    for (const auto& m : plant.muscles) {
        const auto& p = m.params;
        muscles.push_back({
            {"name", m.name},
            {"params",
             {{"range", {p.range_lo, p.range_hi}},
              {"lmin", p.lmin},
              {"lmax", p.lmax},
              {"vmax", p.vmax},
              {"fpmax", p.fpmax},
              {"fvmax", p.fvmax},
              {"scale", p.scale},
              {"force_override", p.force_override},
              {"tau_act", p.tau_act},
              {"tau_deact", p.tau_deact},
              {"tau_smooth", p.tau_smooth}}},
            {"geometry", {{"L0", m.geometry.L0}, {"LT", m.geometry.LT}, {"F0", m.geometry.F0}}},
        });
    }
    j["muscles"] = muscles;
    return j.dump(2) + "\n";
}

Plant plant_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PlantConfigError(std::string("plant file: ") + e.what());
    }
    try {
        if (j.value("format", std::string{}) != kPlantFormat)
            throw PlantConfigError(std::string("plant file: expected format ") + kPlantFormat);
        Plant p;
        const Index nj = j.at("njoints").get<Index>();
        const Index na = j.at("nactuators").get<Index>();
        if (nj < 1 || na < 1) throw PlantConfigError("plant file: bad dimensions");
        p.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        const auto range = j.at("joint_range").get<std::vector<std::vector<double>>>();
        if (static_cast<Index>(range.size()) != nj) throw PlantConfigError("plant file: joint_range length");
        p.joint_lo.resize(nj);
        p.joint_hi.resize(nj);
        for (Index k = 0; k < nj; ++k) {
            const auto& r = range[static_cast<std::size_t>(k)];
            if (r.size() != 2) throw PlantConfigError("plant file: joint_range entries need [lo, hi]");
            p.joint_lo[k] = r[0];
            p.joint_hi[k] = r[1];
        }
        const auto am = j.at("moment_arms").get<std::vector<std::vector<double>>>();
        if (static_cast<Index>(am.size()) != nj) throw PlantConfigError("plant file: moment_arms row count");
        p.moment_arms.resize(nj, na);
        for (Index r = 0; r < nj; ++r) {
            const auto& row = am[static_cast<std::size_t>(r)];
            if (static_cast<Index>(row.size()) != na) throw PlantConfigError("plant file: moment_arms column count");
            for (Index c = 0; c < na; ++c) p.moment_arms(r, c) = row[static_cast<std::size_t>(c)];
        }
        p.length_offsets = vector_from(j, "length_offsets", na);
        p.inertia = vector_from(j, "inertia", nj);
        p.damping = vector_from(j, "damping", nj);
        p.gravity = j.contains("gravity") ? vector_from(j, "gravity", nj) : VectorXd::Zero(nj);
        const auto& muscles = j.at("muscles");
        if (!muscles.is_array() || static_cast<Index>(muscles.size()) != na)
            throw PlantConfigError("plant file: muscles length");
        bool need_calibration = false;
        for (const auto& mj : muscles) {
            Muscle m;
            m.name = mj.at("name").get<std::string>();
            const auto& pj = mj.at("params");
            MuscleParams<double> d;
            const auto r = pj.value("range", std::vector<double>{d.range_lo, d.range_hi});
            if (r.size() != 2) throw PlantConfigError("plant file: muscle range needs two values");
            m.params.range_lo = r[0];
            m.params.range_hi = r[1];
            m.params.lmin = pj.value("lmin", d.lmin);
            m.params.lmax = pj.value("lmax", d.lmax);
            m.params.vmax = pj.value("vmax", d.vmax);
            m.params.fpmax = pj.value("fpmax", d.fpmax);
            m.params.fvmax = pj.value("fvmax", d.fvmax);
            m.params.scale = pj.value("scale", d.scale);
            m.params.force_override = pj.value("force_override", d.force_override);
            m.params.tau_act = pj.value("tau_act", d.tau_act);
            m.params.tau_deact = pj.value("tau_deact", d.tau_deact);
            m.params.tau_smooth = pj.value("tau_smooth", d.tau_smooth);
            if (mj.contains("geometry")) {
                const auto& g = mj.at("geometry");
                m.geometry = {g.at("L0").get<double>(), g.at("LT").get<double>(), g.at("F0").get<double>()};
            } else {
                need_calibration = true;
            }
            p.muscles.push_back(std::move(m));
        }
        if (need_calibration) calibrate(p);
        validate(p);
        return p;
    } catch (const json::exception& e) {
        throw PlantConfigError(std::string("plant file: ") + e.what());
    }
}

void write_plant(const Plant& plant, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plant file " + path.string());
    out << plant_to_text(plant);
    if (!out) throw std::runtime_error("failed writing plant file " + path.string());
}

Plant read_plant(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PlantConfigError("cannot read plant file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return plant_from_text(ss.str());
}

}  // namespace myoctl
