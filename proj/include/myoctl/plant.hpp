#pragma once

// Synthetic musculoskeletal plants with constant moment arms.
//
// Tendon lengths are affine in the joint angles, lengths = c - AM' q, and the
// joint dynamics are decoupled: M qddot + D qdot + g(q) = AM f, with diagonal
// M and D and g_j(q) = gravity_j * sin(q_j).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "myoctl/activation.hpp"
#include "myoctl/muscle_model.hpp"
#include "myoctl/types.hpp"

namespace myoctl {

struct Muscle {
    std::string name;
    MuscleParams<double> params;
    MuscleGeometry<double> geometry;
};

struct Plant {
    std::vector<std::string> joint_names;
    Eigen::VectorXd joint_lo;  // declared joint range (rad)
    Eigen::VectorXd joint_hi;
    Eigen::MatrixXd moment_arms;     // AM, njoints x nactuators (m)
    Eigen::VectorXd length_offsets;  // c (m)
    Eigen::VectorXd inertia;         // diag(M) (kg m^2)
    Eigen::VectorXd damping;         // diag(D) (N m s / rad)
    Eigen::VectorXd gravity;         // per-joint sin(q) coefficient (N m), zero by default
    std::vector<Muscle> muscles;

    Index njoints() const { return moment_arms.rows(); }
    Index nactuators() const { return moment_arms.cols(); }
};

struct PlantState {
    Eigen::VectorXd q;
    Eigen::VectorXd qdot;
    Eigen::VectorXd act;

    static PlantState rest(const Plant& plant);
};

struct TendonState {
    Eigen::VectorXd lengths;
    Eigen::VectorXd velocities;
};

struct ActuatorGains {
    Eigen::VectorXd gain;
    Eigen::VectorXd bias;
};

/// Everything a forward step computed, for invariant checks.
struct StepTrace {
    PlantState next;
    TendonState tendons;        // evaluated at the pre-step (q, qdot)
    Eigen::VectorXd forces;     // per-muscle force f (N, <= 0)
    Eigen::VectorXd torques;    // AM f
};

/// Throws PlantConfigError on the first violated invariant.
void validate(const Plant& plant);

/// Minimum and maximum of each tendon length over the declared joint box.
std::pair<Eigen::VectorXd, Eigen::VectorXd> tendon_length_range(const Plant& plant);

double acc0(const Plant& plant, Index actuator);

/// Recompute every muscle's geometry from the joint range and acc0.
void calibrate(Plant& plant);

TendonState tendon_kinematics(const Plant& plant, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot);

ActuatorGains actuator_gains(const Plant& plant, const TendonState& tendons);

Eigen::VectorXd gravity_torque(const Plant& plant, const Eigen::VectorXd& q);

Eigen::VectorXd inverse_dynamics(const Plant& plant, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& qddot);

StepTrace forward_step_traced(const Plant& plant, const PlantState& state, const Eigen::VectorXd& ctrl, double dt,
                              TauModeKind mode = TauModeKind::smooth);

PlantState forward_step(const Plant& plant, const PlantState& state, const Eigen::VectorXd& ctrl, double dt,
                        TauModeKind mode = TauModeKind::smooth);

TauMode<double> tau_mode_for(const Muscle& muscle, TauModeKind kind);

// ---------------------------------------------------------------------------
// Fixtures

enum class FixtureKind { toy_finger, hand_like, random };

struct FixtureSpec {
    FixtureKind kind = FixtureKind::toy_finger;
    std::uint64_t seed = 0;
    Index njoints = 0;     // random only
    Index nactuators = 0;  // random only
};

FixtureKind parse_fixture_kind(const std::string& name);
std::string to_string(FixtureKind kind);

/// Deterministic fixture plants, already calibrated and validated.
Plant make_fixture(const FixtureSpec& spec);

// ---------------------------------------------------------------------------
// Plant definition files (JSON, "format": "myoctl-plant/1")

inline constexpr const char* kPlantFormat = "myoctl-plant/1";

std::string plant_to_text(const Plant& plant);
Plant plant_from_text(const std::string& text);
void write_plant(const Plant& plant, const std::filesystem::path& path);
Plant read_plant(const std::filesystem::path& path);

}  // namespace myoctl
