#pragma once

// Two-vehicle headway case study: a leader with bounded acceleration, a
// perception stage producing delayed noisy measurements, and a follower
// driven by an affine control law.
//
// Signals (all SI units): input d = (p_l, v_l) leader position/velocity,
// intermediate z = (p_m, v_m) measured leader state, output y = (p_f, v_f)
// follower state. The composite safety guarantee is
//   p_l(k) - p_f(k) - h v_f(k) >= 0,
// split into a perception contract (measurement error bounds) and a dynamics
// contract (headway against the measured position with margin delta_p).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "agc/contract.hpp"
#include "agc/jsonio.hpp"
#include "agc/satisfaction.hpp"

namespace agc {

struct CaseStudyParams {
    double headway = 2.0;   // h (s)
    double dt = 0.3;        // time step (s)
    double a_min = 9.8;     // braking bound (m/s^2, magnitude)
    double a_max = 9.8;     // acceleration bound (m/s^2)
    double tau = 0.1;       // max measurement delay (s), tau <= dt
    double delta_p = 0.5;   // position measurement noise bound (m)
    double delta_v = 0.1;   // velocity measurement noise bound (m/s)
    double xi_up = 1.75;    // measured-position drift bounds (m)
    double xi_down = 1.45;
    double eta_up = 5.1;    // measured-velocity drift bounds (m/s)
    double eta_down = 5.1;
    // Controller margin (m); the safe default couples it to the assumed
    // measurement behaviour. Overriding it is allowed but reported as a
    // warning by check_params.
    double lambda = xi_down + delta_p;
};

/// Throws on hard violations (dt <= 0, tau outside [0, dt], negative bounds);
/// returns human-readable warnings for legal but unusual settings.
std::vector<std::string> check_params(const CaseStudyParams& p);

// --- Contracts and closed-loop system --------------------------------------

/// Composite contract: leader kinematics assumed, true headway guaranteed.
LinearContract build_contract_c(const CaseStudyParams& p);
/// Perception contract: leader kinematics assumed, measurement error bounded.
LinearContract build_contract_c1(const CaseStudyParams& p);
/// Dynamics contract: measured-signal drift assumed, measured headway with
/// margin delta_p guaranteed.
LinearContract build_contract_c2(const CaseStudyParams& p);

CascadeTriple build_cascade(const CaseStudyParams& p);

/// The control law evaluated literally.
double control_accel(const CaseStudyParams& p, double p_m, double v_m, double p_f, double v_f);

/// Follower double integrator with the control law folded in, plus the
/// initial set {p_m(0) - p_f(0) - h v_f(0) >= delta_p}.
std::pair<AffineSystem, InitSet> build_follower_system(const CaseStudyParams& p);

// --- Leader profile and simulation -----------------------------------------

enum class SegmentMode { Acceleration, TargetSpeed };

struct ProfileSegment {
    double start_time = 0.0;  // seconds; snapped to the step grid
    SegmentMode mode = SegmentMode::TargetSpeed;
    double value = 0.0;  // m/s^2 or m/s depending on mode
};

struct LeaderProfile {
    double initial_speed = 0.0;  // m/s
    std::vector<ProfileSegment> segments;
};

struct Scenario {
    std::string label = "sway-brake-90s";
    CaseStudyParams params;
    LeaderProfile leader;
    double follower_gap = 70.0;    // leader starts this far ahead (m)
    double follower_speed = 0.0;   // m/s
    double duration = 90.0;        // seconds
};

/// 90-second scenario: cruise at 110 km/h, hard swaying between 25 and
/// 110 km/h from t=30s, full brake to 3 km/h at t=65s; follower 70 m behind
/// at 113 km/h.
Scenario default_scenario();

struct TraceStep {
    int k = 0;
    double p_l = 0, v_l = 0, a_l = 0;
    double p_m = 0, v_m = 0;
    double p_f = 0, v_f = 0, a_f = 0;
    double sigma_p = 0, sigma_v = 0;  // delays used for the measurement at k
    double nu_p = 0, nu_v = 0;        // noises used for the measurement at k
};

struct SimulationTrace {
    std::vector<TraceStep> steps;  // k = 0 .. n_steps inclusive
    std::uint64_t seed = 0;
    int run_index = 0;
    CaseStudyParams params;
    std::string label;
};

/// Counter-based uniform draw on [0,1): every (seed, run, step, channel)
/// tuple maps to one double, so traces are reproducible across platforms.
/// Channels: 0 = sigma_p, 1 = sigma_v, 2 = nu_p, 3 = nu_v.
double uniform_draw(std::uint64_t seed, std::uint64_t run, std::uint64_t step,
                    std::uint64_t channel);

struct LeaderStep {
    double p = 0, v = 0, a = 0;
};

/// Integrates the leader exactly: p(k+1) = p(k) + dt v(k), v(k+1) = v(k) +
/// dt a(k) with a clipped to [-a_min, a_max] and v kept >= 0.
std::vector<LeaderStep> integrate_leader(const CaseStudyParams& p, const LeaderProfile& profile,
                                         int n_steps);

std::vector<SimulationTrace> simulate(const Scenario& scenario, std::uint64_t seed, int n_runs);

struct TraceReport {
    double min_composite_margin = 0;  // min over k of p_l - p_f - h v_f
    double max_composite_margin = 0;
    double min_measured_margin = 0;  // min over k of p_m - p_f - h v_f - delta_p
    std::vector<double> headway_ratio;  // (p_l - p_f) / v_f, +inf when v_f ~ 0
    std::vector<int> violation_steps;   // steps where either margin is negative
};

TraceReport evaluate_trace(const SimulationTrace& trace, const CaseStudyParams& p);

/// Minimum slack of the perception contract's guarantee rows along a trace
/// (negative means some row is violated).
double min_perception_guarantee_margin(const SimulationTrace& trace, const CaseStudyParams& p);

void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
Json trace_report_to_json(const TraceReport& r);

Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

CaseStudyParams params_from_json(const Json& j);
Json params_to_json(const CaseStudyParams& p);

}  // namespace agc
