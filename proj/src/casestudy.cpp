#include "agc/casestudy.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace agc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kmh(double v) { return v / 3.6; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int duration_to_steps(double duration, double dt) {
    double raw = duration / dt;
    long long steps = std::llround(raw);
    if (steps <= 0 || std::abs(raw - static_cast<double>(steps)) > 1e-9 * raw) {
        std::ostringstream msg;
        msg << "duration " << duration << " s is not a whole number of " << dt << " s steps";
        throw Error(msg.str());
    }
    return static_cast<int>(steps);
}

void append_csv_number(std::string& line, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    line.append(buf, end);
}

}  // namespace

std::vector<std::string> check_params(const CaseStudyParams& p) {
    if (!(p.dt > 0.0)) throw Error("params: dt must be positive");
    if (!(p.tau >= 0.0 && p.tau <= p.dt)) {
        std::ostringstream msg;
        msg << "params: tau must lie in [0, dt] (tau=" << p.tau << ", dt=" << p.dt << ")";
        throw Error(msg.str());
    }
    if (!(p.headway >= 0.0)) throw Error("params: headway must be non-negative");
    for (auto [v, name] : {std::pair{p.a_min, "a_min"}, {p.a_max, "a_max"},
                           {p.delta_p, "delta_p"}, {p.delta_v, "delta_v"},
                           {p.xi_up, "xi_up"}, {p.xi_down, "xi_down"},
                           {p.eta_up, "eta_up"}, {p.eta_down, "eta_down"}}) {
        if (!(v >= 0.0)) throw Error(std::string("params: ") + name + " must be non-negative");
    }
    std::vector<std::string> warnings;
    double safe_lambda = p.xi_down + p.delta_p;
    if (std::abs(p.lambda - safe_lambda) > 1e-12) {
        std::ostringstream msg;
        msg << "lambda=" << p.lambda << " differs from the safe default xi_down+delta_p="
            << safe_lambda;
        warnings.push_back(msg.str());
    }
    return warnings;
}

LinearContract build_contract_c(const CaseStudyParams& p) {
    check_params(p);
    LinearContract c;
    c.label = "composite-headway";
    c.input_dim = 2;   // (p_l, v_l)
    c.output_dim = 2;  // (p_f, v_f)
    c.assume_next = Matrix{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {0, 0}};
    c.assume_now = Matrix{{-1, -p.dt}, {1, p.dt}, {0, -1}, {0, 1}, {0, -1}};
    c.assume_rhs = Vector{{0, 0, p.dt * p.a_max, p.dt * p.a_min, 0}};
    c.guar_next = Matrix::Zero(1, 4);
    c.guar_now = Matrix{{-1, 0, 1, p.headway}};
    c.guar_rhs = Vector{{0}};
    validate(c);
    return c;
}

LinearContract build_contract_c1(const CaseStudyParams& p) {
    check_params(p);
    const double mu_max = p.tau * p.a_max + p.delta_v;
    const double mu_min = p.tau * p.a_min + p.delta_v;
    LinearContract c = build_contract_c(p);
    c.label = "perception";
    c.output_dim = 2;  // (p_m, v_m)
    c.guar_next = Matrix{{1, 0, -1, 0},  //  p_l+ - p_m+ - tau v_l <= delta_p
                         {-1, 0, 1, 0},  //  p_m+ - p_l+          <= delta_p
                         {0, 1, 0, -1},  //  v_l+ - v_m+          <= mu_max
                         {0, -1, 0, 1},  //  v_m+ - v_l+          <= mu_min
                         {0, 0, 0, 0}};  //  -v_m                 <= 0
    c.guar_now = Matrix{{0, -p.tau, 0, 0},
                        {0, 0, 0, 0},
                        {0, 0, 0, 0},
                        {0, 0, 0, 0},
                        {0, 0, 0, -1}};
    c.guar_rhs = Vector{{p.delta_p, p.delta_p, mu_max, mu_min, 0}};
    validate(c);
    return c;
}

LinearContract build_contract_c2(const CaseStudyParams& p) {
    check_params(p);
    LinearContract c;
    c.label = "dynamics";
    c.input_dim = 2;   // (p_m, v_m)
    c.output_dim = 2;  // (p_f, v_f)
    c.assume_next = Matrix{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    c.assume_now = Matrix{{-1, -(p.dt + p.tau)},
                          {1, p.dt - p.tau},
                          {0, -1},
                          {0, 1}};
    c.assume_rhs = Vector{{p.xi_up, p.xi_down, p.eta_up, p.eta_down}};
    // Measured headway with margin: p_m - p_f - h v_f >= delta_p.
    c.guar_next = Matrix::Zero(1, 4);
    c.guar_now = Matrix{{-1, 0, 1, p.headway}};
    c.guar_rhs = Vector{{-p.delta_p}};
    validate(c);
    return c;
}

CascadeTriple build_cascade(const CaseStudyParams& p) {
    CascadeTriple t;
    t.c1 = build_contract_c1(p);
    t.c2 = build_contract_c2(p);
    t.target = build_contract_c(p);
    validate(t);
    return t;
}

double control_accel(const CaseStudyParams& p, double p_m, double v_m, double p_f, double v_f) {
    const double h = p.headway;
    const double dt = p.dt;
    return (p_m - p_f - h * v_f) / (h * dt) + (dt - p.tau) * v_m / (h * dt) - v_f / h -
           p.lambda / (h * dt);
}

std::pair<AffineSystem, InitSet> build_follower_system(const CaseStudyParams& p) {
    check_params(p);
    if (!(p.headway > 0.0)) throw Error("follower system requires a positive headway");
    const double h = p.headway;
    const double dt = p.dt;

    AffineSystem sys;
    sys.label = "follower-closed-loop";
    sys.state_dim = 2;  // (p_f, v_f)
    sys.input_dim = 2;  // (p_m, v_m)
    // p_f+ = p_f + dt v_f
    // v_f+ = (1/h) p_m + ((dt - tau)/h) v_m - (1/h) p_f - (dt/h) v_f - lambda/h
    sys.state_matrix = Matrix{{1, dt}, {-1 / h, -dt / h}};
    sys.input_matrix = Matrix{{0, 0}, {1 / h, (dt - p.tau) / h}};
    sys.offset = Vector{{0, -p.lambda / h}};
    validate(sys);

    InitSet init;
    init.constraints = Matrix{{-1, 0, 1, h}};
    init.rhs = Vector{{-p.delta_p}};
    return {sys, init};
}

Scenario default_scenario() {
    Scenario s;
    s.params = CaseStudyParams{};
    s.leader.initial_speed = kmh(110);
    s.leader.segments = {
        {0.0, SegmentMode::TargetSpeed, kmh(110)},
        {30.0, SegmentMode::TargetSpeed, kmh(25)},
        {35.0, SegmentMode::TargetSpeed, kmh(110)},
        {40.0, SegmentMode::TargetSpeed, kmh(25)},
        {45.0, SegmentMode::TargetSpeed, kmh(110)},
        {50.0, SegmentMode::TargetSpeed, kmh(25)},
        {55.0, SegmentMode::TargetSpeed, kmh(110)},
        {65.0, SegmentMode::TargetSpeed, kmh(3)},
    };
    s.follower_gap = 70.0;
    s.follower_speed = kmh(113);
    s.duration = 90.0;
    return s;
}

double uniform_draw(std::uint64_t seed, std::uint64_t run, std::uint64_t step,
                    std::uint64_t channel) {
    std::uint64_t x = splitmix64(seed);
    x = splitmix64(x ^ run);
    x = splitmix64(x ^ step);
    x = splitmix64(x ^ channel);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::vector<LeaderStep> integrate_leader(const CaseStudyParams& p, const LeaderProfile& profile,
                                         int n_steps) {
    check_params(p);
    for (size_t i = 1; i < profile.segments.size(); ++i) {
        if (!(profile.segments[i].start_time > profile.segments[i - 1].start_time)) {
            throw Error("leader profile segment times must be strictly increasing");
        }
    }
    // Segment boundaries snap to the step grid.
    std::vector<std::pair<long long, const ProfileSegment*>> starts;
    for (const ProfileSegment& seg : profile.segments) {
        starts.emplace_back(std::llround(seg.start_time / p.dt), &seg);
    }

    std::vector<LeaderStep> out(static_cast<size_t>(n_steps) + 1);
    out[0] = {0.0, profile.initial_speed, 0.0};
    for (int k = 0; k <= n_steps; ++k) {
        double v = out[k].v;
        const ProfileSegment* active = nullptr;
        for (auto& [start, seg] : starts) {
            if (start <= k) active = seg;
        }
        double a = 0.0;
        if (active != nullptr) {
            a = active->mode == SegmentMode::Acceleration ? active->value
                                                          : (active->value - v) / p.dt;
        }
        a = std::min(std::max(a, -p.a_min), p.a_max);
        // Keep v(k+1) = v + dt*a exactly non-negative.
        while (v + p.dt * a < 0.0) a = std::nextafter(a, kInf);
        out[k].a = a;
        if (k < n_steps) {
            out[k + 1].p = out[k].p + p.dt * v;
            out[k + 1].v = v + p.dt * a;
        }
    }
    return out;
}

std::vector<SimulationTrace> simulate(const Scenario& scenario, std::uint64_t seed, int n_runs) {
    const CaseStudyParams& p = scenario.params;
    check_params(p);
    const int n_steps = duration_to_steps(scenario.duration, p.dt);
    if (n_runs <= 0) throw Error("simulate: n_runs must be positive");

    std::vector<LeaderStep> leader = integrate_leader(p, scenario.leader, n_steps);

    // Leader starts follower_gap ahead of the follower's origin.
    const double p_l0 = scenario.follower_gap;
    const double init_margin = p_l0 - 0.0 - p.headway * scenario.follower_speed;
    if (init_margin < p.delta_p) {
        std::ostringstream msg;
        msg << "initial headway margin " << init_margin << " m violates the initial set (needs >= "
            << p.delta_p << " m)";
        throw Error(msg.str());
    }

    std::vector<SimulationTrace> traces;
    traces.reserve(static_cast<size_t>(n_runs));
    for (int run = 0; run < n_runs; ++run) {
        SimulationTrace tr;
        tr.seed = seed;
        tr.run_index = run;
        tr.params = p;
        tr.label = scenario.label;
        tr.steps.resize(static_cast<size_t>(n_steps) + 1);

        TraceStep& first = tr.steps[0];
        first.k = 0;
        first.p_l = p_l0;
        first.v_l = leader[0].v;
        first.a_l = leader[0].a;
        first.p_m = first.p_l;  // measurements start noise-free
        first.v_m = first.v_l;
        first.p_f = 0.0;
        first.v_f = scenario.follower_speed;
        first.a_f = control_accel(p, first.p_m, first.v_m, first.p_f, first.v_f);

        for (int k = 0; k < n_steps; ++k) {
            const TraceStep& cur = tr.steps[k];
            TraceStep& next = tr.steps[k + 1];
            next.k = k + 1;
            next.p_l = cur.p_l + p.dt * cur.v_l;
            next.v_l = leader[k + 1].v;
            next.a_l = leader[k + 1].a;

            const auto step = static_cast<std::uint64_t>(k + 1);
            next.sigma_p = p.tau * uniform_draw(seed, run, step, 0);
            next.sigma_v = p.tau * uniform_draw(seed, run, step, 1);
            next.nu_p = p.delta_p * (2.0 * uniform_draw(seed, run, step, 2) - 1.0);
            next.nu_v = p.delta_v * (2.0 * uniform_draw(seed, run, step, 3) - 1.0);

            next.p_m = (1.0 - next.sigma_p / p.dt) * next.p_l + (next.sigma_p / p.dt) * cur.p_l +
                       next.nu_p;
            next.v_m = std::max(
                0.0, (1.0 - next.sigma_v / p.dt) * next.v_l + (next.sigma_v / p.dt) * cur.v_l +
                         next.nu_v);

            next.p_f = cur.p_f + p.dt * cur.v_f;
            next.v_f = cur.v_f + p.dt * cur.a_f;
            next.a_f = control_accel(p, next.p_m, next.v_m, next.p_f, next.v_f);
        }
        traces.push_back(std::move(tr));
    }
    return traces;
}

TraceReport evaluate_trace(const SimulationTrace& trace, const CaseStudyParams& p) {
    if (trace.steps.empty()) throw Error("evaluate_trace: empty trace");
    TraceReport r;
    r.min_composite_margin = kInf;
    r.max_composite_margin = -kInf;
    r.min_measured_margin = kInf;
    r.headway_ratio.reserve(trace.steps.size());
    for (const TraceStep& s : trace.steps) {
        const double composite = s.p_l - s.p_f - p.headway * s.v_f;
        const double measured = s.p_m - s.p_f - p.headway * s.v_f - p.delta_p;
        r.min_composite_margin = std::min(r.min_composite_margin, composite);
        r.max_composite_margin = std::max(r.max_composite_margin, composite);
        r.min_measured_margin = std::min(r.min_measured_margin, measured);
        r.headway_ratio.push_back(s.v_f <= 1e-9 ? kInf : (s.p_l - s.p_f) / s.v_f);
        if (composite < 0.0 || measured < 0.0) r.violation_steps.push_back(s.k);
    }
    return r;
}

double min_perception_guarantee_margin(const SimulationTrace& trace, const CaseStudyParams& p) {
    const LinearContract c1 = build_contract_c1(p);
    double margin = kInf;
    for (size_t k = 0; k + 1 < trace.steps.size(); ++k) {
        const TraceStep& now = trace.steps[k];
        const TraceStep& next = trace.steps[k + 1];
        Vector now_v{{now.p_l, now.v_l, now.p_m, now.v_m}};
        Vector next_v{{next.p_l, next.v_l, next.p_m, next.v_m}};
        Vector slack = c1.guar_rhs - c1.guar_next * next_v - c1.guar_now * now_v;
        margin = std::min(margin, slack.minCoeff());
    }
    return margin;
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
    out << "k,t,p_l,v_l,a_l,p_m,v_m,p_f,v_f,a_f,sigma_p,sigma_v,nu_p,nu_v\n";
    std::string line;
    for (const TraceStep& s : trace.steps) {
        line.clear();
        line += std::to_string(s.k);
        for (double v : {s.k * trace.params.dt, s.p_l, s.v_l, s.a_l, s.p_m, s.v_m, s.p_f, s.v_f,
                         s.a_f, s.sigma_p, s.sigma_v, s.nu_p, s.nu_v}) {
            line += ',';
            append_csv_number(line, v);
        }
        line += '\n';
        out << line;
    }
}

Json trace_report_to_json(const TraceReport& r) {
    Json j;
    j["min_composite_margin"] = r.min_composite_margin;
    j["max_composite_margin"] = r.max_composite_margin;
    j["min_measured_margin"] = r.min_measured_margin;
    j["violation_steps"] = r.violation_steps;
    return j;
}

CaseStudyParams params_from_json(const Json& j) {
    CaseStudyParams p;
    p.headway = require_field(j, "h", "params").get<double>();
    p.dt = require_field(j, "dt", "params").get<double>();
    p.a_min = require_field(j, "a_min", "params").get<double>();
    p.a_max = require_field(j, "a_max", "params").get<double>();
    p.tau = require_field(j, "tau", "params").get<double>();
    p.delta_p = require_field(j, "delta_p", "params").get<double>();
    p.delta_v = require_field(j, "delta_v", "params").get<double>();
    p.xi_up = require_field(j, "xi_up", "params").get<double>();
    p.xi_down = require_field(j, "xi_down", "params").get<double>();
    p.eta_up = require_field(j, "eta_up", "params").get<double>();
    p.eta_down = require_field(j, "eta_down", "params").get<double>();
    p.lambda = j.contains("lambda") ? j["lambda"].get<double>() : p.xi_down + p.delta_p;
    check_params(p);
    return p;
}

Json params_to_json(const CaseStudyParams& p) {
    Json j;
    j["h"] = p.headway;
    j["dt"] = p.dt;
    j["a_min"] = p.a_min;
    j["a_max"] = p.a_max;
    j["tau"] = p.tau;
    j["delta_p"] = p.delta_p;
    j["delta_v"] = p.delta_v;
    j["xi_up"] = p.xi_up;
    j["xi_down"] = p.xi_down;
    j["eta_up"] = p.eta_up;
    j["eta_down"] = p.eta_down;
    j["lambda"] = p.lambda;
    return j;
}

Scenario scenario_from_json(const Json& j) {
    const Json& version = require_field(j, "schema_version", "scenario");
    if (!version.is_string() || version.get<std::string>() != "1") {
        throw FormatError("scenario: unsupported schema_version (expected \"1\")");
    }
    Scenario s;
    s.label = j.value("label", "scenario");
    s.params = params_from_json(require_field(j, "params", "scenario"));
    s.duration = require_field(j, "duration", "scenario").get<double>();
    const Json& leader = require_field(j, "leader", "scenario");
    s.leader.initial_speed = require_field(leader, "initial_speed", "leader").get<double>();
    for (const Json& seg : require_field(leader, "segments", "leader")) {
        ProfileSegment ps;
        ps.start_time = require_field(seg, "start_time", "segment").get<double>();
        const std::string mode = require_field(seg, "mode", "segment").get<std::string>();
        if (mode == "accel") {
            ps.mode = SegmentMode::Acceleration;
        } else if (mode == "target") {
            ps.mode = SegmentMode::TargetSpeed;
        } else {
            throw FormatError("segment: mode must be \"accel\" or \"target\", got \"" + mode +
                              "\"");
        }
        ps.value = require_field(seg, "value", "segment").get<double>();
        s.leader.segments.push_back(ps);
    }
    const Json& follower = require_field(j, "follower", "scenario");
    s.follower_gap = require_field(follower, "initial_gap", "follower").get<double>();
    s.follower_speed = require_field(follower, "initial_speed", "follower").get<double>();
    return s;
}

Json scenario_to_json(const Scenario& s) {
    Json segments = Json::array();
    for (const ProfileSegment& seg : s.leader.segments) {
        segments.push_back({{"start_time", seg.start_time},
                            {"mode", seg.mode == SegmentMode::Acceleration ? "accel" : "target"},
                            {"value", seg.value}});
    }
    Json j;
    j["schema_version"] = "1";
    j["label"] = s.label;
    j["params"] = params_to_json(s.params);
    j["duration"] = s.duration;
    j["leader"] = {{"initial_speed", s.leader.initial_speed}, {"segments", std::move(segments)}};
    j["follower"] = {{"initial_gap", s.follower_gap}, {"initial_speed", s.follower_speed}};
    return j;
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(load_json_file(path)); }

void save_scenario(const Scenario& s, const std::string& path) {
    save_json_file(path, scenario_to_json(s));
}

}  // namespace agc
