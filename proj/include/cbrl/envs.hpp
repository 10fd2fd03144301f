#pragma once

// Episodic environments with continuous states and discrete actions.
//
// LineWorld: a 1-D walk on [-1, 1] in steps of 0.1, start at 0. Reaching +1
// pays +1, reaching -1 costs -1, every step costs 0.01. Always moving right
// returns 0.9, the optimum.
//
// LanderLite: a small 2-D lander with four actions (noop, left thruster,
// main engine, right thruster). Reward is potential-based shaping minus fuel,
// plus +/-100 on landing or crashing. All dynamics constants live in
// LanderConstants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace cbrl::env {

struct EnvSpec {
    std::size_t state_dim = 1;
    std::size_t action_count = 1;
    std::size_t max_steps = 1;
};

struct StepOutcome {
    std::vector<double> next_state;
    double reward = 0.0;
    bool terminal = false;
    bool truncated = false;

    bool done() const { return terminal || truncated; }
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual const EnvSpec& spec() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;
    virtual StepOutcome step(std::size_t action) = 0;
    virtual std::vector<double> observe() const = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;

protected:
    void check_action(std::size_t action) const {
        if (action >= spec().action_count) {
            throw invalid_action(name() + ": action " + std::to_string(action) + " outside [0, " +
                                 std::to_string(spec().action_count) + ")");
        }
    }
};

class LineWorld final : public Environment {
public:
    static constexpr int kGoal = 10;  // in tenths
    static constexpr double kStepCost = 0.01;
    static constexpr double kGoalBonus = 1.0;
    static constexpr double kFailPenalty = 1.0;

    explicit LineWorld(std::size_t max_steps = 100) : spec_{1, 2, max_steps} {
        if (max_steps < 1) throw invalid_parameter("max_steps must be >= 1");
    }

    std::string name() const override { return "lineworld"; }
    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset(Rng&) override {
        position_ = 0;
        steps_ = 0;
        done_ = false;
        return observe();
    }

    /// Places the walker at the nearest grid point to `x`.
    void set_state(double x) {
        position_ = static_cast<int>(std::lround(x * kGoal));
        done_ = false;
    }

    StepOutcome step(std::size_t action) override {
        check_action(action);
        if (done_) throw std::logic_error("lineworld: step after episode end; call reset");
        position_ += action == 1 ? 1 : -1;
        ++steps_;
        StepOutcome out;
        out.reward = -kStepCost;
        if (position_ >= kGoal) {
            out.reward += kGoalBonus;
            out.terminal = true;
        } else if (position_ <= -kGoal) {
            out.reward -= kFailPenalty;
            out.terminal = true;
        }
        out.truncated = !out.terminal && steps_ >= spec_.max_steps;
        done_ = out.done();
        out.next_state = observe();
        return out;
    }

    std::vector<double> observe() const override { return {position_ / static_cast<double>(kGoal)}; }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<LineWorld>(*this); }

private:
    EnvSpec spec_;
    int position_ = 0;
    std::size_t steps_ = 0;
    bool done_ = false;
};

struct LanderConstants {
    double gravity = 0.01;
    double main_thrust = 0.015;
    double side_torque = 0.002;
    double side_lateral = 0.001;
    double pad_half_width = 0.2;
    double start_y = 1.4;
    double start_x_range = 0.2;
    double start_velocity_range = 0.05;
    double start_angle_range = 0.1;
    double landing_speed = 0.05;
    double landing_angle = 0.2;
    double crash_angle = std::numbers::pi / 2.0;
    double landing_bonus = 100.0;
    double crash_penalty = 100.0;
    double main_fuel_cost = 0.3;
    double side_fuel_cost = 0.03;
    double distance_weight = 100.0;
    double speed_weight = 10.0;
    double angle_weight = 100.0;
    double contact_weight = 10.0;
    std::size_t max_steps = 400;

    bool operator==(const LanderConstants&) const = default;
};

struct LanderLiteState {
    double x = 0.0, y = 0.0;
    double vx = 0.0, vy = 0.0;
    double theta = 0.0, omega = 0.0;
    double left_contact = 0.0, right_contact = 0.0;

    std::vector<double> to_vector() const { return {x, y, vx, vy, theta, omega, left_contact, right_contact}; }
};

class LanderLite final : public Environment {
public:
    enum Action : std::size_t { kNoop = 0, kLeft = 1, kMain = 2, kRight = 3 };

    explicit LanderLite(LanderConstants constants = {})
        : constants_(constants), spec_{8, 4, constants.max_steps} {
        if (constants.max_steps < 1) throw invalid_parameter("max_steps must be >= 1");
    }

    std::string name() const override { return "landerlite"; }
    const EnvSpec& spec() const override { return spec_; }
    const LanderConstants& constants() const { return constants_; }
    const LanderLiteState& state() const { return state_; }

    void set_state(const LanderLiteState& s) {
        state_ = s;
        done_ = false;
    }

    std::vector<double> reset(Rng& rng) override {
        const auto& c = constants_;
        state_ = LanderLiteState{};
        state_.x = uniform(rng, -c.start_x_range, c.start_x_range);
        state_.y = c.start_y;
        state_.vx = uniform(rng, -c.start_velocity_range, c.start_velocity_range);
        state_.vy = uniform(rng, -c.start_velocity_range, c.start_velocity_range);
        state_.theta = uniform(rng, -c.start_angle_range, c.start_angle_range);
        steps_ = 0;
        done_ = false;
        return observe();
    }

    /// Shaping potential; per-step reward is potential(s') - potential(s)
    /// minus fuel, so shaping telescopes over a trajectory.
    double potential(const LanderLiteState& s) const {
        const auto& c = constants_;
        return -c.distance_weight * std::hypot(s.x, s.y) - c.speed_weight * std::hypot(s.vx, s.vy) -
               c.angle_weight * std::abs(s.theta) + c.contact_weight * s.left_contact +
               c.contact_weight * s.right_contact;
    }

    StepOutcome step(std::size_t action) override {
        check_action(action);
        if (done_) throw std::logic_error("landerlite: step after episode end; call reset");
        const auto& c = constants_;
        const LanderLiteState before = state_;
        LanderLiteState s = state_;
        const double sin_t = std::sin(s.theta);
        const double cos_t = std::cos(s.theta);

        s.vy -= c.gravity;
        double fuel = 0.0;
        if (action == kMain) {
            s.vx += -sin_t * c.main_thrust;
            s.vy += cos_t * c.main_thrust;
            fuel = c.main_fuel_cost;
        } else if (action == kLeft || action == kRight) {
            const double side = action == kLeft ? 1.0 : -1.0;
            s.omega += side * c.side_torque;
            s.vx -= side * c.side_lateral * cos_t;
            s.vy -= side * c.side_lateral * sin_t;
            fuel = c.side_fuel_cost;
        }
        s.theta += s.omega;
        s.x += s.vx;
        s.y += s.vy;

        const bool on_pad = s.y <= 0.0 && std::abs(s.x) <= c.pad_half_width;
        s.left_contact = s.right_contact = on_pad ? 1.0 : 0.0;
        const double speed = std::hypot(s.vx, s.vy);
        const bool crashed = (s.y < 0.0 && std::abs(s.x) > c.pad_half_width) || std::abs(s.theta) > c.crash_angle ||
                             (on_pad && speed >= c.landing_speed);
        const bool landed = !crashed && on_pad && std::abs(s.vx) < c.landing_speed &&
                            std::abs(s.vy) < c.landing_speed && std::abs(s.theta) < c.landing_angle;
        if (on_pad && !crashed && !landed) {
            // Slow but tilted: rests on the pad.
            s.y = 0.0;
            s.vy = std::max(s.vy, 0.0);
        }

        state_ = s;
        ++steps_;
        StepOutcome out;
        out.reward = potential(s) - potential(before) - fuel;
        if (landed) out.reward += c.landing_bonus;
        if (crashed) out.reward -= c.crash_penalty;
        out.terminal = landed || crashed;
        out.truncated = !out.terminal && steps_ >= spec_.max_steps;
        done_ = out.done();
        out.next_state = observe();
        return out;
    }

    std::vector<double> observe() const override { return state_.to_vector(); }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<LanderLite>(*this); }

private:
    LanderConstants constants_;
    EnvSpec spec_;
    LanderLiteState state_;
    std::size_t steps_ = 0;
    bool done_ = false;
};

/// Best achievable undiscounted return from the start state. Only LineWorld
/// has a closed form.
inline double optimal_return(const Environment& env) {
    if (dynamic_cast<const LineWorld*>(&env) == nullptr) {
        throw unsupported_environment("optimal_return is only defined for lineworld, not " + env.name());
    }
    const auto steps = env.spec().max_steps;
    if (steps < static_cast<std::size_t>(LineWorld::kGoal)) return -LineWorld::kStepCost * static_cast<double>(steps);
    return LineWorld::kGoalBonus - LineWorld::kStepCost * LineWorld::kGoal;
}

inline std::unique_ptr<Environment> make_environment(const std::string& name, std::size_t max_steps,
                                                     LanderConstants lander = {}) {
    if (name == "lineworld") return std::make_unique<LineWorld>(max_steps);
    if (name == "landerlite") {
        lander.max_steps = max_steps;
        return std::make_unique<LanderLite>(lander);
    }
    throw invalid_parameter("unknown environment '" + name + "' (expected lineworld|landerlite)");
}

}  // namespace cbrl::env
