#pragma once

#include "lecam/convergence.hpp"
#include "lecam/io.hpp"
#include "lecam/minimax.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lecam {

inline constexpr const char* kVersion = "0.1.0";

struct Discretization {
    double lo = -6.0;
    double hi = 6.0;
    double step = 0.25;
};

struct ScenarioConfig {
    /// "binomial-lan", or "constant" for P_n equal to the limit at every n.
    std::string scenario = "binomial-lan";
    std::vector<double> t_grid{-1.0, 0.0, 1.0};
    std::vector<int> n_grid{8, 16, 32, 64, 128, 256};
    Discretization discretization;
    /// Explicit (delta, epsilon) stages; empty means 2^-j for j = 1..stages.
    std::vector<ScheduleStage> schedule;
    int stages = 5;
    /// Truncated squared error on lo..hi in steps of `action_step`, unless
    /// `loss` holds an explicit {"actions", "L", "M"} object.
    double action_lo = -2.0;
    double action_hi = 2.0;
    double action_step = 0.125;
    double truncation = 4.0;
    Json loss = nullptr;
    /// R' = ratio * R'' unless `rprime` is set.
    double rprime_ratio = 0.9;
    std::optional<double> rprime;
    double refinement_tolerance = 0.02;
    std::uint64_t seed = 1;

    /// Missing keys keep their defaults; unknown keys are rejected.
    static ScenarioConfig from_json(const Json& value);
    Json to_json() const;
    /// Throws InvalidArgument on a config no run can satisfy.
    void validate() const;
    std::vector<ScheduleStage> resolved_schedule() const;
    std::vector<double> action_grid() const;
};

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// lo, lo + step, ..., hi (hi included when it lies on the lattice).
std::vector<double> lattice(double lo, double hi, double step);

/// Thrown with the failing pipeline stage in the message.
class ScenarioError : public Error {
public:
    using Error::Error;
};

struct ScenarioOutcome {
    Json report;
    /// Every certified bound and inequality held.
    bool passed = false;
};

/// generator -> likelihood laws -> certify_convergence -> minimax on the
/// limit -> lam_transfer_check, plus LAN and discretization sanity tables.
/// The report is a pure function of the config.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

} // namespace lecam
