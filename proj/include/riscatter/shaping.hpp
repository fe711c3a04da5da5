#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riscatter/scatter.hpp"

namespace riscatter {

enum class ObjectiveKind { EnvelopeAtTime, Bimodal, SuppressAtTime };

struct ShapingObjective {
    ObjectiveKind kind = ObjectiveKind::EnvelopeAtTime;
    double t_focus = 0.0;   // seconds (EnvelopeAtTime / SuppressAtTime)
    double t1 = 0.0;        // Bimodal focal times
    double t2 = 0.0;
    std::size_t n_realizations = 1;

    static ShapingObjective envelope_at_time(double t, std::size_t n_realizations = 1);
    static ShapingObjective bimodal(double t1, double t2, std::size_t n_realizations = 1);
    static ShapingObjective suppress_at_time(double t, std::size_t n_realizations = 1);
};

struct FlipRecord {
    std::size_t pass = 0;
    std::size_t flip_index = 0;  // running attempt counter
    std::size_t element = 0;
    bool accepted = false;
    double objective = 0.0;  // value after this attempt
};

struct OptimizationTrace {
    std::vector<RisConfig> configs;          // accepted configs, initial first
    std::vector<double> objective_values;    // strictly increasing
    std::vector<FlipRecord> flips;
    std::size_t flips_attempted = 0;
    std::size_t passes = 0;
    bool converged = false;  // terminated by a zero-accept pass

    void export_csv(const std::string& path) const;
};

struct GreedyResult {
    RisConfig config;
    OptimizationTrace trace;
};

// Precomputed per-(realization, path, freq) phasors for repeated objective
// evaluations of one ensemble under a fixed disorder stream. Used by the
// optimizer; averaged_envelope below is the direct reference route.
class ShapingEvaluator {
  public:
    ShapingEvaluator(const PathEnsemble& ensemble, std::size_t n_realizations, std::uint64_t seed);

    std::vector<double> envelope(const RisConfig& config) const;
    double objective(const RisConfig& config, const ShapingObjective& obj) const;

  private:
    const PathEnsemble& ensemble_;
    std::size_t n_realizations_;
    std::size_t n_bins_;
    std::size_t max_bounces_;
    std::vector<cplx> statics_;   // [r][p][f]
    std::vector<cplx> pow_on_;    // [count][f]
    std::vector<cplx> pow_off_;   // [count][f]
    std::vector<double> pulse_;   // [f]
};

// Mean CIR envelope |h_t| over seeded disorder realizations.
std::vector<double> averaged_envelope(const PathEnsemble& ensemble, const RisConfig& config,
                                      std::size_t n_realizations, std::uint64_t seed);

// Objective value of one configuration (disorder-averaged envelope evaluated
// at the objective's focal taps).
double evaluate_objective(const PathEnsemble& ensemble, const RisConfig& config,
                          const ShapingObjective& objective, std::uint64_t seed);

// Iterative flip-and-keep optimization: flip one element at a time, keep the
// flip only if the objective strictly improves, loop over all elements in a
// fresh random order each pass. Stops early after a pass with no accepted
// flip.
GreedyResult greedy_optimize(const PathEnsemble& ensemble, const ShapingObjective& objective,
                             std::size_t max_passes, std::uint64_t seed);

std::size_t tap_index(const PathEnsemble& ensemble, double t);

}  // namespace riscatter
