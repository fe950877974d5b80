#pragma once

#include "collapse/parallel.hpp"
#include "collapse/rng.hpp"
#include "collapse/states.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace collapse {

struct WalkConfig {
    std::int64_t grid_resolution = 1000;  // M: weights live on multiples of 1/M
    std::int64_t max_steps = 0;           // 0 selects 100 * M^2
    std::uint64_t seed = 0;

    std::int64_t step_cap() const noexcept
    {
        return max_steps > 0 ? max_steps : 100 * grid_resolution * grid_resolution;
    }
    void validate() const;
};

struct Elimination {
    std::size_t state;
    std::int64_t step;

    friend bool operator==(const Elimination&, const Elimination&) = default;
};

struct WalkOutcome {
    std::size_t winner = 0;
    std::int64_t steps_taken = 0;
    std::vector<Elimination> elimination_order;
    JointState final_state;  // weights at the vertex, spectators zeroed
};

struct BornStatistics {
    std::int64_t requested = 0;
    std::int64_t trials = 0;    // completed walks; sum of winner_counts
    std::int64_t excluded = 0;  // walks that hit max_steps
    std::vector<std::int64_t> winner_counts;
    std::vector<double> frequencies;
    std::vector<double> stderr_;
    double mean_steps = 0.0;
    double steps_stderr = 0.0;
};

/// Integer simplex point: units sum to M; a state with zero units is dead.
struct GridState {
    std::vector<std::int64_t> units;
    std::vector<bool> alive;
};

/// Largest-remainder rounding of a simplex point onto the 1/M grid, ties to
/// the lowest index.
std::vector<std::int64_t> quantize_weights(std::span<const double> weights, std::int64_t grid_resolution);

/// One unbiased transfer: a uniformly chosen unordered pair of alive states,
/// one unit moved in a uniformly chosen direction. A state that reaches zero
/// is marked dead. Returns the index of that state, or npos.
std::size_t walk_step(GridState& grid, Xoshiro256& rng);

/// Recomputes the spectators from the current weights: |kappa_ij| = sqrt(w_i w_j)
/// with its phase kept, and zero rows/columns for dead (or zero-weight) states.
JointState update_cross_terms(JointState joint);

/// Called after every step with the step number and the updated joint state.
using StepObserver = std::function<void(std::int64_t step, const JointState& joint)>;

/// Walks until a single state holds the whole grid. Throws MaxStepsExceeded
/// if the step cap is reached first.
WalkOutcome run_walk(const JointState& joint, const WalkConfig& config, Xoshiro256& rng,
                     const StepObserver& observer = {});

/// Runs `trials` independent walks; trial t draws from stream t of
/// config.seed, so the result is the same for any Exec and thread count.
BornStatistics born_statistics(const QuantumState& state, std::int64_t trials, const WalkConfig& config,
                               Exec exec = Exec::parallel);

}  // namespace collapse
