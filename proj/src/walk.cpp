#include "collapse/walk.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace collapse {

void WalkConfig::validate() const
{
    if (grid_resolution < 2) {
        throw Error(ErrorCode::InvalidArgument,
                    "grid resolution must be >= 2, got " + std::to_string(grid_resolution));
    }
    // 100 M^2 must fit in int64.
    if (grid_resolution > 100'000'000) {
        throw Error(ErrorCode::InvalidArgument, "grid resolution too large");
    }
    if (max_steps < 0) {
        throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
    }
}

std::vector<std::int64_t> quantize_weights(std::span<const double> weights, std::int64_t grid_resolution)
{
    if (grid_resolution < 2) {
        throw Error(ErrorCode::InvalidArgument, "grid resolution must be >= 2");
    }
    const std::size_t n = weights.size();
    if (n < 2) {
        throw Error(ErrorCode::TooFewStates, "need at least 2 weights");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "weights must sum to 1, got " + std::to_string(sum));
    }

    const auto m = static_cast<double>(grid_resolution);
    std::vector<std::int64_t> units(n);
    std::vector<double> remainder(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = m * weights[i];
        units[i] = static_cast<std::int64_t>(std::floor(target));
        remainder[i] = target - static_cast<double>(units[i]);
        assigned += units[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Remainders closer than 1e-12 count as tied; stable sort keeps index order.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
    std::int64_t deficit = grid_resolution - assigned;
    for (std::size_t r = 0; deficit > 0; r = (r + 1) % n, --deficit) {
        ++units[order[r]];
    }
    for (std::size_t r = n; deficit < 0; ++deficit) {
        // Only reachable when the weights overshoot 1 by rounding.
        do {
            r = (r == 0 ? n : r) - 1;
        } while (units[order[r]] == 0);
        --units[order[r]];
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] > 0.0 && units[i] == 0 && grid_resolution < 10 * static_cast<std::int64_t>(n)) {
            throw Error(ErrorCode::DegenerateGrid,
                        "state " + std::to_string(i) + " rounds to 0 at M=" + std::to_string(grid_resolution) +
                            "; raise the grid resolution");
        }
    }
    return units;
}

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);
constexpr std::uint64_t kEvenBits = 0x5555555555555555ULL;

std::int64_t pair_count(std::size_t alive) noexcept
{
    return static_cast<std::int64_t>(alive * (alive - 1) / 2);
}

// Unordered pair number p of positions (i < j), enumerated (0,1), (0,2), ..., (1,2), ...
std::pair<std::size_t, std::size_t> decode_pair(std::size_t p, std::size_t alive) noexcept
{
    std::size_t i = 0;
    std::size_t row = alive - 1;
    while (p >= row) {
        p -= row;
        ++i;
        --row;
    }
    return {i, i + 1 + p};
}

// Moves one unit between positions i and j of the alive list; `gain_first`
// selects the direction. Returns the position that hit zero, or npos.
std::size_t transfer(std::span<std::int64_t> units, std::span<const std::size_t> alive_list, std::size_t i,
                     std::size_t j, bool gain_first) noexcept
{
    const std::size_t winner = gain_first ? i : j;
    const std::size_t loser = gain_first ? j : i;
    ++units[alive_list[winner]];
    --units[alive_list[loser]];
    return units[alive_list[loser]] == 0 ? loser : npos;
}

struct KernelResult {
    std::size_t winner = npos;
    std::int64_t steps = 0;
    std::vector<Elimination> eliminations;
    bool capped = false;
};

/*
 * Random bits are consumed in word pairs: a pair word holding fixed-width
 * pair fields (none when only one pair exists) and a direction word. Slot s
 * uses pair bits [s*w, s*w + w) and the direction bit at s*max(w, 1). Fields
 * >= pair_count are rejected and are not steps. After an elimination the
 * rest of both words is discarded.
 *
 * With two or three alive states and every count larger than the slots per
 * word, no elimination can happen inside the word, so the whole word is
 * applied at once with popcounts. Both paths consume identical bits and give
 * identical trajectories at word boundaries.
 */
template <class Hook>
KernelResult walk_kernel(std::vector<std::int64_t>& units, std::int64_t cap, Xoshiro256& rng, Hook&& hook,
                         bool allow_blocks)
{
    KernelResult result;
    std::vector<std::size_t> alive;
    for (std::size_t s = 0; s < units.size(); ++s) {
        if (units[s] > 0) {
            alive.push_back(s);
        } else {
            result.eliminations.push_back({s, 0});
        }
    }

    while (alive.size() > 1) {
        const std::size_t n = alive.size();
        const std::int64_t pairs = pair_count(n);
        const int width = pairs == 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(pairs - 1));
        const int stride = std::max(width, 1);
        const int slots = 64 / stride;
        const std::uint64_t field_mask = (std::uint64_t{1} << width) - 1;

        bool eliminated = false;
        while (!eliminated) {
            const std::uint64_t pair_word = width > 0 ? rng() : 0;
            const std::uint64_t dir_word = rng();

            if (allow_blocks && n <= 3 && result.steps + slots <= cap) {
                std::int64_t low = units[alive[0]];
                for (std::size_t k = 1; k < n; ++k) {
                    low = std::min(low, units[alive[k]]);
                }
                if (low > slots) {
                    if (n == 2) {
                        const std::int64_t d = 2 * std::popcount(dir_word) - 64;
                        units[alive[0]] += d;
                        units[alive[1]] -= d;
                        result.steps += 64;
                    } else {
                        const std::uint64_t lo = pair_word & kEvenBits;
                        const std::uint64_t hi = (pair_word >> 1) & kEvenBits;
                        const std::uint64_t masks[3] = {kEvenBits & ~(lo | hi), lo & ~hi, hi & ~lo};
                        for (std::size_t p = 0; p < 3; ++p) {
                            const auto [i, j] = decode_pair(p, 3);
                            const int count = std::popcount(masks[p]);
                            const std::int64_t d = 2 * std::popcount(dir_word & masks[p]) - count;
                            units[alive[i]] += d;
                            units[alive[j]] -= d;
                            result.steps += count;
                        }
                    }
                    continue;
                }
            }

            for (int s = 0; s < slots; ++s) {
                const auto field = static_cast<std::int64_t>((pair_word >> (s * width)) & field_mask);
                if (field >= pairs) {
                    continue;
                }
                if (result.steps == cap) {
                    result.capped = true;
                    return result;
                }
                const bool gain_first = ((dir_word >> (s * stride)) & 1U) != 0;
                const auto [i, j] = decode_pair(static_cast<std::size_t>(field), n);
                const std::size_t dead = transfer(units, alive, i, j, gain_first);
                ++result.steps;
                if (dead != npos) {
                    result.eliminations.push_back({alive[dead], result.steps});
                    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(dead));
                    eliminated = true;
                }
                hook(result.steps, units);
                if (eliminated) {
                    break;
                }
            }
        }
    }
    result.winner = alive.front();
    return result;
}

JointState joint_from_units(const JointState& initial, std::span<const std::int64_t> units, std::int64_t grid)
{
    JointState joint = initial;
    for (std::size_t i = 0; i < units.size(); ++i) {
        joint.weights[i] = static_cast<double>(units[i]) / static_cast<double>(grid);
        if (units[i] == 0) {
            joint.alive[i] = false;
        }
    }
    return update_cross_terms(std::move(joint));
}

}  // namespace

std::size_t walk_step(GridState& grid, Xoshiro256& rng)
{
    std::vector<std::size_t> alive;
    for (std::size_t s = 0; s < grid.units.size(); ++s) {
        if (grid.alive[s]) {
            alive.push_back(s);
        }
    }
    if (alive.size() < 2) {
        throw Error(ErrorCode::NoAlivePair, "fewer than 2 alive states");
    }
    const auto p = uniform_below(rng, static_cast<std::uint64_t>(pair_count(alive.size())));
    const bool gain_first = uniform_below(rng, 2) == 1;
    const auto [i, j] = decode_pair(static_cast<std::size_t>(p), alive.size());
    const std::size_t dead = transfer(grid.units, alive, i, j, gain_first);
    if (dead == npos) {
        return npos;
    }
    grid.alive[alive[dead]] = false;
    return alive[dead];
}

JointState update_cross_terms(JointState joint)
{
    const std::size_t n = joint.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (joint.weights[i] == 0.0) {
            joint.alive[i] = false;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!joint.alive[i] || !joint.alive[j]) {
                joint.kappa(i, j) = Complex{};
                joint.kappa(j, i) = Complex{};
                continue;
            }
            const Complex old = joint.kappa(i, j);
            const double phase = old == Complex{} ? 0.0 : std::arg(old);
            const Complex updated = std::polar(std::sqrt(joint.weights[i] * joint.weights[j]), phase);
            joint.kappa(i, j) = updated;
            joint.kappa(j, i) = std::conj(updated);
        }
    }
    return joint;
}

WalkOutcome run_walk(const JointState& joint, const WalkConfig& config, Xoshiro256& rng,
                     const StepObserver& observer)
{
    config.validate();
    const std::int64_t grid = config.grid_resolution;
    std::vector<std::int64_t> units = quantize_weights(joint.weights, grid);
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (!joint.alive[i]) {
            units[i] = 0;  // dead states stay dead; their share is lost, not redistributed
        }
    }
    if (std::accumulate(units.begin(), units.end(), std::int64_t{0}) != grid) {
        throw Error(ErrorCode::InvalidArgument, "joint state has weight on dead states");
    }

    KernelResult kr;
    if (observer) {
        kr = walk_kernel(
            units, config.step_cap(), rng,
            [&](std::int64_t step, std::span<const std::int64_t> now) {
                assert(std::accumulate(now.begin(), now.end(), std::int64_t{0}) == grid);
                observer(step, joint_from_units(joint, now, grid));
            },
            false);
    } else {
        kr = walk_kernel(
            units, config.step_cap(), rng, [](std::int64_t, std::span<const std::int64_t>) {}, true);
    }
    if (kr.capped) {
        throw Error(ErrorCode::MaxStepsExceeded,
                    "walk did not reach a vertex within " + std::to_string(config.step_cap()) + " steps");
    }
    WalkOutcome out;
    out.winner = kr.winner;
    out.steps_taken = kr.steps;
    out.elimination_order = std::move(kr.eliminations);
    out.final_state = joint_from_units(joint, units, grid);
    return out;
}

BornStatistics born_statistics(const QuantumState& state, std::int64_t trials, const WalkConfig& config,
                               Exec exec)
{
    if (trials < 1) {
        throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    }
    config.validate();
    const JointState joint = form_joint(state);
    const std::vector<std::int64_t> start = quantize_weights(joint.weights, config.grid_resolution);
    const std::int64_t cap = config.step_cap();

    constexpr std::int64_t kExcluded = -1;
    std::vector<std::int64_t> winners(static_cast<std::size_t>(trials));
    std::vector<std::int64_t> steps(static_cast<std::size_t>(trials));
    for_each_index(exec, winners.size(), [&](std::size_t t) {
        std::vector<std::int64_t> units = start;
        Xoshiro256 rng(config.seed, t);
        const KernelResult kr =
            walk_kernel(units, cap, rng, [](std::int64_t, std::span<const std::int64_t>) {}, true);
        winners[t] = kr.capped ? kExcluded : static_cast<std::int64_t>(kr.winner);
        steps[t] = kr.steps;
    });

    BornStatistics stats;
    stats.requested = trials;
    stats.winner_counts.assign(state.size(), 0);
    double sum_steps = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < winners.size(); ++t) {
        if (winners[t] == kExcluded) {
            ++stats.excluded;
            continue;
        }
        ++stats.winner_counts[static_cast<std::size_t>(winners[t])];
        const auto s = static_cast<double>(steps[t]);
        sum_steps += s;
        sum_sq += s * s;
    }
    if (stats.excluded * 100 > trials) {
        throw Error(ErrorCode::TooManyExcluded, std::to_string(stats.excluded) + " of " + std::to_string(trials) +
                                                    " walks hit the step cap");
    }
    stats.trials = trials - stats.excluded;
    const auto n = static_cast<double>(stats.trials);
    for (const auto count : stats.winner_counts) {
        const double f = static_cast<double>(count) / n;
        stats.frequencies.push_back(f);
        stats.stderr_.push_back(std::sqrt(f * (1.0 - f) / n));
    }
    stats.mean_steps = sum_steps / n;
    const double var = stats.trials > 1 ? (sum_sq - n * stats.mean_steps * stats.mean_steps) / (n - 1.0) : 0.0;
    stats.steps_stderr = std::sqrt(std::max(var, 0.0) / n);
    return stats;
}

}  // namespace collapse
