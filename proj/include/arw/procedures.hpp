#pragma once

// Named toppling procedures and auxiliary processes: the directed sweep, trap
// exploration, the safe-zone drive, killed walks, single-block functions,
// the urn, and Green function estimation.

#include "arw/core_model.hpp"
#include "arw/sitewise.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace arw
{
    class TraceWriter;

    struct Estimate
    {
        double mean = 0.0;
        double std_error = 0.0;
        std::uint64_t samples = 0;
    };

    // ----------------------------------------------------------- directed sweep

    struct SweepResult
    {
        std::vector<std::int64_t> N; // N[0..L]; N[i+1] particles sent from -L+i to -L+i+1
        std::vector<std::uint8_t> Y; // Y[i]: last particle left sleeping at -L+i
        std::uint64_t origin_odometer = 0;
        Status status = Status::Stable;
    };

    /// Exhausts -L, ..., -1 from left to right, then the origin. Requires d = 1,
    /// p(+1) = 1 and [-L, L] inside the domain interior.
    SweepResult directed_sweep(const Configuration &cfg, int L, const InstructionField &field,
                               std::uint64_t budget = kDefaultBudget, TraceWriter *trace = nullptr);

    // --------------------------------------------------------- trap exploration

    struct TrapResult
    {
        enum class Outcome : std::uint8_t
        {
            Success,
            Failed,
        };

        Outcome status = Outcome::Success;
        std::string failure; // empty on success
        std::vector<std::int32_t> traps_positive; // a_1 < a_2 < ...
        std::vector<std::int32_t> traps_negative; // a_{-1} > a_{-2} > ...
        std::vector<std::int32_t> interdistances; // |a_k - a_{k-1}| over both sides, in exploration order
        std::vector<std::int32_t> particles_positive; // x_1 <= x_2 <= ... explored
        std::vector<std::int32_t> particles_negative; // x_{-1} >= x_{-2} >= ...
        std::uint64_t explorer_steps = 0;
        bool replay_ok = false;  // replay of the revealed instructions settled every particle at its trap
        bool origin_untouched = false; // engine check: m(0) = 0 on [x_{-n}, x_n]
    };

    struct TrapOptions
    {
        std::uint64_t max_steps_per_explorer = 1'000'000;
        bool verify = true;
    };

    /// Requires d = 1. Explores at most n particles on each side of the origin.
    TrapResult trap_explore(const Configuration &cfg, int n, const InstructionField &field, TrapOptions opt = {},
                            TraceWriter *trace = nullptr);

    // ---------------------------------------------------------- safe-zone drive

    struct SafeZoneResult
    {
        std::int64_t exits = 0;       // M_n
        std::int64_t left_behind = 0; // N_n
        std::int64_t steps_with_particle = 0;
        std::int64_t initial_particles = 0;
        std::vector<std::pair<std::size_t, Instruction>> log; // every toppling, in order
        Status status = Status::Stable;
    };

    /// Runs the safe-zone procedure on cfg (Kill box, at most one particle per site)
    /// with sites ordered by x.v, ties lexicographic.
    SafeZoneResult safe_zone_drive(const Configuration &cfg, std::span<const double> v, const InstructionField &field,
                                   std::uint64_t budget = kDefaultBudget, bool keep_log = false, TraceWriter *trace = nullptr);

    // -------------------------------------------------------------- killed walk

    struct KilledWalkEstimate
    {
        Estimate killed;
        std::uint64_t truncated = 0; // walks stopped by the horizon while alive (counted as never killed)
    };

    /// Probability that a rate-1 walk with law p, killed at rate lambda while in
    /// {z : z.v <= 0}, is ever killed. lambda = 0 gives exactly 0.
    KilledWalkEstimate killed_walk_prob(const JumpDistribution &p, std::span<const double> v, double lambda,
                                        std::uint64_t replicas, std::uint64_t horizon, std::uint64_t seed);

    // ---------------------------------------------------------- block functions

    struct BlockFunctions
    {
        int K = 0;
        std::vector<std::int64_t> L, R, S, T;
        std::int64_t initial = 0;
        Status status = Status::Stable;
    };

    /// Window whose interior is the block {1, ..., 2K-1}; sites 0 and 2K collect exits.
    LatticeDomain block_domain(int K);

    /// Adds particles one at a time at the source K and restabilizes the block.
    BlockFunctions block_functions(int K, const Configuration &block_cfg, const InstructionField &field, int m_max,
                                   std::uint64_t budget = kDefaultBudget);

    /// Returns a description of the first violated block invariant, if any.
    std::optional<std::string> check_block_invariants(const BlockFunctions &b);

    // --------------------------------------------------------------------- urn

    struct UrnResult
    {
        std::uint64_t k_star = 0;
        std::int64_t X = 0;
        std::int64_t Z = 0;
        std::uint64_t destroyed = 0; // sum of Y_k, uncapped
    };

    UrnResult urn_run(std::int64_t r, double zeta_pp, std::uint64_t seed);

    // ---------------------------------------------------------- Green function

    struct GreenEstimate
    {
        Estimate visits;
        bool not_transient = false; // d <= 2: the estimate grows with the horizon
    };

    /// Mean number of visits to the start, time 0 included, over `horizon` steps.
    GreenEstimate green_function_estimate(const JumpDistribution &p, std::uint64_t replicas, std::uint64_t horizon,
                                          std::uint64_t seed);
}
