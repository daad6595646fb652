#pragma once

// Continuous-time constructions for finite systems: the Poisson-clock
// site-wise construction and the particle-wise (labeled) construction.

#include "arw/core_model.hpp"
#include "arw/sitewise.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace arw
{
    class TraceWriter;

    // ------------------------------------------------------- site-wise clocks

    /// Per-site Poisson points of rate 1+lambda, read in local time.
    struct ClockField
    {
        std::uint64_t seed = 0;
    };

    struct CtEvent
    {
        double t = 0.0;
        std::size_t site = 0;
        Instruction instruction;
    };

    struct CtResult
    {
        bool absorbed = false;
        double time = 0.0; // absorption time, or tMax
        Configuration final_cfg;
        Odometer odometer; // h_t at the returned time
        std::vector<CtEvent> trajectory;
        std::int64_t exits = 0;
    };

    /// Each interior site rings at rate (1+lambda) times its active count and
    /// consumes the next instruction of `field` at each ring. Rejects lambda = inf.
    CtResult ct_run(const Configuration &cfg, const InstructionField &field, ClockField clocks, double t_max,
                    bool keep_trajectory = false, TraceWriter *trace = nullptr);

    // ------------------------------------------------------ labeled particles

    struct LabeledParticle
    {
        Site birth{};
        std::int32_t label = 0; // j in the id (x, j)
        std::int64_t position = -1; // storage index, -1 once killed
        bool sleeping = false;
        bool parked = false; // reached a window margin and stopped
        double inner_time = 0.0;
    };

    struct LabeledSystem
    {
        std::uint64_t seed = 0;
        ModelParams params = ModelParams::finite(1.0);
        JumpDistribution jumps = JumpDistribution::symmetric(1);
    };

    struct ParticlewiseOptions
    {
        /// Sites whose first exit is logged per particle; empty means none.
        std::optional<Volume> watch;
        /// Checks projection, sleep legality and conservation after every event.
        bool check_invariants =
#ifdef NDEBUG
            false;
#else
            true;
#endif
        std::uint64_t max_events = 100'000'000;
    };

    struct ParticlewiseResult
    {
        bool absorbed = false;
        double time = 0.0;
        std::vector<LabeledParticle> particles;
        /// Time of the first exit from the watch region, or -1 if the particle never left.
        std::vector<double> exit_time;
        Configuration final_cfg;
        std::int64_t killed = 0;
        /// A particle parked on an edge from which its walk could have come back.
        bool proxy_too_small = false;
        std::uint64_t events = 0;
    };

    ParticlewiseResult particlewise_run(const Configuration &cfg, const LabeledSystem &system, double t_max,
                                        const ParticlewiseOptions &opt = {}, TraceWriter *trace = nullptr);

    // ------------------------------------------------------------ exit counts

    struct ExitCounts
    {
        std::int64_t M = 0;      // exits under kill-at-boundary stabilization
        std::int64_t M_star = 0; // particles born in V_n that ever leave V_n, no killing
        bool proxy_too_small = false;
        int proxy_attempts = 0;
        Status status = Status::Stable;
    };

    struct ExitCountOptions
    {
        /// Law used to fill the enclosing window outside V_n; empty leaves it empty.
        std::optional<InitialStateSpec> surround;
        std::uint64_t surround_seed = 0;
        int proxy_factor = 4;
        int max_doublings = 2;
        double t_max = std::numeric_limits<double>::infinity();
        std::uint64_t budget = kDefaultBudget;
    };

    /// cfg must live on a Kill box whose interior is V_n.
    ExitCounts exit_counts(const Configuration &cfg, const InstructionField &field, const LabeledSystem &system,
                           const ExitCountOptions &opt = {});
}
