#pragma once

// Exact-invariant suite over small randomized instances.

#include "arw/core_model.hpp"
#include "arw/sitewise.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace arw
{
    /// A finite instance: d in {1, 2}, at most 25 interior sites, at most 30 particles,
    /// lambda in {0.2, 1, 5}. Pure function of the seed.
    struct Instance
    {
        std::uint64_t seed = 0;
        Configuration cfg;
        InstructionField field;
        /// Sub-box of the interior containing the origin, for monotonicity.
        Site sub_lo{};
        Site sub_hi{};
        /// Pointwise dominating configuration: cfg plus extra particles.
        Configuration bigger;

        std::string describe() const;
    };

    Instance make_instance(std::uint64_t seed);

    /// Budget per stabilization inside the suite; instances that hit it are skipped.
    inline constexpr std::uint64_t kValidateBudget = 1'000'000;

    struct Verdict
    {
        enum class Kind : std::uint8_t
        {
            Pass,
            Fail,
            Skipped, // a stabilization hit the budget
        };
        Kind kind = Kind::Pass;
        std::string detail;

        bool failed() const noexcept { return kind == Kind::Fail; }
        bool skipped() const noexcept { return kind == Kind::Skipped; }
    };

    struct CheckOptions
    {
        bool skip_odometer = false; // fault injection
    };

    Verdict check_abelian(const Instance &in, CheckOptions opt = {});
    Verdict check_sandwich(const Instance &in, CheckOptions opt = {});
    Verdict check_strong_weak(const Instance &in, CheckOptions opt = {});
    Verdict check_monotone(const Instance &in, CheckOptions opt = {});
    Verdict check_conservation(const Instance &in, CheckOptions opt = {});
    Verdict check_ct_engine(const Instance &in, CheckOptions opt = {});

    struct ValidateReport
    {
        std::uint64_t instances = 0;
        std::uint64_t checks = 0;
        std::uint64_t skipped = 0; // checks whose stabilization hit the budget
        std::optional<std::string> violation; // first one, with its reproducer
        bool ok() const noexcept { return !violation.has_value(); }
    };

    /// Runs every check on instances derive_seed(master, 0..seed_count-1) and stops
    /// at the first violation. Progress goes to `progress` if given.
    ValidateReport run_validate(std::uint64_t seed_count, std::uint64_t master, CheckOptions opt = {},
                                std::ostream *progress = nullptr);
}
