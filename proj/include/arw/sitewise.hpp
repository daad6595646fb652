#pragma once

// Site-wise representation: instruction stacks, topplings, stabilization and
// odometers, including weak and strong stabilization at the origin.

#include "arw/core_model.hpp"
#include "arw/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace arw
{
    struct Instruction
    {
        static constexpr int kSleep = -1;

        int dir = kSleep; // kSleep, or a direction index into the jump law

        constexpr bool is_sleep() const noexcept { return dir == kSleep; }
        constexpr bool is_jump() const noexcept { return dir != kSleep; }
        static constexpr Instruction sleep() noexcept { return Instruction{kSleep}; }
        static constexpr Instruction jump(int dir) noexcept { return Instruction{dir}; }

        constexpr bool operator==(const Instruction &) const noexcept = default;

        std::string to_string(int dim) const;
    };

    /// The field of instruction stacks. Instruction j at site x is a pure function
    /// of (seed, x, j); nothing is stored except optional reveal counters.
    class InstructionField
    {
    public:
        InstructionField(std::uint64_t seed, ModelParams params, JumpDistribution jumps);

        std::uint64_t seed() const noexcept { return seed_; }
        const ModelParams &params() const noexcept { return params_; }
        const JumpDistribution &jumps() const noexcept { return jumps_; }
        int dim() const noexcept { return jumps_.dim(); }

        /// Per-site key; instruction_at depends on x only through this value.
        std::uint64_t site_key(const Site &x) const noexcept
        {
            std::uint64_t h = seed_key_;
            for (int a = 0; a < jumps_.dim(); ++a)
            {
                h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x[static_cast<std::size_t>(a)])));
            }
            return h;
        }

        /// Instruction number j (1-based) of the stack whose key is `key`.
        Instruction at_key(std::uint64_t key, std::uint64_t j) const noexcept
        {
            const std::uint64_t h = hash_combine(key, j);
            if (!params_.infinite() && to_unit(h) < params_.sleep_probability())
            {
                return Instruction::sleep();
            }
            return Instruction::jump(jumps_.sample(to_unit(mix64(h ^ 0xd1b54a32d192ed03ULL))));
        }

        /// Pure lookup; requires j >= 1.
        Instruction instruction_at(const Site &x, std::uint64_t j) const;

        /// Lookup that also records j in the reveal counter of x.
        Instruction reveal(const Site &x, std::uint64_t j);
        std::uint64_t revealed(const Site &x) const noexcept;

    private:
        std::uint64_t seed_;
        std::uint64_t seed_key_;
        ModelParams params_;
        JumpDistribution jumps_;
        std::map<Site, std::uint64_t> revealed_;
    };

    /// Per-site toppling counts and jump-only counts over a domain's storage.
    class Odometer
    {
    public:
        explicit Odometer(LatticeDomain domain);

        const LatticeDomain &domain() const noexcept { return domain_; }

        std::uint64_t count(std::size_t index) const noexcept { return counts_[index]; }
        std::uint64_t jumps(std::size_t index) const noexcept { return jumps_[index]; }
        std::uint64_t count(const Site &x) const { return counts_[domain_.index_of(x)]; }
        std::uint64_t jumps(const Site &x) const { return jumps_[domain_.index_of(x)]; }

        std::span<const std::uint64_t> counts() const noexcept { return counts_; }
        std::span<const std::uint64_t> jump_counts() const noexcept { return jumps_; }

        std::uint64_t total() const noexcept;

        /// Pointwise comparison of toppling counts.
        bool dominated_by(const Odometer &o) const noexcept;

        bool operator==(const Odometer &o) const noexcept { return counts_ == o.counts_ && jumps_ == o.jumps_; }

    private:
        friend class Engine;
        LatticeDomain domain_;
        std::vector<std::uint64_t> counts_;
        std::vector<std::uint64_t> jumps_;
    };

    std::vector<std::uint64_t> jump_odometer_of(const Odometer &odo);

    /// "x0 ... x{d-1} count jumpCount" lines for sites with nonzero count.
    void write_odometer(std::ostream &out, const Odometer &odo);

    /// Set of sites allowed to topple; always a subset of the domain interior.
    class Volume
    {
    public:
        static Volume interior(const LatticeDomain &domain);
        /// Throws InvalidVolume unless [lo, hi] lies in the interior.
        static Volume box(const LatticeDomain &domain, const Site &lo, const Site &hi);
        static Volume of(const LatticeDomain &domain, std::span<const Site> sites);

        bool contains(std::size_t index) const noexcept { return mask_[index] != 0; }
        std::span<const std::size_t> indices() const noexcept { return indices_; }
        std::size_t size() const noexcept { return indices_.size(); }
        std::size_t storage_size() const noexcept { return mask_.size(); }

    private:
        std::vector<std::uint8_t> mask_;
        std::vector<std::size_t> indices_;
    };

    enum class ToppleMode : std::uint8_t
    {
        Legal,
        Acceptable,
        WLegal,
        SLegal,
    };

    struct Strategy
    {
        enum class Kind : std::uint8_t
        {
            SweepLowToHigh,
            RandomUnstable,
            QueueFIFO,
            ExhaustSiteThenNext,
        };

        Kind kind = Kind::ExhaustSiteThenNext;
        std::uint64_t seed = 0; // RandomUnstable only

        static constexpr Strategy sweep() noexcept { return {Kind::SweepLowToHigh, 0}; }
        static constexpr Strategy random(std::uint64_t seed) noexcept { return {Kind::RandomUnstable, seed}; }
        static constexpr Strategy fifo() noexcept { return {Kind::QueueFIFO, 0}; }
        static constexpr Strategy exhaust() noexcept { return {Kind::ExhaustSiteThenNext, 0}; }
    };

    enum class Status : std::uint8_t
    {
        Stable,
        BudgetExceeded,
    };

    inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

    struct ToppleOutcome
    {
        Instruction instruction;
        std::int64_t target = -1; // storage index the particle jumped to; -1 for sleeps and kills
        bool killed = false;
    };

    /// A configuration, its odometer and the field it consumes.
    class Engine
    {
    public:
        using ToppleHook = std::function<void(std::size_t index, Instruction ins, SiteState after)>;

        Engine(Configuration cfg, const InstructionField &field);
        Engine(const Engine &) = delete;
        Engine &operator=(const Engine &) = delete;
        Engine(Engine &&) noexcept = default;
        Engine &operator=(Engine &&) noexcept = default;

        const Configuration &config() const noexcept { return cfg_; }
        const Odometer &odometer() const noexcept { return odo_; }
        const InstructionField &field() const noexcept { return *field_; }
        const LatticeDomain &domain() const noexcept { return cfg_.domain(); }

        /// Particles destroyed at a Kill boundary so far.
        std::int64_t exits() const noexcept { return exits_; }
        std::uint64_t topplings() const noexcept { return topplings_; }

        /// Storage index of the origin, or -1 if the origin is not in storage.
        std::int64_t origin_index() const noexcept { return origin_; }

        /// Whether index is unstable in the given mode (ignores volume membership).
        bool unstable(std::size_t index, ToppleMode mode) const noexcept
        {
            const std::int32_t raw = raw_[index];
            if (static_cast<std::int64_t>(index) == origin_)
            {
                if (mode == ToppleMode::WLegal)
                {
                    return raw >= 2;
                }
                if (mode == ToppleMode::SLegal)
                {
                    return raw != 0;
                }
            }
            return raw >= 1;
        }

        /// Throws IllegalToppling if the site does not satisfy the mode's requirement.
        ToppleOutcome topple(std::size_t index, ToppleMode mode);
        ToppleOutcome topple(const Site &x, ToppleMode mode) { return topple(cfg_.domain().index_of(x), mode); }

        /// Topples unstable sites of V until none is left or the budget runs out.
        Status stabilize(const Volume &v, Strategy strategy, ToppleMode mode, std::uint64_t budget = kDefaultBudget);

        /// As stabilize, but only `seeds` are examined initially. The caller
        /// guarantees every other site of V is already stable in `mode`.
        Status stabilize_from(const Volume &v, std::span<const std::size_t> seeds, Strategy strategy, ToppleMode mode,
                              std::uint64_t budget = kDefaultBudget);

        void add_active(std::size_t index);
        void set_state(std::size_t index, SiteState s);

        /// Records arrivals per site; used for flow accounting.
        void track_arrivals(bool on);
        std::span<const std::uint64_t> arrivals() const noexcept { return arrivals_; }

        void set_hook(ToppleHook hook) { hook_ = std::move(hook); }

        /// Test-only fault: topplings stop updating the odometer.
        void inject_skip_odometer(bool on) noexcept { skip_odometer_ = on; }

    private:
        template <class Worklist>
        Status run(const Volume &v, Worklist &wl, ToppleMode mode, std::uint64_t budget);
        Status dispatch(const Volume &v, std::span<const std::size_t> seeds, bool scan, Strategy strategy, ToppleMode mode,
                        std::uint64_t budget);

        void normalize(std::size_t index) noexcept
        {
            if (infinite_ && raw_[index] == 1)
            {
                raw_[index] = -1;
            }
        }

        ToppleOutcome execute(std::size_t index) noexcept;

        Configuration cfg_;
        Odometer odo_;
        const InstructionField *field_;
        std::int32_t *raw_ = nullptr;
        std::vector<std::uint64_t> keys_;
        std::vector<std::uint64_t> arrivals_;
        std::vector<std::uint8_t> queued_;
        std::int64_t origin_ = -1;
        std::int64_t exits_ = 0;
        std::uint64_t topplings_ = 0;
        bool infinite_ = false;
        bool tracking_ = false;
        bool skip_odometer_ = false;
        ToppleHook hook_;
    };

    struct StabilizeResult
    {
        Configuration cfg;
        Odometer odo;
        Status status = Status::Stable;
        std::uint64_t topplings = 0;
        std::int64_t exits = 0;
    };

    StabilizeResult stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field, Strategy strategy,
                              ToppleMode mode = ToppleMode::Legal, std::uint64_t budget = kDefaultBudget);

    /// Requires the origin in V (InvalidVolume otherwise).
    StabilizeResult weak_stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field,
                                   std::uint64_t budget = kDefaultBudget);
    StabilizeResult strong_stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field,
                                     std::uint64_t budget = kDefaultBudget);

    struct SuccessiveWeakResult
    {
        std::uint64_t rounds_to_stable = 0;        // T_V
        std::uint64_t rounds_to_strong_stable = 0; // T_V^s
        SiteState final_at_origin;                 // state at the origin when T_V was reached
        Status status = Status::Stable;
        std::uint64_t topplings = 0;
    };

    /// Stabilization and then strong stabilization obtained by alternating weak
    /// stabilizations with topplings at the origin.
    SuccessiveWeakResult successive_weak(const Configuration &cfg, const Volume &v, const InstructionField &field,
                                         std::uint64_t budget = kDefaultBudget);
}
