#include "arw/sitewise.hpp"

#include <deque>
#include <numeric>
#include <ostream>
#include <queue>

namespace arw
{
    // ---------------------------------------------------------------- Odometer

    Odometer::Odometer(LatticeDomain domain) : domain_(std::move(domain)), counts_(domain_.size(), 0), jumps_(domain_.size(), 0) {}

    std::uint64_t Odometer::total() const noexcept
    {
        return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    }

    bool Odometer::dominated_by(const Odometer &o) const noexcept
    {
        if (!(domain_ == o.domain_))
        {
            return false;
        }
        for (std::size_t i = 0; i < counts_.size(); ++i)
        {
            if (counts_[i] > o.counts_[i])
            {
                return false;
            }
        }
        return true;
    }

    std::vector<std::uint64_t> jump_odometer_of(const Odometer &odo)
    {
        const auto j = odo.jump_counts();
        return {j.begin(), j.end()};
    }

    void write_odometer(std::ostream &out, const Odometer &odo)
    {
        const LatticeDomain &dom = odo.domain();
        out << snapshot_header(dom) << '\n';
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            if (odo.count(i) == 0)
            {
                continue;
            }
            const Site x = dom.site_of(i);
            for (int a = 0; a < dom.dim(); ++a)
            {
                out << x[static_cast<std::size_t>(a)] << ' ';
            }
            out << odo.count(i) << ' ' << odo.jumps(i) << '\n';
        }
    }

    // ------------------------------------------------------------------ Volume

    Volume Volume::interior(const LatticeDomain &domain)
    {
        Volume v;
        v.mask_.assign(domain.size(), 0);
        v.indices_ = domain.interior_indices();
        for (std::size_t i : v.indices_)
        {
            v.mask_[i] = 1;
        }
        return v;
    }

    Volume Volume::box(const LatticeDomain &domain, const Site &lo, const Site &hi)
    {
        if (!domain.in_interior(lo) || !domain.in_interior(hi))
        {
            throw InvalidVolume("volume corners must lie in the domain interior");
        }
        Volume v;
        v.mask_.assign(domain.size(), 0);
        for (std::size_t i = 0; i < domain.size(); ++i)
        {
            const Site x = domain.site_of(i);
            bool inside = true;
            for (int a = 0; a < domain.dim() && inside; ++a)
            {
                const auto ua = static_cast<std::size_t>(a);
                inside = x[ua] >= lo[ua] && x[ua] <= hi[ua];
            }
            if (inside)
            {
                v.mask_[i] = 1;
                v.indices_.push_back(i);
            }
        }
        return v;
    }

    Volume Volume::of(const LatticeDomain &domain, std::span<const Site> sites)
    {
        Volume v;
        v.mask_.assign(domain.size(), 0);
        for (const Site &x : sites)
        {
            if (!domain.in_interior(x))
            {
                throw InvalidVolume("volume site outside the domain interior");
            }
            v.mask_[domain.index_of(x)] = 1;
        }
        for (std::size_t i = 0; i < domain.size(); ++i)
        {
            if (v.mask_[i] != 0)
            {
                v.indices_.push_back(i);
            }
        }
        return v;
    }

    // ------------------------------------------------------------------ Engine

    Engine::Engine(Configuration cfg, const InstructionField &field)
        : cfg_(std::move(cfg)), odo_(cfg_.domain()), field_(&field), infinite_(field.params().infinite())
    {
        if (field.dim() != cfg_.domain().dim())
        {
            throw InvalidSpec("instruction field and configuration differ in dimension");
        }
        const LatticeDomain &dom = cfg_.domain();
        raw_ = cfg_.mutable_raw();
        keys_.resize(dom.size());
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            keys_[i] = field.site_key(dom.site_of(i));
        }
        queued_.assign(dom.size(), 0);
        if (auto o = dom.find(origin_site()); o && dom.is_interior(*o))
        {
            origin_ = static_cast<std::int64_t>(*o);
        }
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            normalize(i);
        }
    }

    ToppleOutcome Engine::execute(std::size_t x) noexcept
    {
        std::uint64_t &count = odo_.counts_[x];
        const Instruction ins = field_->at_key(keys_[x], count + 1);
        if (!skip_odometer_)
        {
            ++count;
        }
        ++topplings_;
        std::int32_t &r = raw_[x];
        if (ins.is_sleep())
        {
            if (r == 1)
            {
                r = -1;
            }
            if (hook_)
            {
                hook_(x, ins, SiteState::from_raw(r));
            }
            return {ins, -1, false};
        }
        if (!skip_odometer_)
        {
            ++odo_.jumps_[x];
        }
        r = (r == -1) ? 0 : r - 1;
        normalize(x);
        const std::int64_t t = cfg_.domain().neighbor(x, ins.dir);
        if (t < 0)
        {
            ++exits_;
            cfg_.adjust_total(-1);
            if (hook_)
            {
                hook_(x, ins, SiteState::from_raw(r));
            }
            return {ins, -1, true};
        }
        const auto ut = static_cast<std::size_t>(t);
        std::int32_t &rt = raw_[ut];
        rt = (rt == -1) ? 2 : rt + 1;
        normalize(ut);
        if (tracking_)
        {
            ++arrivals_[ut];
        }
        if (hook_)
        {
            hook_(x, ins, SiteState::from_raw(r));
        }
        return {ins, t, false};
    }

    ToppleOutcome Engine::topple(std::size_t index, ToppleMode mode)
    {
        const LatticeDomain &dom = cfg_.domain();
        if (index >= dom.size() || !dom.is_interior(index))
        {
            throw OutOfDomain("toppled site is not in the domain interior");
        }
        const std::int32_t r = raw_[index];
        const bool at_origin = static_cast<std::int64_t>(index) == origin_;
        bool ok = false;
        switch (mode)
        {
        case ToppleMode::Legal:
            ok = r >= 1;
            break;
        case ToppleMode::Acceptable:
            ok = r != 0;
            break;
        case ToppleMode::WLegal:
            ok = at_origin ? r >= 2 : r >= 1;
            break;
        case ToppleMode::SLegal:
            ok = at_origin ? r != 0 : r >= 1;
            break;
        }
        if (!ok)
        {
            throw IllegalToppling("site holds " + SiteState::from_raw(r).to_string() + ", not unstable in the requested mode");
        }
        return execute(index);
    }

    void Engine::add_active(std::size_t index)
    {
        std::int32_t &r = raw_[index];
        r = (r == -1) ? 2 : r + 1;
        cfg_.adjust_total(1);
        normalize(index);
    }

    void Engine::set_state(std::size_t index, SiteState s)
    {
        cfg_.set(index, s);
        normalize(index);
    }

    void Engine::track_arrivals(bool on)
    {
        tracking_ = on;
        if (on && arrivals_.empty())
        {
            arrivals_.assign(cfg_.domain().size(), 0);
        }
    }

    namespace
    {
        struct StackList
        {
            static constexpr bool kExhaust = true;
            std::vector<std::size_t> items;
            bool empty() const noexcept { return items.empty(); }
            void push(std::size_t i) { items.push_back(i); }
            std::size_t pop() noexcept
            {
                const std::size_t i = items.back();
                items.pop_back();
                return i;
            }
            template <class F>
            void drain(F &&f)
            {
                for (std::size_t i : items)
                {
                    f(i);
                }
                items.clear();
            }
        };

        struct FifoList
        {
            static constexpr bool kExhaust = false;
            std::deque<std::size_t> items;
            bool empty() const noexcept { return items.empty(); }
            void push(std::size_t i) { items.push_back(i); }
            std::size_t pop() noexcept
            {
                const std::size_t i = items.front();
                items.pop_front();
                return i;
            }
            template <class F>
            void drain(F &&f)
            {
                for (std::size_t i : items)
                {
                    f(i);
                }
                items.clear();
            }
        };

        struct LowestList
        {
            static constexpr bool kExhaust = false;
            std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> items;
            bool empty() const noexcept { return items.empty(); }
            void push(std::size_t i) { items.push(i); }
            std::size_t pop() noexcept
            {
                const std::size_t i = items.top();
                items.pop();
                return i;
            }
            template <class F>
            void drain(F &&f)
            {
                while (!items.empty())
                {
                    f(pop());
                }
            }
        };

        struct RandomList
        {
            static constexpr bool kExhaust = false;
            explicit RandomList(std::uint64_t seed) : rng(hash_combine(seed, 0x2545f4914f6cdd1dULL)) {}
            CounterRng rng;
            std::vector<std::size_t> items;
            bool empty() const noexcept { return items.empty(); }
            void push(std::size_t i) { items.push_back(i); }
            std::size_t pop() noexcept
            {
                const std::size_t k = static_cast<std::size_t>(rng.below(items.size()));
                const std::size_t i = items[k];
                items[k] = items.back();
                items.pop_back();
                return i;
            }
            template <class F>
            void drain(F &&f)
            {
                for (std::size_t i : items)
                {
                    f(i);
                }
                items.clear();
            }
        };
    }

    template <class Worklist>
    Status Engine::run(const Volume &v, Worklist &wl, ToppleMode mode, std::uint64_t budget)
    {
        std::uint64_t used = 0;
        while (!wl.empty())
        {
            const std::size_t x = wl.pop();
            queued_[x] = 0;
            if (!unstable(x, mode))
            {
                continue;
            }
            do
            {
                if (used >= budget)
                {
                    wl.drain([this](std::size_t i) { queued_[i] = 0; });
                    return Status::BudgetExceeded;
                }
                const ToppleOutcome o = execute(x);
                ++used;
                if (o.target >= 0)
                {
                    const auto t = static_cast<std::size_t>(o.target);
                    if (v.contains(t) && queued_[t] == 0 && unstable(t, mode) && t != x)
                    {
                        queued_[t] = 1;
                        wl.push(t);
                    }
                }
            } while (Worklist::kExhaust && unstable(x, mode));
            if (!Worklist::kExhaust && unstable(x, mode))
            {
                queued_[x] = 1;
                wl.push(x);
            }
        }
        return Status::Stable;
    }

    Status Engine::dispatch(const Volume &v, std::span<const std::size_t> seeds, bool scan, Strategy strategy, ToppleMode mode,
                            std::uint64_t budget)
    {
        if (v.storage_size() != cfg_.domain().size())
        {
            throw InvalidVolume("volume was built for a different domain");
        }
        if ((mode == ToppleMode::WLegal || mode == ToppleMode::SLegal) && (origin_ < 0 || !v.contains(static_cast<std::size_t>(origin_))))
        {
            throw InvalidVolume("weak and strong stabilization need the origin in V");
        }
        auto fill = [&](auto &wl) {
            const auto src = scan ? v.indices() : seeds;
            for (std::size_t i : src)
            {
                if (v.contains(i) && queued_[i] == 0 && unstable(i, mode))
                {
                    queued_[i] = 1;
                    wl.push(i);
                }
            }
        };
        switch (strategy.kind)
        {
        case Strategy::Kind::ExhaustSiteThenNext:
        {
            StackList wl;
            fill(wl);
            return run(v, wl, mode, budget);
        }
        case Strategy::Kind::QueueFIFO:
        {
            FifoList wl;
            fill(wl);
            return run(v, wl, mode, budget);
        }
        case Strategy::Kind::SweepLowToHigh:
        {
            LowestList wl;
            fill(wl);
            return run(v, wl, mode, budget);
        }
        case Strategy::Kind::RandomUnstable:
        {
            RandomList wl(strategy.seed);
            fill(wl);
            return run(v, wl, mode, budget);
        }
        }
        return Status::Stable;
    }

    Status Engine::stabilize(const Volume &v, Strategy strategy, ToppleMode mode, std::uint64_t budget)
    {
        return dispatch(v, {}, true, strategy, mode, budget);
    }

    Status Engine::stabilize_from(const Volume &v, std::span<const std::size_t> seeds, Strategy strategy, ToppleMode mode,
                                  std::uint64_t budget)
    {
        return dispatch(v, seeds, false, strategy, mode, budget);
    }

    // ------------------------------------------------------------- free helpers

    namespace
    {
        StabilizeResult finish(const Engine &e, Status st)
        {
            return StabilizeResult{e.config(), e.odometer(), st, e.topplings(), e.exits()};
        }
    }

    StabilizeResult stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field, Strategy strategy,
                              ToppleMode mode, std::uint64_t budget)
    {
        Engine e(cfg, field);
        const Status st = e.stabilize(v, strategy, mode, budget);
        return finish(e, st);
    }

    StabilizeResult weak_stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field, std::uint64_t budget)
    {
        return stabilize(cfg, v, field, Strategy::exhaust(), ToppleMode::WLegal, budget);
    }

    StabilizeResult strong_stabilize(const Configuration &cfg, const Volume &v, const InstructionField &field, std::uint64_t budget)
    {
        return stabilize(cfg, v, field, Strategy::exhaust(), ToppleMode::SLegal, budget);
    }

    SuccessiveWeakResult successive_weak(const Configuration &cfg, const Volume &v, const InstructionField &field, std::uint64_t budget)
    {
        Engine e(cfg, field);
        SuccessiveWeakResult res;
        auto remaining = [&] { return budget - std::min(budget, e.topplings()); };
        auto stop_budget = [&] {
            res.status = Status::BudgetExceeded;
            res.topplings = e.topplings();
            return res;
        };

        std::uint64_t round = 1;
        if (e.stabilize(v, Strategy::exhaust(), ToppleMode::WLegal, budget) == Status::BudgetExceeded)
        {
            return stop_budget();
        }
        const auto o = static_cast<std::size_t>(e.origin_index());
        for (;;)
        {
            const SiteState here = e.config().at(o);
            if (here.is_empty())
            {
                res.rounds_to_strong_stable = round;
                if (res.rounds_to_stable == 0)
                {
                    res.rounds_to_stable = round;
                    res.final_at_origin = here;
                }
                break;
            }
            // The origin now holds a single particle; topple it until it jumps.
            ToppleOutcome out;
            do
            {
                if (e.topplings() >= budget)
                {
                    return stop_budget();
                }
                out = e.topple(o, ToppleMode::Acceptable);
                if (out.instruction.is_sleep() && res.rounds_to_stable == 0)
                {
                    res.rounds_to_stable = round;
                    res.final_at_origin = SiteState::sleeping();
                }
            } while (out.instruction.is_sleep());
            ++round;
            std::size_t seeds[2] = {o, o};
            if (out.target >= 0)
            {
                seeds[1] = static_cast<std::size_t>(out.target);
            }
            if (e.stabilize_from(v, seeds, Strategy::exhaust(), ToppleMode::WLegal, remaining()) == Status::BudgetExceeded)
            {
                return stop_budget();
            }
        }
        res.topplings = e.topplings();
        return res;
    }
}
