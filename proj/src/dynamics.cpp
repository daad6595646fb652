#include "arw/dynamics.hpp"

#include "arw/rng.hpp"
#include "arw/trace.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace arw
{
    namespace
    {
        struct Scheduled
        {
            double t;
            std::size_t id;
            std::uint64_t version;

            bool operator>(const Scheduled &o) const noexcept { return std::tie(t, id) > std::tie(o.t, o.id); }
        };

        using EventQueue = std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>>;
    }

    // ------------------------------------------------------------------ ct_run

    CtResult ct_run(const Configuration &cfg, const InstructionField &field, ClockField clocks, double t_max, bool keep_trajectory,
                    TraceWriter *trace)
    {
        if (field.params().infinite())
        {
            throw WrongModel("continuous-time run needs a finite sleep rate");
        }
        const LatticeDomain &dom = cfg.domain();
        const double rate = 1.0 + field.params().lambda();
        Engine e(cfg, field);
        const std::size_t n = dom.size();

        std::vector<std::uint64_t> key(n);
        std::vector<std::uint64_t> drawn(n, 0);
        std::vector<double> local(n, 0.0), last(n, 0.0), next_local(n, 0.0);
        std::vector<std::int32_t> act(n, 0);
        std::vector<std::uint64_t> version(n, 0);
        const std::uint64_t clock_key = hash_combine(mix64(clocks.seed), 0x3c6ef372fe94f82bULL);
        auto draw = [&](std::size_t i) { return -std::log(to_open_unit(hash_combine(key[i], ++drawn[i]))) / rate; };

        EventQueue pq;
        auto update = [&](std::size_t i, double t) {
            local[i] += static_cast<double>(act[i]) * (t - last[i]);
            last[i] = t;
            act[i] = dom.is_interior(i) ? e.config().at(i).active_count() : 0;
            ++version[i];
            if (act[i] > 0)
            {
                const double dt = std::max(0.0, (next_local[i] - local[i]) / static_cast<double>(act[i]));
                pq.push({t + dt, i, version[i]});
            }
        };
        for (std::size_t i = 0; i < n; ++i)
        {
            key[i] = hash_combine(clock_key, field.site_key(dom.site_of(i)));
            next_local[i] = draw(i);
            update(i, 0.0);
        }

        CtResult res{false, 0.0, cfg, Odometer(dom), {}, 0};
        double now = 0.0;
        bool stopped = false;
        while (!pq.empty())
        {
            const Scheduled ev = pq.top();
            pq.pop();
            if (ev.version != version[ev.id])
            {
                continue;
            }
            if (ev.t > t_max)
            {
                stopped = true;
                break;
            }
            now = ev.t;
            const std::size_t i = ev.id;
            local[i] = next_local[i];
            last[i] = now;
            const ToppleOutcome o = e.topple(i, ToppleMode::Legal);
            next_local[i] += draw(i);
            if (keep_trajectory)
            {
                res.trajectory.push_back({now, i, o.instruction});
            }
            if (trace != nullptr)
            {
                trace->event(now, "ring", dom.site_of(i), dom.dim(), o.instruction);
            }
            update(i, now);
            if (o.target >= 0)
            {
                update(static_cast<std::size_t>(o.target), now);
            }
        }
        res.absorbed = !stopped;
        res.time = stopped ? t_max : now;
        res.final_cfg = e.config();
        res.odometer = e.odometer();
        res.exits = e.exits();
        return res;
    }

    // -------------------------------------------------------- particlewise_run

    namespace
    {
        struct ParticleClock
        {
            CounterRng walk;
            CounterRng sleep;
            double next_jump = 0.0;
            double next_sleep = 0.0;
            double offset = 0.0; // inner time = t - offset while moving
            std::uint64_t version = 0;
        };
    }

    ParticlewiseResult particlewise_run(const Configuration &cfg, const LabeledSystem &system, double t_max,
                                        const ParticlewiseOptions &opt, TraceWriter *trace)
    {
        if (system.params.infinite())
        {
            throw WrongModel("particle-wise run needs a finite sleep rate");
        }
        const LatticeDomain &dom = cfg.domain();
        if (system.jumps.dim() != dom.dim())
        {
            throw InvalidSpec("jump law and configuration differ in dimension");
        }
        if (opt.watch && opt.watch->storage_size() != dom.size())
        {
            throw InvalidVolume("watch region was built for a different domain");
        }
        const double lambda = system.params.lambda();
        const std::uint64_t base = hash_combine(mix64(system.seed), 0x6a09e667f3bcc909ULL);

        ParticlewiseResult res{false, 0.0, {}, {}, Configuration(dom), 0, false, 0};
        std::vector<ParticleClock> clk;
        std::vector<std::int32_t> count(dom.size(), 0);
        std::vector<std::int64_t> sleeper(dom.size(), -1);
        std::vector<std::uint8_t> born_in_watch;

        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            const SiteState s = cfg.at(i);
            const Site x = dom.site_of(i);
            std::uint64_t site_hash = base;
            for (int a = 0; a < dom.dim(); ++a)
            {
                site_hash = hash_combine(site_hash, static_cast<std::uint64_t>(static_cast<std::int64_t>(x[static_cast<std::size_t>(a)])));
            }
            for (std::int32_t j = 1; j <= s.particle_count(); ++j)
            {
                LabeledParticle p;
                p.birth = x;
                p.label = j;
                p.position = static_cast<std::int64_t>(i);
                p.sleeping = s.is_sleeping();
                p.parked = !dom.is_interior(i);
                const std::uint64_t k = hash_combine(site_hash, static_cast<std::uint64_t>(j));
                ParticleClock c{CounterRng(hash_combine(k, 1)), CounterRng(hash_combine(k, 2))};
                c.next_jump = c.walk.exponential(1.0);
                c.next_sleep = c.sleep.exponential(lambda);
                if (p.sleeping)
                {
                    sleeper[i] = static_cast<std::int64_t>(res.particles.size());
                }
                res.particles.push_back(p);
                clk.push_back(c);
                born_in_watch.push_back(opt.watch && opt.watch->contains(i) ? 1 : 0);
                ++count[i];
            }
        }
        const std::size_t np = res.particles.size();
        res.exit_time.assign(np, -1.0);

        EventQueue pq;
        auto schedule = [&](std::size_t p) {
            ++clk[p].version;
            const LabeledParticle &lp = res.particles[p];
            if (lp.position < 0 || lp.sleeping || lp.parked)
            {
                return;
            }
            pq.push({clk[p].offset + std::min(clk[p].next_jump, clk[p].next_sleep), p, clk[p].version});
        };
        for (std::size_t p = 0; p < np; ++p)
        {
            schedule(p);
        }

        auto check = [&](double t) {
            std::vector<std::int32_t> c(dom.size(), 0);
            std::int64_t alive = 0;
            for (const auto &p : res.particles)
            {
                if (p.position < 0)
                {
                    continue;
                }
                ++alive;
                ++c[static_cast<std::size_t>(p.position)];
            }
            if (c != count)
            {
                throw std::logic_error("labeled projection disagrees with site counts at t = " + std::to_string(t));
            }
            for (const auto &p : res.particles)
            {
                if (p.sleeping && count[static_cast<std::size_t>(p.position)] != 1)
                {
                    throw std::logic_error("sleeping particle shares its site at t = " + std::to_string(t));
                }
            }
            if (alive + res.killed != static_cast<std::int64_t>(np))
            {
                throw std::logic_error("particle count not conserved at t = " + std::to_string(t));
            }
        };

        double now = 0.0;
        bool stopped = false;
        while (!pq.empty())
        {
            const Scheduled ev = pq.top();
            pq.pop();
            const std::size_t p = ev.id;
            if (ev.version != clk[p].version)
            {
                continue;
            }
            if (ev.t > t_max || res.events >= opt.max_events)
            {
                stopped = true;
                break;
            }
            now = ev.t;
            ++res.events;
            LabeledParticle &lp = res.particles[p];
            ParticleClock &c = clk[p];
            const auto from = static_cast<std::size_t>(lp.position);
            if (c.next_jump <= c.next_sleep)
            {
                const int dir = system.jumps.sample(c.walk.uniform());
                c.next_jump += c.walk.exponential(1.0);
                --count[from];
                const std::int64_t to = dom.neighbor(from, dir);
                if (to < 0)
                {
                    lp.position = -1;
                    ++res.killed;
                    if (born_in_watch[p] != 0 && res.exit_time[p] < 0.0)
                    {
                        res.exit_time[p] = now;
                    }
                    if (trace != nullptr)
                    {
                        trace->particle_event(now, "killed", p, dom.site_of(from), dom.dim());
                    }
                }
                else
                {
                    const auto ut = static_cast<std::size_t>(to);
                    lp.position = to;
                    ++count[ut];
                    if (!dom.is_interior(ut))
                    {
                        lp.parked = true;
                        const int back = dir ^ 1;
                        if (system.jumps.weight(back) > 0.0)
                        {
                            res.proxy_too_small = true;
                        }
                    }
                    else if (sleeper[ut] >= 0)
                    {
                        const auto q = static_cast<std::size_t>(sleeper[ut]);
                        sleeper[ut] = -1;
                        res.particles[q].sleeping = false;
                        clk[q].offset = now - res.particles[q].inner_time;
                        schedule(q);
                        if (trace != nullptr)
                        {
                            trace->particle_event(now, "wake", q, dom.site_of(ut), dom.dim());
                        }
                    }
                    if (born_in_watch[p] != 0 && res.exit_time[p] < 0.0 && !opt.watch->contains(ut))
                    {
                        res.exit_time[p] = now;
                    }
                    if (trace != nullptr)
                    {
                        trace->particle_event(now, "jump", p, dom.site_of(ut), dom.dim());
                    }
                }
                schedule(p);
            }
            else
            {
                c.next_sleep += c.sleep.exponential(lambda);
                if (count[from] == 1)
                {
                    lp.sleeping = true;
                    lp.inner_time = now - c.offset;
                    sleeper[from] = static_cast<std::int64_t>(p);
                    if (trace != nullptr)
                    {
                        trace->particle_event(now, "sleep", p, dom.site_of(from), dom.dim());
                    }
                }
                schedule(p);
            }
            if (opt.check_invariants)
            {
                check(now);
            }
        }

        res.absorbed = !stopped;
        res.time = stopped ? t_max : now;
        if (stopped && res.events >= opt.max_events)
        {
            res.time = now;
        }
        for (std::size_t p = 0; p < np; ++p)
        {
            LabeledParticle &lp = res.particles[p];
            if (lp.position >= 0 && !lp.sleeping && !lp.parked)
            {
                lp.inner_time = res.time - clk[p].offset;
            }
        }
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            if (sleeper[i] >= 0)
            {
                res.final_cfg.set(i, SiteState::sleeping());
            }
            else if (count[i] > 0)
            {
                res.final_cfg.set(i, SiteState::active(count[i]));
            }
        }
        return res;
    }

    // ------------------------------------------------------------ exit counts

    ExitCounts exit_counts(const Configuration &cfg, const InstructionField &field, const LabeledSystem &system, const ExitCountOptions &opt)
    {
        const LatticeDomain &dom = cfg.domain();
        if (!dom.kills())
        {
            throw InvalidSpec("exit counts need a configuration on a Kill box");
        }
        ExitCounts out;
        const auto stab = stabilize(cfg, Volume::interior(dom), field, Strategy::exhaust(), ToppleMode::Legal, opt.budget);
        out.M = stab.exits;
        out.status = stab.status;

        const int d = dom.dim();
        int factor = opt.proxy_factor;
        for (int attempt = 0;; ++attempt)
        {
            std::vector<std::int32_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a)
            {
                const auto ua = static_cast<std::size_t>(a);
                const std::int32_t side = dom.hi()[ua] - dom.lo()[ua] + 1;
                const std::int32_t extra = (side * (factor - 1) + 1) / 2;
                lo[ua] = dom.lo()[ua] - extra;
                hi[ua] = dom.hi()[ua] + extra;
            }
            const LatticeDomain window = LatticeDomain::window(d, lo, hi);
            Configuration wcfg = opt.surround ? sample_initial(*opt.surround, window, opt.surround_seed) : Configuration(window);
            for (std::size_t i = 0; i < window.size(); ++i)
            {
                const Site x = window.site_of(i);
                if (dom.in_interior(x))
                {
                    wcfg.set(i, cfg.at(x));
                }
            }
            ParticlewiseOptions popt;
            popt.watch = Volume::box(window, dom.lo(), dom.hi());
            popt.check_invariants = false;
            const auto run = particlewise_run(wcfg, system, opt.t_max, popt);
            out.M_star = 0;
            for (std::size_t p = 0; p < run.particles.size(); ++p)
            {
                if (dom.in_interior(run.particles[p].birth) && run.exit_time[p] >= 0.0)
                {
                    ++out.M_star;
                }
            }
            out.proxy_too_small = run.proxy_too_small;
            out.proxy_attempts = attempt + 1;
            if (!run.proxy_too_small || attempt >= opt.max_doublings)
            {
                break;
            }
            factor *= 2;
        }
        return out;
    }
}
