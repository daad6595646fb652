#include "arw/procedures.hpp"

#include "arw/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace arw
{
    namespace
    {
        Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n)
        {
            Estimate e;
            e.samples = n;
            if (n == 0)
            {
                return e;
            }
            e.mean = static_cast<double>(hits) / static_cast<double>(n);
            e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
            return e;
        }

        bool is_directed_1d(const JumpDistribution &p)
        {
            return p.dim() == 1 && p.weight(0) == 1.0;
        }

        std::size_t index_1d(const LatticeDomain &dom, std::int32_t x)
        {
            return dom.index_of(make_site({x}));
        }
    }

    // ----------------------------------------------------------- directed sweep

    SweepResult directed_sweep(const Configuration &cfg, int L, const InstructionField &field, std::uint64_t budget, TraceWriter *trace)
    {
        const LatticeDomain &dom = cfg.domain();
        if (dom.dim() != 1 || !is_directed_1d(field.jumps()))
        {
            throw WrongModel("directed sweep needs d = 1 and p(+1) = 1");
        }
        if (L < 0 || !dom.in_interior(make_site({-L})) || !dom.in_interior(make_site({L})))
        {
            throw InvalidVolume("[-L, L] must lie in the domain interior");
        }
        Engine e(cfg, field);
        if (trace != nullptr)
        {
            e.set_hook(trace->hook(dom));
        }
        SweepResult res;
        res.N.assign(static_cast<std::size_t>(L) + 1, 0);
        res.Y.assign(static_cast<std::size_t>(L), 0);

        auto exhaust = [&](std::size_t idx) {
            while (e.config().at(idx).is_active())
            {
                if (e.topplings() >= budget)
                {
                    res.status = Status::BudgetExceeded;
                    return false;
                }
                e.topple(idx, ToppleMode::Legal);
            }
            return true;
        };

        for (int i = 0; i < L; ++i)
        {
            const std::size_t idx = index_1d(dom, -L + i);
            if (!exhaust(idx))
            {
                return res;
            }
            res.N[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(e.odometer().jumps(idx));
            res.Y[static_cast<std::size_t>(i)] = e.config().at(idx).is_sleeping() ? 1 : 0;
        }
        const std::size_t o = index_1d(dom, 0);
        if (!exhaust(o))
        {
            return res;
        }
        res.origin_odometer = e.odometer().count(o);
        return res;
    }

    // --------------------------------------------------------- trap exploration

    namespace
    {
        struct Reveal
        {
            std::int32_t site;
            std::uint64_t j;
        };

        struct SiteHistory
        {
            std::uint64_t cursor = 0;
            Instruction last = Instruction::sleep();
            Instruction second_last = Instruction::sleep();
            bool has_second = false;
        };
    }

    TrapResult trap_explore(const Configuration &cfg, int n, const InstructionField &field, TrapOptions opt, TraceWriter *trace)
    {
        const LatticeDomain &dom = cfg.domain();
        if (dom.dim() != 1 || field.dim() != 1)
        {
            throw WrongModel("trap exploration is one-dimensional");
        }
        TrapResult res;
        auto fail = [&](std::string why) {
            res.status = TrapResult::Outcome::Failed;
            res.failure = std::move(why);
            return res;
        };
        if (auto o = dom.find(origin_site()); o && cfg.at(*o).occupied())
        {
            return fail("particle at the origin");
        }

        std::vector<std::int32_t> pos, neg;
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            const std::int32_t x = dom.site_of(i)[0];
            for (std::int32_t c = 0; c < cfg.at(i).particle_count(); ++c)
            {
                (x > 0 ? pos : neg).push_back(x);
            }
        }
        std::sort(pos.begin(), pos.end());
        std::sort(neg.begin(), neg.end(), std::greater<>());
        if (static_cast<int>(pos.size()) > n)
        {
            pos.resize(static_cast<std::size_t>(std::max(n, 0)));
        }
        if (static_cast<int>(neg.size()) > n)
        {
            neg.resize(static_cast<std::size_t>(std::max(n, 0)));
        }
        res.particles_positive = pos;
        res.particles_negative = neg;

        std::unordered_map<std::int32_t, SiteHistory> hist;
        std::vector<std::vector<Reveal>> paths; // per explored particle, instructions the particle will use
        std::int32_t lo_seen = 0;
        std::int32_t hi_seen = 0;

        for (const int s : {1, -1})
        {
            const auto &starts = s > 0 ? pos : neg;
            auto &traps = s > 0 ? res.traps_positive : res.traps_negative;
            std::int32_t a_prev = 0; // in mirrored coordinates y = s * x
            for (const std::int32_t xk : starts)
            {
                const std::int32_t yk = s * xk;
                std::int32_t y = yk;
                std::uint64_t steps = 0;
                std::vector<Reveal> log;
                while (y != a_prev)
                {
                    if (steps >= opt.max_steps_per_explorer)
                    {
                        res.explorer_steps += steps;
                        return fail("explorer escaped after " + std::to_string(steps) + " steps");
                    }
                    const std::int32_t x = s * y;
                    SiteHistory &h = hist[x];
                    const std::uint64_t j = ++h.cursor;
                    const Instruction ins = field.at_key(field.site_key(make_site({x})), j);
                    h.second_last = h.last;
                    h.has_second = j >= 2;
                    h.last = ins;
                    log.push_back({x, j});
                    lo_seen = std::min(lo_seen, x);
                    hi_seen = std::max(hi_seen, x);
                    ++steps;
                    if (ins.is_jump())
                    {
                        y += s * (ins.dir == 0 ? 1 : -1);
                    }
                }
                res.explorer_steps += steps;

                // The last instruction at every site of D_k is a jump toward a_prev;
                // the trap is the leftmost site whose instruction before that is a sleep.
                std::int32_t trap = 0;
                for (std::int32_t yy = a_prev + 1; yy <= yk - 1; ++yy)
                {
                    const SiteHistory &h = hist.at(s * yy);
                    if (h.has_second && h.second_last.is_sleep())
                    {
                        trap = yy;
                        break;
                    }
                }
                if (trap == 0)
                {
                    return fail("no trap between " + std::to_string(s * (a_prev + 1)) + " and " + std::to_string(s * (yk - 1)));
                }

                const std::int32_t trap_x = s * trap;
                const std::uint64_t trap_j = hist.at(trap_x).cursor - 1;
                const auto it = std::find_if(log.begin(), log.end(), [&](const Reveal &r) { return r.site == trap_x && r.j == trap_j; });
                if (it == log.end())
                {
                    throw std::logic_error("trap instruction was not revealed by the current explorer");
                }
                for (auto c = it + 1; c != log.end(); ++c)
                {
                    const std::int32_t yc = s * c->site;
                    if (yc < a_prev + 1 || yc > trap)
                    {
                        throw std::logic_error("corrupted site outside [a_{k-1}+1, a_k]");
                    }
                }
                log.erase(it + 1, log.end());
                paths.push_back(std::move(log));
                traps.push_back(trap_x);
                res.interdistances.push_back(trap - a_prev);
                a_prev = trap;
            }
        }

        if (!opt.verify)
        {
            return res;
        }

        // Replay: every particle follows its explorer through acceptable topplings.
        {
            const std::int32_t lo[1] = {lo_seen - 1};
            const std::int32_t hi[1] = {hi_seen + 1};
            const LatticeDomain wdom = LatticeDomain::window(1, lo, hi);
            Configuration rc(wdom);
            for (std::int32_t x : pos)
            {
                const std::size_t i = wdom.index_of(make_site({x}));
                rc.set(i, add_particle(rc.at(i)));
            }
            for (std::int32_t x : neg)
            {
                const std::size_t i = wdom.index_of(make_site({x}));
                rc.set(i, add_particle(rc.at(i)));
            }
            Engine e(rc, field);
            if (trace != nullptr)
            {
                e.set_hook(trace->hook(wdom));
            }
            bool ok = true;
            for (const auto &path : paths)
            {
                for (const Reveal &r : path)
                {
                    const std::size_t i = wdom.index_of(make_site({r.site}));
                    if (e.odometer().count(i) + 1 != r.j || e.config().at(i).is_empty())
                    {
                        ok = false;
                        break;
                    }
                    e.topple(i, ToppleMode::Acceptable);
                }
                if (!ok)
                {
                    break;
                }
            }
            if (ok)
            {
                for (std::int32_t a : res.traps_positive)
                {
                    ok = ok && e.config().at(make_site({a})).is_sleeping();
                }
                for (std::int32_t a : res.traps_negative)
                {
                    ok = ok && e.config().at(make_site({a})).is_sleeping();
                }
                ok = ok && e.odometer().count(make_site({0})) == 0;
                for (std::size_t i = 0; i < wdom.size() && ok; ++i)
                {
                    ok = !e.config().at(i).is_active();
                }
            }
            res.replay_ok = ok;
        }

        // Legal stabilization of the explored particles in [x_{-n}, x_n].
        {
            const std::int32_t vlo = neg.empty() ? 0 : std::min(0, neg.back());
            const std::int32_t vhi = pos.empty() ? 0 : std::max(0, pos.back());
            const std::int32_t lo[1] = {vlo};
            const std::int32_t hi[1] = {vhi};
            const LatticeDomain vdom = LatticeDomain::window(1, lo, hi);
            Configuration vc(vdom);
            for (std::int32_t x : pos)
            {
                const std::size_t i = vdom.index_of(make_site({x}));
                vc.set(i, add_particle(vc.at(i)));
            }
            for (std::int32_t x : neg)
            {
                const std::size_t i = vdom.index_of(make_site({x}));
                vc.set(i, add_particle(vc.at(i)));
            }
            const auto r = stabilize(vc, Volume::interior(vdom), field, Strategy::exhaust(), ToppleMode::Legal);
            res.origin_untouched = r.status == Status::Stable && r.odo.count(make_site({0})) == 0;
        }
        return res;
    }

    // ---------------------------------------------------------- safe-zone drive

    SafeZoneResult safe_zone_drive(const Configuration &cfg, std::span<const double> v, const InstructionField &field,
                                   std::uint64_t budget, bool keep_log, TraceWriter *trace)
    {
        const LatticeDomain &dom = cfg.domain();
        if (v.size() != static_cast<std::size_t>(dom.dim()))
        {
            throw InvalidSpec("direction vector must have one entry per axis");
        }
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            const std::int32_t r = cfg.raw()[i];
            if (r != 0 && r != 1)
            {
                throw NonBinaryInput("site holds " + cfg.at(i).to_string());
            }
        }

        std::vector<std::size_t> order = dom.interior_indices();
        std::vector<double> dot(dom.size(), 0.0);
        for (std::size_t i : order)
        {
            const Site x = dom.site_of(i);
            double d = 0.0;
            for (int a = 0; a < dom.dim(); ++a)
            {
                d += v[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
            }
            dot[i] = d;
        }
        // Index order is lexicographic, so a stable sort breaks ties lexicographically.
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dot[a] < dot[b]; });
        std::vector<std::size_t> rank(dom.size(), std::numeric_limits<std::size_t>::max());
        for (std::size_t k = 0; k < order.size(); ++k)
        {
            rank[order[k]] = k;
        }

        SafeZoneResult res;
        res.initial_particles = cfg.interior_particles();
        Engine e(cfg, field);
        if (trace != nullptr)
        {
            e.set_hook(trace->hook(dom));
        }
        const auto raw = [&](std::size_t i) { return e.config().raw()[i]; };

        for (std::size_t k = 0; k < order.size(); ++k)
        {
            std::size_t cur = order[k];
            if (raw(cur) == 0)
            {
                continue;
            }
            ++res.steps_with_particle;
            for (;;)
            {
                if (raw(cur) == -1)
                {
                    // Only reachable with instantaneous sleeping.
                    ++res.left_behind;
                    break;
                }
                if (e.topplings() >= budget)
                {
                    res.status = Status::BudgetExceeded;
                    return res;
                }
                const ToppleOutcome o = e.topple(cur, ToppleMode::Legal);
                if (keep_log)
                {
                    res.log.emplace_back(cur, o.instruction);
                }
                if (o.killed)
                {
                    ++res.exits;
                    break;
                }
                if (o.instruction.is_sleep())
                {
                    if (raw(cur) == -1)
                    {
                        ++res.left_behind;
                        break;
                    }
                    continue;
                }
                const auto t = static_cast<std::size_t>(o.target);
                if (!dom.is_interior(t))
                {
                    ++res.exits;
                    break;
                }
                if (rank[t] > k && SiteState::from_raw(raw(t)).particle_count() == 1)
                {
                    break;
                }
                cur = t;
            }
        }
        return res;
    }

    // -------------------------------------------------------------- killed walk

    KilledWalkEstimate killed_walk_prob(const JumpDistribution &p, std::span<const double> v, double lambda, std::uint64_t replicas,
                                        std::uint64_t horizon, std::uint64_t seed)
    {
        if (v.size() != static_cast<std::size_t>(p.dim()))
        {
            throw InvalidSpec("direction vector must have one entry per axis");
        }
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
        {
            throw InvalidSpec("killing rate must be finite and nonnegative");
        }
        KilledWalkEstimate out;
        if (lambda == 0.0)
        {
            out.killed = bernoulli_estimate(0, replicas);
            return out;
        }
        const double q = lambda / (1.0 + lambda);
        std::array<double, 2 * kMaxDim> proj{};
        double mu = 0.0;
        double m2 = 0.0;
        for (int dir = 0; dir < 2 * p.dim(); ++dir)
        {
            const auto ud = static_cast<std::size_t>(dir);
            proj[ud] = (dir % 2 == 0 ? 1.0 : -1.0) * v[ud / 2];
            mu += p.weight(dir) * proj[ud];
            m2 += p.weight(dir) * proj[ud] * proj[ud];
        }
        const double var = std::max(0.0, m2 - mu * mu);
        // Beyond this height a return to the half space has probability below e^-30.
        const double escape = mu > 0.0 ? 30.0 * var / (2.0 * mu) : std::numeric_limits<double>::infinity();

        std::uint64_t hits = 0;
        for (std::uint64_t r = 0; r < replicas; ++r)
        {
            CounterRng rng(derive_seed(seed, r));
            double h = 0.0;
            bool done = false;
            for (std::uint64_t step = 0; step < horizon; ++step)
            {
                if (h <= 0.0)
                {
                    if (rng.uniform() < q)
                    {
                        ++hits;
                        done = true;
                        break;
                    }
                }
                else if (h > escape)
                {
                    done = true;
                    break;
                }
                h += proj[static_cast<std::size_t>(p.sample(rng.uniform()))];
            }
            if (!done)
            {
                ++out.truncated;
            }
        }
        out.killed = bernoulli_estimate(hits, replicas);
        return out;
    }

    // ---------------------------------------------------------- block functions

    LatticeDomain block_domain(int K)
    {
        if (K < 2)
        {
            throw InvalidSpec("block half-width K must be at least 2");
        }
        const std::int32_t lo[1] = {1};
        const std::int32_t hi[1] = {2 * K - 1};
        return LatticeDomain::window(1, lo, hi);
    }

    BlockFunctions block_functions(int K, const Configuration &block_cfg, const InstructionField &field, int m_max, std::uint64_t budget)
    {
        const LatticeDomain dom = block_domain(K);
        if (!(block_cfg.domain() == dom))
        {
            throw InvalidSpec("block configuration must live on block_domain(K)");
        }
        if (m_max < 0)
        {
            throw InvalidSpec("m_max must be nonnegative");
        }
        const std::size_t left = dom.index_of(make_site({0}));
        const std::size_t right = dom.index_of(make_site({2 * K}));
        const std::size_t source = dom.index_of(make_site({K}));
        if (block_cfg.at(left).occupied() || block_cfg.at(right).occupied())
        {
            throw InvalidSpec("block buffers must start empty");
        }

        BlockFunctions b;
        b.K = K;
        b.initial = block_cfg.interior_particles();
        Engine e(block_cfg, field);
        const Volume V = Volume::interior(dom);

        auto record = [&](int m) {
            const auto &c = e.config();
            b.L.push_back(c.at(left).particle_count());
            b.R.push_back(c.at(right).particle_count());
            b.S.push_back(c.interior_particles());
            b.T.push_back(m + b.initial);
        };
        auto remaining = [&] { return budget - std::min(budget, e.topplings()); };

        if (e.stabilize(V, Strategy::exhaust(), ToppleMode::Legal, budget) == Status::BudgetExceeded)
        {
            b.status = Status::BudgetExceeded;
            return b;
        }
        record(0);
        for (int m = 1; m <= m_max; ++m)
        {
            e.add_active(source);
            const std::size_t seeds[1] = {source};
            if (e.stabilize_from(V, seeds, Strategy::exhaust(), ToppleMode::Legal, remaining()) == Status::BudgetExceeded)
            {
                b.status = Status::BudgetExceeded;
                return b;
            }
            record(m);
        }
        return b;
    }

    std::optional<std::string> check_block_invariants(const BlockFunctions &b)
    {
        const std::size_t n = b.T.size();
        for (std::size_t m = 0; m < n; ++m)
        {
            if (b.T[m] != b.L[m] + b.R[m] + b.S[m])
            {
                return "T != L + R + S at m = " + std::to_string(m);
            }
            if (b.T[m] != static_cast<std::int64_t>(m) + b.initial)
            {
                return "T != m + initial at m = " + std::to_string(m);
            }
            if (b.S[m] < 0 || b.S[m] > 2 * b.K - 1)
            {
                return "S out of range at m = " + std::to_string(m);
            }
            if (m > 0 && (b.L[m] < b.L[m - 1] || b.R[m] < b.R[m - 1]))
            {
                return "L or R decreased at m = " + std::to_string(m);
            }
        }
        for (std::size_t m = 0; m < n; ++m)
        {
            for (std::size_t mp = m + 1; mp < n; ++mp)
            {
                if (b.L[mp] > b.L[m] + static_cast<std::int64_t>(mp - m) + 2 * b.K)
                {
                    return "bounded increase fails for m = " + std::to_string(m) + ", m' = " + std::to_string(mp);
                }
            }
        }
        return std::nullopt;
    }

    // --------------------------------------------------------------------- urn

    UrnResult urn_run(std::int64_t r, double zeta_pp, std::uint64_t seed)
    {
        if (r < 1)
        {
            throw InvalidSpec("urn needs r >= 1");
        }
        if (!(zeta_pp > 0.0 && zeta_pp < 1.0))
        {
            throw InvalidSpec("urn parameter must lie in (0, 1)");
        }
        CounterRng rng(hash_combine(seed, 0x9c6e6b3f1d2a4e57ULL));
        UrnResult u;
        u.X = r;
        u.Z = r;
        while (u.X > 0 && u.Z > 0)
        {
            ++u.k_star;
            const bool purple = rng.uniform() * static_cast<double>(u.X + u.Z) < static_cast<double>(u.X);
            const std::uint64_t y = rng.geometric(zeta_pp);
            u.destroyed += y;
            (purple ? u.Z : u.X) -= static_cast<std::int64_t>(y);
        }
        return u;
    }

    // ---------------------------------------------------------- Green function

    GreenEstimate green_function_estimate(const JumpDistribution &p, std::uint64_t replicas, std::uint64_t horizon, std::uint64_t seed)
    {
        GreenEstimate g;
        g.not_transient = p.dim() <= 2;
        g.visits.samples = replicas;
        if (p.is_directed())
        {
            g.visits.mean = replicas > 0 ? 1.0 : 0.0;
            return g;
        }
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::uint64_t r = 0; r < replicas; ++r)
        {
            CounterRng rng(derive_seed(seed, r));
            std::array<std::int64_t, kMaxDim> z{};
            std::int64_t away = 0; // number of nonzero coordinates
            double visits = 1.0;
            for (std::uint64_t t = 0; t < horizon; ++t)
            {
                const int dir = p.sample(rng.uniform());
                auto &c = z[static_cast<std::size_t>(dir / 2)];
                const bool was_zero = c == 0;
                c += (dir % 2 == 0) ? 1 : -1;
                away += (was_zero ? 1 : 0) - (c == 0 ? 1 : 0);
                if (away == 0)
                {
                    visits += 1.0;
                }
            }
            sum += visits;
            sumsq += visits * visits;
        }
        if (replicas > 0)
        {
            const double n = static_cast<double>(replicas);
            g.visits.mean = sum / n;
            const double var = replicas > 1 ? (sumsq - sum * sum / n) / (n - 1.0) : 0.0;
            g.visits.std_error = std::sqrt(std::max(0.0, var) / n);
        }
        return g;
    }
}
