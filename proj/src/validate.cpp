#include "arw/validate.hpp"

#include "arw/dynamics.hpp"
#include "arw/rng.hpp"

#include <limits>
#include <ostream>
#include <sstream>

namespace arw
{
    namespace
    {
        Configuration place(Configuration cfg, CounterRng &g, std::uint64_t count)
        {
            const auto interior = cfg.domain().interior_indices();
            for (std::uint64_t p = 0; p < count; ++p)
            {
                const std::size_t idx = interior[g.below(interior.size())];
                cfg.set(idx, add_particle(cfg.at(idx)));
            }
            return cfg;
        }

        struct Run
        {
            Configuration cfg;
            Odometer odo;
            Status status;
            std::uint64_t topplings;
            std::int64_t exits;
        };

        Run run(const Configuration &cfg, const Volume &v, const InstructionField &field, Strategy strategy, ToppleMode mode,
                CheckOptions opt)
        {
            Engine e(cfg, field);
            e.inject_skip_odometer(opt.skip_odometer);
            const Status st = e.stabilize(v, strategy, mode, kValidateBudget);
            return Run{e.config(), e.odometer(), st, e.topplings(), e.exits()};
        }

        Verdict pass() { return {}; }
        Verdict skip() { return {Verdict::Kind::Skipped, "budget"}; }
        Verdict fail(std::string why) { return {Verdict::Kind::Fail, std::move(why)}; }

        std::string first_difference(const Odometer &a, const Odometer &b)
        {
            const auto &dom = a.domain();
            for (std::size_t i = 0; i < dom.size(); ++i)
            {
                if (a.count(i) != b.count(i) || a.jumps(i) != b.jumps(i))
                {
                    std::ostringstream s;
                    s << "site index " << i << ": " << a.count(i) << "/" << a.jumps(i) << " vs " << b.count(i) << "/" << b.jumps(i);
                    return s.str();
                }
            }
            return "none";
        }

        std::string first_excess(const Odometer &lo, const Odometer &hi)
        {
            for (std::size_t i = 0; i < lo.counts().size(); ++i)
            {
                if (lo.count(i) > hi.count(i))
                {
                    return "site index " + std::to_string(i) + ": " + std::to_string(lo.count(i)) + " > " + std::to_string(hi.count(i));
                }
            }
            return "none";
        }
    }

    std::string Instance::describe() const
    {
        std::ostringstream s;
        s << "domain=" << cfg.domain().describe() << " " << field.params().to_string() << " jumps=" << field.jumps().describe()
          << " particles=" << cfg.total_particles() << " field_seed=" << field.seed();
        return s.str();
    }

    Instance make_instance(std::uint64_t seed)
    {
        CounterRng g(seed);
        const int d = 1 + static_cast<int>(g.below(2));
        static constexpr double kLambdas[] = {0.2, 1.0, 5.0};
        const ModelParams params = ModelParams::finite(kLambdas[g.below(3)]);
        JumpDistribution jumps = JumpDistribution::symmetric(d);
        switch (g.below(3))
        {
        case 1:
            jumps = JumpDistribution::biased(d, d == 1 ? 0.75 : 0.4);
            break;
        case 2:
            if (d == 1)
            {
                jumps = JumpDistribution::directed_1d();
            }
            break;
        default:
            break;
        }

        const auto shape = g.below(3);
        std::optional<LatticeDomain> dom;
        if (shape == 2)
        {
            dom = LatticeDomain::torus(d, d == 1 ? 1 + static_cast<int>(g.below(25)) : 1 + static_cast<int>(g.below(5)));
        }
        else
        {
            std::vector<std::int32_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a)
            {
                const auto w = static_cast<std::int32_t>(1 + g.below(d == 1 ? 25 : 5));
                lo[static_cast<std::size_t>(a)] = -static_cast<std::int32_t>(g.below(static_cast<std::uint64_t>(w)));
                hi[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)] + w - 1;
            }
            dom = LatticeDomain::box(d, lo, hi, shape == 0 ? Boundary::Kill : Boundary::Closed);
        }

        std::uint64_t particles = g.below(31);
        if (shape == 2)
        {
            // A torus cannot absorb more particles than sites; stay well below that.
            particles = std::min<std::uint64_t>(particles, dom->interior_size() / 2);
        }
        Configuration cfg = place(Configuration(*dom), g, particles);
        for (std::size_t idx : dom->interior_indices())
        {
            if (cfg.at(idx).raw() == 1 && g.below(3) == 0)
            {
                cfg.set(idx, SiteState::sleeping());
            }
        }

        Site sub_lo{}, sub_hi{};
        for (int a = 0; a < d; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            const std::int32_t lo = dom->lo()[ua];
            const std::int32_t hi = dom->hi()[ua];
            sub_lo[ua] = lo + static_cast<std::int32_t>(g.below(static_cast<std::uint64_t>(1 - lo)));
            sub_hi[ua] = static_cast<std::int32_t>(g.below(static_cast<std::uint64_t>(hi + 1)));
        }

        std::uint64_t extra = g.below(6);
        if (shape == 2)
        {
            // Keep the larger torus system absorbable too.
            const auto room = static_cast<std::int64_t>(dom->interior_size() / 2) - cfg.total_particles();
            extra = std::min<std::uint64_t>(extra, static_cast<std::uint64_t>(std::max<std::int64_t>(room, 0)));
        }
        Configuration bigger = place(cfg, g, extra);
        for (std::size_t idx : dom->interior_indices())
        {
            if (bigger.at(idx).is_sleeping() && g.below(2) == 0)
            {
                bigger.set(idx, SiteState::active(1));
            }
        }

        const InstructionField field(g(), params, jumps);
        return Instance{seed, std::move(cfg), field, sub_lo, sub_hi, std::move(bigger)};
    }

    Verdict check_abelian(const Instance &in, CheckOptions opt)
    {
        const Volume v = Volume::interior(in.cfg.domain());
        const Strategy strategies[] = {Strategy::exhaust(), Strategy::random(in.seed ^ 0xa5a5), Strategy::fifo(), Strategy::sweep()};
        const Run ref = run(in.cfg, v, in.field, strategies[0], ToppleMode::Legal, opt);
        if (ref.status != Status::Stable)
        {
            return skip();
        }
        for (std::size_t k = 1; k < std::size(strategies); ++k)
        {
            const Run other = run(in.cfg, v, in.field, strategies[k], ToppleMode::Legal, opt);
            if (other.status != Status::Stable)
            {
                return skip();
            }
            if (!(other.cfg == ref.cfg) || !(other.odo == ref.odo))
            {
                return fail("strategy " + std::to_string(k) + " disagrees with exhaust at " + first_difference(ref.odo, other.odo));
            }
        }
        return pass();
    }

    Verdict check_sandwich(const Instance &in, CheckOptions opt)
    {
        const Volume v = Volume::interior(in.cfg.domain());
        const Run w = run(in.cfg, v, in.field, Strategy::exhaust(), ToppleMode::WLegal, opt);
        const Run m = run(in.cfg, v, in.field, Strategy::exhaust(), ToppleMode::Legal, opt);
        const Run s = run(in.cfg, v, in.field, Strategy::exhaust(), ToppleMode::SLegal, opt);
        if (w.status != Status::Stable || m.status != Status::Stable || s.status != Status::Stable)
        {
            return skip();
        }
        if (!w.odo.dominated_by(m.odo))
        {
            return fail("weak odometer exceeds the legal one at " + first_excess(w.odo, m.odo));
        }
        if (!m.odo.dominated_by(s.odo))
        {
            return fail("legal odometer exceeds the strong one at " + first_excess(m.odo, s.odo));
        }
        return pass();
    }

    Verdict check_strong_weak(const Instance &in, CheckOptions opt)
    {
        const Volume v = Volume::interior(in.cfg.domain());
        const std::size_t o = in.cfg.domain().index_of(origin_site());
        Configuration plus = in.cfg;
        plus.set(o, add_particle(plus.at(o)));
        const Run s = run(in.cfg, v, in.field, Strategy::exhaust(), ToppleMode::SLegal, opt);
        const Run w = run(plus, v, in.field, Strategy::exhaust(), ToppleMode::WLegal, opt);
        if (s.status != Status::Stable || w.status != Status::Stable)
        {
            return skip();
        }
        if (jump_odometer_of(s.odo) != jump_odometer_of(w.odo))
        {
            return fail("jump odometers differ at " + first_difference(s.odo, w.odo));
        }
        return pass();
    }

    Verdict check_monotone(const Instance &in, CheckOptions opt)
    {
        const LatticeDomain &dom = in.cfg.domain();
        const Run small = run(in.cfg, Volume::box(dom, in.sub_lo, in.sub_hi), in.field, Strategy::exhaust(), ToppleMode::Legal, opt);
        const Run big = run(in.bigger, Volume::interior(dom), in.field, Strategy::exhaust(), ToppleMode::Legal, opt);
        if (small.status != Status::Stable || big.status != Status::Stable)
        {
            return skip();
        }
        if (!small.odo.dominated_by(big.odo))
        {
            return fail("m_{V,eta} exceeds m_{V~,eta~} at " + first_excess(small.odo, big.odo));
        }
        return pass();
    }

    Verdict check_conservation(const Instance &in, CheckOptions opt)
    {
        const Run r = run(in.cfg, Volume::interior(in.cfg.domain()), in.field, Strategy::exhaust(), ToppleMode::Legal, opt);
        std::uint64_t sum = 0;
        for (auto c : r.odo.counts())
        {
            sum += c;
        }
        if (sum != r.topplings)
        {
            return fail("odometer total " + std::to_string(sum) + " differs from " + std::to_string(r.topplings) + " topplings");
        }
        const std::int64_t before = in.cfg.total_particles();
        const std::int64_t after = r.cfg.total_particles();
        if (in.cfg.domain().kills())
        {
            if (before != after + r.exits)
            {
                return fail(std::to_string(before) + " != " + std::to_string(after) + " + " + std::to_string(r.exits) + " exits");
            }
        }
        else if (before != after || r.exits != 0)
        {
            return fail("particle count changed from " + std::to_string(before) + " to " + std::to_string(after));
        }
        return r.status == Status::Stable ? pass() : skip();
    }

    Verdict check_ct_engine(const Instance &in, CheckOptions opt)
    {
        const Run r = run(in.cfg, Volume::interior(in.cfg.domain()), in.field, Strategy::exhaust(), ToppleMode::Legal, opt);
        if (r.status != Status::Stable)
        {
            return skip();
        }
        // Every legal sequence is dominated by the stabilizing odometer, so this run terminates.
        const CtResult ct = ct_run(in.cfg, in.field, ClockField{in.seed}, std::numeric_limits<double>::infinity());
        if (!ct.absorbed)
        {
            return fail("continuous-time run did not absorb");
        }
        if (!(ct.final_cfg == r.cfg))
        {
            return fail("final configurations differ");
        }
        if (!(ct.odometer == r.odo))
        {
            return fail("odometers differ at " + first_difference(ct.odometer, r.odo));
        }
        return pass();
    }

    ValidateReport run_validate(std::uint64_t seed_count, std::uint64_t master, CheckOptions opt, std::ostream *progress)
    {
        using Check = Verdict (*)(const Instance &, CheckOptions);
        static constexpr std::pair<const char *, Check> kChecks[] = {
            {"abelian", check_abelian},     {"sandwich", check_sandwich},         {"strong-weak", check_strong_weak},
            {"monotone", check_monotone}, {"conservation", check_conservation}, {"ct-engine", check_ct_engine},
        };
        ValidateReport rep;
        for (std::uint64_t i = 0; i < seed_count; ++i)
        {
            const std::uint64_t s = derive_seed(master, i);
            const Instance in = make_instance(s);
            ++rep.instances;
            for (const auto &[name, check] : kChecks)
            {
                const Verdict v = check(in, opt);
                ++rep.checks;
                if (v.skipped())
                {
                    ++rep.skipped;
                }
                if (v.failed())
                {
                    std::ostringstream msg;
                    msg << name << " violated: " << v.detail << "\nreproducer: instance " << i << " of master seed " << master
                        << " (instance seed " << s << ") " << in.describe();
                    rep.violation = msg.str();
                    return rep;
                }
            }
            if (progress != nullptr && (i + 1) % 100 == 0)
            {
                *progress << "validate: " << (i + 1) << "/" << seed_count << " instances\n";
            }
        }
        return rep;
    }
}
