#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/sitewise.hpp"
#include "arw/validate.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace arw;

namespace
{
    // Reference stabilizer: plain maps keyed by coordinates, instructions read
    // through instruction_at, sites scanned in order until none is unstable.
    struct Naive
    {
        std::map<std::int32_t, std::int32_t> raw; // -1 sleeping, n active
        std::map<std::int32_t, std::uint64_t> odo;
        std::int64_t exits = 0;
    };

    Naive naive_stabilize_1d(const Configuration &cfg, const InstructionField &f)
    {
        const auto &dom = cfg.domain();
        const std::int32_t lo = dom.lo()[0], hi = dom.hi()[0];
        Naive n;
        for (std::int32_t x = lo; x <= hi; ++x)
        {
            n.raw[x] = cfg.at(make_site({x})).raw();
            n.odo[x] = 0;
        }
        for (bool moved = true; moved;)
        {
            moved = false;
            for (std::int32_t x = lo; x <= hi; ++x)
            {
                while (n.raw[x] >= 1)
                {
                    moved = true;
                    const Instruction ins = f.instruction_at(make_site({x}), ++n.odo[x]);
                    if (ins.is_sleep())
                    {
                        if (n.raw[x] == 1)
                        {
                            n.raw[x] = -1;
                        }
                        continue;
                    }
                    n.raw[x] -= 1;
                    const std::int32_t y = x + (ins.dir == 0 ? 1 : -1);
                    if (y < lo || y > hi)
                    {
                        ++n.exits;
                    }
                    else
                    {
                        n.raw[y] = n.raw[y] == -1 ? 2 : n.raw[y] + 1;
                    }
                }
            }
        }
        return n;
    }
}

TEST_CASE("instruction field is a pure function of seed, site and index")
{
    const InstructionField a(11, ModelParams::finite(1.0), JumpDistribution::symmetric(2));
    const InstructionField b(11, ModelParams::finite(1.0), JumpDistribution::symmetric(2));
    const InstructionField c(12, ModelParams::finite(1.0), JumpDistribution::symmetric(2));
    int differ = 0;
    for (std::int32_t x = -5; x <= 5; ++x)
    {
        for (std::uint64_t j = 1; j <= 20; ++j)
        {
            CHECK(a.instruction_at(make_site({x, 2}), j) == b.instruction_at(make_site({x, 2}), j));
            differ += a.instruction_at(make_site({x, 2}), j) == c.instruction_at(make_site({x, 2}), j) ? 0 : 1;
        }
    }
    CHECK(differ > 50);
    CHECK_THROWS(a.instruction_at(make_site({0, 0}), 0));
}

TEST_CASE("instruction frequencies: sleep with probability lambda/(1+lambda)")
{
    const double lambda = 0.5;
    const InstructionField f(3, ModelParams::finite(lambda), JumpDistribution::biased(1, 0.8));
    const int n = 200000;
    int sleeps = 0, plus = 0;
    for (int i = 0; i < n; ++i)
    {
        const Instruction ins = f.instruction_at(make_site({i % 1000}), static_cast<std::uint64_t>(1 + i / 1000));
        sleeps += ins.is_sleep() ? 1 : 0;
        plus += ins.dir == 0 ? 1 : 0;
    }
    const double q = lambda / (1 + lambda);
    CHECK(std::abs(sleeps / double(n) - q) < 5 * std::sqrt(q * (1 - q) / n));
    const double pj = (1 - q) * 0.8;
    CHECK(std::abs(plus / double(n) - pj) < 5 * std::sqrt(pj * (1 - pj) / n));

    const InstructionField never(3, ModelParams::infinite_sleep(), JumpDistribution::symmetric(1));
    for (std::uint64_t j = 1; j < 1000; ++j)
    {
        CHECK(never.instruction_at(make_site({0}), j).is_jump());
    }
}

TEST_CASE("revealing instructions records the highest index per site")
{
    InstructionField f(1, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    CHECK(f.revealed(make_site({4})) == 0);
    const Instruction i3 = f.reveal(make_site({4}), 3);
    CHECK(i3 == f.instruction_at(make_site({4}), 3));
    f.reveal(make_site({4}), 1);
    CHECK(f.revealed(make_site({4})) == 3);
}

TEST_CASE("single site, single particle: one toppling, asleep iff the first instruction is Sleep")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
        Configuration c(LatticeDomain::box(1, 0, Boundary::Kill));
        c.set(origin_site(), SiteState::active(1));
        const auto r = stabilize(c, Volume::interior(c.domain()), f, Strategy::exhaust());
        CHECK(r.odo.count(origin_site()) == 1);
        const bool slept = f.instruction_at(origin_site(), 1).is_sleep();
        CHECK(r.cfg.at(origin_site()) == (slept ? SiteState::sleeping() : SiteState::empty()));
        CHECK(r.exits == (slept ? 0 : 1));
    }
}

TEST_CASE("engine agrees with an independent reference stabilizer")
{
    for (std::uint64_t seed = 0; seed < 300; ++seed)
    {
        CounterRng g(seed);
        const int w = 1 + static_cast<int>(g.below(15));
        const std::int32_t lo[] = {-static_cast<std::int32_t>(g.below(static_cast<std::uint64_t>(w)))};
        const std::int32_t hi[] = {lo[0] + w - 1};
        const auto dom = LatticeDomain::box(1, lo, hi, Boundary::Kill);
        const InstructionField f(g(), ModelParams::finite(0.3 + 3 * g.uniform()), JumpDistribution::biased(1, 0.3 + 0.4 * g.uniform()));
        Configuration c = sample_initial(InitialStateSpec::poisson(1.5 * g.uniform()), dom, g());
        const auto r = stabilize(c, Volume::interior(dom), f, Strategy::random(seed));
        REQUIRE(r.status == Status::Stable);
        const Naive n = naive_stabilize_1d(c, f);
        CHECK(n.exits == r.exits);
        for (std::int32_t x = lo[0]; x <= hi[0]; ++x)
        {
            CHECK(n.raw.at(x) == r.cfg.at(make_site({x})).raw());
            CHECK(n.odo.at(x) == r.odo.count(make_site({x})));
        }
    }
}

TEST_CASE("toppling legality")
{
    const InstructionField f(5, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    Configuration c(LatticeDomain::box(1, 2, Boundary::Closed));
    c.set(make_site({1}), SiteState::sleeping());
    Engine e(c, f);
    CHECK_THROWS_AS(e.topple(make_site({0}), ToppleMode::Legal), IllegalToppling);
    CHECK_THROWS_AS(e.topple(make_site({1}), ToppleMode::Legal), IllegalToppling);
    CHECK_THROWS_AS(e.topple(make_site({0}), ToppleMode::Acceptable), IllegalToppling);
    CHECK_THROWS_AS(e.topple(make_site({3}), ToppleMode::Acceptable), OutOfDomain);
    // Acceptable toppling of a sleeper: counted; a Sleep leaves the site as it was.
    for (int k = 0; k < 20 && e.config().at(make_site({1})).is_sleeping(); ++k)
    {
        const std::uint64_t before = e.odometer().count(make_site({1}));
        const auto out = e.topple(make_site({1}), ToppleMode::Acceptable);
        CHECK(e.odometer().count(make_site({1})) == before + 1);
        if (out.instruction.is_sleep())
        {
            CHECK(e.config().at(make_site({1})).is_sleeping());
        }
        else
        {
            CHECK(e.config().at(make_site({1})).is_empty());
        }
    }
}

TEST_CASE("weak and strong stability at the origin")
{
    const InstructionField f(8, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    Configuration c(LatticeDomain::box(1, 3, Boundary::Kill));
    c.set(origin_site(), SiteState::active(1));
    const Volume v = Volume::interior(c.domain());
    // A single particle of any state is weakly stable at the origin.
    CHECK(weak_stabilize(c, v, f).topplings == 0);
    const auto s = strong_stabilize(c, v, f);
    CHECK(s.cfg.at(origin_site()).is_empty());
    CHECK(s.topplings >= 1);
    const Volume off = Volume::box(c.domain(), make_site({1}), make_site({3}));
    CHECK_THROWS_AS(weak_stabilize(c, off, f), InvalidVolume);
    CHECK_THROWS_AS(Volume::box(c.domain(), make_site({-5}), make_site({0})), InvalidVolume);
}

TEST_CASE("instantaneous sleep: a configuration of single particles is already stable")
{
    const InstructionField f(2, ModelParams::infinite_sleep(), JumpDistribution::symmetric(1));
    const auto dom = LatticeDomain::box(1, 20, Boundary::Kill);
    const Configuration c = sample_initial(InitialStateSpec::deterministic(1), dom, 0);
    const auto r = stabilize(c, Volume::interior(dom), f, Strategy::exhaust());
    CHECK(r.topplings == 0);
    CHECK(r.cfg.sleeping_count() == 41);

    // Two particles: one jumps away and the other falls asleep at once.
    Configuration two(dom);
    two.set(origin_site(), SiteState::active(2));
    const auto t = stabilize(two, Volume::interior(dom), f, Strategy::exhaust());
    CHECK(t.cfg.total_particles() == 2);
    CHECK(t.cfg.sleeping_count() == 2);
    CHECK(t.odo.count(origin_site()) == 1);
}

TEST_CASE("budget exhaustion leaves the engine reusable")
{
    const InstructionField f(4, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    const auto dom = LatticeDomain::torus(1, 5);
    Configuration c(dom);
    c.set(origin_site(), SiteState::active(7)); // more particles than sites: never absorbs
    Engine e(c, f);
    CHECK(e.stabilize(Volume::interior(dom), Strategy::fifo(), ToppleMode::Legal, 1000) == Status::BudgetExceeded);
    CHECK(e.topplings() == 1000);
    CHECK(e.stabilize(Volume::interior(dom), Strategy::fifo(), ToppleMode::Legal, 500) == Status::BudgetExceeded);
    CHECK(e.topplings() == 1500);
    CHECK(e.config().total_particles() == 7);
}

TEST_CASE("arrival tracking: every jump lands somewhere or exits")
{
    const InstructionField f(6, ModelParams::finite(0.5), JumpDistribution::symmetric(2));
    const auto dom = LatticeDomain::box(2, 4, Boundary::Kill);
    Engine e(sample_initial(InitialStateSpec::poisson(0.9), dom, 3), f);
    e.track_arrivals(true);
    REQUIRE(e.stabilize(Volume::interior(dom), Strategy::sweep(), ToppleMode::Legal) == Status::Stable);
    std::uint64_t sent = 0, received = 0;
    for (std::size_t i = 0; i < dom.size(); ++i)
    {
        sent += e.odometer().jumps(i);
        received += e.arrivals()[i];
    }
    CHECK(sent == received + static_cast<std::uint64_t>(e.exits()));
}

TEST_CASE("successive weak stabilization: T_V <= T_V^s and the empty case")
{
    const auto dom = LatticeDomain::box(2, 3, Boundary::Kill);
    const Volume v = Volume::interior(dom);
    const InstructionField f0(1, ModelParams::finite(1.0), JumpDistribution::symmetric(2));
    const auto empty = successive_weak(Configuration(dom), v, f0);
    CHECK(empty.rounds_to_stable == 1);
    CHECK(empty.rounds_to_strong_stable == 1);
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::symmetric(2));
        const Configuration c = sample_initial(InitialStateSpec::poisson(0.5), dom, seed + 1000);
        const auto r = successive_weak(c, v, f);
        REQUIRE(r.status == Status::Stable);
        CHECK(r.rounds_to_stable >= 1);
        CHECK(r.rounds_to_stable <= r.rounds_to_strong_stable);
        // The strong end state is the strong stabilization.
        const auto s = strong_stabilize(c, v, f);
        CHECK(s.cfg.at(origin_site()).is_empty());
    }
}

TEST_CASE("odometer dump lists toppled sites only")
{
    const InstructionField f(0, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    Configuration c(LatticeDomain::box(1, 1, Boundary::Kill));
    c.set(origin_site(), SiteState::active(1));
    const auto r = stabilize(c, Volume::interior(c.domain()), f, Strategy::exhaust());
    const int jumped = f.instruction_at(origin_site(), 1).is_jump() ? 1 : 0;
    std::ostringstream s;
    write_odometer(s, r.odo);
    CHECK(s.str().rfind("arw-snapshot d=1 shape=box-kill:-1:1\n0 1 " + std::to_string(jumped) + "\n", 0) == 0);
}

TEST_CASE("exact invariants hold on random small instances")
{
    for (std::uint64_t i = 0; i < 200; ++i)
    {
        const Instance in = make_instance(derive_seed(77, i));
        CHECK_FALSE(check_abelian(in).failed());
        CHECK_FALSE(check_sandwich(in).failed());
        CHECK_FALSE(check_strong_weak(in).failed());
        CHECK_FALSE(check_monotone(in).failed());
        CHECK_FALSE(check_conservation(in).failed());
    }
}

TEST_CASE("a skipped odometer increment is detected")
{
    bool caught = false;
    for (std::uint64_t i = 0; i < 50 && !caught; ++i)
    {
        const Instance in = make_instance(derive_seed(1, i));
        caught = check_conservation(in, CheckOptions{true}).failed();
    }
    CHECK(caught);
}
