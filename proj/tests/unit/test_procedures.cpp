#include "arw/core_model.hpp"
#include "arw/errors.hpp"
#include "arw/procedures.hpp"
#include "arw/sitewise.hpp"

#include <doctest.h>

#include <cmath>

using namespace arw;

namespace
{
    // Site-by-site directed chain: each site sees its arrivals, then runs down
    // its own stack. Returns particles sent right and whether a sleeper stays.
    struct ChainStep
    {
        std::int64_t sent = 0;
        bool sleeping = false;
        std::uint64_t topplings = 0;
    };

    ChainStep chain_step(const InstructionField &f, std::int32_t x, std::int32_t raw, std::int64_t arrivals)
    {
        ChainStep s;
        if (raw == -1 && arrivals == 0)
        {
            s.sleeping = true;
            return s;
        }
        std::int64_t active = arrivals + (raw == -1 ? 1 : raw);
        std::uint64_t j = 0;
        while (active > 0)
        {
            const Instruction ins = f.instruction_at(make_site({x}), ++j);
            if (ins.is_sleep())
            {
                if (active == 1)
                {
                    s.sleeping = true;
                    active = 0;
                }
                continue;
            }
            --active;
            ++s.sent;
        }
        s.topplings = j;
        return s;
    }
}

TEST_CASE("directed sweep matches the site-by-site chain and full stabilization")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed)
    {
        const int L = 30;
        const auto dom = LatticeDomain::box(1, L, Boundary::Kill);
        Configuration cfg = sample_initial(InitialStateSpec::poisson(0.6), dom, seed);
        if (seed % 3 == 0)
        {
            cfg.set(make_site({-L + 2}), SiteState::sleeping());
        }
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::directed_1d());
        const SweepResult r = directed_sweep(cfg, L, f);
        REQUIRE(r.status == Status::Stable);
        REQUIRE(r.N.size() == static_cast<std::size_t>(L) + 1);
        CHECK(r.N[0] == 0);

        std::int64_t in = 0;
        for (int i = 0; i < L; ++i)
        {
            const ChainStep s = chain_step(f, -L + i, cfg.at(make_site({-L + i})).raw(), in);
            CHECK(r.N[static_cast<std::size_t>(i) + 1] == s.sent);
            CHECK(r.Y[static_cast<std::size_t>(i)] == (s.sleeping ? 1 : 0));
            in = s.sent;
        }
        const ChainStep o = chain_step(f, 0, cfg.at(origin_site()).raw(), in);
        CHECK(r.origin_odometer == o.topplings);

        // Nothing to the right of the origin can reach it.
        const auto full = stabilize(cfg, Volume::interior(dom), f, Strategy::fifo());
        CHECK(full.odo.count(origin_site()) == r.origin_odometer);
    }
}

TEST_CASE("directed sweep rejects other models and short domains")
{
    const auto dom = LatticeDomain::box(1, 5, Boundary::Kill);
    const Configuration cfg(dom);
    const InstructionField sym(1, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    CHECK_THROWS_AS(directed_sweep(cfg, 3, sym), WrongModel);
    const InstructionField dir(1, ModelParams::finite(1.0), JumpDistribution::directed_1d());
    CHECK_THROWS_AS(directed_sweep(cfg, 6, dir), InvalidVolume);
}

TEST_CASE("killed walk: zero rate and the directed closed form")
{
    const double v[] = {1.0};
    const auto dir = JumpDistribution::directed_1d();
    const auto zero = killed_walk_prob(dir, v, 0.0, 1000, 100, 1);
    CHECK(zero.killed.mean == 0.0);
    CHECK(zero.killed.std_error == 0.0);
    for (double lambda : {0.5, 2.0})
    {
        const auto k = killed_walk_prob(dir, v, lambda, 20000, 1000, 7);
        const double want = lambda / (1.0 + lambda);
        CHECK(k.truncated == 0);
        CHECK(std::abs(k.killed.mean - want) < 5 * k.killed.std_error);
    }
    CHECK_THROWS_AS(killed_walk_prob(dir, v, -1.0, 10, 10, 1), InvalidSpec);
}

TEST_CASE("urn runs until one colour is gone and conserves balls")
{
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        const std::int64_t r = 1 + static_cast<std::int64_t>(seed % 20);
        const UrnResult u = urn_run(r, 0.3, seed);
        CHECK(u.k_star >= 1);
        CHECK((u.X <= 0 || u.Z <= 0));
        CHECK(u.destroyed >= u.k_star);
        CHECK(u.X + u.Z == 2 * r - static_cast<std::int64_t>(u.destroyed));
        const UrnResult again = urn_run(r, 0.3, seed);
        CHECK(again.k_star == u.k_star);
        CHECK(again.destroyed == u.destroyed);
    }
    CHECK_THROWS_AS(urn_run(0, 0.5, 1), InvalidSpec);
    CHECK_THROWS_AS(urn_run(3, 1.0, 1), InvalidSpec);
}

TEST_CASE("urn: early stopping is rare and k* grows with r")
{
    CHECK(urn_run(1, 0.5, 3).k_star == 1);

    int early = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed)
    {
        early += urn_run(200, 0.5, seed).k_star <= 120 ? 1 : 0;
    }
    CHECK(early < 100);

    double prev = 0.0;
    for (std::int64_t r : {50, 100, 200})
    {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 2000; ++seed)
        {
            sum += static_cast<double>(urn_run(r, 0.5, seed + 7919).k_star);
        }
        const double mean = sum / 2000.0;
        CHECK(mean >= 1.8 * prev);
        prev = mean;
    }
}

TEST_CASE("green function")
{
    const auto directed = green_function_estimate(JumpDistribution::directed_1d(), 10, 100, 1);
    CHECK(directed.visits.mean == 1.0);
    CHECK(directed.not_transient);
    CHECK(green_function_estimate(JumpDistribution::symmetric(2), 10, 100, 1).not_transient);

    // Simple random walk on Z^3 returns 1.516386... visits on average.
    const auto g = green_function_estimate(JumpDistribution::symmetric(3), 3000, 3000, 5);
    CHECK_FALSE(g.not_transient);
    CHECK(g.visits.mean < 1.5164 + 5 * g.visits.std_error);
    CHECK(g.visits.mean > 1.5164 - 0.04 - 5 * g.visits.std_error);

    // Transience: extending the same walks ten times further moves the estimate by less than 2 sigma.
    const auto a = green_function_estimate(JumpDistribution::symmetric(3), 1000, 10000, 8);
    const auto b = green_function_estimate(JumpDistribution::symmetric(3), 1000, 100000, 8);
    CHECK(b.visits.mean >= a.visits.mean);
    CHECK(std::abs(a.visits.mean - b.visits.mean) < 2 * std::hypot(a.visits.std_error, b.visits.std_error));
}

TEST_CASE("block functions satisfy the block invariants")
{
    for (int K : {2, 4})
    {
        for (std::uint64_t seed = 0; seed < 30; ++seed)
        {
            const auto dom = block_domain(K);
            CHECK(dom.interior_size() == static_cast<std::size_t>(2 * K - 1));
            const Configuration cfg = sample_initial(InitialStateSpec::poisson(0.5), dom, seed);
            const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
            const BlockFunctions b = block_functions(K, cfg, f, 40);
            REQUIRE(b.status == Status::Stable);
            CHECK(b.T.size() == 41);
            const auto bad = check_block_invariants(b);
            CHECK_MESSAGE(!bad, (bad ? *bad : ""));
        }
    }
}

TEST_CASE("block invariant checker reports a broken identity")
{
    BlockFunctions b;
    b.K = 2;
    b.L = {0, 1};
    b.R = {0, 0};
    b.S = {0, 0};
    b.T = {0, 2};
    CHECK(check_block_invariants(b).has_value());
}

TEST_CASE("trap exploration settles explored particles on increasing traps")
{
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed)
    {
        const auto dom = LatticeDomain::window(1, 60);
        Configuration cfg(dom);
        for (int k = 1; k <= 3; ++k)
        {
            cfg.set(make_site({16 * k}), SiteState::active(1));
            cfg.set(make_site({-16 * k}), SiteState::active(1));
        }
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
        const TrapResult t = trap_explore(cfg, 3, f);
        if (t.status != TrapResult::Outcome::Success)
        {
            continue;
        }
        ++successes;
        CHECK(t.replay_ok);
        CHECK(t.origin_untouched);
        CHECK(t.traps_positive.size() == 3);
        CHECK(t.traps_negative.size() == 3);
        CHECK(t.interdistances.size() == 6);
        for (std::size_t i = 0; i < t.traps_positive.size(); ++i)
        {
            CHECK(t.traps_positive[i] > (i == 0 ? 0 : t.traps_positive[i - 1]));
            CHECK(t.traps_negative[i] < (i == 0 ? 0 : t.traps_negative[i - 1]));
        }
        for (std::int32_t g : t.interdistances)
        {
            CHECK(g >= 1);
        }
    }
    CHECK(successes >= 35);

    Configuration bad(LatticeDomain::window(1, 5));
    bad.set(origin_site(), SiteState::active(1));
    const InstructionField f(1, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
    CHECK(trap_explore(bad, 1, f).status == TrapResult::Outcome::Failed);
}

TEST_CASE("safe-zone drive")
{
    const double v[] = {1.0};
    const auto dom = LatticeDomain::box(1, 20, Boundary::Kill);
    const Configuration cfg = sample_initial(InitialStateSpec::bernoulli(0.5), dom, 3);

    // With a negligible sleep rate every particle walks right until it leaves.
    const InstructionField awake(3, ModelParams::finite(1e-12), JumpDistribution::directed_1d());
    const SafeZoneResult a = safe_zone_drive(cfg, v, awake);
    CHECK(a.exits == a.initial_particles);
    CHECK(a.left_behind == 0);

    for (std::uint64_t seed = 0; seed < 50; ++seed)
    {
        const Configuration c = sample_initial(InitialStateSpec::bernoulli(0.4), dom, seed);
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::symmetric(1));
        const SafeZoneResult s = safe_zone_drive(c, v, f, kDefaultBudget, true);
        REQUIRE(s.status == Status::Stable);
        CHECK(s.exits + s.left_behind <= s.initial_particles);

        // The log is a legal toppling sequence on the shared field.
        Engine e(c, f);
        for (const auto &[idx, ins] : s.log)
        {
            CHECK(e.topple(idx, ToppleMode::Legal).instruction == ins);
        }
        CHECK(e.exits() == s.exits);
    }

    Configuration two(dom);
    two.set(origin_site(), SiteState::active(2));
    CHECK_THROWS_AS(safe_zone_drive(two, v, awake), NonBinaryInput);
}
