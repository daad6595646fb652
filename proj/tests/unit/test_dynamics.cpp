#include "arw/core_model.hpp"
#include "arw/dynamics.hpp"
#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/sitewise.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace arw;

namespace
{
    constexpr double kForever = std::numeric_limits<double>::infinity();

    bool absorbing(const Configuration &c)
    {
        for (std::size_t i = 0; i < c.domain().size(); ++i)
        {
            if (c.domain().is_interior(i) && c.at(i).is_active())
            {
                return false;
            }
        }
        return true;
    }
}

TEST_CASE("continuous-time run ends where the engine ends")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        const bool torus = seed % 2 == 1;
        const int d = 1 + static_cast<int>(seed % 4 / 2);
        const auto dom = torus ? LatticeDomain::torus(d, d == 1 ? 12 : 4) : LatticeDomain::box(d, d == 1 ? 8 : 2, Boundary::Kill);
        const Configuration cfg = sample_initial(InitialStateSpec::poisson(torus ? 0.3 : 0.8), dom, seed);
        const InstructionField f(seed, ModelParams::finite(seed % 3 == 0 ? 0.2 : 1.0), JumpDistribution::symmetric(d));
        const CtResult ct = ct_run(cfg, f, ClockField{seed + 100}, kForever, true);
        const auto ref = stabilize(cfg, Volume::interior(dom), f, Strategy::exhaust());
        REQUIRE(ref.status == Status::Stable);
        CHECK(ct.absorbed);
        CHECK(ct.final_cfg == ref.cfg);
        CHECK(ct.odometer == ref.odo);
        CHECK(ct.exits == ref.exits);
        CHECK(ct.trajectory.size() == ref.topplings);
        for (std::size_t k = 1; k < ct.trajectory.size(); ++k)
        {
            CHECK(ct.trajectory[k - 1].t <= ct.trajectory[k].t);
        }
    }
}

TEST_CASE("continuous-time run stopped early sits below the final odometer")
{
    const auto dom = LatticeDomain::box(1, 10, Boundary::Kill);
    const Configuration cfg = sample_initial(InitialStateSpec::poisson(1.5), dom, 4);
    const InstructionField f(4, ModelParams::finite(0.5), JumpDistribution::symmetric(1));
    const CtResult full = ct_run(cfg, f, ClockField{1}, kForever);
    REQUIRE(full.absorbed);
    const CtResult part = ct_run(cfg, f, ClockField{1}, full.time / 2);
    CHECK_FALSE(part.absorbed);
    CHECK(part.time == full.time / 2);
    CHECK(part.odometer.dominated_by(full.odometer));
    CHECK(part.final_cfg.total_particles() + part.exits == cfg.total_particles());
}

TEST_CASE("continuous-time runs reject instantaneous sleeping")
{
    const Configuration cfg(LatticeDomain::box(1, 2, Boundary::Kill));
    const InstructionField f(1, ModelParams::infinite_sleep(), JumpDistribution::symmetric(1));
    CHECK_THROWS_AS(ct_run(cfg, f, ClockField{1}, 1.0), WrongModel);
    CHECK_THROWS_AS(particlewise_run(cfg, LabeledSystem{1, ModelParams::infinite_sleep(), JumpDistribution::symmetric(1)}, 1.0),
                    WrongModel);
}

TEST_CASE("particle-wise run conserves particles and absorbs")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed)
    {
        const int d = 1 + static_cast<int>(seed % 2);
        const bool torus = seed % 3 == 0;
        const auto dom = torus ? LatticeDomain::torus(d, d == 1 ? 16 : 5) : LatticeDomain::box(d, d == 1 ? 6 : 2, Boundary::Kill);
        Configuration cfg = sample_initial(InitialStateSpec::poisson(torus ? 0.3 : 1.0), dom, seed);
        const LabeledSystem sys{seed, ModelParams::finite(1.0), JumpDistribution::symmetric(d)};
        ParticlewiseOptions opt;
        opt.check_invariants = true;
        const ParticlewiseResult r = particlewise_run(cfg, sys, kForever, opt);
        REQUIRE(r.absorbed);
        CHECK(absorbing(r.final_cfg));
        CHECK(static_cast<std::int64_t>(r.particles.size()) == cfg.total_particles());
        CHECK(r.final_cfg.total_particles() + r.killed == cfg.total_particles());
        if (torus)
        {
            CHECK(r.killed == 0);
        }
        std::int64_t alive = 0;
        for (const auto &p : r.particles)
        {
            if (p.position >= 0)
            {
                ++alive;
                CHECK(p.sleeping);
            }
        }
        CHECK(alive == r.final_cfg.total_particles());
    }
}

TEST_CASE("a lone particle is counted as an exit with the closed-form probability")
{
    // Directed, lambda = 1, box radius 1: the particle at the origin must jump
    // twice before its first sleep, probability 1/4, in both constructions.
    const auto dom = LatticeDomain::box(1, 1, Boundary::Kill);
    Configuration cfg(dom);
    cfg.set(origin_site(), SiteState::active(1));
    const int reps = 4000;
    double m = 0.0;
    double ms = 0.0;
    for (int i = 0; i < reps; ++i)
    {
        const std::uint64_t s = derive_seed(11, static_cast<std::uint64_t>(i));
        const InstructionField f(s, ModelParams::finite(1.0), JumpDistribution::directed_1d());
        const LabeledSystem sys{derive_seed(s, 2), ModelParams::finite(1.0), JumpDistribution::directed_1d()};
        const ExitCounts e = exit_counts(cfg, f, sys);
        CHECK_FALSE(e.proxy_too_small);
        m += static_cast<double>(e.M);
        ms += static_cast<double>(e.M_star);
    }
    const double se = std::sqrt(0.25 * 0.75 / reps);
    CHECK(std::abs(m / reps - 0.25) < 5 * se);
    CHECK(std::abs(ms / reps - 0.25) < 5 * se);
}

TEST_CASE("exit counts stay within the particle count")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed)
    {
        const auto dom = LatticeDomain::box(1, 10, Boundary::Kill);
        const Configuration cfg = sample_initial(InitialStateSpec::poisson(0.6), dom, seed);
        const InstructionField f(seed, ModelParams::finite(1.0), JumpDistribution::directed_1d());
        const LabeledSystem sys{derive_seed(seed, 2), ModelParams::finite(1.0), JumpDistribution::directed_1d()};
        ExitCountOptions opt;
        opt.surround = InitialStateSpec::poisson(0.6);
        opt.surround_seed = derive_seed(seed, 4);
        const ExitCounts e = exit_counts(cfg, f, sys, opt);
        CHECK(e.status == Status::Stable);
        CHECK(e.M >= 0);
        CHECK(e.M <= cfg.total_particles());
        CHECK(e.M_star >= 0);
        CHECK(e.M_star <= cfg.total_particles());
        CHECK(e.proxy_attempts == 1);
    }
    const Configuration closed(LatticeDomain::box(1, 3, Boundary::Closed));
    const InstructionField f(1, ModelParams::finite(1.0), JumpDistribution::directed_1d());
    CHECK_THROWS_AS(exit_counts(closed, f, LabeledSystem{}), InvalidSpec);
}

TEST_CASE("symmetric walks that park on the window edge flag the proxy")
{
    const auto dom = LatticeDomain::box(1, 1, Boundary::Kill);
    Configuration cfg(dom);
    cfg.set(origin_site(), SiteState::active(3));
    const InstructionField f(1, ModelParams::finite(1e-6), JumpDistribution::symmetric(1));
    const LabeledSystem sys{5, ModelParams::finite(1e-6), JumpDistribution::symmetric(1)};
    ExitCountOptions opt;
    opt.proxy_factor = 1;
    opt.max_doublings = 1;
    const ExitCounts e = exit_counts(cfg, f, sys, opt);
    CHECK(e.proxy_too_small);
    CHECK(e.proxy_attempts == 2);
}
