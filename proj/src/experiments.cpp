#include "arw/experiments.hpp"

#include "arw/dynamics.hpp"
#include "arw/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace arw
{
    std::string to_string(ExperimentKind kind)
    {
        switch (kind)
        {
        case ExperimentKind::ConditionB:
            return "ConditionB";
        case ExperimentKind::ConditionU:
            return "ConditionU";
        case ExperimentKind::ConditionE:
            return "ConditionE";
        case ExperimentKind::PhaseScan:
            return "PhaseScan";
        case ExperimentKind::RingFixedEnergy:
            return "RingFixedEnergy";
        case ExperimentKind::DrivenDissipative:
            return "DrivenDissipative";
        case ExperimentKind::UniversalityCheck:
            return "UniversalityCheck";
        case ExperimentKind::FewStayProbe:
            return "FewStayProbe";
        }
        return "?";
    }

    namespace
    {
        bool is_symmetric(const JumpDistribution &p)
        {
            const auto w = p.weights();
            return std::all_of(w.begin(), w.end(), [&](double x) { return std::abs(x - 1.0 / static_cast<double>(w.size())) < 1e-12; });
        }

        bool is_integer(double z) { return std::floor(z) == z; }
    }

    void ExperimentSpec::validate() const
    {
        if (dim < 1 || dim > kMaxDim)
        {
            throw InvalidSpec("dimension must be in 1.." + std::to_string(kMaxDim));
        }
        if (jumps.dim() != dim)
        {
            throw InvalidSpec("jump law dimension differs from the experiment dimension");
        }
        initial.validate();
        if (sizes.empty())
        {
            throw InvalidSpec("at least one size is required");
        }
        for (std::size_t i = 0; i < sizes.size(); ++i)
        {
            if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1]))
            {
                throw InvalidSpec("sizes must be positive and strictly increasing");
            }
        }
        if (replicas == 0)
        {
            throw InvalidSpec("replicas must be positive");
        }
        for (double l : lambda_grid)
        {
            if (!(l >= 0.0))
            {
                throw InvalidSpec("lambda grid entries must be nonnegative");
            }
        }
        for (double z : zeta_grid)
        {
            if (!(z >= 0.0))
            {
                throw InvalidSpec("zeta grid entries must be nonnegative");
            }
        }
        switch (kind)
        {
        case ExperimentKind::RingFixedEnergy:
            if (dim != 1 || !is_symmetric(jumps))
            {
                throw InvalidSpec("the ring experiment needs d = 1 and symmetric jumps");
            }
            if (kappa <= 0.0 && pilot_size < 2)
            {
                throw InvalidSpec("pilot size must be at least 2");
            }
            if (!(pilot_quantile > 0.0 && pilot_quantile <= 1.0))
            {
                throw InvalidSpec("pilot quantile must be in (0, 1]");
            }
            break;
        case ExperimentKind::FewStayProbe:
            if (dim != 1 || !is_symmetric(jumps))
            {
                throw InvalidSpec("the few-stay probe needs d = 1 and symmetric jumps");
            }
            if (sizes.front() < 2)
            {
                throw InvalidSpec("few-stay sizes r must be at least 2");
            }
            break;
        case ExperimentKind::DrivenDissipative:
            if (additions == 0)
            {
                throw InvalidSpec("driven-dissipative chains need at least one addition");
            }
            break;
        case ExperimentKind::ConditionE:
        case ExperimentKind::UniversalityCheck:
            if (initial.kind == InitialStateSpec::Kind::Explicit)
            {
                throw InvalidSpec("exit-flux proxies need an i.i.d. or deterministic initial law");
            }
            break;
        default:
            break;
        }
        if (particlewise && params.infinite())
        {
            throw InvalidSpec("the particle-wise construction needs a finite sleep rate");
        }
    }

    // ------------------------------------------------------------- worker pool

    void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t)> &fn)
    {
        if (threads == 0)
        {
            threads = std::max(1U, std::thread::hardware_concurrency());
        }
        threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
        if (threads <= 1)
        {
            for (std::uint64_t i = 0; i < n; ++i)
            {
                fn(i);
            }
            return;
        }
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::mutex m;
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t)
        {
            pool.emplace_back([&] {
                for (std::uint64_t i = next++; i < n && !failed; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(m);
                        if (!failed.exchange(true))
                        {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto &th : pool)
        {
            th.join();
        }
        if (failure)
        {
            std::rethrow_exception(failure);
        }
    }

    std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index); }

    namespace
    {
        double lambda_of(const ModelParams &p) { return p.infinite() ? std::numeric_limits<double>::infinity() : p.lambda(); }

        ResultRow base_row(const ExperimentSpec &spec, int size)
        {
            ResultRow r;
            r.kind = to_string(spec.kind);
            r.d = spec.dim;
            r.lambda = lambda_of(spec.params);
            r.zeta = spec.initial.zeta;
            r.size = size;
            r.replicas = spec.replicas;
            r.seed = spec.master_seed;
            return r;
        }

        struct Moments
        {
            double mean = 0.0;
            double se = 0.0;
            std::uint64_t n = 0;
        };

        Moments moments(const std::vector<double> &xs)
        {
            Moments m;
            m.n = xs.size();
            if (xs.empty())
            {
                m.mean = std::numeric_limits<double>::quiet_NaN();
                m.se = m.mean;
                return m;
            }
            double s = 0.0;
            for (double x : xs)
            {
                s += x;
            }
            m.mean = s / static_cast<double>(m.n);
            if (m.n > 1)
            {
                double ss = 0.0;
                for (double x : xs)
                {
                    ss += (x - m.mean) * (x - m.mean);
                }
                m.se = std::sqrt(ss / static_cast<double>(m.n - 1) / static_cast<double>(m.n));
            }
            return m;
        }

        Moments proportion(std::uint64_t hits, std::uint64_t n)
        {
            Moments m;
            m.n = n;
            if (n == 0)
            {
                m.mean = std::numeric_limits<double>::quiet_NaN();
                m.se = m.mean;
                return m;
            }
            m.mean = static_cast<double>(hits) / static_cast<double>(n);
            m.se = std::sqrt(m.mean * (1.0 - m.mean) / static_cast<double>(n));
            return m;
        }

        /// One stabilization on the Kill box of radius n, per replica.
        struct BoxSample
        {
            std::uint64_t m0 = 0;
            std::int64_t exits = 0;
            std::int64_t exits_star = 0;
            std::int64_t retained = 0;
            bool censored = false;
        };

        std::vector<BoxSample> sample_boxes(const ExperimentSpec &spec, const LatticeDomain &dom, bool particlewise)
        {
            std::vector<BoxSample> out(spec.replicas);
            const Volume v = Volume::interior(dom);
            parallel_for(spec.replicas, spec.threads, [&](std::uint64_t i) {
                const std::uint64_t s = replica_seed(spec.master_seed, i);
                const InstructionField field(s, spec.params, spec.jumps);
                const Configuration cfg = sample_initial(spec.initial, dom, derive_seed(s, 1));
                BoxSample &b = out[i];
                if (particlewise)
                {
                    ExitCountOptions opt;
                    opt.surround = spec.initial;
                    opt.surround_seed = derive_seed(s, 1);
                    opt.budget = spec.budget;
                    const ExitCounts ec = exit_counts(cfg, field, LabeledSystem{derive_seed(s, 2), spec.params, spec.jumps}, opt);
                    b.exits = ec.M;
                    b.exits_star = ec.M_star;
                    b.censored = ec.status == Status::BudgetExceeded;
                    return;
                }
                Engine e(cfg, field);
                b.censored = e.stabilize(v, Strategy::exhaust(), ToppleMode::Legal, spec.budget) == Status::BudgetExceeded;
                if (e.origin_index() >= 0)
                {
                    b.m0 = e.odometer().count(static_cast<std::size_t>(e.origin_index()));
                }
                b.exits = e.exits();
                b.retained = e.config().total_particles();
            });
            return out;
        }

        std::uint64_t count_censored(const std::vector<BoxSample> &xs)
        {
            return static_cast<std::uint64_t>(std::count_if(xs.begin(), xs.end(), [](const BoxSample &b) { return b.censored; }));
        }

        std::vector<double> default_k(const ExperimentSpec &spec)
        {
            return spec.k_grid.empty() ? std::vector<double>{0.0, 10.0, 50.0} : spec.k_grid;
        }

        ResultTable odometer_profile(const ExperimentSpec &spec, bool upper)
        {
            spec.validate();
            ResultTable t;
            const auto ks = default_k(spec);
            for (int n : spec.sizes)
            {
                const LatticeDomain dom = LatticeDomain::box(spec.dim, n, Boundary::Kill);
                const auto xs = sample_boxes(spec, dom, false);
                const std::uint64_t cens = count_censored(xs);
                for (double k : ks)
                {
                    std::uint64_t hits = 0;
                    for (const auto &b : xs)
                    {
                        if (!b.censored && (upper ? static_cast<double>(b.m0) >= k : static_cast<double>(b.m0) <= k))
                        {
                            ++hits;
                        }
                    }
                    const Moments m = proportion(hits, spec.replicas - cens);
                    ResultRow r = base_row(spec, n);
                    r.k_or_rho = k;
                    r.statistic = upper ? "P(m0>=k)" : "P(m0<=k)";
                    r.estimate = m.mean;
                    r.std_error = m.se;
                    r.censored = cens;
                    t.add(r);
                }
            }
            return t;
        }

        void flux_rows(const ExperimentSpec &spec, ResultTable &t, const std::string &tag)
        {
            for (int n : spec.sizes)
            {
                const LatticeDomain dom = LatticeDomain::box(spec.dim, n, Boundary::Kill);
                const double vol = static_cast<double>(dom.interior_size());
                const auto xs = sample_boxes(spec, dom, spec.particlewise);
                const std::uint64_t cens = count_censored(xs);
                std::vector<double> m, mstar;
                for (const auto &b : xs)
                {
                    if (!b.censored)
                    {
                        m.push_back(static_cast<double>(b.exits) / vol);
                        mstar.push_back(static_cast<double>(b.exits_star) / vol);
                    }
                }
                const Moments a = moments(m);
                ResultRow r = base_row(spec, n);
                r.statistic = "M/|V|" + tag;
                r.estimate = a.mean;
                r.std_error = a.se;
                r.censored = cens;
                t.add(r);
                if (spec.particlewise)
                {
                    const Moments b = moments(mstar);
                    r.statistic = "M*/|V|" + tag;
                    r.estimate = b.mean;
                    r.std_error = b.se;
                    t.add(r);
                }
            }
        }

        double quantile_of(std::vector<double> xs, double q)
        {
            std::sort(xs.begin(), xs.end());
            const auto n = static_cast<double>(xs.size());
            auto idx = static_cast<std::size_t>(std::ceil(q * n));
            idx = std::clamp<std::size_t>(idx, 1, xs.size()) - 1;
            return xs[idx];
        }

        struct RingSample
        {
            std::uint64_t topplings = 0;
            bool censored = false;
        };

        std::vector<RingSample> sample_ring(const ExperimentSpec &spec, int n, std::uint64_t master)
        {
            const LatticeDomain dom = LatticeDomain::torus(1, n);
            const Volume v = Volume::interior(dom);
            std::vector<RingSample> out(spec.replicas);
            parallel_for(spec.replicas, spec.threads, [&](std::uint64_t i) {
                const std::uint64_t s = replica_seed(master, i);
                const InstructionField field(s, spec.params, spec.jumps);
                Engine e(sample_initial(spec.initial, dom, derive_seed(s, 1)), field);
                out[i].censored = e.stabilize(v, Strategy::exhaust(), ToppleMode::Legal, spec.budget) == Status::BudgetExceeded;
                out[i].topplings = e.topplings();
            });
            return out;
        }

        double ring_scale(int n)
        {
            const double l = std::log(static_cast<double>(n));
            return static_cast<double>(n) * l * l;
        }
    }

    ResultTable run_condition_b(const ExperimentSpec &spec) { return odometer_profile(spec, false); }

    ResultTable run_condition_u(const ExperimentSpec &spec) { return odometer_profile(spec, true); }

    ResultTable run_condition_e(const ExperimentSpec &spec)
    {
        spec.validate();
        ResultTable t;
        flux_rows(spec, t, "");
        return t;
    }

    ResultTable run_phase_scan(const ExperimentSpec &spec)
    {
        spec.validate();
        ResultTable t;
        const std::vector<double> lambdas = spec.lambda_grid.empty() ? std::vector<double>{lambda_of(spec.params)} : spec.lambda_grid;
        const std::vector<double> zetas = spec.zeta_grid.empty() ? std::vector<double>{spec.initial.zeta} : spec.zeta_grid;
        for (double l : lambdas)
        {
            for (double z : zetas)
            {
                ExperimentSpec s = spec;
                s.params = std::isinf(l) ? ModelParams::infinite_sleep() : ModelParams::finite(l);
                s.initial.zeta = z;
                if (s.initial.kind == InitialStateSpec::Kind::Deterministic && !is_integer(z))
                {
                    throw InvalidSpec("deterministic scans need integer densities");
                }
                flux_rows(s, t, "");
                if (!spec.k_grid.empty())
                {
                    for (auto &r : odometer_profile(s, true).rows)
                    {
                        r.kind = to_string(ExperimentKind::PhaseScan);
                        t.add(r);
                    }
                }
            }
        }
        for (auto &r : t.rows)
        {
            r.kind = to_string(ExperimentKind::PhaseScan);
        }
        return t;
    }

    ResultTable run_ring(const ExperimentSpec &spec)
    {
        spec.validate();
        ResultTable t;
        double kappa = spec.kappa;
        if (kappa <= 0.0)
        {
            const auto pilot = sample_ring(spec, spec.pilot_size, hash_combine(spec.master_seed, 0x70696c6f74ULL));
            std::vector<double> coef;
            std::uint64_t cens = 0;
            for (const auto &r : pilot)
            {
                cens += r.censored ? 1 : 0;
                coef.push_back(r.censored ? std::numeric_limits<double>::infinity()
                                          : static_cast<double>(r.topplings) / ring_scale(spec.pilot_size));
            }
            kappa = quantile_of(coef, spec.pilot_quantile);
            ResultRow r = base_row(spec, spec.pilot_size);
            r.k_or_rho = spec.pilot_quantile;
            r.statistic = "kappa";
            r.estimate = kappa;
            r.censored = cens;
            t.add(r);
        }
        for (int n : spec.sizes)
        {
            const auto xs = sample_ring(spec, n, spec.master_seed);
            const double bound = kappa * ring_scale(n);
            std::uint64_t cens = 0, fast = 0, decided = 0;
            std::vector<double> tt;
            for (const auto &x : xs)
            {
                tt.push_back(x.censored ? std::numeric_limits<double>::infinity() : static_cast<double>(x.topplings));
                if (x.censored)
                {
                    ++cens;
                    // A censored run exceeded the budget; it is known to be slow only if the bound lies below it.
                    if (bound < static_cast<double>(spec.budget))
                    {
                        ++decided;
                    }
                    continue;
                }
                ++decided;
                fast += static_cast<double>(x.topplings) <= bound ? 1 : 0;
            }
            ResultRow r = base_row(spec, n);
            r.censored = cens;
            r.k_or_rho = kappa;
            r.statistic = "P(T<=kappa*n*log^2n)";
            const Moments f = proportion(fast, decided);
            r.estimate = f.mean;
            r.std_error = f.se;
            t.add(r);

            r.k_or_rho = static_cast<double>(spec.budget);
            r.statistic = "P(budget_exhausted)";
            const Moments c = proportion(cens, spec.replicas);
            r.estimate = c.mean;
            r.std_error = c.se;
            t.add(r);

            // Censored runs enter as +inf, so a finite quantile never rests on them.
            for (double q : {0.5, 0.9, 0.99})
            {
                r.k_or_rho = q;
                r.statistic = "T_quantile";
                r.estimate = quantile_of(tt, q);
                r.std_error = 0.0;
                t.add(r);
            }
        }
        return t;
    }

    BatchMeans batch_means(std::span<const double> series, int batches, double burn_in)
    {
        BatchMeans out;
        const auto skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(series.size())));
        const std::size_t len = (series.size() - skip) / static_cast<std::size_t>(batches);
        if (len == 0)
        {
            return out;
        }
        std::vector<double> means;
        for (int b = 0; b < batches; ++b)
        {
            double s = 0.0;
            const std::size_t start = skip + static_cast<std::size_t>(b) * len;
            for (std::size_t i = start; i < start + len; ++i)
            {
                s += series[i];
            }
            means.push_back(s / static_cast<double>(len));
        }
        const Moments m = moments(means);
        out.mean = m.mean;
        out.std_error = m.se;
        out.batches = batches;
        return out;
    }

    ResultTable run_driven_dissipative(const ExperimentSpec &spec)
    {
        spec.validate();
        ResultTable t;
        for (int L : spec.sizes)
        {
            const std::vector<std::int32_t> lo(static_cast<std::size_t>(spec.dim), 1), hi(static_cast<std::size_t>(spec.dim), L);
            const LatticeDomain dom = LatticeDomain::box(spec.dim, lo, hi, Boundary::Kill);
            const Volume v = Volume::interior(dom);
            const double vol = static_cast<double>(v.size());
            std::vector<std::pair<double, double>> replica(spec.replicas);
            std::vector<std::uint8_t> censored(spec.replicas, 0);
            parallel_for(spec.replicas, spec.threads, [&](std::uint64_t i) {
                const std::uint64_t s = replica_seed(spec.master_seed, i);
                const InstructionField field(s, spec.params, spec.jumps);
                Engine e(Configuration(dom), field);
                CounterRng pick(derive_seed(s, 3));
                std::vector<double> series;
                series.reserve(spec.additions);
                for (std::uint64_t a = 0; a < spec.additions; ++a)
                {
                    const std::size_t idx = v.indices()[pick.below(v.size())];
                    e.add_active(idx);
                    const std::size_t seed[] = {idx};
                    if (e.stabilize_from(v, seed, Strategy::exhaust(), ToppleMode::Legal, spec.budget) == Status::BudgetExceeded)
                    {
                        censored[i] = 1;
                        return;
                    }
                    series.push_back(static_cast<double>(e.config().total_particles()) / vol);
                }
                const BatchMeans bm = batch_means(series);
                replica[i] = {bm.mean, bm.std_error};
            });
            // Chains are independent, so their batch-means errors add in quadrature.
            double sum = 0.0, var = 0.0;
            std::uint64_t cens = 0, used = 0;
            for (std::uint64_t i = 0; i < spec.replicas; ++i)
            {
                if (censored[i] != 0)
                {
                    ++cens;
                    continue;
                }
                ++used;
                sum += replica[i].first;
                var += replica[i].second * replica[i].second;
            }
            Moments m;
            m.mean = used > 0 ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
            m.se = used > 0 ? std::sqrt(var) / static_cast<double>(used) : m.mean;
            ResultRow r = base_row(spec, L);
            r.zeta = 0.0;
            r.statistic = "zeta_s";
            r.k_or_rho = static_cast<double>(spec.additions);
            r.estimate = m.mean;
            r.std_error = m.se;
            r.censored = cens;
            t.add(r);
            if (spec.jumps.is_directed() && spec.dim == 1 && !spec.params.infinite())
            {
                // Conservative critical density of the directed chain, printed for comparison only.
                r.statistic = "zeta_c_reference";
                r.estimate = spec.params.sleep_probability();
                r.std_error = 0.0;
                t.add(r);
            }
        }
        return t;
    }

    ResultTable run_universality_check(const ExperimentSpec &spec)
    {
        spec.validate();
        std::vector<InitialStateSpec> laws = spec.compare;
        const double z = spec.initial.zeta;
        if (laws.empty())
        {
            laws.push_back(InitialStateSpec::poisson(z));
            if (z <= 1.0)
            {
                laws.push_back(InitialStateSpec::bernoulli(z));
            }
            if (is_integer(z))
            {
                laws.push_back(InitialStateSpec::deterministic(z));
            }
        }
        if (laws.size() < 2)
        {
            throw InvalidSpec("universality needs at least two initial laws");
        }
        for (const auto &l : laws)
        {
            if (std::abs(l.zeta - z) > 1e-12)
            {
                throw DensityMismatch(l.describe() + " has density " + std::to_string(l.zeta) + ", expected " + std::to_string(z));
            }
        }
        ResultTable t;
        for (const auto &l : laws)
        {
            ExperimentSpec s = spec;
            s.initial = l;
            s.validate();
            const std::string tag = ":" + l.describe();
            flux_rows(s, t, tag);
            if (!spec.k_grid.empty())
            {
                for (auto &r : odometer_profile(s, true).rows)
                {
                    r.statistic += tag;
                    t.add(r);
                }
            }
        }
        // Standardized gap of every law against the first, per size.
        const std::string first = "M/|V|:" + laws.front().describe();
        for (std::size_t j = 1; j < laws.size(); ++j)
        {
            const std::string other = "M/|V|:" + laws[j].describe();
            for (int n : spec.sizes)
            {
                const ResultRow &a = t.find(first, n);
                const ResultRow &b = t.find(other, n);
                ResultRow r = a;
                r.statistic = "z_gap:" + laws.front().describe() + "-" + laws[j].describe();
                const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
                r.estimate = se > 0.0 ? (a.estimate - b.estimate) / se : 0.0;
                r.std_error = 1.0;
                r.censored = a.censored + b.censored;
                t.add(r);
            }
        }
        for (auto &r : t.rows)
        {
            r.kind = to_string(ExperimentKind::UniversalityCheck);
        }
        return t;
    }

    ResultTable run_fewstay_probe(const ExperimentSpec &spec)
    {
        spec.validate();
        ResultTable t;
        const std::vector<double> lambdas = spec.lambda_grid.empty() ? std::vector<double>{lambda_of(spec.params)} : spec.lambda_grid;
        const std::vector<double> rhos = spec.k_grid.empty() ? std::vector<double>{0.2} : spec.k_grid;
        for (double l : lambdas)
        {
            ExperimentSpec s = spec;
            s.params = std::isinf(l) ? ModelParams::infinite_sleep() : ModelParams::finite(l);
            for (int r : spec.sizes)
            {
                const std::int32_t lo[] = {1};
                const std::int32_t hi[] = {r - 1};
                const LatticeDomain dom = LatticeDomain::box(1, lo, hi, Boundary::Kill);
                const auto xs = sample_boxes(s, dom, false);
                const std::uint64_t cens = count_censored(xs);
                for (double rho : rhos)
                {
                    std::uint64_t hits = 0;
                    for (const auto &b : xs)
                    {
                        if (!b.censored && static_cast<double>(b.retained) >= rho * r)
                        {
                            ++hits;
                        }
                    }
                    const Moments m = proportion(hits, s.replicas - cens);
                    ResultRow row = base_row(s, r);
                    row.k_or_rho = rho;
                    row.statistic = "P(retained>=rho*r)";
                    row.estimate = m.mean;
                    row.std_error = m.se;
                    row.censored = cens;
                    t.add(row);
                }
            }
        }
        return t;
    }

    ResultTable run_experiment(const ExperimentSpec &spec)
    {
        switch (spec.kind)
        {
        case ExperimentKind::ConditionB:
            return run_condition_b(spec);
        case ExperimentKind::ConditionU:
            return run_condition_u(spec);
        case ExperimentKind::ConditionE:
            return run_condition_e(spec);
        case ExperimentKind::PhaseScan:
            return run_phase_scan(spec);
        case ExperimentKind::RingFixedEnergy:
            return run_ring(spec);
        case ExperimentKind::DrivenDissipative:
            return run_driven_dissipative(spec);
        case ExperimentKind::UniversalityCheck:
            return run_universality_check(spec);
        case ExperimentKind::FewStayProbe:
            return run_fewstay_probe(spec);
        }
        throw InvalidSpec("unknown experiment kind");
    }
}
