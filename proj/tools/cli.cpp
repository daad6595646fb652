#include "cli.hpp"

#include "arw/dynamics.hpp"
#include "arw/procedures.hpp"
#include "arw/rng.hpp"
#include "arw/trace.hpp"
#include "arw/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>

namespace arw::cli
{
    namespace
    {
        const std::set<std::string> kSubcommands = {"validate", "scan", "ring", "dd", "condition", "block", "trap", "oracle"};

        // Options that are never written to headers nor read back from config files.
        const std::set<std::string> kUnrecorded = {"help", "config", "out", "trace", "inject-fault"};

        struct Raw
        {
            int dim = 1;
            bool directed = false;
            double bias = std::numeric_limits<double>::quiet_NaN();
            std::string lambda = "1";
            double zeta = 0.5;
            std::string initial = "poisson";
            std::vector<int> sizes{10};
            std::vector<double> k;
            std::uint64_t replicas = 100;
            std::uint64_t budget = kDefaultBudget;
            std::uint64_t seed = 0;
            unsigned threads = 0;
            std::string out;
            std::string format = "csv";
            std::string config;
            std::string trace;

            std::vector<double> lambdas;
            std::vector<double> zetas;
            std::vector<std::string> compare;
            bool particlewise = false;
            std::string which;

            double kappa = 0.0;
            int pilot_size = 64;
            double pilot_quantile = 0.99;
            std::uint64_t additions = 10'000;

            std::uint64_t seeds = 1000;
            std::string inject;

            int K = 4;
            int m_max = 200;
            int trap_n = 3;
            int radius = 60;
            std::uint64_t horizon = 0;
            std::int64_t r = 10;
            double zeta_pp = 0.5;
            int L = 100;
        };

        std::string text(double x)
        {
            if (std::isnan(x))
            {
                return ""; // unset
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return buf;
        }
        std::string text(const std::string &s) { return s; }
        std::string text(bool b) { return b ? "true" : "false"; }
        template <typename T>
            requires std::is_integral_v<T>
        std::string text(T x)
        {
            return std::to_string(x);
        }
        template <typename T>
        std::string text(const std::vector<T> &xs)
        {
            std::string s;
            for (std::size_t i = 0; i < xs.size(); ++i)
            {
                s += (i ? "," : "") + text(xs[i]);
            }
            return s;
        }

        using Getters = std::vector<std::pair<std::string, std::function<std::string()>>>;

        struct Parser
        {
            CLI::App app{"Activated random walk simulation laboratory", "arw"};
            Raw raw;
            std::map<const CLI::App *, Getters> recorded;

            template <typename T>
            CLI::Option *opt(CLI::App *sub, const std::string &name, T &var, const std::string &desc)
            {
                CLI::Option *o = sub->add_option("--" + name, var, desc)->capture_default_str();
                if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>)
                {
                    o->delimiter(',');
                }
                if (!kUnrecorded.contains(name))
                {
                    recorded[sub].emplace_back(name, [&var] { return text(var); });
                }
                return o;
            }

            CLI::Option *flag(CLI::App *sub, const std::string &name, bool &var, const std::string &desc)
            {
                CLI::Option *o = sub->add_flag("--" + name, var, desc);
                recorded[sub].emplace_back(name, [&var] { return text(var); });
                return o;
            }

            void common(CLI::App *sub)
            {
                opt(sub, "seed", raw.seed, "master seed")->envname("ARW_SEED");
                opt(sub, "replicas", raw.replicas, "replicas per grid point")->check(CLI::PositiveNumber);
                opt(sub, "threads", raw.threads, "worker threads, 0 = all cores");
                opt(sub, "format", raw.format, "output format")->check(CLI::IsMember({"csv", "json"}));
                opt(sub, "out", raw.out, "output file (default: standard output)");
                opt(sub, "config", raw.config, "key = value defaults; flags on the command line win");
            }

            void model(CLI::App *sub, bool with_geometry)
            {
                if (with_geometry)
                {
                    opt(sub, "dim", raw.dim, "lattice dimension")->check(CLI::Range(1, kMaxDim));
                    flag(sub, "directed", raw.directed, "nearest-neighbour jumps to the right only (d = 1)");
                    opt(sub, "bias", raw.bias, "probability of +e1; the rest is spread evenly")->check(CLI::Range(0.0, 1.0));
                }
                opt(sub, "lambda", raw.lambda, "sleep rate, or inf");
                opt(sub, "zeta", raw.zeta, "initial density")->check(CLI::NonNegativeNumber);
                opt(sub, "initial", raw.initial, "initial law")->check(CLI::IsMember({"poisson", "bernoulli", "deterministic"}));
                opt(sub, "budget", raw.budget, "toppling budget per stabilization")->check(CLI::PositiveNumber);
            }

            Parser()
            {
                app.require_subcommand(1, 1);
                app.set_help_all_flag("--help-all", "help for every subcommand");

                auto *validate = app.add_subcommand("validate", "exact-invariant suite on random small instances");
                opt(validate, "seeds", raw.seeds, "number of random instances");
                opt(validate, "seed", raw.seed, "master seed")->envname("ARW_SEED");
                opt(validate, "inject-fault", raw.inject, "")->check(CLI::IsMember({"skip-odometer"}))->group("");

                auto *scan = app.add_subcommand("scan", "exit-flux and odometer proxies over a (lambda, zeta) grid");
                common(scan);
                model(scan, true);
                opt(scan, "sizes", raw.sizes, "box radii, strictly increasing");
                opt(scan, "lambdas", raw.lambdas, "lambda grid (default: --lambda)");
                opt(scan, "zetas", raw.zetas, "zeta grid (default: --zeta)");
                opt(scan, "k", raw.k, "odometer thresholds for P(m0 >= k)");

                auto *ring = app.add_subcommand("ring", "fixed-energy ring: total topplings until absorption");
                common(ring);
                model(ring, false);
                opt(ring, "n", raw.sizes, "ring sizes");
                opt(ring, "kappa", raw.kappa, "fast-phase coefficient; <= 0 calibrates it by a pilot");
                opt(ring, "pilot-size", raw.pilot_size, "ring size of the pilot");
                opt(ring, "pilot-quantile", raw.pilot_quantile, "pilot quantile of T/(n log^2 n)");

                auto *dd = app.add_subcommand("dd", "driven-dissipative chain on a Kill box of side L");
                common(dd);
                model(dd, true);
                opt(dd, "sizes", raw.sizes, "box sides L");
                opt(dd, "additions", raw.additions, "particles added per chain")->check(CLI::PositiveNumber);

                auto *cond = app.add_subcommand("condition", "fixation and activity criteria");
                common(cond);
                model(cond, true);
                opt(cond, "which", raw.which, "criterion")->required()->check(CLI::IsMember({"b", "u", "e", "universality", "fewstay"}));
                opt(cond, "sizes", raw.sizes, "box radii (b, u, e, universality) or r (fewstay)");
                opt(cond, "k", raw.k, "odometer thresholds (b, u) or mass fractions rho (fewstay)");
                opt(cond, "lambdas", raw.lambdas, "lambda grid for fewstay (default: --lambda)");
                opt(cond, "compare", raw.compare, "initial laws for universality (default: all that fit zeta)");
                flag(cond, "particlewise", raw.particlewise, "also estimate M_n* from the particle-wise construction (e)");

                auto *block = app.add_subcommand("block", "single-block functions L, R, S, T");
                common(block);
                model(block, false);
                opt(block, "K", raw.K, "block half-width; the block is {1, ..., 2K-1}")->check(CLI::Range(2, 1 << 20));
                opt(block, "m-max", raw.m_max, "particles added at the source")->check(CLI::NonNegativeNumber);

                auto *trap = app.add_subcommand("trap", "trap exploration in d = 1");
                common(trap);
                model(trap, true);
                opt(trap, "n", raw.trap_n, "particles explored per side")->check(CLI::PositiveNumber);
                opt(trap, "radius", raw.radius, "initial particles are drawn on [-radius, radius]")->check(CLI::PositiveNumber);
                opt(trap, "trace", raw.trace, "JSON-lines trace of the first replica");

                auto *oracle = app.add_subcommand("oracle", "auxiliary processes with known answers");
                common(oracle);
                model(oracle, true);
                opt(oracle, "which", raw.which, "process")->required()->check(CLI::IsMember({"killed-walk", "green", "urn", "sweep"}));
                opt(oracle, "horizon", raw.horizon, "step cap per walk (0: default)");
                opt(oracle, "r", raw.r, "urn start")->check(CLI::NonNegativeNumber);
                opt(oracle, "zeta-pp", raw.zeta_pp, "urn parameter")->check(CLI::Range(0.0, 1.0));
                opt(oracle, "L", raw.L, "sweep length")->check(CLI::PositiveNumber);
                opt(oracle, "trace", raw.trace, "JSON-lines trace of the first sweep");
            }
        };

        JumpDistribution jumps_of(const Raw &r)
        {
            if (r.directed)
            {
                if (r.dim != 1)
                {
                    throw UsageError("--directed: only defined for --dim 1");
                }
                return JumpDistribution::directed_1d();
            }
            if (!std::isnan(r.bias))
            {
                return JumpDistribution::biased(r.dim, r.bias);
            }
            return JumpDistribution::symmetric(r.dim);
        }

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? "" : s.substr(b, e - b + 1);
        }

        bool given(const std::vector<std::string> &args, const std::string &name)
        {
            const std::string flag = "--" + name;
            for (const auto &a : args)
            {
                if (a == flag || a.rfind(flag + "=", 0) == 0)
                {
                    return true;
                }
            }
            return false;
        }
    }

    std::vector<std::pair<std::string, std::string>> read_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::ios_base::failure("cannot read config file " + path);
        }
        std::vector<std::pair<std::string, std::string>> kv;
        std::string first;
        if (in.peek() == '{')
        {
            nlohmann::json j;
            try
            {
                in >> j;
            }
            catch (const nlohmann::json::exception &e)
            {
                throw std::ios_base::failure("malformed JSON config " + path + ": " + e.what());
            }
            for (const auto &[k, v] : j.at("spec").items())
            {
                kv.emplace_back(k, v.get<std::string>());
            }
            return kv;
        }
        static const std::regex line_re(R"(^\s*(?:#!\s*)?([A-Za-z][A-Za-z0-9-]*)\s*=\s*(.*)$)");
        std::string line;
        while (std::getline(in, line))
        {
            const std::string t = trim(line);
            if (t.empty() || (t[0] == '#' && t.rfind("#!", 0) != 0))
            {
                continue;
            }
            std::smatch m;
            if (std::regex_match(t, m, line_re))
            {
                kv.emplace_back(m[1].str(), trim(m[2].str()));
            }
        }
        return kv;
    }

    CliConfig parse_args(int argc, const char *const *argv, std::string *help)
    {
        std::vector<std::string> args(argv + 1, argv + argc);

        // Splice config-file defaults in right after the subcommand, skipping keys given explicitly.
        std::string config_path;
        for (std::size_t i = 0; i < args.size(); ++i)
        {
            if (args[i] == "--config" && i + 1 < args.size())
            {
                config_path = args[i + 1];
            }
            else if (args[i].rfind("--config=", 0) == 0)
            {
                config_path = args[i].substr(9);
            }
        }
        const auto sub_it = std::find_if(args.begin(), args.end(), [](const std::string &a) { return kSubcommands.contains(a); });
        if (!config_path.empty())
        {
            if (sub_it == args.end())
            {
                throw UsageError("--config needs a subcommand");
            }
            std::vector<std::string> extra;
            for (const auto &[key, value] : read_config(config_path))
            {
                if (key == "command")
                {
                    if (value != *sub_it)
                    {
                        throw UsageError("--config: file was written by '" + value + "', not '" + *sub_it + "'");
                    }
                    continue;
                }
                // Empty values stand for unset options and keep their defaults.
                if (value.empty() || kUnrecorded.contains(key) || given(args, key))
                {
                    continue;
                }
                extra.push_back("--" + key + "=" + value);
            }
            args.insert(sub_it + 1, extra.begin(), extra.end());
        }

        Parser p;
        std::reverse(args.begin(), args.end());
        try
        {
            p.app.parse(args);
        }
        catch (const CLI::CallForHelp &)
        {
            if (help != nullptr)
            {
                *help = p.app.help();
            }
            return {};
        }
        catch (const CLI::CallForAllHelp &)
        {
            if (help != nullptr)
            {
                *help = p.app.help("", CLI::AppFormatMode::All);
            }
            return {};
        }
        catch (const CLI::ParseError &e)
        {
            throw UsageError(e.what());
        }

        const CLI::App *sub = p.app.get_subcommands().front();
        const Raw &r = p.raw;
        CliConfig c;
        c.subcommand = sub->get_name();
        c.resolved.emplace_back("command", c.subcommand);
        for (const auto &[name, get] : p.recorded[sub])
        {
            c.resolved.emplace_back(name, get());
        }
        c.out_path = r.out;
        c.format = r.format;
        c.trace_path = r.trace;
        c.seed_count = r.seeds;
        c.inject_skip_odometer = r.inject == "skip-odometer";
        c.K = r.K;
        c.m_max = r.m_max;
        c.trap_n = r.trap_n;
        c.trap_radius = r.radius;
        c.which = r.which;
        c.horizon = r.horizon;
        c.urn_r = r.r;
        c.zeta_pp = r.zeta_pp;
        c.sweep_L = r.L;
        if (c.subcommand == "validate")
        {
            c.spec.master_seed = r.seed;
            return c;
        }

        ExperimentSpec &s = c.spec;
        try
        {
            s.dim = r.dim;
            s.jumps = jumps_of(r);
            s.params = ModelParams::parse(r.lambda);
            s.initial = InitialStateSpec::parse(r.initial, r.zeta);
            s.sizes = r.sizes;
            s.k_grid = r.k;
            s.replicas = r.replicas;
            s.budget = r.budget;
            s.master_seed = r.seed;
            s.threads = r.threads;
            s.lambda_grid = r.lambdas;
            s.zeta_grid = r.zetas;
            for (const auto &law : r.compare)
            {
                s.compare.push_back(InitialStateSpec::parse(law, r.zeta));
            }
            s.particlewise = r.particlewise;
            s.kappa = r.kappa;
            s.pilot_size = r.pilot_size;
            s.pilot_quantile = r.pilot_quantile;
            s.additions = r.additions;
            if (c.subcommand == "scan")
            {
                s.kind = ExperimentKind::PhaseScan;
            }
            else if (c.subcommand == "ring")
            {
                s.kind = ExperimentKind::RingFixedEnergy;
            }
            else if (c.subcommand == "dd")
            {
                s.kind = ExperimentKind::DrivenDissipative;
            }
            else if (c.subcommand == "condition")
            {
                static const std::map<std::string, ExperimentKind> kinds = {
                    {"b", ExperimentKind::ConditionB},
                    {"u", ExperimentKind::ConditionU},
                    {"e", ExperimentKind::ConditionE},
                    {"universality", ExperimentKind::UniversalityCheck},
                    {"fewstay", ExperimentKind::FewStayProbe},
                };
                s.kind = kinds.at(r.which);
            }
            if (c.subcommand == "scan" || c.subcommand == "ring" || c.subcommand == "dd" || c.subcommand == "condition")
            {
                s.validate();
            }
        }
        catch (const Error &e)
        {
            throw UsageError(e.what());
        }
        return c;
    }

    namespace
    {
        ResultRow row(const CliConfig &c, const std::string &kind, int size, const std::string &statistic, double estimate,
                      double se, std::uint64_t replicas, std::uint64_t censored = 0, double k = 0.0)
        {
            ResultRow r;
            r.kind = kind;
            r.d = c.spec.dim;
            r.lambda = c.spec.params.infinite() ? std::numeric_limits<double>::infinity() : c.spec.params.lambda();
            r.zeta = c.spec.initial.zeta;
            r.size = size;
            r.k_or_rho = k;
            r.statistic = statistic;
            r.estimate = estimate;
            r.std_error = se;
            r.replicas = replicas;
            r.censored = censored;
            r.seed = c.spec.master_seed;
            return r;
        }

        std::pair<double, double> mean_se(const std::vector<double> &xs)
        {
            if (xs.empty())
            {
                return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
            }
            double m = 0.0;
            for (double x : xs)
            {
                m += x;
            }
            m /= static_cast<double>(xs.size());
            double v = 0.0;
            for (double x : xs)
            {
                v += (x - m) * (x - m);
            }
            const double se = xs.size() > 1 ? std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size())) : 0.0;
            return {m, se};
        }

        void write_table(std::ostream &out, const CliConfig &c, const ResultTable &t)
        {
            if (c.format == "json")
            {
                nlohmann::ordered_json spec;
                for (const auto &[k, v] : c.resolved)
                {
                    spec[k] = v;
                }
                out << "{\"spec\": " << spec.dump() << ",\n\"rows\": ";
                t.write_json(out);
                out << "}\n";
                return;
            }
            for (const auto &[k, v] : c.resolved)
            {
                out << "#! " << k << " = " << v << '\n';
            }
            t.write_csv(out);
        }

        ResultTable run_block(const CliConfig &c, std::ostream &err, bool &violated)
        {
            const ExperimentSpec &s = c.spec;
            const LatticeDomain dom = block_domain(c.K);
            struct Out
            {
                BlockFunctions b;
                std::optional<std::string> bad;
            };
            std::vector<Out> outs(s.replicas);
            parallel_for(s.replicas, s.threads, [&](std::uint64_t i) {
                const std::uint64_t seed = replica_seed(s.master_seed, i);
                const InstructionField field(seed, s.params, JumpDistribution::symmetric(1));
                outs[i].b = block_functions(c.K, sample_initial(s.initial, dom, derive_seed(seed, 1)), field, c.m_max, s.budget);
                if (outs[i].b.status == Status::Stable)
                {
                    outs[i].bad = check_block_invariants(outs[i].b);
                }
            });
            std::uint64_t cens = 0, bad = 0;
            std::vector<double> L, R, S, LR;
            for (std::uint64_t i = 0; i < s.replicas; ++i)
            {
                const auto &o = outs[i];
                if (o.b.status != Status::Stable)
                {
                    ++cens;
                    continue;
                }
                if (o.bad)
                {
                    if (bad++ == 0)
                    {
                        err << "block invariant violated in replica " << i << " (seed " << replica_seed(s.master_seed, i) << "): " << *o.bad
                            << '\n';
                    }
                }
                L.push_back(static_cast<double>(o.b.L.back()));
                R.push_back(static_cast<double>(o.b.R.back()));
                S.push_back(static_cast<double>(o.b.S.back()));
                LR.push_back(static_cast<double>(o.b.L.back() - o.b.R.back()));
            }
            violated = bad > 0;
            ResultTable t;
            const auto m = static_cast<double>(c.m_max);
            t.add(row(c, "Block", c.K, "invariant_violations", static_cast<double>(bad), 0.0, s.replicas, cens, m));
            for (const auto &[name, xs] : {std::pair{"L(m_max)", &L}, {"R(m_max)", &R}, {"S(m_max)", &S}, {"L-R(m_max)", &LR}})
            {
                const auto [mu, se] = mean_se(*xs);
                t.add(row(c, "Block", c.K, name, mu, se, s.replicas, cens, m));
            }
            return t;
        }

        ResultTable run_trap(const CliConfig &c, std::ostream *trace_out)
        {
            const ExperimentSpec &s = c.spec;
            const LatticeDomain dom = LatticeDomain::window(1, c.trap_radius);
            std::vector<TrapResult> outs(s.replicas);
            std::unique_ptr<TraceWriter> tw = trace_out ? std::make_unique<TraceWriter>(*trace_out) : nullptr;
            parallel_for(s.replicas, s.threads, [&](std::uint64_t i) {
                const std::uint64_t seed = replica_seed(s.master_seed, i);
                InstructionField field(seed, s.params, s.jumps);
                Configuration cfg = sample_initial(s.initial, dom, derive_seed(seed, 1));
                cfg.set(origin_site(), SiteState::empty());
                outs[i] = trap_explore(cfg, c.trap_n, field, {}, i == 0 ? tw.get() : nullptr);
            });
            std::uint64_t ok = 0, replay = 0, untouched = 0;
            std::vector<double> gaps;
            for (const auto &o : outs)
            {
                if (o.status != TrapResult::Outcome::Success)
                {
                    continue;
                }
                ++ok;
                replay += o.replay_ok ? 1 : 0;
                untouched += o.origin_untouched ? 1 : 0;
                for (auto g : o.interdistances)
                {
                    gaps.push_back(g);
                }
            }
            ResultTable t;
            const auto n = static_cast<double>(s.replicas);
            const double f = static_cast<double>(ok) / n;
            t.add(row(c, "Trap", c.trap_n, "success_fraction", f, std::sqrt(f * (1 - f) / n), s.replicas, s.replicas - ok));
            const auto [mu, se] = mean_se(gaps);
            t.add(row(c, "Trap", c.trap_n, "mean_interdistance", mu, se, s.replicas, s.replicas - ok, static_cast<double>(gaps.size())));
            t.add(row(c, "Trap", c.trap_n, "replay_ok", static_cast<double>(replay), 0.0, s.replicas, s.replicas - ok));
            t.add(row(c, "Trap", c.trap_n, "origin_untouched", static_cast<double>(untouched), 0.0, s.replicas, s.replicas - ok));
            return t;
        }

        ResultTable run_oracle(const CliConfig &c, std::ostream *trace_out)
        {
            const ExperimentSpec &s = c.spec;
            ResultTable t;
            if (c.which == "killed-walk")
            {
                if (s.params.infinite())
                {
                    throw InvalidSpec("killed walks need a finite lambda");
                }
                std::vector<double> v(static_cast<std::size_t>(s.dim), 0.0);
                v[0] = 1.0;
                const auto est = killed_walk_prob(s.jumps, v, s.params.lambda(), s.replicas, c.horizon ? c.horizon : 1'000'000, s.master_seed);
                t.add(row(c, "Oracle", 0, "F_v", est.killed.mean, est.killed.std_error, s.replicas, est.truncated));
                if (s.jumps.is_directed())
                {
                    t.add(row(c, "Oracle", 0, "lambda/(1+lambda)", s.params.sleep_probability(), 0.0, s.replicas));
                }
            }
            else if (c.which == "green")
            {
                const auto g = green_function_estimate(s.jumps, s.replicas, c.horizon ? c.horizon : 10'000, s.master_seed);
                t.add(row(c, "Oracle", 0, g.not_transient ? "G(horizon),recurrent" : "G", g.visits.mean, g.visits.std_error, s.replicas));
            }
            else if (c.which == "urn")
            {
                std::vector<double> k, x, z, y;
                for (std::uint64_t i = 0; i < s.replicas; ++i)
                {
                    const UrnResult u = urn_run(c.urn_r, c.zeta_pp, replica_seed(s.master_seed, i));
                    k.push_back(static_cast<double>(u.k_star));
                    x.push_back(static_cast<double>(u.X));
                    z.push_back(static_cast<double>(u.Z));
                    y.push_back(static_cast<double>(u.destroyed));
                }
                for (const auto &[name, xs] : {std::pair{"k_star", &k}, {"X", &x}, {"Z", &z}, {"destroyed", &y}})
                {
                    const auto [mu, se] = mean_se(*xs);
                    t.add(row(c, "Oracle", static_cast<int>(c.urn_r), name, mu, se, s.replicas, 0, c.zeta_pp));
                }
            }
            else
            {
                const LatticeDomain dom = LatticeDomain::box(1, c.sweep_L, Boundary::Kill);
                std::unique_ptr<TraceWriter> tw = trace_out ? std::make_unique<TraceWriter>(*trace_out) : nullptr;
                std::vector<SweepResult> outs(s.replicas);
                parallel_for(s.replicas, s.threads, [&](std::uint64_t i) {
                    const std::uint64_t seed = replica_seed(s.master_seed, i);
                    const InstructionField field(seed, s.params, s.jumps);
                    outs[i] = directed_sweep(sample_initial(s.initial, dom, derive_seed(seed, 1)), c.sweep_L, field, s.budget,
                                             i == 0 ? tw.get() : nullptr);
                });
                std::vector<double> n, m0;
                std::uint64_t cens = 0;
                for (const auto &o : outs)
                {
                    if (o.status != Status::Stable)
                    {
                        ++cens;
                        continue;
                    }
                    n.push_back(static_cast<double>(o.N.back()) / c.sweep_L);
                    m0.push_back(static_cast<double>(o.origin_odometer));
                }
                const auto [nm, nse] = mean_se(n);
                t.add(row(c, "Oracle", c.sweep_L, "N_L/L", nm, nse, s.replicas, cens));
                const auto [mm, mse] = mean_se(m0);
                t.add(row(c, "Oracle", c.sweep_L, "origin_odometer", mm, mse, s.replicas, cens));
            }
            return t;
        }
    }

    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CliConfig c;
        try
        {
            std::string help;
            c = parse_args(argc, argv, &help);
            if (c.subcommand.empty())
            {
                out << help;
                return kOk;
            }
        }
        catch (const UsageError &e)
        {
            err << e.what() << '\n';
            return kUsage;
        }
        catch (const std::ios_base::failure &e)
        {
            err << "I/O error: " << e.what() << '\n';
            return kIo;
        }

        const auto start = std::chrono::steady_clock::now();
        try
        {
            if (c.subcommand == "validate")
            {
                if (c.seed_count == 0)
                {
                    err << "warning: --seeds 0, no checks run\n";
                }
                CheckOptions opt;
                opt.skip_odometer = c.inject_skip_odometer;
                const ValidateReport rep = run_validate(c.seed_count, c.spec.master_seed, opt, &err);
                out << "instances = " << rep.instances << "\nchecks = " << rep.checks << "\nskipped = " << rep.skipped << '\n';
                if (!rep.ok())
                {
                    err << "VIOLATION: " << *rep.violation << '\n';
                    out << "status = violation\n";
                    return kViolation;
                }
                out << "status = ok\n";
                return kOk;
            }

            std::ofstream file;
            std::ostream *dest = &out;
            if (!c.out_path.empty())
            {
                file.open(c.out_path);
                if (!file)
                {
                    err << "I/O error: cannot write " << c.out_path << '\n';
                    return kIo;
                }
                dest = &file;
            }
            std::ofstream trace_file;
            if (!c.trace_path.empty())
            {
                trace_file.open(c.trace_path);
                if (!trace_file)
                {
                    err << "I/O error: cannot write " << c.trace_path << '\n';
                    return kIo;
                }
            }
            std::ostream *trace = c.trace_path.empty() ? nullptr : &trace_file;

            err << "arw " << c.subcommand << ": running\n";
            ResultTable table;
            int code = kOk;
            if (c.subcommand == "block")
            {
                bool violated = false;
                table = run_block(c, err, violated);
                code = violated ? kViolation : kOk;
            }
            else if (c.subcommand == "trap")
            {
                table = run_trap(c, trace);
            }
            else if (c.subcommand == "oracle")
            {
                table = run_oracle(c, trace);
            }
            else
            {
                table = run_experiment(c.spec);
            }
            write_table(*dest, c, table);
            dest->flush();
            if (!*dest)
            {
                err << "I/O error: write failed\n";
                return kIo;
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            err << "arw " << c.subcommand << ": " << table.rows.size() << " rows in " << secs << " s\n";
            return code;
        }
        catch (const std::ios_base::failure &e)
        {
            err << "I/O error: " << e.what() << '\n';
            return kIo;
        }
        catch (const SnapshotFormatError &e)
        {
            err << e.what() << '\n';
            return kIo;
        }
        catch (const Error &e)
        {
            err << e.what() << '\n';
            return kUsage;
        }
        catch (const std::logic_error &e)
        {
            err << "invariant violation: " << e.what() << '\n';
            return kViolation;
        }
    }
}
