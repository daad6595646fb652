#pragma once

// Monte Carlo drivers. Every driver reports finite-volume proxies over an
// explicit size grid; fixation itself is never observed directly.

#include "arw/core_model.hpp"
#include "arw/sitewise.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace arw
{
    enum class ExperimentKind : std::uint8_t
    {
        ConditionB,
        ConditionU,
        ConditionE,
        PhaseScan,
        RingFixedEnergy,
        DrivenDissipative,
        UniversalityCheck,
        FewStayProbe,
    };

    std::string to_string(ExperimentKind kind);

    struct ExperimentSpec
    {
        ExperimentKind kind = ExperimentKind::ConditionB;
        int dim = 1;
        JumpDistribution jumps = JumpDistribution::symmetric(1);
        ModelParams params = ModelParams::finite(1.0);
        InitialStateSpec initial = InitialStateSpec::poisson(0.5);
        /// Strictly increasing. Box radius for conditions, ring side, box side for
        /// driven-dissipative, r for the few-stay probe.
        std::vector<int> sizes{10};
        /// Odometer thresholds k (conditions) or mass fractions rho (few-stay).
        std::vector<double> k_grid;
        std::uint64_t replicas = 100;
        std::uint64_t budget = kDefaultBudget;
        std::uint64_t master_seed = 0;
        /// Worker count; 0 means hardware concurrency.
        unsigned threads = 0;

        /// Phase scan and few-stay: lambda values; phase scan: zeta values.
        std::vector<double> lambda_grid;
        std::vector<double> zeta_grid;
        /// Universality: initial laws to compare, all of density initial.zeta.
        std::vector<InitialStateSpec> compare;
        /// Condition E: also estimate M_n* with the particle-wise construction.
        bool particlewise = false;

        /// Ring: kappa for the fast-phase bound; <= 0 runs a pilot to calibrate it.
        double kappa = 0.0;
        int pilot_size = 64;
        double pilot_quantile = 0.99;

        /// Driven-dissipative: additions per chain.
        std::uint64_t additions = 10'000;

        /// Throws InvalidSpec when fields contradict the kind.
        void validate() const;
    };

    struct ResultRow
    {
        std::string kind;
        int d = 1;
        double lambda = 0.0; // +inf for instantaneous sleep
        double zeta = 0.0;
        int size = 0;
        double k_or_rho = 0.0;
        std::string statistic;
        double estimate = 0.0;
        double std_error = 0.0;
        std::uint64_t replicas = 0;
        std::uint64_t censored = 0; // nonzero flags the row
        std::uint64_t seed = 0;

        bool operator==(const ResultRow &) const = default;
    };

    class ResultTable
    {
    public:
        std::vector<ResultRow> rows;

        void add(ResultRow row) { rows.push_back(std::move(row)); }
        /// First row with this statistic (and size, if size >= 0); throws if absent.
        const ResultRow &find(const std::string &statistic, int size = -1) const;

        void write_csv(std::ostream &out) const;
        void write_json(std::ostream &out) const;
        std::string csv() const;

        bool operator==(const ResultTable &) const = default;
    };

    /// Runs fn(i) for i in [0, n) on `threads` workers. fn must only touch slot i.
    void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t)> &fn);

    /// Field seed of replica i; the initial state uses derive_seed of it.
    std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index);

    ResultTable run_condition_b(const ExperimentSpec &spec);
    ResultTable run_condition_u(const ExperimentSpec &spec);
    ResultTable run_condition_e(const ExperimentSpec &spec);
    ResultTable run_phase_scan(const ExperimentSpec &spec);
    ResultTable run_ring(const ExperimentSpec &spec);
    ResultTable run_driven_dissipative(const ExperimentSpec &spec);
    ResultTable run_universality_check(const ExperimentSpec &spec);
    ResultTable run_fewstay_probe(const ExperimentSpec &spec);

    /// Dispatches on spec.kind.
    ResultTable run_experiment(const ExperimentSpec &spec);

    /// Batch-means estimate after discarding the first 20% of the series.
    struct BatchMeans
    {
        double mean = 0.0;
        double std_error = 0.0;
        int batches = 0;
    };
    BatchMeans batch_means(std::span<const double> series, int batches = 20, double burn_in = 0.2);
}
