#pragma once

// Lattice domains, per-site states, jump kernels and initial configurations.

#include "arw/errors.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arw
{
    inline constexpr int kMaxDim = 4;

    /// Lattice point; coordinates beyond the domain dimension are zero.
    using Site = std::array<std::int32_t, kMaxDim>;

    inline constexpr Site origin_site() noexcept { return Site{}; }

    Site make_site(std::initializer_list<std::int32_t> coords);

    // ------------------------------------------------------------------
    // SiteState: the ordered set {empty < sleeping < 1 < 2 < ...}
    // ------------------------------------------------------------------

    /// One site's content, stored as a single integer:
    /// -1 sleeping, 0 empty, n >= 1 that many active particles.
    class SiteState
    {
    public:
        constexpr SiteState() noexcept = default;

        static constexpr SiteState empty() noexcept { return SiteState(0); }
        static constexpr SiteState sleeping() noexcept { return SiteState(-1); }
        static SiteState active(std::int32_t n);
        static SiteState from_raw(std::int32_t raw);

        constexpr std::int32_t raw() const noexcept { return raw_; }
        constexpr bool is_empty() const noexcept { return raw_ == 0; }
        constexpr bool is_sleeping() const noexcept { return raw_ == -1; }
        constexpr bool is_active() const noexcept { return raw_ >= 1; }
        constexpr bool occupied() const noexcept { return raw_ != 0; }

        /// Number of active particles (0 unless active).
        constexpr std::int32_t active_count() const noexcept { return raw_ > 0 ? raw_ : 0; }

        /// Particles present regardless of state.
        constexpr std::int32_t particle_count() const noexcept { return raw_ < 0 ? 1 : raw_; }

        /// Position in the order empty < sleeping < 1 < 2 < ...
        constexpr std::int64_t rank() const noexcept { return raw_ < 0 ? 1 : (raw_ == 0 ? 0 : std::int64_t{raw_} + 1); }

        constexpr bool operator==(const SiteState &) const noexcept = default;
        constexpr std::strong_ordering operator<=>(const SiteState &o) const noexcept { return rank() <=> o.rank(); }

        std::string to_string() const;

    private:
        constexpr explicit SiteState(std::int32_t raw) noexcept : raw_(raw) {}
        std::int32_t raw_ = 0;
    };

    /// Adds one active particle; a sleeping particle is woken (s + 1 = 2).
    SiteState add_particle(SiteState s) noexcept;

    /// A sleep attempt: 1 -> sleeping, n >= 2 unchanged, sleeping stays sleeping.
    /// Throws DegenerateOperand on an empty site.
    SiteState try_sleep(SiteState s);

    /// Removes one particle (sleeping -> empty). Throws DegenerateOperand on an empty site.
    SiteState remove_particle(SiteState s);

    inline std::int32_t particle_count(SiteState s) noexcept { return s.particle_count(); }

    // ------------------------------------------------------------------
    // Lattice domains
    // ------------------------------------------------------------------

    enum class Boundary : std::uint8_t
    {
        Kill,   // particles jumping out are destroyed
        Closed, // particles jumping out are parked on the outer boundary layer
    };

    /// A finite piece of Z^d together with what happens at its edge.
    ///
    /// Sites are split into the interior (the sites that may ever topple) and
    /// storage (interior plus, for Closed boxes and windows, a one-site layer
    /// where particles that leave the interior are parked). Storage indices are
    /// row-major with the first coordinate most significant, so index order is
    /// lexicographic order.
    class LatticeDomain
    {
    public:
        enum class Shape : std::uint8_t
        {
            Box,
            Torus,
            Window,
        };

        static LatticeDomain box(int dim, int radius, Boundary boundary);
        static LatticeDomain box(int dim, std::span<const std::int32_t> lo, std::span<const std::int32_t> hi, Boundary boundary);
        static LatticeDomain torus(int dim, int side);
        static LatticeDomain window(int dim, int radius);
        static LatticeDomain window(int dim, std::span<const std::int32_t> lo, std::span<const std::int32_t> hi);

        /// Inverse of describe().
        static LatticeDomain parse(int dim, std::string_view shape);

        int dim() const noexcept { return dim_; }
        Shape shape() const noexcept { return shape_; }
        Boundary boundary() const noexcept { return boundary_; }
        bool kills() const noexcept { return shape_ == Shape::Box && boundary_ == Boundary::Kill; }

        /// Interior bounds, inclusive.
        const Site &lo() const noexcept { return lo_; }
        const Site &hi() const noexcept { return hi_; }

        std::size_t size() const noexcept { return size_; }
        std::size_t interior_size() const noexcept;

        bool in_storage(const Site &x) const noexcept;
        bool in_interior(const Site &x) const noexcept;
        bool is_interior(std::size_t index) const noexcept { return tables_->interior[index] != 0; }

        std::optional<std::size_t> find(const Site &x) const noexcept;
        /// Throws OutOfDomain.
        std::size_t index_of(const Site &x) const;
        Site site_of(std::size_t index) const noexcept;

        /// Storage index reached by a unit step in direction `dir`
        /// (axis dir/2, positive when dir is even), or -1 if the particle leaves storage.
        std::int64_t neighbor(std::size_t index, int dir) const noexcept
        {
            return tables_->neighbors[index * static_cast<std::size_t>(2 * dim_) + static_cast<std::size_t>(dir)];
        }

        std::vector<std::size_t> interior_indices() const;

        std::string describe() const;

        bool operator==(const LatticeDomain &o) const noexcept;

    private:
        struct Tables
        {
            std::vector<std::int64_t> neighbors;
            std::vector<std::uint8_t> interior;
        };

        LatticeDomain() = default;
        void build();

        int dim_ = 1;
        Shape shape_ = Shape::Box;
        Boundary boundary_ = Boundary::Kill;
        Site lo_{};
        Site hi_{};
        Site storage_lo_{};
        Site extent_{};
        std::array<std::size_t, kMaxDim> stride_{};
        std::size_t size_ = 0;
        std::shared_ptr<const Tables> tables_;
    };

    /// Offset of direction `dir` as a lattice vector.
    Site direction_offset(int dir) noexcept;

    // ------------------------------------------------------------------
    // Jump distribution and sleep rate
    // ------------------------------------------------------------------

    /// Nearest-neighbour jump law, weights indexed by direction (+e0, -e0, +e1, -e1, ...).
    class JumpDistribution
    {
    public:
        static JumpDistribution symmetric(int dim);
        static JumpDistribution directed_1d();
        /// p(+e0) = plus_e0, remaining mass split evenly over the other 2d-1 directions.
        static JumpDistribution biased(int dim, double plus_e0);
        static JumpDistribution from_weights(int dim, std::span<const double> weights);

        int dim() const noexcept { return dim_; }
        double weight(int dir) const noexcept { return weights_[static_cast<std::size_t>(dir)]; }
        std::span<const double> weights() const noexcept { return {weights_.data(), static_cast<std::size_t>(2 * dim_)}; }

        /// Direction for a uniform u in [0, 1).
        int sample(double u) const noexcept
        {
            const int n = 2 * dim_;
            for (int k = 0; k < n - 1; ++k)
            {
                if (u < cumulative_[static_cast<std::size_t>(k)])
                {
                    return k;
                }
            }
            // Skip trailing zero-weight directions.
            int last = n - 1;
            while (last > 0 && weights_[static_cast<std::size_t>(last)] == 0.0)
            {
                --last;
            }
            return last;
        }

        std::array<double, kMaxDim> drift() const noexcept;
        /// True when some axis-aligned half space contains the whole support.
        bool is_directed() const noexcept;
        std::string describe() const;

        bool operator==(const JumpDistribution &) const = default;

    private:
        int dim_ = 1;
        std::array<double, 2 * kMaxDim> weights_{};
        std::array<double, 2 * kMaxDim> cumulative_{};
    };

    class ModelParams
    {
    public:
        static ModelParams finite(double lambda);
        static ModelParams infinite_sleep() noexcept;
        /// Accepts a decimal string or "inf".
        static ModelParams parse(std::string_view text);

        bool infinite() const noexcept { return infinite_; }
        double lambda() const noexcept { return lambda_; }
        /// Probability that an instruction is a sleep instruction, lambda/(1+lambda).
        double sleep_probability() const noexcept { return q_; }

        std::string to_string() const;

        bool operator==(const ModelParams &) const = default;

    private:
        double lambda_ = 1.0;
        bool infinite_ = false;
        double q_ = 0.5;
    };

    // ------------------------------------------------------------------
    // Initial states and configurations
    // ------------------------------------------------------------------

    struct InitialStateSpec
    {
        enum class Kind : std::uint8_t
        {
            IidPoisson,
            IidBernoulli,
            Deterministic,
            Explicit,
        };

        Kind kind = Kind::IidPoisson;
        double zeta = 0.0;
        std::vector<std::pair<Site, std::int32_t>> sites; // Explicit only

        static InitialStateSpec poisson(double zeta);
        static InitialStateSpec bernoulli(double zeta);
        static InitialStateSpec deterministic(double zeta);
        static InitialStateSpec explicit_sites(std::vector<std::pair<Site, std::int32_t>> sites);

        /// Throws InvalidSpec.
        void validate() const;
        std::string describe() const;
        static InitialStateSpec parse(std::string_view kind, double zeta);
    };

    /// Dense per-site states over a domain's storage plus a running particle total.
    class Configuration
    {
    public:
        explicit Configuration(LatticeDomain domain);

        const LatticeDomain &domain() const noexcept { return domain_; }

        SiteState at(std::size_t index) const noexcept { return SiteState::from_raw(raw_[index]); }
        SiteState at(const Site &x) const { return at(domain_.index_of(x)); }

        void set(std::size_t index, SiteState s) noexcept
        {
            total_ += s.particle_count() - at(index).particle_count();
            raw_[index] = s.raw();
        }
        void set(const Site &x, SiteState s) { set(domain_.index_of(x), s); }

        std::int64_t total_particles() const noexcept { return total_; }
        /// Particles on interior sites only.
        std::int64_t interior_particles() const noexcept;
        std::int64_t sleeping_count() const noexcept;

        std::span<const std::int32_t> raw() const noexcept { return raw_; }

        /// Direct buffer access for the engine; callers keep the total in step via adjust_total.
        std::int32_t *mutable_raw() noexcept { return raw_.data(); }
        void adjust_total(std::int64_t delta) noexcept { total_ += delta; }

        bool operator==(const Configuration &o) const noexcept { return domain_ == o.domain_ && raw_ == o.raw_; }

    private:
        LatticeDomain domain_;
        std::vector<std::int32_t> raw_;
        std::int64_t total_ = 0;
    };

    /// Independent per-site draws; a pure function of (spec, domain, seed).
    /// Only interior sites are filled.
    Configuration sample_initial(const InitialStateSpec &spec, const LatticeDomain &domain, std::uint64_t seed);

    /// Header line shared by snapshots and odometer dumps.
    std::string snapshot_header(const LatticeDomain &domain);
    void write_snapshot(std::ostream &out, const Configuration &cfg);
    Configuration read_snapshot(std::istream &in);
}
