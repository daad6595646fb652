#include "arw/core_model.hpp"

#include "arw/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace arw
{
    Site make_site(std::initializer_list<std::int32_t> coords)
    {
        if (coords.size() > static_cast<std::size_t>(kMaxDim))
        {
            throw InvalidSpec("site has more than " + std::to_string(kMaxDim) + " coordinates");
        }
        Site x{};
        std::copy(coords.begin(), coords.end(), x.begin());
        return x;
    }

    // ---------------------------------------------------------------- SiteState

    SiteState SiteState::active(std::int32_t n)
    {
        if (n < 1)
        {
            throw InvalidSpec("Active(n) requires n >= 1, got " + std::to_string(n));
        }
        return SiteState(n);
    }

    SiteState SiteState::from_raw(std::int32_t raw)
    {
        return SiteState(raw < -1 ? -1 : raw);
    }

    std::string SiteState::to_string() const
    {
        if (is_empty())
        {
            return "Empty";
        }
        if (is_sleeping())
        {
            return "Sleeping";
        }
        return "Active(" + std::to_string(raw_) + ")";
    }

    SiteState add_particle(SiteState s) noexcept
    {
        if (s.is_sleeping())
        {
            return SiteState::from_raw(2);
        }
        return SiteState::from_raw(s.raw() + 1);
    }

    SiteState try_sleep(SiteState s)
    {
        if (s.is_empty())
        {
            throw DegenerateOperand("sleep instruction applied to an empty site");
        }
        return s.raw() == 1 ? SiteState::sleeping() : s;
    }

    SiteState remove_particle(SiteState s)
    {
        if (s.is_empty())
        {
            throw DegenerateOperand("particle removed from an empty site");
        }
        return s.is_sleeping() ? SiteState::empty() : SiteState::from_raw(s.raw() - 1);
    }

    // ------------------------------------------------------------ LatticeDomain

    namespace
    {
        void check_dim(int dim)
        {
            if (dim < 1 || dim > kMaxDim)
            {
                throw InvalidSpec("dimension must be in [1, " + std::to_string(kMaxDim) + "], got " + std::to_string(dim));
            }
        }

        void check_bounds(int dim, std::span<const std::int32_t> lo, std::span<const std::int32_t> hi)
        {
            check_dim(dim);
            if (lo.size() != static_cast<std::size_t>(dim) || hi.size() != static_cast<std::size_t>(dim))
            {
                throw InvalidSpec("box bounds must have one entry per axis");
            }
            for (int a = 0; a < dim; ++a)
            {
                if (lo[static_cast<std::size_t>(a)] > hi[static_cast<std::size_t>(a)])
                {
                    throw InvalidSpec("box lower bound exceeds upper bound on axis " + std::to_string(a));
                }
            }
        }

        std::string join_site(const Site &x, int dim, char sep)
        {
            std::string s;
            for (int a = 0; a < dim; ++a)
            {
                if (a > 0)
                {
                    s += sep;
                }
                s += std::to_string(x[static_cast<std::size_t>(a)]);
            }
            return s;
        }

        std::vector<std::int32_t> parse_int_list(std::string_view text, char sep)
        {
            std::vector<std::int32_t> out;
            std::size_t pos = 0;
            while (pos <= text.size())
            {
                std::size_t end = text.find(sep, pos);
                if (end == std::string_view::npos)
                {
                    end = text.size();
                }
                const std::string_view tok = text.substr(pos, end - pos);
                std::int32_t v = 0;
                const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
                {
                    throw SnapshotFormatError("bad integer list '" + std::string(text) + "'");
                }
                out.push_back(v);
                pos = end + 1;
            }
            return out;
        }
    }

    LatticeDomain LatticeDomain::box(int dim, int radius, Boundary boundary)
    {
        check_dim(dim);
        if (radius < 0)
        {
            throw InvalidSpec("box radius must be nonnegative");
        }
        std::vector<std::int32_t> lo(static_cast<std::size_t>(dim), -radius);
        std::vector<std::int32_t> hi(static_cast<std::size_t>(dim), radius);
        return box(dim, lo, hi, boundary);
    }

    LatticeDomain LatticeDomain::box(int dim, std::span<const std::int32_t> lo, std::span<const std::int32_t> hi, Boundary boundary)
    {
        check_bounds(dim, lo, hi);
        LatticeDomain d;
        d.dim_ = dim;
        d.shape_ = Shape::Box;
        d.boundary_ = boundary;
        std::copy(lo.begin(), lo.end(), d.lo_.begin());
        std::copy(hi.begin(), hi.end(), d.hi_.begin());
        d.build();
        return d;
    }

    LatticeDomain LatticeDomain::torus(int dim, int side)
    {
        check_dim(dim);
        if (side < 1)
        {
            throw InvalidSpec("torus side must be positive");
        }
        LatticeDomain d;
        d.dim_ = dim;
        d.shape_ = Shape::Torus;
        d.boundary_ = Boundary::Closed;
        for (int a = 0; a < dim; ++a)
        {
            d.lo_[static_cast<std::size_t>(a)] = 0;
            d.hi_[static_cast<std::size_t>(a)] = side - 1;
        }
        d.build();
        return d;
    }

    LatticeDomain LatticeDomain::window(int dim, int radius)
    {
        check_dim(dim);
        if (radius < 0)
        {
            throw InvalidSpec("window radius must be nonnegative");
        }
        std::vector<std::int32_t> lo(static_cast<std::size_t>(dim), -radius);
        std::vector<std::int32_t> hi(static_cast<std::size_t>(dim), radius);
        return window(dim, lo, hi);
    }

    LatticeDomain LatticeDomain::window(int dim, std::span<const std::int32_t> lo, std::span<const std::int32_t> hi)
    {
        LatticeDomain d = box(dim, lo, hi, Boundary::Closed);
        d.shape_ = Shape::Window;
        return d;
    }

    void LatticeDomain::build()
    {
        const bool parked = shape_ != Shape::Torus && boundary_ == Boundary::Closed;
        const int margin = parked ? 1 : 0;
        std::size_t total = 1;
        for (int a = dim_ - 1; a >= 0; --a)
        {
            const auto ua = static_cast<std::size_t>(a);
            storage_lo_[ua] = lo_[ua] - margin;
            extent_[ua] = hi_[ua] - lo_[ua] + 1 + 2 * margin;
            stride_[ua] = total;
            total *= static_cast<std::size_t>(extent_[ua]);
        }
        size_ = total;

        auto tables = std::make_shared<Tables>();
        const auto ndir = static_cast<std::size_t>(2 * dim_);
        tables->neighbors.assign(size_ * ndir, -1);
        tables->interior.assign(size_, 0);
        for (std::size_t i = 0; i < size_; ++i)
        {
            const Site x = site_of(i);
            tables->interior[i] = in_interior(x) ? 1 : 0;
            for (int dir = 0; dir < 2 * dim_; ++dir)
            {
                const auto axis = static_cast<std::size_t>(dir / 2);
                Site y = x;
                y[axis] += (dir % 2 == 0) ? 1 : -1;
                if (shape_ == Shape::Torus)
                {
                    if (y[axis] > hi_[axis])
                    {
                        y[axis] = lo_[axis];
                    }
                    else if (y[axis] < lo_[axis])
                    {
                        y[axis] = hi_[axis];
                    }
                }
                if (auto j = find(y))
                {
                    tables->neighbors[i * ndir + static_cast<std::size_t>(dir)] = static_cast<std::int64_t>(*j);
                }
            }
        }
        tables_ = std::move(tables);
    }

    std::size_t LatticeDomain::interior_size() const noexcept
    {
        std::size_t n = 1;
        for (int a = 0; a < dim_; ++a)
        {
            n *= static_cast<std::size_t>(hi_[static_cast<std::size_t>(a)] - lo_[static_cast<std::size_t>(a)] + 1);
        }
        return n;
    }

    bool LatticeDomain::in_storage(const Site &x) const noexcept
    {
        for (int a = 0; a < dim_; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            if (x[ua] < storage_lo_[ua] || x[ua] >= storage_lo_[ua] + extent_[ua])
            {
                return false;
            }
        }
        for (int a = dim_; a < kMaxDim; ++a)
        {
            if (x[static_cast<std::size_t>(a)] != 0)
            {
                return false;
            }
        }
        return true;
    }

    bool LatticeDomain::in_interior(const Site &x) const noexcept
    {
        for (int a = 0; a < dim_; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            if (x[ua] < lo_[ua] || x[ua] > hi_[ua])
            {
                return false;
            }
        }
        for (int a = dim_; a < kMaxDim; ++a)
        {
            if (x[static_cast<std::size_t>(a)] != 0)
            {
                return false;
            }
        }
        return true;
    }

    std::optional<std::size_t> LatticeDomain::find(const Site &x) const noexcept
    {
        if (!in_storage(x))
        {
            return std::nullopt;
        }
        std::size_t idx = 0;
        for (int a = 0; a < dim_; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            idx += static_cast<std::size_t>(x[ua] - storage_lo_[ua]) * stride_[ua];
        }
        return idx;
    }

    std::size_t LatticeDomain::index_of(const Site &x) const
    {
        if (auto i = find(x))
        {
            return *i;
        }
        throw OutOfDomain("site (" + join_site(x, dim_, ',') + ") is outside " + describe());
    }

    Site LatticeDomain::site_of(std::size_t index) const noexcept
    {
        Site x{};
        for (int a = 0; a < dim_; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            x[ua] = storage_lo_[ua] + static_cast<std::int32_t>(index / stride_[ua]);
            index %= stride_[ua];
        }
        return x;
    }

    std::vector<std::size_t> LatticeDomain::interior_indices() const
    {
        std::vector<std::size_t> out;
        out.reserve(interior_size());
        for (std::size_t i = 0; i < size_; ++i)
        {
            if (tables_->interior[i] != 0)
            {
                out.push_back(i);
            }
        }
        return out;
    }

    std::string LatticeDomain::describe() const
    {
        switch (shape_)
        {
        case Shape::Torus:
            return "torus:" + std::to_string(hi_[0] - lo_[0] + 1);
        case Shape::Window:
            return "window:" + join_site(lo_, dim_, ',') + ":" + join_site(hi_, dim_, ',');
        case Shape::Box:
            break;
        }
        return std::string(boundary_ == Boundary::Kill ? "box-kill:" : "box-closed:") + join_site(lo_, dim_, ',') + ":" + join_site(hi_, dim_, ',');
    }

    LatticeDomain LatticeDomain::parse(int dim, std::string_view shape)
    {
        const auto colon = shape.find(':');
        if (colon == std::string_view::npos)
        {
            throw SnapshotFormatError("bad shape '" + std::string(shape) + "'");
        }
        const std::string_view kind = shape.substr(0, colon);
        const std::string_view rest = shape.substr(colon + 1);
        if (kind == "torus")
        {
            const auto side = parse_int_list(rest, ',');
            if (side.size() != 1)
            {
                throw SnapshotFormatError("bad torus shape '" + std::string(shape) + "'");
            }
            return torus(dim, side[0]);
        }
        const auto colon2 = rest.find(':');
        if (colon2 == std::string_view::npos)
        {
            throw SnapshotFormatError("bad box shape '" + std::string(shape) + "'");
        }
        const auto lo = parse_int_list(rest.substr(0, colon2), ',');
        const auto hi = parse_int_list(rest.substr(colon2 + 1), ',');
        try
        {
            if (kind == "window")
            {
                return window(dim, lo, hi);
            }
            if (kind == "box-kill")
            {
                return box(dim, lo, hi, Boundary::Kill);
            }
            if (kind == "box-closed")
            {
                return box(dim, lo, hi, Boundary::Closed);
            }
        }
        catch (const InvalidSpec &e)
        {
            throw SnapshotFormatError(e.what());
        }
        throw SnapshotFormatError("unknown shape kind '" + std::string(kind) + "'");
    }

    bool LatticeDomain::operator==(const LatticeDomain &o) const noexcept
    {
        return dim_ == o.dim_ && shape_ == o.shape_ && boundary_ == o.boundary_ && lo_ == o.lo_ && hi_ == o.hi_;
    }

    Site direction_offset(int dir) noexcept
    {
        Site y{};
        y[static_cast<std::size_t>(dir / 2)] = (dir % 2 == 0) ? 1 : -1;
        return y;
    }

    // --------------------------------------------------------- JumpDistribution

    JumpDistribution JumpDistribution::from_weights(int dim, std::span<const double> weights)
    {
        check_dim(dim);
        if (weights.size() != static_cast<std::size_t>(2 * dim))
        {
            throw InvalidSpec("jump distribution needs 2d weights");
        }
        double sum = 0.0;
        for (double w : weights)
        {
            if (!(w >= 0.0) || !std::isfinite(w))
            {
                throw InvalidSpec("jump weights must be nonnegative");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
        {
            throw InvalidSpec("jump weights must sum to 1");
        }
        for (int a = 0; a < dim; ++a)
        {
            if (weights[static_cast<std::size_t>(2 * a)] == 0.0 && weights[static_cast<std::size_t>(2 * a + 1)] == 0.0)
            {
                throw InvalidSpec("jump support does not generate Z^d (axis " + std::to_string(a) + " unused)");
            }
        }
        JumpDistribution p;
        p.dim_ = dim;
        double c = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k)
        {
            p.weights_[k] = weights[k];
            c += weights[k];
            p.cumulative_[k] = c;
        }
        return p;
    }

    JumpDistribution JumpDistribution::symmetric(int dim)
    {
        check_dim(dim);
        std::vector<double> w(static_cast<std::size_t>(2 * dim), 1.0 / (2.0 * dim));
        return from_weights(dim, w);
    }

    JumpDistribution JumpDistribution::directed_1d()
    {
        const double w[2] = {1.0, 0.0};
        return from_weights(1, w);
    }

    JumpDistribution JumpDistribution::biased(int dim, double plus_e0)
    {
        check_dim(dim);
        if (!(plus_e0 > 0.0 && plus_e0 <= 1.0))
        {
            throw InvalidSpec("biased jump weight must be in (0, 1]");
        }
        const int others = 2 * dim - 1;
        std::vector<double> w(static_cast<std::size_t>(2 * dim), (1.0 - plus_e0) / others);
        w[0] = plus_e0;
        double rest = 0.0;
        for (std::size_t k = 1; k < w.size(); ++k)
        {
            rest += w[k];
        }
        w[0] = 1.0 - rest;
        return from_weights(dim, w);
    }

    std::array<double, kMaxDim> JumpDistribution::drift() const noexcept
    {
        std::array<double, kMaxDim> v{};
        for (int a = 0; a < dim_; ++a)
        {
            const auto ua = static_cast<std::size_t>(a);
            v[ua] = weights_[2 * ua] - weights_[2 * ua + 1];
        }
        return v;
    }

    bool JumpDistribution::is_directed() const noexcept
    {
        for (int k = 0; k < 2 * dim_; ++k)
        {
            if (weights_[static_cast<std::size_t>(k)] == 1.0)
            {
                return true;
            }
        }
        return false;
    }

    std::string JumpDistribution::describe() const
    {
        std::ostringstream os;
        os.precision(17);
        for (int k = 0; k < 2 * dim_; ++k)
        {
            if (k > 0)
            {
                os << ',';
            }
            os << weights_[static_cast<std::size_t>(k)];
        }
        return os.str();
    }

    // -------------------------------------------------------------- ModelParams

    ModelParams ModelParams::finite(double lambda)
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
        {
            throw InvalidSpec("sleep rate must be a positive finite number or inf");
        }
        ModelParams m;
        m.lambda_ = lambda;
        m.infinite_ = false;
        m.q_ = lambda / (1.0 + lambda);
        return m;
    }

    ModelParams ModelParams::infinite_sleep() noexcept
    {
        ModelParams m;
        m.lambda_ = std::numeric_limits<double>::infinity();
        m.infinite_ = true;
        m.q_ = 1.0;
        return m;
    }

    ModelParams ModelParams::parse(std::string_view text)
    {
        if (text == "inf" || text == "infinity" || text == "Inf")
        {
            return infinite_sleep();
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size())
        {
            throw InvalidSpec("cannot parse sleep rate '" + std::string(text) + "'");
        }
        return finite(v);
    }

    std::string ModelParams::to_string() const
    {
        if (infinite_)
        {
            return "inf";
        }
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, lambda_);
        return std::string(buf, r.ptr);
    }

    // --------------------------------------------------------- InitialStateSpec

    InitialStateSpec InitialStateSpec::poisson(double zeta)
    {
        InitialStateSpec s;
        s.kind = Kind::IidPoisson;
        s.zeta = zeta;
        s.validate();
        return s;
    }

    InitialStateSpec InitialStateSpec::bernoulli(double zeta)
    {
        InitialStateSpec s;
        s.kind = Kind::IidBernoulli;
        s.zeta = zeta;
        s.validate();
        return s;
    }

    InitialStateSpec InitialStateSpec::deterministic(double zeta)
    {
        InitialStateSpec s;
        s.kind = Kind::Deterministic;
        s.zeta = zeta;
        s.validate();
        return s;
    }

    InitialStateSpec InitialStateSpec::explicit_sites(std::vector<std::pair<Site, std::int32_t>> sites)
    {
        InitialStateSpec s;
        s.kind = Kind::Explicit;
        s.sites = std::move(sites);
        s.validate();
        return s;
    }

    void InitialStateSpec::validate() const
    {
        if (kind == Kind::Explicit)
        {
            for (const auto &[x, n] : sites)
            {
                if (n < 0)
                {
                    throw InvalidSpec("explicit site count must be nonnegative");
                }
            }
            return;
        }
        if (!(zeta >= 0.0) || !std::isfinite(zeta))
        {
            throw InvalidSpec("density must be a finite nonnegative number");
        }
        if (kind == Kind::IidBernoulli && zeta > 1.0)
        {
            throw InvalidSpec("Bernoulli density must be at most 1");
        }
        if (kind == Kind::Deterministic && zeta != std::floor(zeta))
        {
            throw InvalidSpec("deterministic density must be an integer");
        }
    }

    std::string InitialStateSpec::describe() const
    {
        switch (kind)
        {
        case Kind::IidPoisson:
            return "poisson";
        case Kind::IidBernoulli:
            return "bernoulli";
        case Kind::Deterministic:
            return "deterministic";
        case Kind::Explicit:
            return "explicit";
        }
        return "unknown";
    }

    InitialStateSpec InitialStateSpec::parse(std::string_view kind, double zeta)
    {
        if (kind == "poisson")
        {
            return poisson(zeta);
        }
        if (kind == "bernoulli")
        {
            return bernoulli(zeta);
        }
        if (kind == "deterministic")
        {
            return deterministic(zeta);
        }
        throw InvalidSpec("unknown initial state kind '" + std::string(kind) + "'");
    }

    // ------------------------------------------------------------ Configuration

    Configuration::Configuration(LatticeDomain domain) : domain_(std::move(domain)), raw_(domain_.size(), 0) {}

    std::int64_t Configuration::interior_particles() const noexcept
    {
        std::int64_t n = 0;
        for (std::size_t i = 0; i < raw_.size(); ++i)
        {
            if (domain_.is_interior(i))
            {
                n += SiteState::from_raw(raw_[i]).particle_count();
            }
        }
        return n;
    }

    std::int64_t Configuration::sleeping_count() const noexcept
    {
        return std::count(raw_.begin(), raw_.end(), -1);
    }

    Configuration sample_initial(const InitialStateSpec &spec, const LatticeDomain &domain, std::uint64_t seed)
    {
        spec.validate();
        Configuration cfg(domain);
        if (spec.kind == InitialStateSpec::Kind::Explicit)
        {
            for (const auto &[x, n] : spec.sites)
            {
                if (!domain.in_interior(x))
                {
                    throw InvalidSpec("explicit site outside the domain interior");
                }
                if (n > 0)
                {
                    cfg.set(x, SiteState::active(n));
                }
            }
            return cfg;
        }
        const std::uint64_t key = hash_combine(seed, 0x1a2b3c4d5e6f7081ULL);
        const auto count = static_cast<std::int32_t>(spec.zeta);
        for (std::size_t i = 0; i < domain.size(); ++i)
        {
            if (!domain.is_interior(i))
            {
                continue;
            }
            const Site x = domain.site_of(i);
            std::uint64_t h = key;
            for (int a = 0; a < domain.dim(); ++a)
            {
                h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x[static_cast<std::size_t>(a)])));
            }
            const double u = to_unit(mix64(h));
            std::int32_t n = 0;
            switch (spec.kind)
            {
            case InitialStateSpec::Kind::IidPoisson:
                n = poisson_from_uniform(spec.zeta, u);
                break;
            case InitialStateSpec::Kind::IidBernoulli:
                n = u < spec.zeta ? 1 : 0;
                break;
            case InitialStateSpec::Kind::Deterministic:
                n = count;
                break;
            case InitialStateSpec::Kind::Explicit:
                break;
            }
            if (n > 0)
            {
                cfg.set(i, SiteState::active(n));
            }
        }
        return cfg;
    }

    // ---------------------------------------------------------------- snapshots

    std::string snapshot_header(const LatticeDomain &domain)
    {
        return "arw-snapshot d=" + std::to_string(domain.dim()) + " shape=" + domain.describe();
    }

    void write_snapshot(std::ostream &out, const Configuration &cfg)
    {
        const LatticeDomain &dom = cfg.domain();
        out << snapshot_header(dom) << '\n';
        for (std::size_t i = 0; i < dom.size(); ++i)
        {
            const SiteState s = cfg.at(i);
            if (s.occupied())
            {
                out << join_site(dom.site_of(i), dom.dim(), ' ') << ' ' << s.raw() << '\n';
            }
        }
    }

    Configuration read_snapshot(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line))
        {
            throw SnapshotFormatError("missing header");
        }
        std::istringstream hs(line);
        std::string magic, dtok, stok;
        if (!(hs >> magic >> dtok >> stok) || magic != "arw-snapshot" || dtok.rfind("d=", 0) != 0 || stok.rfind("shape=", 0) != 0)
        {
            throw SnapshotFormatError("bad header '" + line + "'");
        }
        int dim = 0;
        try
        {
            dim = std::stoi(dtok.substr(2));
            check_dim(dim);
        }
        catch (const std::exception &)
        {
            throw SnapshotFormatError("bad dimension in header '" + line + "'");
        }
        Configuration cfg(LatticeDomain::parse(dim, stok.substr(6)));
        std::size_t lineno = 1;
        while (std::getline(in, line))
        {
            ++lineno;
            if (line.empty())
            {
                continue;
            }
            std::istringstream ls(line);
            Site x{};
            for (int a = 0; a < dim; ++a)
            {
                if (!(ls >> x[static_cast<std::size_t>(a)]))
                {
                    throw SnapshotFormatError("line " + std::to_string(lineno) + ": bad coordinates");
                }
            }
            std::int32_t v = 0;
            std::string extra;
            if (!(ls >> v) || v < -1 || (ls >> extra))
            {
                throw SnapshotFormatError("line " + std::to_string(lineno) + ": bad value");
            }
            const auto idx = cfg.domain().find(x);
            if (!idx)
            {
                throw SnapshotFormatError("line " + std::to_string(lineno) + ": site outside domain");
            }
            cfg.set(*idx, SiteState::from_raw(v));
        }
        return cfg;
    }
}
