#pragma once

// JSON-lines traces of topplings and continuous-time events.

#include "arw/core_model.hpp"
#include "arw/sitewise.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace arw
{
    class TraceWriter
    {
    public:
        explicit TraceWriter(std::ostream &out) : out_(&out) {}

        /// {"step":..,"site":[..],"instruction":"..","state":..}
        void topple(const Site &x, int dim, Instruction ins, SiteState after);

        /// {"t":..,"event":"..","site":[..],"instruction":".."} for continuous-time runs.
        void event(double t, std::string_view kind, const Site &x, int dim, Instruction ins);

        /// {"t":..,"event":"..","particle":id,"site":[..]} for particle-wise runs.
        void particle_event(double t, std::string_view kind, std::uint64_t particle, const Site &x, int dim);

        /// Engine hook that writes one topple line per toppling.
        Engine::ToppleHook hook(const LatticeDomain &domain);

        std::uint64_t steps() const noexcept { return step_; }

    private:
        std::ostream *out_;
        std::uint64_t step_ = 0;
    };
}
