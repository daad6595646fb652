#include "arw/trace.hpp"

#include <json.hpp>

#include <ostream>

namespace arw
{
    namespace
    {
        nlohmann::json site_json(const Site &x, int dim)
        {
            auto a = nlohmann::json::array();
            for (int k = 0; k < dim; ++k)
            {
                a.push_back(x[static_cast<std::size_t>(k)]);
            }
            return a;
        }
    }

    void TraceWriter::topple(const Site &x, int dim, Instruction ins, SiteState after)
    {
        nlohmann::json j;
        j["step"] = ++step_;
        j["site"] = site_json(x, dim);
        j["instruction"] = ins.to_string(dim);
        j["state"] = after.raw();
        *out_ << j.dump() << '\n';
    }

    void TraceWriter::event(double t, std::string_view kind, const Site &x, int dim, Instruction ins)
    {
        nlohmann::json j;
        ++step_;
        j["t"] = t;
        j["event"] = kind;
        j["site"] = site_json(x, dim);
        j["instruction"] = ins.to_string(dim);
        *out_ << j.dump() << '\n';
    }

    void TraceWriter::particle_event(double t, std::string_view kind, std::uint64_t particle, const Site &x, int dim)
    {
        nlohmann::json j;
        ++step_;
        j["t"] = t;
        j["event"] = kind;
        j["particle"] = particle;
        j["site"] = site_json(x, dim);
        *out_ << j.dump() << '\n';
    }

    Engine::ToppleHook TraceWriter::hook(const LatticeDomain &domain)
    {
        return [this, domain](std::size_t index, Instruction ins, SiteState after) {
            topple(domain.site_of(index), domain.dim(), ins, after);
        };
    }
}
