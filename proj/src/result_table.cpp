#include "arw/experiments.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace arw
{
    namespace
    {
        std::string num(double x)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return buf;
        }
    }

    const ResultRow &ResultTable::find(const std::string &statistic, int size) const
    {
        for (const auto &r : rows)
        {
            if (r.statistic == statistic && (size < 0 || r.size == size))
            {
                return r;
            }
        }
        throw std::out_of_range("no row with statistic " + statistic);
    }

    void ResultTable::write_csv(std::ostream &out) const
    {
        out << "kind,d,lambda,zeta,size,k_or_rho,statistic,estimate,stderr,replicas,censored,seed\n";
        for (const auto &r : rows)
        {
            out << r.kind << ',' << r.d << ',' << num(r.lambda) << ',' << num(r.zeta) << ',' << r.size << ',' << num(r.k_or_rho) << ','
                << r.statistic << ',' << num(r.estimate) << ',' << num(r.std_error) << ',' << r.replicas << ',' << r.censored << ','
                << r.seed << '\n';
        }
    }

    std::string ResultTable::csv() const
    {
        std::ostringstream s;
        write_csv(s);
        return s.str();
    }

    void ResultTable::write_json(std::ostream &out) const
    {
        // Written by hand so floats keep the CSV's 17 digits; inf and nan become strings.
        auto f = [](double x) { return std::isfinite(x) ? num(x) : "\"" + num(x) + "\""; };
        auto str = [](const std::string &x) { return nlohmann::json(x).dump(); };
        out << "[";
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            const ResultRow &r = rows[i];
            out << (i == 0 ? "\n" : ",\n") << " {\"kind\": " << str(r.kind) << ", \"d\": " << r.d << ", \"lambda\": " << f(r.lambda)
                << ", \"zeta\": " << f(r.zeta) << ", \"size\": " << r.size << ", \"k_or_rho\": " << f(r.k_or_rho)
                << ", \"statistic\": " << str(r.statistic) << ", \"estimate\": " << f(r.estimate) << ", \"stderr\": " << f(r.std_error)
                << ", \"replicas\": " << r.replicas << ", \"censored\": " << r.censored << ", \"seed\": " << r.seed << "}";
        }
        out << "\n]\n";
    }
}
