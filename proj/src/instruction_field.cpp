#include "arw/sitewise.hpp"

#include <algorithm>

namespace arw
{
    std::string Instruction::to_string(int dim) const
    {
        if (is_sleep())
        {
            return "sleep";
        }
        const Site off = direction_offset(dir);
        std::string s = "jump(";
        for (int a = 0; a < dim; ++a)
        {
            if (a > 0)
            {
                s += ',';
            }
            s += std::to_string(off[static_cast<std::size_t>(a)]);
        }
        return s + ")";
    }

    InstructionField::InstructionField(std::uint64_t seed, ModelParams params, JumpDistribution jumps)
        : seed_(seed), seed_key_(hash_combine(mix64(seed), 0x7f4a7c159e3779b9ULL)), params_(params), jumps_(jumps)
    {
    }

    Instruction InstructionField::instruction_at(const Site &x, std::uint64_t j) const
    {
        if (j == 0)
        {
            throw InvalidSpec("instruction index is 1-based");
        }
        return at_key(site_key(x), j);
    }

    Instruction InstructionField::reveal(const Site &x, std::uint64_t j)
    {
        const Instruction ins = instruction_at(x, j);
        auto &r = revealed_[x];
        r = std::max(r, j);
        return ins;
    }

    std::uint64_t InstructionField::revealed(const Site &x) const noexcept
    {
        const auto it = revealed_.find(x);
        return it == revealed_.end() ? 0 : it->second;
    }
}
