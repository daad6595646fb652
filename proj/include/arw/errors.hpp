#pragma once

#include <stdexcept>
#include <string>

namespace arw
{
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

#define ARW_DEFINE_ERROR(Name)                                              \
    class Name : public Error                                               \
    {                                                                       \
    public:                                                                 \
        explicit Name(const std::string &what) : Error(#Name ": " + what) {} \
    }

    // Removing a particle from, or putting to sleep, an empty site.
    ARW_DEFINE_ERROR(DegenerateOperand);
    ARW_DEFINE_ERROR(InvalidSpec);
    ARW_DEFINE_ERROR(IllegalToppling);
    ARW_DEFINE_ERROR(OutOfDomain);
    ARW_DEFINE_ERROR(InvalidVolume);
    ARW_DEFINE_ERROR(WrongModel);
    ARW_DEFINE_ERROR(NonBinaryInput);
    ARW_DEFINE_ERROR(DensityMismatch);
    ARW_DEFINE_ERROR(SnapshotFormatError);

#undef ARW_DEFINE_ERROR
}
