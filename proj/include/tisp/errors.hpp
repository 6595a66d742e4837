#pragma once

#include <stdexcept>
#include <string>

namespace tisp {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Invalid rule parameters, option values, or inconsistent dimensions.
class ParameterError : public Error
{
public:
    using Error::Error;
};

// Response outside the family support, malformed input files.
class DataError : public Error
{
public:
    using Error::Error;
};

// Missing or unreadable files.
class IoError : public Error
{
public:
    using Error::Error;
};

// The iteration could not be brought to descend.
class SolverError : public Error
{
public:
    using Error::Error;
};

} // namespace tisp
