#pragma once

#include <stdexcept>
#include <string>

namespace toposeg
{

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error
{
public:
    using Error::Error;
};

/// File was readable but is not in a supported image format.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// Two grids that must share a shape do not.
class DimensionMismatch : public Error
{
public:
    using Error::Error;
};

/// Argument outside of its documented domain.
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

}  // namespace toposeg
