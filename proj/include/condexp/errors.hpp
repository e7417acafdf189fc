#pragma once

#include <stdexcept>
#include <string>

namespace condexp {

/// Malformed or contradictory input (bad labels, ids, tables, geometry).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Problem size beyond what an operation supports.
class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Coordinate sets, bin grids or table sizes that do not line up.
class ShapeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Values outside the domain of an operation, e.g. an implied negative probability.
class DomainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Requested zero samples.
class EmptyResultError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace condexp
