#ifndef OCO_ERRORS_HPP
#define OCO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oco {

// Exact calculators refuse inputs beyond their configured caps instead of
// approximating silently.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violations of a game protocol (query after finalization, infeasible
// realizable stream, ...).
class ProtocolError : public std::runtime_error {
  public:
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested a supremum over an unbounded set.
class UnboundedError : public std::runtime_error {
  public:
    explicit UnboundedError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace oco

#endif
