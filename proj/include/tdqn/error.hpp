#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace tdqn {

// Raised for bad user input: malformed files, inconsistent configuration,
// out-of-range arguments.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an internal invariant breaks. Seeing one of these is a bug in
// this library, not a usage problem.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

template <typename... Parts>
[[noreturn]] void fail(Parts&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    throw Error(os.str());
}

template <typename... Parts>
void require(bool condition, Parts&&... parts) {
    if (!condition) fail(std::forward<Parts>(parts)...);
}

}  // namespace tdqn

// Always-on internal check; these stay active in release builds because the
// cost is negligible next to the numeric work they guard.
#define TDQN_INVARIANT(cond, msg)                                             \
    do {                                                                      \
        if (!(cond)) {                                                        \
            std::ostringstream os_;                                           \
            os_ << "invariant failed at " << __FILE__ << ":" << __LINE__      \
                << ": " << msg;                                               \
            throw ::tdqn::InvariantError(os_.str());                          \
        }                                                                     \
    } while (0)
