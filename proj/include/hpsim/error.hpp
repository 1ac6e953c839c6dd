#pragma once

#include <stdexcept>
#include <string>

namespace hpsim {

// Bad numeric argument (negative rate, alpha outside (0,1), ...).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Query point or index outside the object it was asked of.
class OutOfDomain : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Inconsistent combination of otherwise valid settings.
class InvalidConfiguration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace hpsim
