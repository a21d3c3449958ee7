#pragma once

#include <stdexcept>
#include <string>

namespace semcom {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error { using Error::Error; };
struct EmptyCorpusError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct DegenerateChannelError : Error { using Error::Error; };
struct DecodeError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

// Raised when a training loss turns NaN/Inf. component() names the offending term.
class NonFiniteLossError : public Error {
public:
    NonFiniteLossError(std::string component, double value, long step)
        : Error("non-finite loss '" + component + "' = " + std::to_string(value) +
                " at step " + std::to_string(step)),
          component_(std::move(component)) {}
    const std::string& component() const noexcept { return component_; }

private:
    std::string component_;
};

}  // namespace semcom
