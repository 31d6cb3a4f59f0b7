#pragma once

#include <stdexcept>
#include <string>

namespace fairsynth {

/// Error categories map 1:1 onto CLI exit codes (usage=1, io=2, numeric=3).
enum class ErrorKind { Usage, Io, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& msg) { return Error(ErrorKind::Usage, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorKind::Io, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::Numeric, msg); }

}  // namespace fairsynth
