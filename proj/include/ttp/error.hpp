#pragma once

#include <stdexcept>
#include <string>

namespace ttp {

// Instance or configuration failed validation. `where` is a JSON-pointer-like
// path to the offending field ("/blocks/3/capacity"), empty when not
// applicable.
class InputError : public std::runtime_error {
public:
    InputError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what),
          where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

// The proximal master QP could not be solved to the requested accuracy.
class MasterFailure : public std::runtime_error {
public:
    MasterFailure(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ttp
