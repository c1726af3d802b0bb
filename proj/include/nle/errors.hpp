#ifndef NLE_ERRORS_HPP
#define NLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nle {

// Base for every error raised by the library. The CLI maps subclasses to exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class domain_error final : public error {
public:
    using error::error;
};

class config_error final : public error {
public:
    using error::error;
};

class shape_error final : public error {
public:
    using error::error;
};

class unbounded_conjugate_error final : public error {
public:
    using error::error;
};

class diagonal_error final : public error {
public:
    using error::error;
};

class degenerate_input_error final : public error {
public:
    using error::error;
};

class assembly_error final : public error {
public:
    using error::error;
};

class nonconvergence_error final : public error {
public:
    explicit nonconvergence_error(const std::string& what, double best_residual = 0.0)
        : error{what}
        , _best_residual{best_residual} {}

    double best_residual() const noexcept { return _best_residual; }

private:
    double _best_residual;
};

}

#endif
