#pragma once

#include <stdexcept>
#include <string>

namespace muskat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class UnresolvableError : public Error {
public:
    using Error::Error;
};

class OutOfDomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

class UndefinedOffsetError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ConstraintError : public Error {
public:
    using Error::Error;
};

class NonConcaveModulusError : public Error {
public:
    using Error::Error;
};

// The parameter search found no passing modulus; carries the best margin seen.
class NoCertificateError : public Error {
public:
    NoCertificateError(const std::string& what, double best_margin) : Error(what), best_margin_(best_margin) {}
    double best_margin() const { return best_margin_; }

private:
    double best_margin_;
};

}  // namespace muskat
