#pragma once

#include <stdexcept>
#include <string>

namespace andlab {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct BoxTooLarge : Error {
    long long requested = 0;
    long long cap = 0;
    BoxTooLarge(long long req, long long cap_)
        : Error("box too large: " + std::to_string(req) + " sites exceeds cap " +
                std::to_string(cap_)),
          requested(req), cap(cap_) {}
};

struct IncompleteRealization : Error {
    explicit IncompleteRealization(const std::string& site)
        : Error("incomplete realization: no potential value at site " + site) {}
};

struct InvalidExponent : Error {
    double alpha;
    explicit InvalidExponent(double a)
        : Error("invalid exponent: alpha = " + std::to_string(a) +
                " outside (1, 2)"),
          alpha(a) {}
};

struct SolverFailure : Error {
    int index;  // offending eigenvalue / pivot index reported by the backend
    SolverFailure(const std::string& what, int idx)
        : Error("solver failure: " + what + " (index " + std::to_string(idx) + ")"),
          index(idx) {}
};

// E is numerically on the box spectrum; carries min_j |E - E_j|.
struct ResolventSingular : Error {
    double spectrum_distance;
    explicit ResolventSingular(double dist)
        : Error("resolvent singular: energy within " + std::to_string(dist) +
                " of the box spectrum"),
          spectrum_distance(dist) {}
};

struct NoCenter : Error {
    NoCenter() : Error("no center: vector is identically zero") {}
};

struct InsufficientSupport : Error {
    explicit InsufficientSupport(int usable)
        : Error("insufficient support: only " + std::to_string(usable) +
                " sites above amplitude floor, need at least 3") {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& msg) : Error("insufficient data: " + msg) {}
};

struct UnderpoweredEnsemble : Error {
    explicit UnderpoweredEnsemble(long long n)
        : Error("underpowered ensemble: N = " + std::to_string(n) +
                " < 100 (pass force to override)") {}
};

struct ConfigError : Error {
    std::string key;
    ConfigError(const std::string& key_, const std::string& msg)
        : Error("config error: \"" + key_ + "\": " + msg), key(key_) {}
};

}  // namespace andlab
