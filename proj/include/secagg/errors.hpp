#pragma once

#include <stdexcept>
#include <string>

namespace secagg {

/// Invalid algorithm parameters (bad group, bad modulus width, ...).
struct ParamError : std::invalid_argument {
  explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched vector lengths or inconsistent message headers.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Missing or unusable key material.
struct KeyError : std::runtime_error {
  explicit KeyError(const std::string& what) : std::runtime_error(what) {}
};

/// Value outside the domain an operation accepts.
struct RangeError : std::out_of_range {
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// A round-level rule was broken (bad signature batch, missing recovery, ...).
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

/// Stale or repeated counter presented to the attested aggregator.
struct ReplayError : ProtocolError {
  explicit ReplayError(const std::string& what) : ProtocolError(what) {}
};

/// Malformed or out-of-range configuration input.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace secagg
