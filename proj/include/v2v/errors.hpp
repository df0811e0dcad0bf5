#pragma once

#include <stdexcept>
#include <string>

namespace v2v {

// Invalid or inconsistent configuration values (bad density, K too large for the drop, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mathematical domain errors such as a non-positive pathloss distance.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an API precondition (bad action index, stepping a terminal agent, shape mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Inconsistent internal data, e.g. mismatched link sets between gain inputs.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace v2v
