#pragma once

#include <stdexcept>
#include <string>

namespace lwr {

/// Argument outside the physical range of a diagram (density, flux, ratio).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A flux-density law that violates the unimodality assumption.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Supply-demand state or simulation state that is inconsistent.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid numerical or scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lwr
