#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace heartcast {

/// A file could not be opened or read.
class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& what)
      : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Input that violates a documented invariant. `field_path` points at the
/// offending value, e.g. `groups[1].population.covariance`.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::string field_path = {})
      : std::runtime_error(what), field_path_(std::move(field_path)) {}
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

/// Malformed row in a population sample file.
class IngestionError : public ValidationError {
 public:
  IngestionError(const std::string& what, std::size_t row, std::string field)
      : ValidationError(what, field), row_(row), field_(std::move(field)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

struct RelaxationStep {
  int step = 0;
  std::string action;
  std::size_t resulting_count = 0;
};

using RelaxationLog = std::vector<RelaxationStep>;

/// A subgroup stayed below the significance threshold after every relaxation.
class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(const std::string& what, std::string module,
                        RelaxationLog log = {})
      : std::runtime_error(what), module_(std::move(module)), log_(std::move(log)) {}
  const std::string& module() const noexcept { return module_; }
  const RelaxationLog& relaxation_log() const noexcept { return log_; }

 private:
  std::string module_;
  RelaxationLog log_;
};

}  // namespace heartcast
