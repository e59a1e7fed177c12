#pragma once

#include <stdexcept>

namespace sarship {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable input file.
class InputError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad header, truncated payload, wrong dims).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Output could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyImageError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Clustering input with fewer than two distinct feature vectors.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Ship placement gave up after the attempt budget.
class PlacementError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sarship
