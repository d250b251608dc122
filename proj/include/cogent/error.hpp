// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cogent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace or text input. Line numbers are 1-based and count the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class TilingError : public Error {
 public:
  TilingError(std::uint64_t boundary, const std::string& what)
      : Error("tiling error at byte " + std::to_string(boundary) + ": " + what), boundary_(boundary) {}

  std::uint64_t boundary() const { return boundary_; }

 private:
  std::uint64_t boundary_;
};

// Object larger than the whole cache.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cogent
