#pragma once

#include <stdexcept>
#include <string>

namespace casad {

/// Base class for all library errors. The CLI maps subclasses onto exit
/// codes: usage/config -> 1, data -> 2, numerical -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid parameter combination (L, r, N ranges, flag misuse).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// --- frame / log ingestion ---

class MalformedLine : public Error {
 public:
  using Error::Error;
};

class PayloadTooLong : public Error {
 public:
  using Error::Error;
};

class BadId : public Error {
 public:
  using Error::Error;
};

class EmptyResult : public Error {
 public:
  using Error::Error;
};

// --- ssa core ---

class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ByteOutOfRange : public Error {
 public:
  using Error::Error;
};

// --- simulator ---

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

class UnknownEcu : public Error {
 public:
  using Error::Error;
};

class OffsetOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyValuePool : public Error {
 public:
  using Error::Error;
};

// --- tuner ---

class NoAttackInstances : public Error {
 public:
  using Error::Error;
};

class DegenerateScores : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace casad
