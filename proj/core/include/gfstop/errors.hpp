#pragma once

#include <stdexcept>
#include <string>

namespace gfstop {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument (non-finite input, violated precondition).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A bracketed root could not be found within the search window.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// The requested estimate is not identified by the data (e.g. no uncensored
/// second-period observations).
class NoIdentificationError : public Error {
 public:
  using Error::Error;
};

/// A fixed-point iteration diverged or different starting points disagree.
class NonContractionError : public Error {
 public:
  using Error::Error;
};

/// A payoff family failed its regularity probe; the message names the
/// violated inequality.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// A function evaluation inside a quadrature rule returned a non-finite
/// value; the message carries the offending abscissa.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The request falls outside the supported parameter regime.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A moment-matching equation has no solution in the allowed range.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfstop
