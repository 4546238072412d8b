#pragma once

#include <stdexcept>
#include <string>

namespace partshare {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// -- lattice ----------------------------------------------------------------
class InvalidScale : public Error { public: using Error::Error; };
class NonDivisibleExtent : public Error { public: using Error::Error; };
class IndexOutOfRange : public Error { public: using Error::Error; };

// -- dictionary ---------------------------------------------------------
class LocalityViolation : public Error { public: using Error::Error; };
class UnnormalizedConfigs : public Error { public: using Error::Error; };
class BadChildLevel : public Error { public: using Error::Error; };
class UnrealizableRegime : public Error { public: using Error::Error; };

// -- generative ---------------------------------------------------------
/// Any failure to produce a valid sample (maps to CLI exit code 3).
class GenerativeError : public Error { public: using Error::Error; };
/// Rejection budget exhausted while conditioning on valid placement
/// (leaf collisions or off-lattice children).
class OverlapUnresolvable : public GenerativeError {
 public: using GenerativeError::GenerativeError;
};

// -- inference ----------------------------------------------------------
class AlphabetMismatch : public Error { public: using Error::Error; };
class ScopeUnresolvable : public Error { public: using Error::Error; };
class InvalidRoot : public Error { public: using Error::Error; };

// -- oracle -------------------------------------------------------------
class InstanceTooLarge : public Error { public: using Error::Error; };

// -- complexity ---------------------------------------------------------
/// Inputs that should describe the same run disagree (maps to CLI exit 4).
class ParamMismatch : public Error { public: using Error::Error; };

// -- file formats -------------------------------------------------------
class FormatError : public Error { public: using Error::Error; };

/// Experiment config problems; carries a 1-based line number when known
/// (0 = not line-specific). Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

}  // namespace partshare
