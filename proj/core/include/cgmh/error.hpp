#pragma once

#include <stdexcept>
#include <string>

namespace cgmh {

/// Bad input data: malformed files, empty corpora, out-of-vocabulary keywords.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file that does not follow its declared format (ARPA, GloVe text, ...).
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Caller broke a documented precondition or an internal invariant failed.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cgmh
