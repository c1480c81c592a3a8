//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>

namespace brt {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, malformed input, dimension mismatch. Exit code 2.
class config_error : public error {
 public:
  using error::error;
};

// Non-finite values produced inside a numerical routine. Exit code 3.
class numeric_error : public error {
 public:
  using error::error;
};

// An expected upstream artifact (file, directory) is absent. Exit code 4.
class missing_artifact_error : public error {
 public:
  using error::error;
};

}  // namespace brt
