#pragma once

#include <stdexcept>
#include <string>

namespace fairshare {

// Configuration problems detected before any execution.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CryptoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized group elements / ciphertexts. Maps to the
// re-encryption scheme's "invalid" outcome.
struct DecodeError : CryptoError {
    using CryptoError::CryptoError;
};

// AEAD authentication failure.
struct IntegrityError : CryptoError {
    using CryptoError::CryptoError;
};

struct InvalidKeyError : CryptoError {
    using CryptoError::CryptoError;
};

// Transaction refused before execution: unknown target, balance too low.
struct SubmitRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contract function failed during execution: state is rolled back, gas is kept.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gas schedule misses an entry for a recorded call.
struct AccountingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fairshare
