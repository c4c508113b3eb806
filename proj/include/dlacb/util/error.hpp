#pragma once

#include <stdexcept>
#include <string>

namespace dlacb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent key material.
class KeyError : public Error {
 public:
  using Error::Error;
};

class KeyGenerationError : public Error {
 public:
  using Error::Error;
};

// Authenticated decryption failed: wrong key or tampered ciphertext.
class DecryptError : public Error {
 public:
  using Error::Error;
};

// Canonical or file-format decoding failed.
class FormatError : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlacb
