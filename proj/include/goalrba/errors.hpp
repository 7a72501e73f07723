#pragma once

#include <stdexcept>
#include <string>

namespace goalrba {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ED has zero channel gain: no RB can carry any payload.
class UnreachableError : public Error {
 public:
  explicit UnreachableError(int ed_id)
      : Error("ED unreachable: ed " + std::to_string(ed_id)), ed_id_(ed_id) {}
  int ed_id() const { return ed_id_; }

 private:
  int ed_id_;
};

class OracleScaleError : public Error {
 public:
  using Error::Error;
};

class OracleViolation : public Error {
 public:
  using Error::Error;
};

class EnumerationScaleError : public Error {
 public:
  using Error::Error;
};

class NoEmpiricalDistribution : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class CertificateRegimeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace goalrba
