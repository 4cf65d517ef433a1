#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdual {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A relation handed to build_poset is not a partial order.
/// The witness names up to three labels that exhibit the failure.
class PartialOrderViolation : public Error {
 public:
  enum class Kind { Reflexivity, Antisymmetry, Transitivity, Cycle };

  PartialOrderViolation(Kind kind, std::string a, std::string b, std::string c);

  Kind kind() const noexcept { return kind_; }
  const std::string& first() const noexcept { return a_; }
  const std::string& second() const noexcept { return b_; }
  const std::string& third() const noexcept { return c_; }

 private:
  Kind kind_;
  std::string a_, b_, c_;
};

/// A requested state space exceeds its configured cap.
class SizeOverflow : public Error {
 public:
  SizeOverflow(const std::string& what, std::size_t requested, std::size_t cap);

  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

class NotComparable : public Error {
 public:
  using Error::Error;
};

class InvalidSkeleton : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonpositiveH : public Error {
 public:
  using Error::Error;
};

class NotIrreducible : public Error {
 public:
  using Error::Error;
};

class NotExchangeable : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input (rationals, partitions, skeletons, JSON kernels).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised by the coarse-graining pipeline when one of H, H^-1 or P fails the
/// class-sum condition. `matrix()` names the offender.
class IncompatibleMatrix : public Error {
 public:
  IncompatibleMatrix(std::string matrix, std::size_t a1, std::size_t a2, std::size_t target_class);

  const std::string& matrix() const noexcept { return matrix_; }
  std::size_t first_representative() const noexcept { return a1_; }
  std::size_t second_representative() const noexcept { return a2_; }
  std::size_t target_class() const noexcept { return class_; }

 private:
  std::string matrix_;
  std::size_t a1_, a2_, class_;
};

}  // namespace mdual
