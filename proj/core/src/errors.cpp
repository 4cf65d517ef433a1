#include "mdual/errors.hpp"

#include <utility>

namespace mdual {

namespace {

const char* kind_name(PartialOrderViolation::Kind kind) {
  switch (kind) {
    case PartialOrderViolation::Kind::Reflexivity: return "reflexivity";
    case PartialOrderViolation::Kind::Antisymmetry: return "antisymmetry";
    case PartialOrderViolation::Kind::Transitivity: return "transitivity";
    case PartialOrderViolation::Kind::Cycle: return "acyclicity";
  }
  return "?";
}

}  // namespace

PartialOrderViolation::PartialOrderViolation(Kind kind, std::string a, std::string b, std::string c)
    : Error(std::string("partial order violation (") + kind_name(kind) + ") at (" + a + ", " + b + ", " + c + ")"),
      kind_(kind),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)) {}

SizeOverflow::SizeOverflow(const std::string& what, std::size_t requested, std::size_t cap)
    : Error(what + ": " + std::to_string(requested) + " states exceeds cap " + std::to_string(cap)),
      requested_(requested),
      cap_(cap) {}

IncompatibleMatrix::IncompatibleMatrix(std::string matrix, std::size_t a1, std::size_t a2, std::size_t target_class)
    : Error(matrix + " is not compatible with the equivalence relation (representatives " + std::to_string(a1) +
            ", " + std::to_string(a2) + ", class " + std::to_string(target_class) + ")"),
      matrix_(std::move(matrix)),
      a1_(a1),
      a2_(a2),
      class_(target_class) {}

}  // namespace mdual
