#pragma once

#include <stdexcept>
#include <string>

namespace tethersim {

struct NonSkewInput : std::runtime_error {
  explicit NonSkewInput(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct FullyReeled : std::runtime_error {
  explicit FullyReeled(const std::string& what) : std::runtime_error(what) {}
};

struct SingularRadius : std::runtime_error {
  explicit SingularRadius(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroLengthElement : std::runtime_error {
  explicit ZeroLengthElement(const std::string& what) : std::runtime_error(what) {}
};

struct StateInvalid : std::runtime_error {
  explicit StateInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMassMatrix : std::runtime_error {
  explicit SingularMassMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigInvalid : std::runtime_error {
  explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tethersim
