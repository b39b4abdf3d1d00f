#include "bmp/rng.hpp"

#include <cmath>
#include <numbers>

#include "bmp/error.hpp"

namespace bmp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateRotation: return "DegenerateRotation";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::NonPositiveSize: return "NonPositiveSize";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::MissingRelation: return "MissingRelation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoVisibleKeypoints: return "NoVisibleKeypoints";
    case ErrorCode::TooFewPersons: return "TooFewPersons";
    case ErrorCode::NonPositiveArea: return "NonPositiveArea";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
  }
  return "Unknown";
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

int Rng::integer(int lo, int hi_inclusive) {
  return lo + static_cast<int>(index(static_cast<std::size_t>(hi_inclusive - lo + 1)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace bmp
