#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tweetpol {

inline constexpr const char* kVersion = "1.0.0";

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tweet-level sentiment class. The numeric order (P, N, NEU, NONE) is the
// fixed class order used by every probability vector and confusion matrix.
enum class Polarity : int { P = 0, N = 1, NEU = 2, NONE = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<Polarity, kNumClasses> kAllPolarities = {
    Polarity::P, Polarity::N, Polarity::NEU, Polarity::NONE};

inline constexpr std::size_t index_of(Polarity p) { return static_cast<std::size_t>(p); }

inline Polarity polarity_from_index(std::size_t i) {
  if (i >= kNumClasses) throw Error("polarity index out of range: " + std::to_string(i));
  return static_cast<Polarity>(i);
}

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::P: return "P";
    case Polarity::N: return "N";
    case Polarity::NEU: return "NEU";
    case Polarity::NONE: return "NONE";
  }
  return "?";
}

inline std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "P") return Polarity::P;
  if (s == "N") return Polarity::N;
  if (s == "NEU") return Polarity::NEU;
  if (s == "NONE") return Polarity::NONE;
  return std::nullopt;
}

// Probability vector over the four classes in (P, N, NEU, NONE) order.
struct ClassDistribution {
  std::array<double, kNumClasses> probabilities{};

  double operator[](Polarity p) const { return probabilities[index_of(p)]; }
  double operator[](std::size_t i) const { return probabilities[i]; }

  double sum() const {
    double s = 0.0;
    for (double v : probabilities) s += v;
    return s;
  }

  // First maximal class in class order.
  Polarity argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumClasses; ++i)
      if (probabilities[i] > probabilities[best]) best = i;
    return polarity_from_index(best);
  }

  bool is_valid(double tol = 1e-9) const {
    for (double v : probabilities)
      if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) return false;
    return std::abs(sum() - 1.0) <= tol;
  }

  static ClassDistribution uniform() {
    ClassDistribution d;
    d.probabilities.fill(1.0 / kNumClasses);
    return d;
  }
};

}  // namespace tweetpol
