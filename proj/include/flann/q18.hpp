#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace flann {

// 18-bit binary floating point: sign(1) | exponent(6, bias 31) | mantissa(11).
// Exponent field 0 holds zero and subnormals; 63 holds infinity/NaN, which
// the arithmetic below refuses to consume or produce.
class Q18 {
 public:
  static constexpr int kTotalBits = 18;
  static constexpr int kExponentBits = 6;
  static constexpr int kMantissaBits = 11;
  static constexpr int kBias = 31;
  static constexpr std::uint32_t kMask = (1u << kTotalBits) - 1;
  static constexpr std::uint32_t kMantissaMask = (1u << kMantissaBits) - 1;
  static constexpr std::uint32_t kExponentMax = (1u << kExponentBits) - 1;

  constexpr Q18() = default;

  // Throws InvalidInputError when bits above bit 17 are set.
  static Q18 FromBits(std::uint32_t bits);

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool sign() const { return (bits_ >> (kTotalBits - 1)) & 1u; }
  constexpr std::uint32_t exponent_field() const {
    return (bits_ >> kMantissaBits) & kExponentMax;
  }
  constexpr std::uint32_t mantissa() const { return bits_ & kMantissaMask; }

  constexpr bool is_finite() const { return exponent_field() != kExponentMax; }
  constexpr bool is_zero() const { return exponent_field() == 0 && mantissa() == 0; }
  constexpr bool is_subnormal() const { return exponent_field() == 0 && mantissa() != 0; }

  friend constexpr bool operator==(Q18, Q18) = default;

 private:
  std::uint32_t bits_ = 0;
};

struct Q18Config {
  enum class Rounding { kNearestEven };
  Rounding rounding = Rounding::kNearestEven;
  bool flush_subnormals = false;
};

// Largest finite magnitude: (2 - 2^-11) * 2^31.
double q18_max_finite();

/// Nearest-even rounding into Q18. NaN -> InvalidInputError, overflow or
/// infinity -> RangeError. Zero results are +0.
Q18 q18_from_real(double x, const Q18Config& config = {});

/// Exact value of a finite pattern. Infinity/NaN -> InvalidInputError.
double q18_to_real(Q18 q);

/// Correctly rounded a * b (one rounding of the exact product).
Q18 q18_mul(Q18 a, Q18 b, const Q18Config& config = {});

/// Correctly rounded a + b (one rounding of the exact sum).
Q18 q18_add(Q18 a, Q18 b, const Q18Config& config = {});

/// "s_eeeeee_mmmmmmmmmmm".
std::string to_bit_string(Q18 q);

/// Accepts the grouped form above or 18 bare binary digits.
Q18 q18_from_bit_string(std::string_view text);

}  // namespace flann
