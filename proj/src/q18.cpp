#include "flann/q18.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "flann/error.hpp"

namespace flann {

namespace {

using u128 = unsigned __int128;

constexpr int kPrecision = Q18::kMantissaBits + 1;           // significand bits incl. hidden
constexpr int kMinNormalExp = 1 - Q18::kBias;                // -30
constexpr int kMinUlpExp = kMinNormalExp - Q18::kMantissaBits;  // -41
constexpr std::uint32_t kHidden = 1u << Q18::kMantissaBits;

// Finite pattern as (-1)^negative * significand * 2^exponent.
struct Unpacked {
  bool negative = false;
  std::uint32_t significand = 0;
  int exponent = 0;
};

Unpacked Unpack(Q18 q) {
  if (!q.is_finite()) throw InvalidInputError("Q18 operand is infinity or NaN");
  Unpacked u;
  u.negative = q.sign();
  if (q.exponent_field() == 0) {
    u.significand = q.mantissa();
    u.exponent = kMinUlpExp;
  } else {
    u.significand = kHidden | q.mantissa();
    u.exponent = static_cast<int>(q.exponent_field()) - Q18::kBias - Q18::kMantissaBits;
  }
  return u;
}

int HighestBit(u128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 64 + std::bit_width(hi) - 1;
  return std::bit_width(static_cast<std::uint64_t>(v)) - 1;
}

// Rounds (-1)^negative * magnitude * 2^exponent to nearest, ties to even.
Q18 RoundExact(bool negative, u128 magnitude, int exponent, const Q18Config& config) {
  if (magnitude == 0) return Q18{};

  const int top = HighestBit(magnitude);
  const int unbiased = top + exponent;
  int ulp_exp = std::max(unbiased, kMinNormalExp) - Q18::kMantissaBits;
  const int shift = ulp_exp - exponent;

  u128 significand = 0;
  if (shift <= 0) {
    significand = magnitude << -shift;
  } else if (shift > top + 1) {
    // Below half of the smallest subnormal.
    return Q18{};
  } else {
    significand = magnitude >> shift;
    const u128 rest = magnitude - (significand << shift);
    const u128 half = u128{1} << (shift - 1);
    if (rest > half || (rest == half && (significand & 1) != 0)) ++significand;
  }

  if (significand == (u128{1} << kPrecision)) {
    significand >>= 1;
    ++ulp_exp;
  }
  if (significand == 0) return Q18{};

  std::uint32_t exponent_field = 0;
  if (significand >= kHidden) {
    const int biased = ulp_exp + Q18::kMantissaBits + Q18::kBias;
    if (biased >= static_cast<int>(Q18::kExponentMax)) {
      throw RangeError("Q18 overflow");
    }
    exponent_field = static_cast<std::uint32_t>(biased);
  } else if (config.flush_subnormals) {
    return Q18{};
  }
  const auto mantissa = static_cast<std::uint32_t>(significand) & Q18::kMantissaMask;
  const std::uint32_t sign = negative ? 1u : 0u;
  return Q18::FromBits((sign << (Q18::kTotalBits - 1)) | (exponent_field << Q18::kMantissaBits) |
                       mantissa);
}

Unpacked UnpackForArithmetic(Q18 q, const Q18Config& config) {
  Unpacked u = Unpack(q);
  if (config.flush_subnormals && q.is_subnormal()) u.significand = 0;
  return u;
}

}  // namespace

Q18 Q18::FromBits(std::uint32_t bits) {
  if ((bits & ~kMask) != 0) {
    throw InvalidInputError("Q18 pattern wider than 18 bits: " + std::to_string(bits));
  }
  Q18 q;
  q.bits_ = bits;
  return q;
}

double q18_max_finite() {
  return std::ldexp(static_cast<double>((kHidden << 1) - 1),
                    static_cast<int>(Q18::kExponentMax) - 1 - Q18::kBias - Q18::kMantissaBits);
}

Q18 q18_from_real(double x, const Q18Config& config) {
  if (std::isnan(x)) throw InvalidInputError("cannot encode NaN as Q18");
  if (std::isinf(x)) throw RangeError("cannot encode infinity as Q18");
  if (x == 0.0) return Q18{};
  int exp = 0;
  const double fraction = std::frexp(std::abs(x), &exp);
  const auto magnitude = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
  return RoundExact(std::signbit(x), magnitude, exp - 53, config);
}

double q18_to_real(Q18 q) {
  const Unpacked u = Unpack(q);
  const double magnitude = std::ldexp(static_cast<double>(u.significand), u.exponent);
  return u.negative ? -magnitude : magnitude;
}

Q18 q18_mul(Q18 a, Q18 b, const Q18Config& config) {
  const Unpacked x = UnpackForArithmetic(a, config);
  const Unpacked y = UnpackForArithmetic(b, config);
  const u128 product = static_cast<u128>(x.significand) * y.significand;
  return RoundExact(x.negative != y.negative, product, x.exponent + y.exponent, config);
}

Q18 q18_add(Q18 a, Q18 b, const Q18Config& config) {
  const Unpacked x = UnpackForArithmetic(a, config);
  const Unpacked y = UnpackForArithmetic(b, config);
  // Exponents span at most 61 binades, so aligned significands fit in 74 bits.
  const int base = std::min(x.exponent, y.exponent);
  const u128 mx = static_cast<u128>(x.significand) << (x.exponent - base);
  const u128 my = static_cast<u128>(y.significand) << (y.exponent - base);
  if (x.negative == y.negative) return RoundExact(x.negative, mx + my, base, config);
  if (mx >= my) return RoundExact(x.negative, mx - my, base, config);
  return RoundExact(y.negative, my - mx, base, config);
}

std::string to_bit_string(Q18 q) {
  std::string out;
  out.reserve(Q18::kTotalBits + 2);
  for (int bit = Q18::kTotalBits - 1; bit >= 0; --bit) {
    out.push_back(((q.bits() >> bit) & 1u) ? '1' : '0');
    if (bit == Q18::kTotalBits - 1 || bit == Q18::kMantissaBits) out.push_back('_');
  }
  return out;
}

Q18 q18_from_bit_string(std::string_view text) {
  std::uint32_t bits = 0;
  int digits = 0;
  for (char c : text) {
    if (c == '_') continue;
    if (c != '0' && c != '1') {
      throw ParseError("invalid character in Q18 bit string '" + std::string(text) + "'");
    }
    bits = (bits << 1) | static_cast<std::uint32_t>(c - '0');
    ++digits;
  }
  if (digits != Q18::kTotalBits) {
    throw ParseError("Q18 bit string '" + std::string(text) + "' must have 18 binary digits");
  }
  return Q18::FromBits(bits);
}

}  // namespace flann
