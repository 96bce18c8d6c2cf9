#pragma once

// Wide-count helpers. Particle counts are unsigned 128-bit integers so that
// populations growing like m^t stay exact up to ln N ~ 88; every accumulation
// goes through the checked helpers and reports overflow instead of wrapping.

#include <cmath>
#include <cstdint>
#include <string>

namespace brwre {

using count_t = unsigned __int128;

constexpr count_t count_max() { return ~count_t{0}; }

inline bool add_overflows(count_t a, count_t b) { return b > count_max() - a; }

// a += b, false on overflow
inline bool checked_add(count_t& a, count_t b) {
  if (add_overflows(a, b)) return false;
  a += b;
  return true;
}

// r = a * b, false on overflow
inline bool checked_mul(count_t a, count_t b, count_t& r) {
  if (a == 0 || b == 0) {
    r = 0;
    return true;
  }
  if (a > count_max() / b) return false;
  r = a * b;
  return true;
}

// Conversion is correctly rounded by the compiler; relative error <= 2^-53.
inline double count_to_double(count_t v) { return static_cast<double>(v); }

inline double ln_count(count_t v) { return std::log(count_to_double(v)); }

inline std::string count_to_string(count_t v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

}  // namespace brwre
