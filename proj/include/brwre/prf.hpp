#pragma once

// Counter-based pseudorandom function built on keyed SipHash-2-4.
//
// Every random quantity in a run is a pure function of
//   (seed, stream domain, canonical message words, sequence counter),
// so trajectories are reproducible bit-for-bit regardless of iteration or
// scheduling order. Canonical site encoding: the time step as one 64-bit
// word, followed by the d signed coordinates as little-endian two's
// complement 64-bit words (dimension is implied by the word count, which
// feeds the hash through the message length).

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>

namespace brwre {

// Stream domains. Engine and oracle deliberately share only the
// environment domain; everything else is disjoint.
enum class StreamDomain : std::uint64_t {
  environment = 0,       // offspring-law choice at (t, x)
  engine_direction = 1,  // direction split of the particles at (t, x)
  engine_offspring = 2,  // offspring sums at (t, x, direction)
  oracle_direction = 3,  // per-particle destination draws
  oracle_offspring = 4,  // per-particle offspring draws
  ensemble_env_seed = 5,
  ensemble_run_seed = 6,
  test_generic = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace detail {

inline std::uint64_t rotl64(std::uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

struct SipState {
  std::uint64_t v0, v1, v2, v3;

  void init(std::uint64_t k0, std::uint64_t k1) {
    v0 = k0 ^ 0x736F6D6570736575ull;
    v1 = k1 ^ 0x646F72616E646F6Dull;
    v2 = k0 ^ 0x6C7967656E657261ull;
    v3 = k1 ^ 0x7465646279746573ull;
  }

  void round() {
    v0 += v1;
    v1 = rotl64(v1, 13);
    v1 ^= v0;
    v0 = rotl64(v0, 32);
    v2 += v3;
    v3 = rotl64(v3, 16);
    v3 ^= v2;
    v0 += v3;
    v3 = rotl64(v3, 21);
    v3 ^= v0;
    v2 += v1;
    v1 = rotl64(v1, 17);
    v1 ^= v2;
    v2 = rotl64(v2, 32);
  }

  void absorb(std::uint64_t m) {
    v3 ^= m;
    round();
    round();
    v0 ^= m;
  }

  std::uint64_t finalize(std::uint64_t length_byte) {
    absorb(length_byte << 56);  // padding block: message length mod 256
    v2 ^= 0xFF;
    round();
    round();
    round();
    round();
    return v0 ^ v1 ^ v2 ^ v3;
  }
};

}  // namespace detail

// Reference byte-oriented SipHash-2-4 (used by the test vectors; the word
// streams below produce identical output on whole-word messages).
inline std::uint64_t siphash24(std::uint64_t k0, std::uint64_t k1,
                               const std::uint8_t* data, std::size_t len) {
  detail::SipState s;
  s.init(k0, k1);
  std::size_t n_blocks = len / 8;
  for (std::size_t i = 0; i < n_blocks; ++i) {
    std::uint64_t m;
    std::memcpy(&m, data + 8 * i, 8);  // little-endian host assumed
    s.absorb(m);
  }
  std::uint64_t b = static_cast<std::uint64_t>(len & 0xFF) << 56;
  for (std::size_t i = 8 * n_blocks; i < len; ++i)
    b |= static_cast<std::uint64_t>(data[i]) << (8 * (i - 8 * n_blocks));
  s.v3 ^= b;
  s.round();
  s.round();
  s.v0 ^= b;
  s.v2 ^= 0xFF;
  s.round();
  s.round();
  s.round();
  s.round();
  return s.v0 ^ s.v1 ^ s.v2 ^ s.v3;
}

// A keyed PRF for one (seed, domain) pair.
class Prf {
 public:
  Prf(std::uint64_t seed, StreamDomain domain) {
    std::uint64_t tag = static_cast<std::uint64_t>(domain);
    k0_ = splitmix64(seed ^ (0x2545F4914F6CDD1Dull * (tag + 1)));
    k1_ = splitmix64(k0_ + seed);
  }

  std::uint64_t key0() const { return k0_; }
  std::uint64_t key1() const { return k1_; }

  std::uint64_t hash_words(std::span<const std::uint64_t> words) const {
    detail::SipState s;
    s.init(k0_, k1_);
    for (std::uint64_t w : words) s.absorb(w);
    return s.finalize((8 * words.size()) & 0xFF);
  }

 private:
  std::uint64_t k0_, k1_;
};

// Sequential stream: the SipHash state is cached after absorbing the prefix
// words once; each draw absorbs only the sequence counter. Equivalent to
// hashing (prefix || seq) from scratch.
class PrfStream {
 public:
  PrfStream(const Prf& prf, std::span<const std::uint64_t> prefix) {
    state_.init(prf.key0(), prf.key1());
    for (std::uint64_t w : prefix) state_.absorb(w);
    length_byte_ = (8 * (prefix.size() + 1)) & 0xFF;
  }

  std::uint64_t next_u64() {
    detail::SipState s = state_;
    s.absorb(seq_++);
    return s.finalize(length_byte_);
  }

  // uniform in [0, 1), 53 random bits
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1), safe for log/probit
  double next_open_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via inverse CDF (Wichura's PPND16), one uniform per draw
  double next_normal() { return normal_quantile(next_open_unit()); }

  static double normal_quantile(double p);

 private:
  detail::SipState state_;
  std::uint64_t length_byte_;
  std::uint64_t seq_ = 0;
};

// AS241 PPND16: |relative error| < 1e-15 over (0,1).
inline double PrfStream::normal_quantile(double p) {
  double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0 ? -v : v;
}

// Positional seed derivation for ensembles: run i's seeds depend only on
// (master_seed, i), never on how many runs came before.
inline std::uint64_t derive_env_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  const std::uint64_t w[1] = {run_index};
  return Prf(master_seed, StreamDomain::ensemble_env_seed).hash_words(w);
}

inline std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  const std::uint64_t w[1] = {run_index};
  return Prf(master_seed, StreamDomain::ensemble_run_seed).hash_words(w);
}

}  // namespace brwre
