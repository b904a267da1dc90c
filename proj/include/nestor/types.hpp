#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nestor {

// Canonical loop dimensions of the seven-deep nest:
//   for n / for m / for c / for r / for s / for e / for f
//     out[n,e,f,m] += in[n, e*U+r, f*V+s, c] * w[r,s,c,m]
enum class Dim : uint8_t { N = 0, M, C, R, S, E, F };

inline constexpr std::array<Dim, 7> kAllDims{Dim::N, Dim::M, Dim::C, Dim::R,
                                             Dim::S, Dim::E, Dim::F};
inline constexpr int kDimCount = 7;

inline constexpr char dim_letter(Dim d) {
  constexpr const char* letters = "NMCRSEF";
  return letters[static_cast<int>(d)];
}

inline Dim dim_from_letter(char ch) {
  switch (ch) {
    case 'N': case 'n': return Dim::N;
    case 'M': case 'm': return Dim::M;
    case 'C': case 'c': return Dim::C;
    case 'R': case 'r': return Dim::R;
    case 'S': case 's': return Dim::S;
    case 'E': case 'e': return Dim::E;
    case 'F': case 'f': return Dim::F;
    default: throw std::invalid_argument(std::string("unknown dimension: ") + ch);
  }
}

enum class Tensor : uint8_t { Inputs = 0, Filters, Outputs };
inline constexpr std::array<Tensor, 3> kAllTensors{Tensor::Inputs, Tensor::Filters,
                                                   Tensor::Outputs};

inline constexpr const char* tensor_name(Tensor t) {
  switch (t) {
    case Tensor::Inputs: return "inputs";
    case Tensor::Filters: return "filters";
    case Tensor::Outputs: return "outputs";
  }
  return "?";
}

// Whether a dimension participates in a tensor's index space. E/F and R/S both
// address inputs through the sliding window p = e*U + r, q = f*V + s.
inline constexpr bool dim_touches(Tensor t, Dim d) {
  switch (t) {
    case Tensor::Inputs:
      return d != Dim::M;
    case Tensor::Filters:
      return d == Dim::M || d == Dim::C || d == Dim::R || d == Dim::S;
    case Tensor::Outputs:
      return d == Dim::N || d == Dim::M || d == Dim::E || d == Dim::F;
  }
  return false;
}

struct Bounds7 {
  std::array<uint64_t, 7> v{1, 1, 1, 1, 1, 1, 1};

  uint64_t& operator[](Dim d) { return v[static_cast<int>(d)]; }
  uint64_t operator[](Dim d) const { return v[static_cast<int>(d)]; }
  bool operator==(const Bounds7&) const = default;

  uint64_t product() const {
    uint64_t p = 1;
    for (uint64_t b : v) p *= b;
    return p;
  }
};

struct Stride2 {
  uint32_t u = 1;  // vertical (rows, pairs E with R)
  uint32_t v = 1;  // horizontal (columns, pairs F with S)
  bool operator==(const Stride2&) const = default;
};

}  // namespace nestor
