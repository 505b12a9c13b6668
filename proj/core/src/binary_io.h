// Copyright 2026 The robner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitives shared by the binary artifact formats.

#ifndef ROBNER_SRC_BINARY_IO_H_
#define ROBNER_SRC_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "robner/error.h"

namespace robner::binio {

template <typename U>
inline void PutUint(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
inline U GetUint(std::istream& in) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) {
    throw DataError("binary file truncated");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline void PutU32(std::ostream& out, std::uint32_t v) { PutUint(out, v); }
inline void PutU64(std::ostream& out, std::uint64_t v) { PutUint(out, v); }
inline std::uint32_t GetU32(std::istream& in) { return GetUint<std::uint32_t>(in); }
inline std::uint64_t GetU64(std::istream& in) { return GetUint<std::uint64_t>(in); }

inline void PutF32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  PutU32(out, bits);
}

inline void PutF64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  PutU64(out, bits);
}

inline float GetF32(std::istream& in) {
  const std::uint32_t bits = GetU32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline double GetF64(std::istream& in) {
  const std::uint64_t bits = GetU64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

// Reads exactly four bytes and compares them with `magic`.
inline bool ReadMagic(std::istream& in, const char* magic) {
  char buf[4];
  return static_cast<bool>(in.read(buf, 4)) && std::memcmp(buf, magic, 4) == 0;
}

}  // namespace robner::binio

#endif  // ROBNER_SRC_BINARY_IO_H_
