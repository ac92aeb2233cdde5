// Copyright 2026 The melodyclf Authors.
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

#ifndef MELODY_NN_FLOAT_ENV_HPP_
#define MELODY_NN_FLOAT_ENV_HPP_

#if defined(__SSE__) || defined(__x86_64__)
#include <xmmintrin.h>
#define MELODY_HAVE_MXCSR 1
#endif

namespace melody::nn {

// Scoped flush-to-zero / denormals-are-zero. Gradients that decay through
// long sequences otherwise reach the subnormal range, where x86 arithmetic
// runs several times slower. No-op on targets without MXCSR.
class FlushDenormals {
 public:
  FlushDenormals() {
#ifdef MELODY_HAVE_MXCSR
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | kFtz | kDaz);
#endif
  }
  ~FlushDenormals() {
#ifdef MELODY_HAVE_MXCSR
    _mm_setcsr(saved_);
#endif
  }
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;

 private:
  static constexpr unsigned kFtz = 0x8000;
  static constexpr unsigned kDaz = 0x0040;
  unsigned saved_ = 0;
};

}  // namespace melody::nn

#endif  // MELODY_NN_FLOAT_ENV_HPP_
