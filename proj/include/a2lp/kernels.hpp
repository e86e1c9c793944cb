// Copyright 2026 The a2lp Authors
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

#ifndef A2LP_KERNELS_HPP_
#define A2LP_KERNELS_HPP_

// Vector kernels used by every hot loop in the engine (similarity pass,
// Cholesky factor and solves, gradient accumulation).
//
// Each kernel has a scalar reference implementation and SIMD variants
// (AVX2+FMA on x86-64, NEON on AArch64). The variant is picked once at
// runtime from CPU features; A2LP_ISA=scalar|avx2|neon in the environment
// or force_isa() overrides the choice. Variants agree to rounding only:
// they accumulate in a different order.

#include <cstddef>
#include <span>
#include <string_view>

namespace a2lp::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

// True when this binary contains the variant and the CPU can run it.
bool is_supported(Isa isa);

// The variant currently used by the dispatching entry points below.
Isa active_isa();

// Switches the dispatch target. Throws a2lp::Error when unsupported.
// Not thread-safe with respect to concurrent kernel calls.
void force_isa(Isa isa);

// sum_i x[i] * y[i]
double dot(std::span<const double> x, std::span<const double> y);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// sum_i x[i]^2
double squared_norm(std::span<const double> x);

// Per-ISA entry points, exposed for equivalence testing.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
}  // namespace avx2

namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
}  // namespace neon

}  // namespace a2lp::kernels

#endif  // A2LP_KERNELS_HPP_
