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

#include <cassert>
#include <cstdlib>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/kernels.hpp"

namespace a2lp::kernels {
namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
};

constexpr Table kScalarTable{Isa::kScalar, &scalar::dot, &scalar::axpy, &scalar::squared_norm};
#if defined(A2LP_HAVE_AVX2)
constexpr Table kAvx2Table{Isa::kAvx2, &avx2::dot, &avx2::axpy, &avx2::squared_norm};
#endif
#if defined(A2LP_HAVE_NEON)
constexpr Table kNeonTable{Isa::kNeon, &neon::dot, &neon::axpy, &neon::squared_norm};
#endif

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &kScalarTable;
    case Isa::kAvx2:
#if defined(A2LP_HAVE_AVX2)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::kNeon:
#if defined(A2LP_HAVE_NEON)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(A2LP_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(A2LP_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

Isa parse_isa(std::string_view name, Isa fallback) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "neon") return Isa::kNeon;
  return fallback;
}

const Table* select_default() {
  Isa best = Isa::kScalar;
  if (cpu_has(Isa::kAvx2)) best = Isa::kAvx2;
  if (cpu_has(Isa::kNeon)) best = Isa::kNeon;
  if (const char* env = std::getenv("A2LP_ISA")) {
    const Isa requested = parse_isa(env, best);
    if (is_supported(requested)) best = requested;
  }
  return table_for(best);
}

const Table*& active() {
  static const Table* table = select_default();
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

bool is_supported(Isa isa) { return table_for(isa) != nullptr && cpu_has(isa); }

Isa active_isa() { return active()->isa; }

void force_isa(Isa isa) {
  if (!is_supported(isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel variant not supported on this CPU: " + std::string(to_string(isa)));
  }
  active() = table_for(isa);
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active()->dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active()->axpy(a, x.data(), y.data(), x.size());
}

double squared_norm(std::span<const double> x) {
  return active()->squared_norm(x.data(), x.size());
}

}  // namespace a2lp::kernels
