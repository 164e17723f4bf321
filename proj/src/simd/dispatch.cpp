#include "beem/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace beem::simd {
namespace {

const KernelTable* detect() {
    if (const char* env = std::getenv("BEEM_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
        return &scalar_kernels();
    }
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

bool select_isa(Isa isa) {
    const KernelTable* t = isa == Isa::Scalar ? &scalar_kernels() : avx2_kernels();
    if (t == nullptr) return false;
    active().store(t, std::memory_order_release);
    return true;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace beem::simd
