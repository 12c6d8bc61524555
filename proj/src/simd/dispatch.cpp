#include "nowcast/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace nowcast::simd {

#if defined(NOWCAST_HAVE_AVX2)
namespace detail {
const KernelTable& avx2_table();
}
#endif

namespace {

bool cpu_has_avx2()
{
#if defined(NOWCAST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* select_default()
{
    const char* env = std::getenv("NOWCAST_SIMD");
    const std::string_view pin = env ? env : "";
    if (pin == "scalar") return &scalar_kernels();
    if (const auto* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active()
{
    static std::atomic<const KernelTable*> table{select_default()};
    return table;
}

} // namespace

const KernelTable* avx2_kernels()
{
#if defined(NOWCAST_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &detail::avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void force_isa(Isa isa)
{
    const KernelTable* t = &scalar_kernels();
    if (isa == Isa::avx2)
        if (const auto* a = avx2_kernels()) t = a;
    active().store(t, std::memory_order_release);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

} // namespace nowcast::simd
