#include "ddpmlab/kernels.hpp"

#include "ddpmlab/common.hpp"

#include <atomic>

namespace ddpmlab::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const Ops* table_for(Backend b) {
    switch (b) {
        case Backend::scalar: return &scalar_ops();
        case Backend::avx2: return avx2_ops();
        case Backend::avx512: return avx512_ops();
    }
    return nullptr;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::avx512: return "avx512";
    }
    return "?";
}

bool cpu_supports(Backend b) {
#if defined(__x86_64__) || defined(__i386__)
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2:
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
        case Backend::avx512: return __builtin_cpu_supports("avx512f");
    }
    return false;
#else
    return b == Backend::scalar;
#endif
}

Backend detect_best() {
    if (avx512_ops() && cpu_supports(Backend::avx512)) return Backend::avx512;
    if (avx2_ops() && cpu_supports(Backend::avx2)) return Backend::avx2;
    return Backend::scalar;
}

const Ops& active() {
    const Ops* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        Backend b = detect_best();
        t = table_for(b);
        g_backend.store(b, std::memory_order_relaxed);
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

Backend active_backend() {
    active();
    return g_backend.load(std::memory_order_relaxed);
}

void force_backend(Backend b) {
    const Ops* t = table_for(b);
    if (!t)
        throw ConfigError(std::string("kernel backend not compiled in: ") + backend_name(b));
    if (!cpu_supports(b))
        throw ConfigError(std::string("kernel backend not supported by this CPU: ") +
                          backend_name(b));
    g_backend.store(b, std::memory_order_relaxed);
    g_active.store(t, std::memory_order_release);
}

Backend parse_backend(const std::string& name) {
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    if (name == "avx512") return Backend::avx512;
    if (name == "auto") return detect_best();
    throw ConfigError("unknown kernel backend: " + name +
                      " (expected scalar|avx2|avx512|auto)");
}

}  // namespace ddpmlab::kernels
