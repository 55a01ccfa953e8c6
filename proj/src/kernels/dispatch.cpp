#include <atomic>
#include <cstdlib>
#include <string>

#include "fewsim/kernels/kernels.hpp"

namespace fewsim::kernels {

#ifndef FEWSIM_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

Backend detect() {
    if (const char* env = std::getenv("FEWSIM_SIMD")) {
        std::string want(env);
        if (want == "scalar") return Backend::scalar;
        if (want == "avx2" && cpu_supports(Backend::avx2)) return Backend::avx2;
    }
    return cpu_supports(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> backend{detect()};
    return backend;
}

}  // namespace

std::string_view to_string(Backend backend) {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool cpu_supports(Backend backend) {
    if (backend == Backend::scalar) return true;
#if defined(FEWSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

Backend set_backend(Backend backend) {
    if (!cpu_supports(backend)) backend = Backend::scalar;
    current().store(backend, std::memory_order_relaxed);
    return backend;
}

const KernelTable& active() {
    if (active_backend() == Backend::avx2) return *avx2_table();
    return scalar_table();
}

}  // namespace fewsim::kernels
