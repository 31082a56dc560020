#include "rollcast/kernels.hpp"

namespace rollcast::kernels {

namespace {

const Ops kScalar{&scalar::axpy, &scalar::dot, &scalar::scale, "scalar"};

#if defined(__x86_64__) || defined(_M_X64)
const Ops kAvx2{&avx2::axpy, &avx2::dot, &avx2::scale, "avx2"};
#endif

const Ops& detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return kAvx2;
    }
#endif
    return kScalar;
}

} // namespace

const Ops& active() {
    static const Ops& ops = detect();
    return ops;
}

const Ops& reference() { return kScalar; }

} // namespace rollcast::kernels
