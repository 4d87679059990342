#pragma once

// Branch-free sine/cosine that the compiler can pack across loop lanes.
//
// Argument reduction is Cody-Waite against pi/2 split into three 33-bit
// parts (exact products for |n| < 2^20), followed by the fdlibm minimax
// polynomials on [-pi/4, pi/4]. Absolute error stays within a few ulp for
// |x| < 1e5; quadrant selection is bitwise, not branches.

#include <bit>
#include <cstdint>

namespace pflow::simd {

inline constexpr double kTwoOverPi = 6.36619772367581382433e-01;
inline constexpr double kPio2Hi = 1.57079632673412561417e+00;
inline constexpr double kPio2Mid = 6.07710050630396597660e-11;
inline constexpr double kPio2Lo = 2.02226624871116645580e-21;
inline constexpr double kRoundShift = 6755399441055744.0;   // 1.5 * 2^52

#if defined(__GNUC__)
#define PFLOW_ALWAYS_INLINE inline __attribute__((always_inline))
#else
#define PFLOW_ALWAYS_INLINE inline
#endif

PFLOW_ALWAYS_INLINE void sincos(double x, double& s_out, double& c_out) {
    // Adding 1.5 * 2^52 rounds to the nearest integer and leaves n mod 4 in
    // the low mantissa bits.
    const double t = x * kTwoOverPi + kRoundShift;
    const double n = t - kRoundShift;
    const std::uint64_t q = std::bit_cast<std::uint64_t>(t);
    const double r = ((x - n * kPio2Hi) - n * kPio2Mid) - n * kPio2Lo;
    const double z = r * r;

    const double sp = -1.66666666666666324348e-01 +
                      z * (8.33333333332248946124e-03 +
                           z * (-1.98412698298579493134e-04 +
                                z * (2.75573137070700676789e-06 +
                                     z * (-2.50507602534068634195e-08 + z * 1.58969099521155010221e-10))));
    const double s = r + r * z * sp;

    const double cp = 4.16666666666666019037e-02 +
                      z * (-1.38888888888741095749e-03 +
                           z * (2.48015872894767294178e-05 +
                                z * (-2.75573143513906633035e-07 +
                                     z * (2.08757232129817482790e-09 + z * -1.13596475577881948265e-11))));
    const double hz = 0.5 * z;
    const double w = 1.0 - hz;
    const double c = w + (((1.0 - w) - hz) + z * z * cp);

    // Odd quadrants swap sin and cos; quadrants 2, 3 negate sin, 1, 2 negate cos.
    const std::uint64_t sb = std::bit_cast<std::uint64_t>(s);
    const std::uint64_t cb = std::bit_cast<std::uint64_t>(c);
    const std::uint64_t swap = 0 - (q & 1);
    const std::uint64_t sin_bits = (cb & swap) | (sb & ~swap);
    const std::uint64_t cos_bits = (sb & swap) | (cb & ~swap);
    s_out = std::bit_cast<double>(sin_bits ^ ((q & 2) << 62));
    c_out = std::bit_cast<double>(cos_bits ^ (((q + 1) & 2) << 62));
}

}  // namespace pflow::simd
