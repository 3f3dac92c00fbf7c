#pragma once

// Residue-kernel derivatives evaluated independently in 50-digit arithmetic:
// central finite differences and Cauchy contour integrals.

#include "chiralqed/core_model.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <complex>

namespace oracle {

using chiralqed::cplx;
using mp_real = boost::multiprecision::cpp_bin_float_50;
using mp_cplx = boost::multiprecision::cpp_complex_50;

inline mp_cplx to_mp(cplx z) { return mp_cplx(mp_real(z.real()), mp_real(z.imag())); }
inline cplx to_double(const mp_cplx& z) {
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// exp(i z t) (z - pole)^(-m) in 50-digit arithmetic
inline mp_cplx kernel_mp(const mp_cplx& z, double t, const mp_cplx& pole, int m) {
    const mp_cplx i_unit(mp_real(0), mp_real(1));
    return exp(i_unit * z * mp_real(t)) / pow(z - pole, m);
}

/// Central difference of order n with step h along the real axis.
inline cplx finite_difference_derivative(int n, double t, cplx z, cplx pole, int m, double h) {
    const mp_cplx zz = to_mp(z), pp = to_mp(pole);
    mp_cplx acc(0);
    mp_real binom(1);
    for (int k = 0; k <= n; ++k) {
        const mp_real shift = (mp_real(n) / 2 - k) * mp_real(h);
        const mp_cplx val = kernel_mp(zz + mp_cplx(shift, mp_real(0)), t, pp, m);
        acc += ((k % 2) ? -binom : binom) * val;
        binom = binom * (n - k) / (k + 1);
    }
    return to_double(acc / pow(mp_real(h), n));
}

/// n!/(2 pi i) contour integral on a circle of radius r around z (trapezoidal rule).
inline cplx cauchy_derivative(int n, double t, cplx z, cplx pole, int m, int samples = 512) {
    const mp_cplx zz = to_mp(z), pp = to_mp(pole);
    const mp_real r = mp_real(std::abs(z - pole)) / 3;
    const mp_real two_pi = 2 * boost::math::constants::pi<mp_real>();
    mp_cplx acc(0);
    for (int k = 0; k < samples; ++k) {
        const mp_real theta = two_pi * k / samples;
        const mp_cplx unit(cos(theta), sin(theta));
        const mp_cplx val = kernel_mp(zz + r * unit, t, pp, m);
        acc += val * pow(conj(unit), n);
    }
    mp_real fact(1);
    for (int k = 2; k <= n; ++k) fact *= k;
    return to_double(acc * fact / (pow(r, n) * samples));
}

}  // namespace oracle
