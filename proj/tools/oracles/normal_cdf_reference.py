#!/usr/bin/env python3
"""Reference values of the standard normal cdf by high-precision quadrature.

Phi(x) = 1/2 + integral_0^x phi(u) du, evaluated with mpmath at 50 digits.
Writes a C++ table consumed by tests/test_normal.cpp.
"""
import sys

import mpmath as mp

mp.mp.dps = 50
POINTS = [-8, -6, -4.5, -3, -2.5, -2, -1.5, -1, -0.5, -0.1,
          0, 0.1, 0.5, 1, 1.5, 2, 2.5, 3, 4.5, 6]


def phi_cdf(x):
    x = mp.mpf(x)
    dens = lambda u: mp.exp(-u * u / 2) / mp.sqrt(2 * mp.pi)
    if x < 0:
        return mp.quad(dens, [-mp.inf, x])
    return mp.mpf(1) / 2 + mp.quad(dens, [0, x])


def main(out):
    out.write("// Generated by tools/oracles/normal_cdf_reference.py; do not edit.\n")
    out.write("#pragma once\n\nnamespace hwq_test {\n\n")
    out.write("struct PhiRef {\n  double x;\n  double cdf;\n};\n\n")
    out.write("inline constexpr PhiRef kPhiReference[] = {\n")
    for x in POINTS:
        out.write("    {%r, %s},\n" % (float(x), mp.nstr(phi_cdf(x), 25)))
    out.write("};\n\n}  // namespace hwq_test\n")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as f:
            main(f)
    else:
        main(sys.stdout)
