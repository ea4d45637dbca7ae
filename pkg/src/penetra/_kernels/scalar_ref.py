"""Portable scalar transcendentals, the normative definitions.

libm's exp/tanh differ across platforms and languages in the last ulp, which
would break the bit-exact f32 parity contract between the builtin toy
segmenter and the external reference server.  These versions use only
exactly-rounded IEEE-754 double operations (+, -, *, /, floor, ldexp), so
any faithful reimplementation (numba, numpy, TypeScript) reproduces them
bit for bit.

Algorithm: Cody-Waite range reduction x = k*ln2 + r with |r| <= ln2/2,
e^r by a degree-13 Taylor polynomial (truncation ~4e-18), then scale by
2^k.  Accuracy is a few ulp, plenty for a C-infinity test oracle.
"""

import math

EXP_HI = 709.0
EXP_LO = -745.0
INV_LN2 = 1.4426950408889634
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10

# 1/j! for j = 0..13, Horner order.
EXP_COEFFS = (
    1.0,
    1.0,
    0.5,
    1.6666666666666666e-01,
    4.1666666666666664e-02,
    8.3333333333333332e-03,
    1.3888888888888889e-03,
    1.9841269841269841e-04,
    2.4801587301587302e-05,
    2.7557319223985893e-06,
    2.7557319223985888e-07,
    2.5052108385441720e-08,
    2.0876756987868100e-09,
    1.6059043836821613e-10,
)

TANH_SAT = 20.0


def portable_exp(x: float) -> float:
    if x > EXP_HI:
        return math.inf
    if x < EXP_LO:
        return 0.0
    k = math.floor(x * INV_LN2 + 0.5)
    r = (x - k * LN2_HI) - k * LN2_LO
    p = EXP_COEFFS[13]
    for j in range(12, -1, -1):
        p = EXP_COEFFS[j] + r * p
    return math.ldexp(p, int(k))


def portable_tanh(x: float) -> float:
    a = -x if x < 0.0 else x
    if a > TANH_SAT:
        t = 1.0
    else:
        e = portable_exp(-2.0 * a)
        t = (1.0 - e) / (1.0 + e)
    return -t if x < 0.0 else t


def portable_sigmoid(x: float) -> float:
    if x >= 0.0:
        e = portable_exp(-x)
        return 1.0 / (1.0 + e)
    e = portable_exp(x)
    return e / (1.0 + e)
