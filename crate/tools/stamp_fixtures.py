#!/usr/bin/env python3
"""Stamp high-precision reference values for the oracle fixtures.

Inputs are exact binary doubles (mpf(float) is exact), evaluated at 50 digits and
written with 32 significant digits.

    python3 tools/stamp_fixtures.py > crates/qspectral/tests/fixtures/oracle.json
"""
import json

import mpmath as mp

mp.mp.dps = 50
DIGITS = 32


def c(re, im=0.0):
    return mp.mpc(mp.mpf(re), mp.mpf(im))


def qpoch(a, q):
    prod = mp.mpc(1)
    qn = mp.mpf(1)
    while abs(a * qn) > mp.mpf(10) ** -60:
        prod *= 1 - a * qn
        qn *= q
    return prod


def phi(numer, denom, q, z):
    total = mp.mpc(1)
    term = mp.mpc(1)
    n = 0
    qn = mp.mpf(1)
    while True:
        r = z / (1 - qn * q)
        for a in numer:
            r *= 1 - a * qn
        for b in denom:
            r /= 1 - b * qn
        term *= r
        total += term
        n += 1
        qn *= q
        if abs(term) < mp.mpf(10) ** -55 * abs(total) and n > 5:
            return total


def qexp(q, z, t):
    """(-t; q^1/2)/(q t^2; q^2) 2phi1(q^1/4 y, q^1/4/y; -q^1/2; q^1/2, -t), |y| <= 1."""
    y = z - mp.sqrt(z * z - 1)
    if abs(y) > 1:
        y = 1 / y
    h = mp.sqrt(q)
    q4 = mp.sqrt(h)
    pre = qpoch(-t, h) / qpoch(q * t * t, q * q)
    return pre * phi([q4 * y, q4 / y], [-h], h, -t)


def s(x):
    return mp.nstr(x, DIGITS, min_fixed=1, max_fixed=0)


def entry(expr, params, value):
    value = mp.mpc(value)
    return {"expr": expr, "params": params, "value_re": s(value.real), "value_im": s(value.imag), "digits": 30}


out = []
for q, a in [(0.5, (0.5, 0.0)), (0.5, (-0.3, 0.4)), (0.9, (0.25, 0.0)), (0.25, (1.7, -0.6)), (0.7, (-2.5, 0.1))]:
    qq = mp.mpf(q)
    out.append(entry("qpoch_infinite", {"q": q, "a": list(a)}, qpoch(c(*a), qq)))
for q, z in [(0.5, (0.3, 0.2)), (0.3, (-1.4, 0.5)), (0.8, (2.0, -0.7)), (0.6, (0.9, 0.0))]:
    qq = mp.mpf(q)
    zz = c(*z)
    out.append(entry("theta", {"q": q, "z": list(z)}, qpoch(zz, qq) * qpoch(qq / zz, qq)))
series_cases = [
    (0.5, [(0.3, 0.2), (0.6, -0.1)], [(-0.5, 0.0)], (0.4, 0.1)),
    (0.25, [(1.3, 0.2), (-0.45, 0.35)], [(0.2, 0.3)], (-0.7, 0.2)),
    (0.8, [(0.5, 0.0), (0.2, 0.0)], [(-0.8, 0.0)], (0.6, 0.0)),
    (0.5, [(0.3, 0.1), (-0.2, 0.4), (0.7, 0.0)], [(0.1, -0.2), (0.45, 0.3)], (0.5, -0.5)),
    (0.4, [(4.0, 0.0), (0.7, 0.2)], [(0.3, 0.0)], (0.95, 0.0)),
]
for q, numer, denom, z in series_cases:
    qq = mp.mpf(q)
    val = phi([c(*a) for a in numer], [c(*b) for b in denom], qq, c(*z))
    out.append(entry("phi_series", {"q": q, "numer": [list(a) for a in numer], "denom": [list(b) for b in denom], "z": list(z)}, val))
for q, z, t in [(0.5, (0.3, 0.0), (0.2, 0.0)), (0.5, (1.7, 0.0), (0.6, 0.0)), (0.3, (0.2, 0.5), (-0.4, 0.3)),
                (0.9, (-0.4, 0.0), (0.05, 0.0)), (0.75, (0.0, 0.8), (0.0, -0.5))]:
    qq = mp.mpf(q)
    out.append(entry("q_exponential", {"q": q, "z": list(z), "t": list(t)}, qexp(qq, c(*z), c(*t))))

print(json.dumps(out, indent=1))
