"""Extended-precision reference for the parameter set at n = 10^6, C = 2, c0 = 1.

Default constants: c_decay = ln2/8, C2 = max(4, 16/c_decay), C3 = C_EK = 1, C0 = 1.
Prints the values frozen in crates/core/src/params.rs tests.
"""
from mpmath import mp, mpf, log, ceil, floor, sqrt

mp.dps = 60

n = mpf(10) ** 6
C = 2
c0 = mpf(1)
c_decay = log(2) / 8
C2 = max(mpf(4), 16 / c_decay)
C3 = mpf(1)
C0 = mpf(1)

rho = c0 * n ** (mpf(4) / 7) * log(n) ** (-C)
lam = log(n * rho)
s_tilde = ceil(n ** (mpf(6) / 7) * lam ** (mpf(2) / 7))
r = ceil(C2 * s_tilde * lam)
s = floor(s_tilde ** 2 / (C3 * n * lam))
L = C0 * sqrt(n / s * lam)
eps = 1 / (rho * n ** 2)

for name, v in [("rho", rho), ("lambda", lam), ("s_tilde", s_tilde), ("r", r),
                ("s", s), ("L", L), ("epsilon", eps)]:
    print(f"{name} = {mp.nstr(v, 20)}")
