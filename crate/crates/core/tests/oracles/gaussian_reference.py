"""Reference values for Gaussian-measure and interval tests."""
from mpmath import mp, mpf, quad, exp, pi, sqrt, erf
from scipy.stats import beta

mp.dps = 30

# gamma_2 of the unit l1 ball by 2D tensor quadrature over |x|+|y| <= 1
phi = lambda t: exp(-t * t / 2) / sqrt(2 * pi)
inner = lambda x: phi(x) * (erf((1 - abs(x)) / sqrt(2)))
print("l1 ball gamma_2 (quadrature):", quad(inner, [-1, 0, 1]))
print("l1 ball gamma_2 (rotation):  ", erf(mpf(1) / 2) ** 2)

# Clopper-Pearson 99% bounds
for k, n in [(5, 100), (0, 100)]:
    lo = beta.ppf(0.005, k, n - k + 1) if k > 0 else 0.0
    hi = beta.ppf(0.995, k + 1, n - k)
    print(f"CP k={k} n={n}: {lo!r} {hi!r}")
