"""Regenerate the Chebyshev coefficients used by ``hetclust.stats_primitives``.

erfc(z) = t * exp(-z**2 + f(y)) for z >= 0, t = 2 / (2 + z), y = 2t - 1.
f is smooth on [-1, 1] (including the z -> inf end), so a short Chebyshev
series reaches double precision.  Needs mpmath; not a runtime dependency.
"""
import mpmath as mp

mp.mp.dps = 50
N = 64
KEEP = 32


def f(y):
    t = (y + 1) / 2
    if t == 0:
        # limit z -> inf: erfc(z) ~ exp(-z^2) / (z sqrt(pi)), z t -> 2
        return -mp.log(2 * mp.sqrt(mp.pi))
    z = 2 / t - 2
    return z * z + mp.log(mp.erfc(z) / t)


def main():
    nodes = [mp.cos(mp.pi * (k + mp.mpf(1) / 2) / N) for k in range(N)]
    vals = [f(y) for y in nodes]
    coeffs = []
    for j in range(N):
        s = mp.fsum(vals[k] * mp.cos(mp.pi * j * (k + mp.mpf(1) / 2) / N) for k in range(N))
        coeffs.append(2 * s / N)
    for j, c in enumerate(coeffs[:KEEP]):
        print(f"    {float(c)!r},  # {j}")
    print("max dropped:", max(abs(c) for c in coeffs[KEEP:]))


if __name__ == "__main__":
    main()
