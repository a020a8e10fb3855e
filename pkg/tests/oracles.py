"""Independent numeric oracles used by the tests.

These are built from textbook representations, not from the library's own
code paths, so they can certify library output:

* product_normal_cdf: the law of a product of two independent standard
  normals, via its Bessel-K density.
* constant_kernel_q_cdf: the exact law of the order-2 constant kernel's
  sum under Gaussian inputs, via the spectral decomposition of the
  quadratic form (one positive eigenvalue, N-1 equal negative ones).
"""

import math

import numpy as np
from scipy import integrate, special


def product_normal_cdf(z: float) -> float:
    """P(G1 * G2 <= z); density is K_0(|t|)/pi (integrable log singularity)."""
    if z == 0.0:
        return 0.5
    lo, hi = sorted((0.0, z))
    val, _ = integrate.quad(lambda t: special.k0(abs(t)) / math.pi, lo, hi, points=[0.0], limit=200)
    return 0.5 + math.copysign(val, z)


def ks_product_normal_vs_standard_normal(grid_size: int = 4001) -> float:
    """sup_z |P(G1 G2 <= z) - Phi(z)| on a dense grid."""
    grid = np.linspace(-6.0, 6.0, grid_size)
    diffs = [abs(product_normal_cdf(z) - special.ndtr(z)) for z in grid]
    return float(max(diffs))


def constant_kernel_q_cdf(x: float, N: int) -> float:
    """P(Q <= x) for Q = c * sum_{i != j} G_i G_j, c = 1/sqrt(N(N-1)).

    The coefficient matrix c(J - I) has eigenvalues c(N-1) (once) and -c
    (N-1 times), so Q = c(N-1) Z^2 - c W with independent Z ~ N(0,1) and
    W ~ chi-square(N-1):

        P(Q <= x) = E_W[ P(chi2_1 <= (x + c W) / (c (N-1))) ].
    """
    c = 1.0 / math.sqrt(N * (N - 1))
    k = N - 1

    def inner(w):
        t = (x + c * w) / (c * (N - 1))
        t = np.maximum(t, 0.0)
        return special.gammainc(0.5, t / 2.0) * _chi2_pdf(w, k)

    center = k
    spread = 14.0 * math.sqrt(2.0 * k)
    lo = max(0.0, center - spread)
    hi = center + spread
    val, _ = integrate.quad(inner, lo, hi, limit=300)
    return float(val)


def _chi2_pdf(w, k):
    w = np.asarray(w, dtype=np.float64)
    half = k / 2.0
    return np.where(
        w > 0,
        np.exp((half - 1.0) * np.log(np.maximum(w, 1e-300)) - w / 2.0
               - half * math.log(2.0) - math.lgamma(half)),
        0.0,
    )


def ks_constant_kernel_vs_centered_chi2(N: int, grid_size: int = 1200) -> float:
    """sup_x |P(Q_CONST2(N) <= x) - P(chi2_1 - 1 <= x)|, concentrated grid
    near the left endpoint where the target density is singular."""
    left = np.linspace(-1.0 - 0.5, -1.0 + 1.5, grid_size // 2)
    right = np.linspace(0.5, 12.0, grid_size // 2)
    grid = np.concatenate([left, right])
    best = 0.0
    for x in grid:
        target = special.gammainc(0.5, max(x + 1.0, 0.0) / 2.0)
        best = max(best, abs(constant_kernel_q_cdf(float(x), N) - target))
    return best
