"""Solver-independent oracles shared by unit and acceptance tests."""

import numpy as np


def brute_force_equilibria(rho_e, rho_n, k1=2.0, k2=2.0, resolution=600,
                           box=(0.0, 1.5)):
    """Sign-change grid scan of the two equilibrium residuals.

    Candidate cells (where both residuals straddle zero across the corners)
    are resolved by intersecting the bilinear interpolants of the residuals
    in closed form, which pins the crossing to O(cell size squared) without
    using the production Newton solver.
    """

    def residuals(e, n):
        return e * (1.0 - e - k1 * n) + rho_e, n * (1.0 - n - k2 * e) + rho_n

    lo, hi = box
    grid = np.linspace(lo, hi, resolution + 1)
    h = grid[1] - grid[0]
    ee, nn = np.meshgrid(grid, grid, indexing="ij")
    f1, f2 = residuals(ee, nn)

    def corner_straddle(f):
        corners = [f[:-1, :-1], f[1:, :-1], f[:-1, 1:], f[1:, 1:]]
        return ((np.minimum.reduce(corners) <= 0)
                & (np.maximum.reduce(corners) >= 0))

    def bilinear_coeffs(f, i, j):
        # f(s, t) = a + b s + c t + d s t on the unit cell
        a = f[i, j]
        b = f[i + 1, j] - f[i, j]
        c = f[i, j + 1] - f[i, j]
        d = f[i + 1, j + 1] - f[i + 1, j] - f[i, j + 1] + f[i, j]
        return a, b, c, d

    roots = []
    for i, j in np.argwhere(corner_straddle(f1) & corner_straddle(f2)):
        a1, b1, c1, d1 = bilinear_coeffs(f1, i, j)
        a2, b2, c2, d2 = bilinear_coeffs(f2, i, j)
        # eliminate s from f1 = 0 and substitute into f2 = 0
        qa = c2 * d1 - d2 * c1
        qb = a2 * d1 + c2 * b1 - b2 * c1 - d2 * a1
        qc = a2 * b1 - b2 * a1
        if abs(qa) < 1e-300:
            ts = [-qc / qb] if qb != 0 else []
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc < 0:
                continue
            sq = np.sqrt(disc)
            ts = [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
        for t in ts:
            if not -1e-9 <= t <= 1.0 + 1e-9:
                continue
            denom = b1 + d1 * t
            if denom == 0.0:
                continue
            s = -(a1 + c1 * t) / denom
            if not -1e-9 <= s <= 1.0 + 1e-9:
                continue
            e = grid[i] + s * h
            n = grid[j] + t * h
            if max(e, n) < 1e-6:
                continue
            if any(abs(e - r[0]) < 1e-3 and abs(n - r[1]) < 1e-3 for r in roots):
                continue
            roots.append((float(e), float(n)))
    return roots
