"""Derivative-free minimization for the low-dimensional fits.

A plain Nelder-Mead simplex: reflection 1, expansion 2, contraction 1/2,
shrink 1/2.  The parameter spaces here are one or two dimensional and the
objectives are smooth away from their -inf plateaus (infinite objective
values just lose every comparison), so nothing fancier is warranted.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["nelder_mead"]


def nelder_mead(f, x0, *, diameter_tol: float = 1e-8,
                initial_step: float = 0.5, max_iter: int = 20_000):
    """Minimize f from x0; stops when the simplex diameter falls below
    diameter_tol.  Returns (x_best, f_best).

    f may return +inf (treated as worse than any finite value); it must
    never return NaN.  max_iter guards against cycling and raises rather
    than returning silently unconverged.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise ValueError("x0 must be a non-empty 1-D vector")
    n = x0.size

    verts = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += initial_step
        verts.append(v)
    vals = []
    for v in verts:
        fv = float(f(v))
        if math.isnan(fv):
            raise ValueError(f"objective returned NaN at {v}")
        vals.append(fv)

    def sort_simplex():
        order = np.argsort(vals, kind="stable")
        return [verts[i] for i in order], [vals[i] for i in order]

    verts, vals = sort_simplex()

    def feval(x):
        fx = float(f(x))
        if math.isnan(fx):
            raise ValueError(f"objective returned NaN at {x}")
        return fx

    for _ in range(max_iter):
        diameter = max(float(np.max(np.abs(v - verts[0]))) for v in verts[1:])
        if diameter < diameter_tol:
            return verts[0], vals[0]

        centroid = np.mean(verts[:-1], axis=0)
        worst = verts[-1]
        reflected = centroid + (centroid - worst)
        f_r = feval(reflected)

        if f_r < vals[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = feval(expanded)
            if f_e < f_r:
                verts[-1], vals[-1] = expanded, f_e
            else:
                verts[-1], vals[-1] = reflected, f_r
        elif f_r < vals[-2]:
            verts[-1], vals[-1] = reflected, f_r
        else:
            if f_r < vals[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
                f_c = feval(contracted)
                accept = f_c <= f_r
            else:
                contracted = centroid + 0.5 * (worst - centroid)
                f_c = feval(contracted)
                accept = f_c < vals[-1]
            if accept:
                verts[-1], vals[-1] = contracted, f_c
            else:
                best = verts[0]
                for i in range(1, n + 1):
                    verts[i] = best + 0.5 * (verts[i] - best)
                    vals[i] = feval(verts[i])
        verts, vals = sort_simplex()

    raise RuntimeError(
        f"simplex failed to shrink below {diameter_tol} in {max_iter} "
        f"iterations (best value {vals[0]})"
    )
