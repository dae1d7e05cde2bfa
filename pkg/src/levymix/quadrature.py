"""Adaptive quadrature helpers.

Thin wrappers around Gauss-Kronrod adaptive panels (scipy's QUADPACK) with a
uniform absolute tolerance, plus composite Gauss-Legendre node builders for
the vectorized density integrations.  Semi-infinite jump-measure integrals go
through the substitution s = exp(u) so that integrable s**-1 style endpoint
singularities at the origin become smooth integrands in u.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

DEFAULT_TOL = 1e-10

# QUADPACK subdivision limit; generous because some integrands oscillate.
_LIMIT = 200


def integrate_interval(f, lo, hi, *, tol=DEFAULT_TOL, points=None):
    """Integrate f over [lo, hi] to absolute tolerance tol.

    Returns (value, abs_error_estimate).  Raises QuadratureFailure when the
    error estimate is far outside the requested tolerance.
    """
    kwargs = {"epsabs": tol, "epsrel": 1e-9, "limit": _LIMIT}
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        pts = [p for p in points if lo < p < hi]
        if pts:
            kwargs["points"] = pts
    value, err = integrate.quad(f, lo, hi, **kwargs)
    if err > max(tol * 100.0, abs(value) * 1e-6):
        raise QuadratureFailure(
            f"integral on [{lo}, {hi}] reached error {err:.3e} > tol {tol:.3e}"
        )
    return value, err


def integrate_complex(f, lo, hi, *, tol=DEFAULT_TOL, points=None):
    """Complex-valued version of integrate_interval (two real passes)."""
    re, re_err = integrate_interval(lambda x: f(x).real, lo, hi, tol=tol, points=points)
    im, im_err = integrate_interval(lambda x: f(x).imag, lo, hi, tol=tol, points=points)
    return complex(re, im), re_err + im_err


@lru_cache(maxsize=32)
def _leggauss(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def panel_nodes(edges, order=16):
    """Composite Gauss-Legendre nodes/weights over consecutive [e_i, e_{i+1}]."""
    edges = np.asarray(edges, dtype=float)
    base_x, base_w = _leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return x, w


def log_panel_edges(lo, hi, max_width=1.0):
    """Edges in u = log s covering [log lo, log hi] with bounded panel width."""
    ulo, uhi = math.log(lo), math.log(hi)
    n = max(1, int(math.ceil((uhi - ulo) / max_width)))
    return np.linspace(ulo, uhi, n + 1)


def integrate_tabulated(f, xs, dens):
    """Integrate f(x) against a piecewise-linear tabulated density.

    The density is exact (it *is* the measure), so the refinement halves the
    cells, interpolates the density linearly and re-evaluates f at midpoints;
    the coarse/fine difference estimates how well the grid resolves f.
    Returns (value, abs_error_estimate).
    """
    xs = np.asarray(xs, dtype=float)
    dens = np.asarray(dens, dtype=float)
    fx = np.asarray(f(xs))
    coarse = np.trapezoid(fx * dens, xs)
    xm = 0.5 * (xs[:-1] + xs[1:])
    dm = 0.5 * (dens[:-1] + dens[1:])
    x_fine = np.empty(xs.size + xm.size)
    x_fine[0::2], x_fine[1::2] = xs, xm
    y_fine = np.empty(x_fine.size, dtype=fx.dtype)
    y_fine[0::2], y_fine[1::2] = fx * dens, np.asarray(f(xm)) * dm
    fine = np.trapezoid(y_fine, x_fine)
    return fine, abs(fine - coarse) / 3.0 + 1e-15 * abs(fine)
