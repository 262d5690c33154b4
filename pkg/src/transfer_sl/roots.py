"""Vectorised real-root location for oscillatory characteristic functions.

The scan variable is t with lam = t|t|, stepped uniformly so that zeros spaced
like ((n + c) pi / (2S))^2 get a fixed number of samples per gap. Sign changes
give brackets; local minima of |f| without a sign change are probed by a
golden-section search for a hidden pair of close roots. Brackets are closed
with Illinois regula falsi and finished with one Newton step.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .asymptotics import expected_zero_count
from .errors import ConvergenceError, MissedRootError, SimplicityViolatedError

log = logging.getLogger(__name__)

POINTS_PER_GAP = 8
ZERO_SNAP = 1e-8
_GOLD = (math.sqrt(5) - 1) / 2


def _lam_of_t(t):
    return t * np.abs(t)


def _t_of_lam(lam):
    return math.copysign(math.sqrt(abs(lam)), lam)


def golden_minimise(f, a, b, iters=48):
    """Vectorised golden-section minimisation of f on [a_i, b_i]."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - _GOLD * (b - a), d)
        d_new = np.where(left, c, a + _GOLD * (b - a))
        fresh = np.where(left, c_new, d_new)
        ff = f(fresh)
        fc, fd = np.where(left, ff, fd), np.where(left, fc, ff)
        c, d = c_new, d_new
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def illinois(f, lo, hi, flo, fhi, rtol=4e-16, max_iter=100):
    """Vectorised Illinois regula falsi on sign-change brackets [lo, hi]."""
    lo, hi = np.array(lo, float), np.array(hi, float)
    flo, fhi = np.array(flo, float), np.array(fhi, float)
    last = np.zeros(lo.shape, dtype=int)  # -1: lo moved last, +1: hi moved last
    x = 0.5 * (lo + hi)
    active = np.ones(lo.shape, dtype=bool)
    for it in range(max_iter):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        a, b, fa, fb = lo[idx], hi[idx], flo[idx], fhi[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = b - fb * (b - a) / (fb - fa)
        bad = ~np.isfinite(c) | (c <= a) | (c >= b)
        if it % 4 == 3:  # periodic bisection guards against stagnation
            bad[:] = True
        c = np.where(bad, 0.5 * (a + b), c)
        fc = f(c)
        x[idx] = c
        same_lo = np.sign(fc) == np.sign(fa)
        exact = fc == 0
        # move lo
        move_lo = same_lo & ~exact
        lo[idx[move_lo]] = c[move_lo]
        flo[idx[move_lo]] = fc[move_lo]
        scale_hi = move_lo & (last[idx] == -1)
        fhi[idx[scale_hi]] *= 0.5
        # move hi
        move_hi = ~same_lo & ~exact
        hi[idx[move_hi]] = c[move_hi]
        fhi[idx[move_hi]] = fc[move_hi]
        scale_lo = move_hi & (last[idx] == 1)
        flo[idx[scale_lo]] *= 0.5
        last[idx] = np.where(move_lo, -1, 1)
        width = hi[idx] - lo[idx]
        done = exact | (width <= rtol * np.maximum(1.0, np.abs(c)))
        active[idx[done]] = False
    if np.any(active):
        raise ConvergenceError("root refinement did not converge")
    return x


def newton_polish(f, x, lo=None, hi=None):
    """One Newton step with a central-difference derivative, kept inside [lo, hi]."""
    d = 1e-6 * np.maximum(1.0, np.abs(x))
    vals = f(np.concatenate([x, x + d, x - d]))
    n = x.size
    fx, fp, fm = vals[:n], vals[n : 2 * n], vals[2 * n :]
    deriv = (fp - fm) / (2 * d)
    with np.errstate(invalid="ignore", divide="ignore"):
        step = np.where(deriv != 0, fx / deriv, 0.0)
    xn = x - step
    if lo is not None:
        ok = (xn >= lo) & (xn <= hi) & np.isfinite(xn)
        xn = np.where(ok, xn, x)
    return xn, deriv


def find_zeros(f, S, n_max, lam_lo, points_per_gap=POINTS_PER_GAP, double_tol=1e-12):
    """First ``n_max`` real zeros of the vectorised real function ``f`` above ``lam_lo``.

    ``lam_lo`` must lie below every zero. Returns ``(zeros, derivatives)``.
    """
    dt = math.pi / (2 * S) / points_per_gap
    t0 = _t_of_lam(lam_lo)
    t_hi = math.pi * (n_max + 4) / (2 * S)
    roots = []
    t_start = t0
    prev = None  # last two (t, f) samples of the previous block, so dips straddling blocks are seen
    while True:
        t = np.arange(t_start, max(t_hi, t_start + dt) + dt / 2, dt)
        if prev is not None:
            t = np.concatenate([prev[0], t[1:]])
        lam = _lam_of_t(t)
        if prev is None:
            vals = f(lam)
        else:
            vals = np.concatenate([prev[1], f(lam[2:])])
        if not np.all(np.isfinite(vals)):
            raise ConvergenceError("non-finite characteristic function values during scan")
        roots.extend(_roots_in_samples(f, lam, vals, double_tol))
        roots = sorted(set(roots))
        if len(roots) >= n_max:
            break
        prev = (t[-2:], vals[-2:])
        t_start = t[-1]
        t_hi = t_start + max(t_hi - t0, 8 * dt)  # double the scanned span
    lam_top = _lam_of_t(t[-1])
    count = len(roots)
    roots = np.array(roots[:n_max])
    if lam_top > 0:
        expected = expected_zero_count(S, lam_top)
        if count < expected - 3:
            raise MissedRootError(
                f"found {count} zeros below {lam_top:.6g}, asymptotics predicts about {expected:.1f}"
            )
    lo = roots - 1e-9 * np.maximum(1.0, np.abs(roots))
    hi = roots + 1e-9 * np.maximum(1.0, np.abs(roots))
    polished, deriv = newton_polish(f, roots, lo, hi)
    polished = np.where(np.abs(polished) < ZERO_SNAP, 0.0, polished)
    if polished.size > 1 and not np.all(np.diff(polished) > 0):
        raise SimplicityViolatedError(float(polished[np.argmin(np.diff(polished))]))
    return polished, deriv


def _roots_in_samples(f, lam, vals, double_tol):
    s = np.sign(vals)
    out = [float(x) for x in lam[s == 0]]
    change = (s[:-1] * s[1:]) < 0
    lo = list(lam[:-1][change])
    hi = list(lam[1:][change])
    flo = list(vals[:-1][change])
    fhi = list(vals[1:][change])
    # dips: |f| has an interior local minimum with no sign change around it
    a = np.abs(vals)
    j = np.nonzero((a[1:-1] < a[:-2]) & (a[1:-1] < a[2:]) & (s[:-2] == s[1:-1]) & (s[1:-1] == s[2:]))[0] + 1
    if j.size:
        sign = s[j]
        xa, xb = lam[j - 1], lam[j + 1]
        xm, fm = golden_minimise(lambda x: sign * f(x), xa, xb)
        scale = np.maximum(a[j - 1], a[j + 1])
        flat = np.abs(fm) <= double_tol * scale
        if np.any(flat):
            k = np.nonzero(flat)[0][0]
            raise SimplicityViolatedError(float(xm[k]))
        split = fm < 0
        for k in np.nonzero(split)[0]:
            fmk = float(sign[k] * fm[k])
            lo += [xa[k], xm[k]]
            hi += [xm[k], xb[k]]
            flo += [vals[j[k] - 1], fmk]
            fhi += [fmk, vals[j[k] + 1]]
    if lo:
        out.extend(float(x) for x in illinois(f, lo, hi, flo, fhi))
    return out
