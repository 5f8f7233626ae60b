"""Inner loops: closed-form Fock matrix elements, state application, shot sampling.

Every ``@njit`` function here is valid plain Python as well; see
:mod:`ptrdual._accel` for how the backend is chosen.  Coupler parameters enter
as trigonometric/hyperbolic pairs so the kernels never call arccos/arccosh:

* beam splitter: ``c = cos(theta) = sqrt(eta)``, ``s = sin(theta)``
* down-converter: ``t = tanh(r)``, ``sech = 1/cosh(r) = 1/sqrt(g)``
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

# Path slots of the detector/loss thinning table used by the shot sampler.
TRIGGER_A, TRIGGER_B = 0, 1
INPUT_A, INPUT_B = 2, 3
OUTPUT_A, OUTPUT_B = 4, 5
DETECT = 6
N_PATHS = 7
UNIFORMS_PER_SHOT = 11


@njit
def log_binom(n, k):
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


@njit
def bs_amp(n, m, i, j, c, s):
    # Expansion of (a+ c - b+ s)^i (a+ s + b+ c)^j |0,0>; k counts a+ drawn from
    # the first factor, l = n - k from the second.
    if n + m != i + j:
        return 0.0
    lo = max(0, n - j)
    hi = min(i, n)
    pref = 0.5 * (math.lgamma(n + 1.0) + math.lgamma(m + 1.0)
                  - math.lgamma(i + 1.0) - math.lgamma(j + 1.0))
    total = 0.0
    for k in range(lo, hi + 1):
        l = n - k
        mag = math.exp(pref + log_binom(i, k) + log_binom(j, l))
        term = mag * c ** (k + j - l) * s ** (i - k + l)
        if (i - k) % 2 == 1:
            total -= term
        else:
            total += term
    return total


@njit
def pdc_amp(n, m, i, j, t, sech):
    # exp(t a+b+) sech^(1 + Na + Nb) exp(-t ab): k pairs annihilated, l created.
    if n - m != i - j:
        return 0.0
    lo = max(0, i - n)
    hi = min(i, j)
    pref = 0.5 * (math.lgamma(i + 1.0) + math.lgamma(j + 1.0)
                  + math.lgamma(n + 1.0) + math.lgamma(m + 1.0))
    total = 0.0
    for k in range(lo, hi + 1):
        l = n - i + k
        mag = math.exp(pref - math.lgamma(k + 1.0) - math.lgamma(l + 1.0)
                       - math.lgamma(i - k + 1.0) - math.lgamma(j - k + 1.0))
        term = mag * t ** (k + l) * sech ** (1 + i + j - 2 * k)
        if k % 2 == 1:
            total -= term
        else:
            total += term
    return total


@njit
def pdc_path_terms(n, m, i, j, t, sech, out):
    """Write the individual disentanglement terms (one per annihilated-pair
    count k) into ``out[k]``; returns the number of terms."""
    lo = max(0, i - n)
    hi = min(i, j)
    count = 0
    if n - m != i - j:
        return 0
    pref = 0.5 * (math.lgamma(i + 1.0) + math.lgamma(j + 1.0)
                  + math.lgamma(n + 1.0) + math.lgamma(m + 1.0))
    for k in range(lo, hi + 1):
        l = n - i + k
        mag = math.exp(pref - math.lgamma(k + 1.0) - math.lgamma(l + 1.0)
                       - math.lgamma(i - k + 1.0) - math.lgamma(j - k + 1.0))
        term = mag * t ** (k + l) * sech ** (1 + i + j - 2 * k)
        out[count] = -term if k % 2 == 1 else term
        count += 1
    return count


@njit
def apply_bs(x, c, s):
    d = x.shape[0]
    n_max = d - 1
    y = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            amp = x[i, j]
            if amp == 0:
                continue
            tot = i + j
            for n in range(max(0, tot - n_max), min(tot, n_max) + 1):
                y[n, tot - n] += bs_amp(n, tot - n, i, j, c, s) * amp
    return y


@njit
def apply_pdc(x, t, sech):
    d = x.shape[0]
    n_max = d - 1
    y = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            amp = x[i, j]
            if amp == 0:
                continue
            diff = i - j
            for n in range(max(0, diff), min(n_max, n_max + diff) + 1):
                y[n, n - diff] += pdc_amp(n, n - diff, i, j, t, sech) * amp
    return y


@njit
def _inverse_cdf(cdf, u):
    # smallest index with u < cdf[index]; cdf[-1] == 1 and u < 1
    lo = 0
    hi = cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit
def sample_shots(u, herald_cdf, thin_cdf, pdc_cdf, pnr_max):
    """One row of ``u`` (``UNIFORMS_PER_SHOT`` columns) per shot; returns the
    clamped click tuple (trigger_a, trigger_b, out_a, out_b) per shot."""
    shots = u.shape[0]
    out = np.empty((shots, 4), dtype=np.int64)
    for r in range(shots):
        ka = _inverse_cdf(herald_cdf, u[r, 0])
        kb = _inverse_cdf(herald_cdf, u[r, 1])
        ta = _inverse_cdf(thin_cdf[TRIGGER_A, ka], u[r, 2])
        tb = _inverse_cdf(thin_cdf[TRIGGER_B, kb], u[r, 3])
        pa = _inverse_cdf(thin_cdf[INPUT_A, ka], u[r, 4])
        pb = _inverse_cdf(thin_cdf[INPUT_B, kb], u[r, 5])
        w = _inverse_cdf(pdc_cdf[pa, pb], u[r, 6])
        na = w + max(pa - pb, 0)
        nb = w + max(pb - pa, 0)
        na = _inverse_cdf(thin_cdf[OUTPUT_A, na], u[r, 7])
        nb = _inverse_cdf(thin_cdf[OUTPUT_B, nb], u[r, 8])
        na = _inverse_cdf(thin_cdf[DETECT, na], u[r, 9])
        nb = _inverse_cdf(thin_cdf[DETECT, nb], u[r, 10])
        out[r, 0] = min(ta, pnr_max)
        out[r, 1] = min(tb, pnr_max)
        out[r, 2] = min(na, pnr_max)
        out[r, 3] = min(nb, pnr_max)
    return out


def _rows_inverse_cdf(rows, u):
    return (rows <= u[:, None]).sum(axis=1)


def sample_shots_numpy(u, herald_cdf, thin_cdf, pdc_cdf, pnr_max, chunk=8192):
    """Vectorised twin of :func:`sample_shots`; identical output for identical ``u``."""
    shots = u.shape[0]
    out = np.empty((shots, 4), dtype=np.int64)
    for start in range(0, shots, chunk):
        v = u[start:start + chunk]
        ka = np.searchsorted(herald_cdf, v[:, 0], side="right")
        kb = np.searchsorted(herald_cdf, v[:, 1], side="right")
        ta = _rows_inverse_cdf(thin_cdf[TRIGGER_A, ka], v[:, 2])
        tb = _rows_inverse_cdf(thin_cdf[TRIGGER_B, kb], v[:, 3])
        pa = _rows_inverse_cdf(thin_cdf[INPUT_A, ka], v[:, 4])
        pb = _rows_inverse_cdf(thin_cdf[INPUT_B, kb], v[:, 5])
        w = _rows_inverse_cdf(pdc_cdf[pa, pb], v[:, 6])
        na = w + np.maximum(pa - pb, 0)
        nb = w + np.maximum(pb - pa, 0)
        na = _rows_inverse_cdf(thin_cdf[OUTPUT_A, na], v[:, 7])
        nb = _rows_inverse_cdf(thin_cdf[OUTPUT_B, nb], v[:, 8])
        na = _rows_inverse_cdf(thin_cdf[DETECT, na], v[:, 9])
        nb = _rows_inverse_cdf(thin_cdf[DETECT, nb], v[:, 10])
        block = np.stack([ta, tb, na, nb], axis=1)
        out[start:start + chunk] = np.minimum(block, pnr_max)
    return out
