"""Pure Python/numpy versions of the hot kernels.

Same signatures and algorithms as the compiled ``_kernels`` module; used when
the extension is not built or ``OPTRATCHET_PURE_PYTHON`` is set.
"""
import math

import numpy as np

_BIG = 1e250
_SMALL = 1e-250
# Below this the leading series term is exact to double precision.
_TINY_X = 1e-30


def miller_start(nmax, x):
    """Starting order for the backward recurrence (always even)."""
    top = max(nmax, int(math.ceil(x)))
    m = top + 20 + int(math.ceil(math.sqrt(40.0 * max(top, 1))))
    return m + (m & 1)


def bessel_table(nmax, x):
    """``J_n(x)`` for ``n = 0..nmax`` and ``x >= 0`` by Miller's backward recurrence.

    The recurrence ``J_{n-1} = (2n/x) J_n - J_{n+1}`` is run down from a start
    order well above ``max(nmax, x)`` and normalised with
    ``J_0 + 2 sum_k J_{2k} = 1``.
    """
    nmax = int(nmax)
    x = float(x)
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < _TINY_X:
        term = 1.0
        out[0] = 1.0
        for n in range(1, nmax + 1):
            term *= x / (2.0 * n)
            if term == 0.0:
                break
            out[n] = term
        return out

    m = miller_start(nmax, x)
    two_over_x = 2.0 / x
    j_next = 0.0
    j_cur = 1.0
    norm = 2.0  # m is even: J_m enters the sum with weight 2
    for n in range(m, 0, -1):
        j_prev = n * two_over_x * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        k = n - 1
        if abs(j_cur) > _BIG:
            j_cur *= _SMALL
            j_next *= _SMALL
            norm *= _SMALL
            if k < nmax:
                out[k + 1:] *= _SMALL
        if k <= nmax:
            out[k] = j_cur
        if k > 0 and k % 2 == 0:
            norm += 2.0 * j_cur
    norm += j_cur
    out /= norm
    return out


def rk4_evolve(amps, detuning, coupling, h, nsteps):
    """Fixed-step RK4 for ``da_j/dz = -i d_j a_j - i C (a_{j+1} + a_{j-1})``.

    Parameters
    ----------
    amps : ndarray, complex, shape (batch, N)
        Initial amplitudes, one row per independent trajectory. Not modified.
    detuning : ndarray, float, shape (N,)
        On-site propagation constants ``d_j``.
    coupling : float
    h : float
        Step size.
    nsteps : int

    Returns
    -------
    out : ndarray
        Amplitudes after ``nsteps`` steps.
    bad_step : int
        First step after which a non-finite value was seen, or -1.

    Sites outside the array are held at zero.
    """
    y = np.array(amps, dtype=np.complex128, order="C", copy=True)
    mi_d = -1j * np.asarray(detuning, dtype=np.float64)
    mi_c = -1j * coupling
    half = 0.5 * h
    sixth = h / 6.0

    def rhs(v):
        k = mi_d * v
        k[:, 1:] += mi_c * v[:, :-1]
        k[:, :-1] += mi_c * v[:, 1:]
        return k

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(nsteps):
            k1 = rhs(y)
            k2 = rhs(y + half * k1)
            k3 = rhs(y + half * k2)
            k4 = rhs(y + h * k3)
            y += sixth * (k1 + 2.0 * (k2 + k3) + k4)
            if (step & 1023) == 1023 and not np.all(np.isfinite(y)):
                return y, step
        if not np.all(np.isfinite(y)):
            return y, nsteps - 1
    return y, -1
