"""Integer-order Bessel functions of the first kind.

Rows of ``J_n(x)`` over a contiguous order range come from one backward
(Miller) recurrence at the common argument; negative orders and arguments are
mapped through ``J_{-n}(x) = (-1)^n J_n(x)`` and ``J_n(-x) = (-1)^n J_n(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import bessel_table

MAX_ARGUMENT = 1e6


def _check_argument(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"Bessel argument must be finite, got {x!r}")
    if abs(x) > MAX_ARGUMENT:
        raise ValueError(f"|x| = {abs(x):g} exceeds the supported bound {MAX_ARGUMENT:g}")
    return x


def _parity(n):
    """``(-1)**n`` as a float array."""
    return 1.0 - 2.0 * (np.asarray(n) & 1)


@dataclass(frozen=True, eq=False)
class BesselRow:
    """``J_n(argument)`` for ``n = min_order..max_order``."""

    argument: float
    min_order: int
    max_order: int
    values: np.ndarray

    @property
    def orders(self):
        return np.arange(self.min_order, self.max_order + 1)

    def __len__(self):
        return self.values.size

    def __getitem__(self, n):
        if not self.min_order <= n <= self.max_order:
            raise IndexError(f"order {n} outside {self.min_order}..{self.max_order}")
        return float(self.values[n - self.min_order])

    def take(self, orders):
        """Values at an integer array of orders, all inside the row."""
        orders = np.asarray(orders)
        if orders.size and (orders.min() < self.min_order or orders.max() > self.max_order):
            raise IndexError("requested orders fall outside the row")
        return self.values[orders - self.min_order]


def bessel_row(min_order, max_order, x):
    """Evaluate ``J_n(x)`` for every integer ``n`` in ``[min_order, max_order]``."""
    min_order = int(min_order)
    max_order = int(max_order)
    if min_order > max_order:
        raise ValueError(f"min_order {min_order} > max_order {max_order}")
    x = _check_argument(x)
    orders = np.arange(min_order, max_order + 1)
    nmax = int(np.max(np.abs(orders)))
    table = bessel_table(nmax, abs(x))
    absn = np.abs(orders)
    values = table[absn]
    sign_flip = (orders < 0).astype(np.int64) * absn
    if x < 0:
        sign_flip = sign_flip + absn
    values = values * _parity(sign_flip)
    values.setflags(write=False)
    return BesselRow(x, min_order, max_order, values)


def bessel_j(order, x):
    """``J_order(x)`` for integer ``order``."""
    order = int(order)
    x = _check_argument(x)
    n = abs(order)
    value = float(bessel_table(n, abs(x))[n])
    flips = (n if order < 0 else 0) + (n if x < 0 else 0)
    return -value if flips & 1 else value
