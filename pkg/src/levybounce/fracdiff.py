"""Numerical fractional differentiation of sampled complex-valued functions.

Implements the truncated Grunwald-Letnikov sum with lower limit -infinity,
realized by a finite backward window.  On the function class used here the
Riemann-Liouville derivative coincides with the GL limit, so a single kernel
serves both; accuracy is first order in the step h.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve


class InsufficientSupport(Exception):
    """The sample grid does not reach far enough back for the GL window."""


class DerivKind(enum.Enum):
    GRUNWALD_LETNIKOV = "grunwald-letnikov"
    # Computed through the same GL sum; the two operators agree for functions
    # decaying toward the lower limit (and differ only by branch effects on
    # growing ones, which no backward sum can resolve either way).
    RIEMANN_LIOUVILLE_VIA_GL = "riemann-liouville-via-gl"


@dataclass(frozen=True)
class FracOrder:
    order: float
    kind: DerivKind = DerivKind.GRUNWALD_LETNIKOV

    def __post_init__(self) -> None:
        if not 0.0 < self.order <= 4.0:
            raise ValueError(f"derivative order must lie in (0, 4], got {self.order}")


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on the uniform grid x_k = x0 + k*h."""

    x0: float
    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError("grid step h must be positive")
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-d sequence")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values))

    @property
    def x_end(self) -> float:
        return self.x0 + self.h * (len(self.values) - 1)

    def index_of(self, x: float) -> int:
        i = int(round((x - self.x0) / self.h))
        if i < 0 or i >= len(self.values) or abs(self.x0 + i * self.h - x) > 1e-9 * max(1.0, abs(x)):
            raise ValueError(f"x = {x} is not a grid point")
        return i


def generalized_binomial(order: float, k: int) -> float:
    """Generalized binomial coefficient order*(order-1)*...*(order-k+1)/k!.

    Multiplicative recurrence, no Gamma evaluation; finite for all inputs
    and exact (up to rounding) for integer order.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    c = 1.0
    for i in range(1, k + 1):
        c *= (order - i + 1) / i
    return c


def gl_weights(order: float, count: int) -> np.ndarray:
    """GL weights w_k = (-1)**k * C(order, k) for k = 0..count."""
    w = np.empty(count + 1)
    w[0] = 1.0
    if count:
        k = np.arange(1, count + 1)
        w[1:] = np.cumprod((order - k + 1) / k) * (-1.0) ** k
    return w


def gl_derivative(f: GridFunction, ord: FracOrder, window: float) -> GridFunction:
    """Truncated GL derivative, approximating the -infinity lower limit.

    The sum h**(-order) * sum_k w_k f(x - k h) is truncated at the window
    boundary, so every output point needs samples over [x - window, x].
    The output grid starts window above f's start and keeps the same step.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    n_w = int(round(window / f.h))
    if n_w < 16:
        raise ValueError(f"window/h yields only {n_w} terms; at least 16 are required")
    if n_w >= len(f):
        raise InsufficientSupport(
            f"window of {n_w} steps leaves no output points on a grid of {len(f)} samples"
        )
    w = gl_weights(ord.order, n_w).astype(np.complex128)
    if len(f) * n_w > 4_000_000:
        out = fftconvolve(f.values, w, mode="valid")
    else:
        out = np.convolve(f.values, w, mode="valid")
    out = out / f.h**ord.order
    return GridFunction(x0=f.x0 + n_w * f.h, h=f.h, values=out)


def default_window(f: GridFunction, ord: FracOrder, eval_start: float) -> float:
    """Backward window choice from the sampled |f|.

    For samples decaying toward -infinity the window is grown until the
    dropped GL tail mass (weights ~ k**(-order-1) against |f|) falls below
    1e-12 of the total, capped by the available support.  If |f| grows
    backward (the -infinity limit does not exist classically), the window
    is instead placed at the minimum of the truncation error model
    W**(-order-1) * (|f| at the window end + running backward minimum),
    which balances the switched-on growth against the discarded memory.
    """
    i_top = max(1, min(len(f) - 1, int(math.floor((eval_start - f.x0) / f.h))))
    avail = i_top * f.h
    if avail < 16 * f.h:
        raise InsufficientSupport("not enough backward support for any admissible window")
    absf = np.abs(f.values[: i_top + 1])
    back = absf[::-1]  # back[k] = |f(eval_start - k h)| (approximately)
    k = np.arange(1, len(back))
    mass = np.abs(gl_weights(ord.order, len(back) - 1))[1:] * back[1:]
    total = float(np.sum(mass))
    growing = back[-1] > 10.0 * (np.min(back) + 1e-300)
    if not growing and total > 0.0:
        tail = np.cumsum(mass[::-1])[::-1]
        ok = np.nonzero(tail <= 1e-12 * total)[0]
        n_w = int(ok[0]) + 1 if ok.size else len(back) - 1
        return max(n_w, 16) * f.h
    if not growing:
        return avail
    # error-model minimum for backward-growing samples
    run_min = np.minimum.accumulate(back[::-1])[::-1]
    cand = np.arange(max(16, int(round(0.5 / f.h))), len(back) - 1)
    score = (cand * f.h) ** (-ord.order - 1) * (back[cand] + run_min[cand])
    n_w = int(cand[np.argmin(score)])
    return n_w * f.h


def residual_of(
    f: GridFunction,
    ord: FracOrder,
    K: float,
    xi_grid: tuple[float, float] | None = None,
    window: float | None = None,
) -> GridFunction:
    """Pointwise gl_derivative(f) - K*xi*f(xi) on the overlap domain.

    ``xi_grid`` optionally restricts the output to an interval (clipped to
    the feasible ladder); the window defaults to `default_window` for the
    requested start.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    lo = f.x0 if xi_grid is None else xi_grid[0]
    hi = f.x_end if xi_grid is None else xi_grid[1]
    if window is None:
        window = default_window(f, ord, max(lo, f.x0 + 16 * f.h))
    d = gl_derivative(f, ord, window)
    n_skip = int(round((d.x0 - f.x0) / f.h))
    x = d.x
    vals = d.values - K * x * f.values[n_skip:]
    g = GridFunction(x0=d.x0, h=d.h, values=vals)
    if xi_grid is None:
        return g
    i0 = max(0, int(math.ceil((lo - g.x0) / g.h - 1e-9)))
    i1 = min(len(g) - 1, int(math.floor((hi - g.x0) / g.h + 1e-9)))
    if i1 < i0:
        raise InsufficientSupport(f"requested interval [{lo}, {hi}] has no feasible points")
    return GridFunction(x0=g.x0 + i0 * g.h, h=g.h, values=g.values[i0 : i1 + 1])
