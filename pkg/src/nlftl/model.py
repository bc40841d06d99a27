"""Congestion mobility and attractive interaction kernels.

The transport velocity of the model is v(rho) * (K' conv rho): a truncated
linear mobility that vanishes at the cap density, and the derivative of an
attractive Gaussian well K(x) = -A exp(-B x^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# amplitude that normalises the Gaussian well to unit L1 size at B = 1/2
GAUSSIAN_AMPLITUDE = 1.0 / math.sqrt(2.0 * math.pi)


def _same_kind(out: np.ndarray, like) -> np.ndarray | float:
    if np.ndim(like) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Mobility:
    """Truncated-linear mobility v(rho) = v_max * (1 - rho/cap)+.

    ``cap`` is the maximal admissible density: v is clamped to zero for
    rho >= cap so the velocity law stays defined for over-dense arguments.
    """

    cap: float = 1.0
    v_max: float = 1.0
    kind: str = "truncated-linear"

    def __post_init__(self) -> None:
        if not (self.cap > 0.0 and math.isfinite(self.cap)):
            raise ValueError("cap must be positive and finite")
        if not (self.v_max > 0.0 and math.isfinite(self.v_max)):
            raise ValueError("v_max must be positive and finite")
        if self.kind != "truncated-linear":
            raise ValueError(f"unknown mobility kind: {self.kind!r}")

    def _check_density(self, rho: np.ndarray) -> None:
        if np.any(rho < 0.0) or np.any(np.isnan(rho)):
            raise ValueError("density must be non-negative")

    def __call__(self, rho):
        """Mobility value; accepts scalars or arrays, rejects negative density."""
        arr = np.asarray(rho, dtype=float)
        self._check_density(arr)
        out = self.v_max * np.maximum(0.0, 1.0 - arr / self.cap)
        return _same_kind(out, rho)

    def dv(self, rho):
        """Left derivative of the mobility, zero past the cap."""
        arr = np.asarray(rho, dtype=float)
        self._check_density(arr)
        out = np.where(arr < self.cap, -self.v_max / self.cap, 0.0)
        return _same_kind(out, rho)

    def flux(self, rho):
        """f(rho) = rho * v(rho); vanishes exactly at rho = 0 and rho >= cap."""
        arr = np.asarray(rho, dtype=float)
        v = self.v_max * np.maximum(0.0, 1.0 - arr / self.cap)
        self._check_density(arr)
        with np.errstate(invalid="ignore"):
            out = np.where(v > 0.0, arr * v, 0.0)
        return _same_kind(out, rho)

    def dflux(self, rho):
        """f'(rho) = v_max (1 - 2 rho/cap) on [0, cap), zero past the cap."""
        arr = np.asarray(rho, dtype=float)
        self._check_density(arr)
        out = np.where(arr < self.cap, self.v_max * (1.0 - 2.0 * arr / self.cap), 0.0)
        return _same_kind(out, rho)

    @property
    def flux_argmax(self) -> float:
        """Maximiser of the unimodal flux (cap/2 for the truncated-linear law)."""
        return 0.5 * self.cap

    @property
    def flux_max(self) -> float:
        return self.flux(self.flux_argmax)

    @property
    def dflux_bound(self) -> float:
        """max over [0, cap] of |f'|, attained at the endpoints."""
        return self.v_max


@dataclass(frozen=True)
class Kernel:
    """Attractive Gaussian well K(x) = -amplitude * exp(-inv_width * x^2).

    K(0) = -amplitude < 0, K is even, K' > 0 on (0, inf): particles are
    pulled toward regions of mass.  Evenness is exact in floating point
    because every evaluation goes through x*x.
    """

    amplitude: float = GAUSSIAN_AMPLITUDE
    inv_width: float = 0.5
    kind: str = "gaussian"

    def __post_init__(self) -> None:
        if not (self.amplitude > 0.0 and math.isfinite(self.amplitude)):
            raise ValueError("amplitude must be positive and finite")
        if not (self.inv_width > 0.0 and math.isfinite(self.inv_width)):
            raise ValueError("inv_width must be positive and finite")
        if self.kind != "gaussian":
            raise ValueError(f"unknown kernel kind: {self.kind!r}")

    def __call__(self, x, order: int = 0):
        if order == 0:
            return self.value(x)
        if order == 1:
            return self.d1(x)
        if order == 2:
            return self.d2(x)
        raise ValueError("order must be 0, 1 or 2")

    def value(self, x):
        arr = np.asarray(x, dtype=float)
        out = -self.amplitude * np.exp(-self.inv_width * arr * arr)
        return _same_kind(out, x)

    def d1(self, x):
        """K'(x) = 2AB x exp(-B x^2); odd, positive for x > 0."""
        arr = np.asarray(x, dtype=float)
        out = (2.0 * self.amplitude * self.inv_width) * arr * np.exp(-self.inv_width * arr * arr)
        return _same_kind(out, x)

    def d2(self, x):
        """K''(x) = 2AB (1 - 2B x^2) exp(-B x^2)."""
        arr = np.asarray(x, dtype=float)
        sq = arr * arr
        out = (2.0 * self.amplitude * self.inv_width) * (1.0 - 2.0 * self.inv_width * sq) * np.exp(-self.inv_width * sq)
        return _same_kind(out, x)

    def lipschitz_bound(self, interval: tuple[float, float]) -> float:
        """sup of |K''| over a closed interval: a Lipschitz constant for K'.

        |K''| is maximised either at an endpoint or at one of the interior
        critical points x = 0 and x^2 = 3/(2B), so checking those suffices.
        """
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise ValueError("interval must satisfy a < b")
        candidates = [a, b]
        star = math.sqrt(1.5 / self.inv_width)
        for c in (0.0, star, -star):
            if a < c < b:
                candidates.append(c)
        return float(np.max(np.abs(self.d2(np.asarray(candidates)))))
