"""Discretized mixed quantum state of a frequency comb.

On a uniform frequency grid the single-photon density matrix is diagonal:
``rho_1[i, j] = delta_ij * p_i`` with ``p_i = S(nu_i) * delta_nu``. The
Kronecker delta plays the part of the epsilon function (unit at coincidence,
no weight off the diagonal). Multi-photon states are tensor powers of
``rho_1`` and the mixed coherent state is a Poisson mixture of those; neither is
ever stored as an array, every observable is computed from the factorized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammainc

from .spectral import (
    CoherenceFunction,
    FrequencyGrid,
    SpectralDensity,
    SpectralError,
    coherence_from_weights,
    mutual_coherence,
)

TRACE_TOL = 1e-9
POISSON_TAIL_TOL = 1e-12


class NotNormalizedError(SpectralError):
    pass


class MomentUnderflowError(ArithmeticError):
    """``tr(rho_n^k)`` underflows double precision; the log value is attached."""

    def __init__(self, log_value: float):
        super().__init__(f"trace moment underflows: log value {log_value}")
        self.log_value = log_value


@dataclass(frozen=True)
class DiagonalDensityMatrix:
    grid: FrequencyGrid
    probs: NDArray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (self.grid.count,):
            raise ValueError(f"probs have shape {p.shape}, grid has {self.grid.count} points")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and >= 0")
        if abs(math.fsum(p) - 1.0) > TRACE_TOL:
            raise ValueError(f"probabilities sum to {math.fsum(p)}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.size

    @property
    def nu(self) -> NDArray:
        return self.grid.nu

    def trace(self) -> float:
        return math.fsum(self.probs)

    def element(self, i: int, j: int) -> float:
        """Matrix element ``rho_1(nu_i, nu_j)``; zero off the diagonal."""
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError((i, j))
        return float(self.probs[i]) if i == j else 0.0

    @classmethod
    def from_probs(cls, grid: FrequencyGrid, probs: ArrayLike) -> "DiagonalDensityMatrix":
        """Normalize arbitrary nonnegative weights into a state."""
        p = np.asarray(probs, dtype=float)
        return cls(grid, p / math.fsum(p))


@dataclass(frozen=True)
class TensorPowerState:
    """``rho_1`` tensored with itself ``n`` times; never materialized."""

    base: DiagonalDensityMatrix
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("photon number must be >= 0")

    def trace(self) -> float:
        return self.base.trace() ** self.n


@dataclass(frozen=True)
class MixedCoherentState:
    base: DiagonalDensityMatrix
    alpha_sq: float

    def __post_init__(self):
        if self.alpha_sq < 0:
            raise ValueError("alpha_sq must be >= 0")

    def sector(self, n: int) -> TensorPowerState:
        return TensorPowerState(self.base, n)

    @property
    def mean_photon_number(self) -> float:
        return self.alpha_sq


@dataclass(frozen=True)
class SigmaOperator:
    """``|alpha|^2 rho_1``: frequency and photon-number content in one diagonal operator."""

    base: DiagonalDensityMatrix
    alpha_sq: float

    @property
    def diag(self) -> NDArray:
        return self.alpha_sq * self.base.probs

    def trace(self) -> float:
        return math.fsum(self.diag)

    def sector_weight(self, n: int) -> float:
        """Weight of the ``n``-photon sector in ``exp(-tr sigma) exp_tensor(sigma)``.

        The n-th term ``sigma^{(x) n} / n!`` has trace ``(tr sigma)^n / n!``.
        """
        tr = self.trace()
        if tr == 0.0:
            return 1.0 if n == 0 else 0.0
        return math.exp(-tr + n * math.log(tr) - math.lgamma(n + 1))


def single_photon_state(sd: SpectralDensity) -> DiagonalDensityMatrix:
    """Diagonal state with ``p_i = S(nu_i) * delta_nu``, rescaled to unit trace.

    The rescaling absorbs the small gap between the trapezoid integral used to
    normalize ``sd`` and the Riemann sum over grid cells.
    """
    if not sd.normalized:
        raise NotNormalizedError("single_photon_state needs a normalized density; call normalize() first")
    p = sd.values * sd.grid.delta_nu
    total = math.fsum(p)
    if not total > 0:
        raise NotNormalizedError("density has no weight on the grid")
    return DiagonalDensityMatrix(sd.grid, p / total)


def purity(rho: DiagonalDensityMatrix) -> float:
    return float(np.dot(rho.probs, rho.probs))


def circular_broaden(rho: DiagonalDensityMatrix, kernel: ArrayLike) -> DiagonalDensityMatrix:
    """Circular convolution of the probabilities with a probability kernel.

    ``kernel[k]`` is the weight moved ``k`` bins up (mod dim). Summed directly,
    shift by shift.
    """
    k = np.asarray(kernel, dtype=float)
    if np.any(k < 0) or abs(math.fsum(k) - 1.0) > TRACE_TOL:
        raise ValueError("kernel must be a probability vector")
    out = np.zeros(rho.dim)
    for shift, w in enumerate(k):
        if w:
            out += w * np.roll(rho.probs, shift)
    return DiagonalDensityMatrix.from_probs(rho.grid, out)


def n_photon_trace_moment(state: TensorPowerState, k: int, log: bool = False) -> float:
    """``tr(rho_n^k) = (sum_i p_i^k)^n``.

    With ``log=True`` the natural log is returned. Otherwise a result that
    underflows to zero raises :class:`MomentUnderflowError` carrying the log.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 0.0 if log else 1.0
    s = float(np.sum(state.base.probs**k))
    log_value = state.n * math.log(s)
    if log:
        return log_value
    value = s**state.n
    if value == 0.0 and state.n > 0:
        raise MomentUnderflowError(log_value)
    return value


def default_n_max(alpha_sq: float, tol: float = POISSON_TAIL_TOL) -> int:
    """Smallest ``n`` with Poisson tail ``P(N > n) < tol``."""
    if alpha_sq == 0:
        return 0
    # start a little below the usual estimate and walk up
    n = max(0, int(alpha_sq + 12.0 * math.sqrt(alpha_sq + 1.0)) - 20)
    while n > 0 and gammainc(n, alpha_sq) < tol:
        n -= 1
    while gammainc(n + 1, alpha_sq) >= tol:
        n += 1
    return n


def photon_number_pmf(state: MixedCoherentState, n_max: int | None = None) -> tuple[NDArray, float]:
    """Poisson weights ``w_0..w_{n_max}`` of the photon-number sectors and the tail mass.

    Built with the recurrence ``w_{n+1} = w_n * |alpha|^2 / (n + 1)``, started at
    ``w_0 = exp(-|alpha|^2)`` (or at the mode, in log form, when ``w_0``
    would underflow). The tail ``1 - sum(w)`` is returned as the regularized
    incomplete gamma function so it stays accurate far below machine epsilon.
    """
    lam = float(state.alpha_sq)
    if n_max is None:
        n_max = default_n_max(lam)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    w = np.zeros(n_max + 1)
    if lam == 0.0:
        w[0] = 1.0
        return w, 0.0
    if lam < 700.0:
        w[0] = math.exp(-lam)
        for n in range(n_max):
            w[n + 1] = w[n] * lam / (n + 1)
    else:
        mode = min(int(lam), n_max)
        w[mode] = math.exp(-lam + mode * math.log(lam) - math.lgamma(mode + 1))
        for n in range(mode, n_max):
            w[n + 1] = w[n] * lam / (n + 1)
        for n in range(mode, 0, -1):
            w[n - 1] = w[n] * n / lam
    tail = float(gammainc(n_max + 1, lam))
    return w, tail


def sigma_operator(base: DiagonalDensityMatrix, alpha_sq: float) -> SigmaOperator:
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be >= 0")
    return SigmaOperator(base, float(alpha_sq))


def state_coherence(rho: DiagonalDensityMatrix, tau_count: int | None = None) -> CoherenceFunction:
    return coherence_from_weights(rho.grid, rho.probs, tau_count)


def coherence_time(source: DiagonalDensityMatrix | SpectralDensity, tau_count: int | None = None) -> float | None:
    """First delay at which ``|Gamma(tau)| / Gamma(0)`` drops below ``1/e``.

    Linearly interpolated between the bracketing delay samples. Returns
    ``None`` when the drop does not happen inside the delay window.
    """
    if isinstance(source, SpectralDensity):
        if not source.normalized:
            raise NotNormalizedError("coherence_time needs a normalized density")
        gamma = mutual_coherence(source, tau_count)
    else:
        gamma = state_coherence(source, tau_count)
    i0 = gamma.zero_index
    mag = gamma.magnitude[i0:] / gamma.magnitude[i0]
    tau = gamma.tau[i0:]
    below = np.nonzero(mag < math.exp(-1.0))[0]
    if below.size == 0:
        return None
    j = int(below[0])
    m0, m1 = mag[j - 1], mag[j]
    frac = (m0 - math.exp(-1.0)) / (m0 - m1)
    return float(tau[j - 1] + frac * (tau[j] - tau[j - 1]))
