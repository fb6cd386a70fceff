"""Closed-form power spectral density of a frequency comb with noisy frequency parameters.

The comb lines sit at ``nu_ceo + m * nu_rep``. Both frequencies are treated as
independent Gaussian random variables, so the ensemble-averaged line ``m`` is a
Gaussian of variance ``sigma_ceo**2 + m**2 * sigma_rep**2`` centred on
``mu_ceo + m * mu_rep``. The full (two-sided) density is

    S(nu) = 1/4 |P(nu - nu_c)|^2 sum_m Q_m(nu) + 1/4 |P(nu + nu_c)|^2 sum_m Q_m(-nu)

with ``P`` the spectral envelope. The dimension parameter that appears when the
squared line functions are replaced by delta functions is fixed to 1 (absorbed
into ``P``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray


class SpectralError(ValueError):
    """Base class for invalid spectral inputs."""


class GridError(SpectralError):
    pass


class ResolutionError(SpectralError):
    """Grid step too coarse to resolve the narrowest comb line."""


class DegenerateVarianceError(SpectralError):
    """A line has zero variance; use :func:`delta_comb` instead of a sampled density."""


class TruncationError(SpectralError):
    pass


class ZeroIntegralError(SpectralError):
    pass


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CombParams:
    """Means and standard deviations of the offset and repetition frequencies."""

    mu_ceo: float
    mu_rep: float
    sigma_ceo: float
    sigma_rep: float
    nu_c: float

    def __post_init__(self):
        if not self.mu_rep > 0:
            raise SpectralError(f"mu_rep must be > 0, got {self.mu_rep}")
        if not 0 < self.mu_ceo < self.mu_rep:
            raise SpectralError(
                f"mu_ceo must satisfy 0 < mu_ceo < mu_rep, got mu_ceo={self.mu_ceo}, mu_rep={self.mu_rep}"
            )
        if self.sigma_ceo < 0 or self.sigma_rep < 0:
            raise SpectralError("standard deviations must be >= 0")

    def line_center(self, m: ArrayLike) -> NDArray:
        return self.mu_ceo + np.asarray(m) * self.mu_rep

    def line_variance(self, m: ArrayLike) -> NDArray:
        m = np.asarray(m, dtype=float)
        return self.sigma_ceo**2 + m * m * self.sigma_rep**2

    def line_sigma(self, m: ArrayLike) -> NDArray:
        return np.sqrt(self.line_variance(m))


@dataclass(frozen=True)
class EnvelopeModel:
    """Gaussian spectral envelope ``scale * exp(-(nu - nu_c)**2 / B**2)``."""

    nu_c: float
    bandwidth_B: float
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if not self.bandwidth_B > 0:
            raise SpectralError(f"bandwidth_B must be > 0, got {self.bandwidth_B}")
        if not self.amplitude_scale > 0:
            raise SpectralError(f"amplitude_scale must be > 0, got {self.amplitude_scale}")

    def __call__(self, nu: ArrayLike) -> NDArray:
        d = np.asarray(nu, dtype=float) - self.nu_c
        return self.amplitude_scale * np.exp(-(d * d) / self.bandwidth_B**2)

    def power(self, nu: ArrayLike) -> NDArray:
        """``|P(nu - nu_c)|**2``."""
        p = self(nu)
        return p * p


@dataclass(frozen=True)
class FrequencyGrid:
    nu_start: float
    delta_nu: float
    count: int

    def __post_init__(self):
        if not self.delta_nu > 0:
            raise GridError(f"grid step must be > 0, got {self.delta_nu}")
        if int(self.count) != self.count or self.count < 1:
            raise GridError(f"grid count must be a positive integer, got {self.count}")

    @classmethod
    def spanning(cls, lo: float, hi: float, delta_nu: float) -> "FrequencyGrid":
        """Grid from ``lo`` to ``hi`` inclusive (``hi`` rounded to the nearest step)."""
        count = int(round((hi - lo) / delta_nu)) + 1
        return cls(lo, delta_nu, count)

    @property
    def nu(self) -> NDArray:
        return self.nu_start + self.delta_nu * np.arange(self.count)

    @property
    def nu_stop(self) -> float:
        return self.nu_start + self.delta_nu * (self.count - 1)

    def trapezoid_weights(self) -> NDArray:
        w = np.full(self.count, self.delta_nu)
        if self.count > 1:
            w[0] = w[-1] = 0.5 * self.delta_nu
        return w

    def same_as(self, other: "FrequencyGrid", rtol: float = 1e-9) -> bool:
        return (
            self.count == other.count
            and math.isclose(self.delta_nu, other.delta_nu, rel_tol=rtol)
            and abs(self.nu_start - other.nu_start) <= rtol * self.delta_nu
        )


def _frozen(a: ArrayLike, dtype=float) -> NDArray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpectralDensity:
    grid: FrequencyGrid
    values: NDArray
    normalized: bool = False

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.count,):
            raise GridError(f"values have shape {values.shape}, grid has {self.grid.count} points")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise SpectralError("spectral density values must be finite and >= 0")
        object.__setattr__(self, "values", values)

    @property
    def nu(self) -> NDArray:
        return self.grid.nu

    def integral(self) -> float:
        return float(np.dot(self.grid.trapezoid_weights(), self.values))


@dataclass(frozen=True)
class CoherenceFunction:
    tau: NDArray
    values: NDArray

    def __post_init__(self):
        object.__setattr__(self, "tau", _frozen(self.tau))
        object.__setattr__(self, "values", _frozen(self.values, complex))

    @property
    def zero_index(self) -> int:
        return int(np.argmin(np.abs(self.tau)))

    @property
    def magnitude(self) -> NDArray:
        return np.abs(self.values)


@dataclass(frozen=True)
class DeltaComb:
    """Zero-variance comb: line positions and integrated weights, both halves."""

    positions: NDArray
    weights: NDArray
    m: NDArray = field(default_factory=lambda: np.zeros(0, dtype=int))


@dataclass(frozen=True)
class TruncationPolicy:
    """Which lines enter the m-sum.

    With only ``rel_tol`` set the range comes from :func:`truncation_bounds`.
    An explicit ``m_min``/``m_max`` is accepted only if it contains every line
    whose envelope weight reaches ``rel_tol`` of the strongest one.
    """

    rel_tol: float = 1e-8
    m_min: int | None = None
    m_max: int | None = None

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise TruncationError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if (self.m_min is None) != (self.m_max is None):
            raise TruncationError("m_min and m_max must be given together")
        if self.m_min is not None and self.m_min > self.m_max:
            raise TruncationError("m_min > m_max")

    def resolve(self, params: CombParams, env: EnvelopeModel) -> range:
        if self.m_min is None:
            return truncation_bounds(params, env, self.rel_tol)
        core = _significant_lines(params, env, self.rel_tol)
        if self.m_min > core.start or self.m_max < core.stop - 1:
            raise TruncationError(
                f"m-range [{self.m_min}, {self.m_max}] excludes significant lines "
                f"[{core.start}, {core.stop - 1}] at rel_tol={self.rel_tol}"
            )
        return range(self.m_min, self.m_max + 1)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def envelope_eval(env: EnvelopeModel, nu: ArrayLike) -> NDArray:
    return env(nu)


def line_component(params: CombParams, m: int, nu: ArrayLike) -> NDArray:
    """Ensemble-averaged line ``m``: a unit-area Gaussian.

    Raises
    ------
    DegenerateVarianceError
        If ``sigma_ceo**2 + m**2 * sigma_rep**2 == 0``.
    """
    var = float(params.line_variance(m))
    if var == 0.0:
        raise DegenerateVarianceError(f"line m={m} has zero variance")
    d = np.asarray(nu, dtype=float) - float(params.line_center(m))
    return np.exp(-(d * d) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def _significant_lines(params: CombParams, env: EnvelopeModel, rel_tol: float) -> range:
    # envelope power at line m is exp(-2 d_m^2 / B^2), d_m = line centre minus nu_c
    x = (env.nu_c - params.mu_ceo) / params.mu_rep
    candidates = (math.floor(x), math.ceil(x))
    m_best = min(candidates, key=lambda m: abs(float(params.line_center(m)) - env.nu_c))
    d_best = abs(float(params.line_center(m_best)) - env.nu_c)
    reach = math.sqrt(d_best**2 + 0.5 * env.bandwidth_B**2 * math.log(1.0 / rel_tol))
    lo = math.ceil((env.nu_c - reach - params.mu_ceo) / params.mu_rep)
    hi = math.floor((env.nu_c + reach - params.mu_ceo) / params.mu_rep)
    # rounding must never push the strongest line out of its own window
    return range(min(lo, m_best), max(hi, m_best) + 1)


def truncation_bounds(params: CombParams, env: EnvelopeModel, rel_tol: float) -> range:
    """Contiguous range of line indices ``m`` worth summing.

    Every line left out has envelope power below ``rel_tol`` times the
    strongest included line. Each end is then widened by
    ``ceil(4 * sigma_m / mu_rep)`` lines so that the Gaussian tails of the
    outermost significant lines are not cut off.
    """
    if not 0 < rel_tol < 1:
        raise TruncationError(f"rel_tol must be in (0, 1), got {rel_tol}")
    core = _significant_lines(params, env, rel_tol)
    lo, hi = core.start, core.stop - 1
    lo -= math.ceil(4.0 * float(params.line_sigma(lo)) / params.mu_rep)
    hi += math.ceil(4.0 * float(params.line_sigma(hi)) / params.mu_rep)
    return range(lo, hi + 1)


def narrowest_sigma(params: CombParams, ms: range) -> float:
    return float(np.min(params.line_sigma(np.arange(ms.start, ms.stop))))


def check_resolution(params: CombParams, grid: FrequencyGrid, ms: range) -> None:
    """Require ``delta_nu <= sigma_min / 4``; ``sigma_min`` equals sigma_ceo when m=0 is summed."""
    sigma_min = narrowest_sigma(params, ms)
    if sigma_min == 0.0:
        raise DegenerateVarianceError(
            "zero-variance comb line in the m-range; use delta_comb() for the deterministic comb"
        )
    if grid.delta_nu > sigma_min / 4.0:
        raise ResolutionError(
            f"grid step {grid.delta_nu} exceeds sigma_min/4 = {sigma_min / 4.0}: narrowest line unresolved"
        )


def positive_term(params: CombParams, env: EnvelopeModel, nu: ArrayLike, ms: range) -> NDArray:
    """One-sided spectrum ``|P(nu - nu_c)|^2 * sum_m Q_m(nu)`` (no factor 1/4).

    The m-sum runs in ascending order for every point.
    """
    nu = np.asarray(nu, dtype=float)
    acc = np.zeros_like(nu)
    for m in ms:
        acc += line_component(params, m, nu)
    return env.power(nu) * acc


def psd_analytic(
    params: CombParams,
    env: EnvelopeModel,
    grid: FrequencyGrid,
    trunc: TruncationPolicy | None = None,
) -> SpectralDensity:
    """Two-sided ensemble-averaged PSD sampled on ``grid`` (raw, not normalized)."""
    ms = (trunc or TruncationPolicy()).resolve(params, env)
    check_resolution(params, grid, ms)
    nu = grid.nu
    values = 0.25 * (positive_term(params, env, nu, ms) + positive_term(params, env, -nu, ms))
    return SpectralDensity(grid, values, normalized=False)


def one_sided(
    params: CombParams,
    env: EnvelopeModel,
    grid: FrequencyGrid,
    trunc: TruncationPolicy | None = None,
) -> SpectralDensity:
    """Positive-frequency half scaled by 4, i.e. ``|P|^2 sum_m Q_m`` on the unit-envelope scale."""
    ms = (trunc or TruncationPolicy()).resolve(params, env)
    check_resolution(params, grid, ms)
    return SpectralDensity(grid, positive_term(params, env, grid.nu, ms), normalized=False)


def delta_comb(params: CombParams, env: EnvelopeModel, trunc: TruncationPolicy | None = None) -> DeltaComb:
    """Mean comb as discrete lines, the representation used when both sigmas vanish.

    Weights are the integrated line powers ``1/4 |P(+-nu_m -+ nu_c)|^2`` for
    both halves; positions are sorted ascending.
    """
    r = (trunc or TruncationPolicy()).resolve(params, env)
    ms = np.arange(r.start, r.stop)
    centers = params.line_center(ms)
    pos = np.concatenate([-centers, centers])
    w = np.concatenate([0.25 * env.power(centers), 0.25 * env.power(centers)])
    mm = np.concatenate([ms, ms])
    order = np.argsort(pos, kind="stable")
    return DeltaComb(positions=pos[order], weights=w[order], m=mm[order])


def normalize(sd: SpectralDensity) -> SpectralDensity:
    total = sd.integral()
    if not total > 0:
        raise ZeroIntegralError("cannot normalize a density with zero integral")
    values = sd.values / total
    return SpectralDensity(sd.grid, values, normalized=True)


def coherence_from_weights(
    grid: FrequencyGrid, weights: ArrayLike, tau_count: int | None = None
) -> CoherenceFunction:
    """``Gamma(tau) = sum_k w_k exp(+i 2 pi nu_k tau)`` on the conjugate delay grid.

    The delay step is ``1 / (n_fft * delta_nu)`` with ``n_fft = max(count, tau_count)``;
    zero padding beyond the grid only refines the delay sampling. The returned
    delays are centred on zero.
    """
    w = np.asarray(weights, dtype=float)
    n = grid.count
    tau_count = n if tau_count is None else int(tau_count)
    if tau_count < 1:
        raise GridError("tau_count must be >= 1")
    n_fft = max(n, tau_count)
    spec = n_fft * np.fft.ifft(w, n=n_fft)
    j = np.fft.fftfreq(n_fft, d=1.0 / n_fft).astype(int)
    tau = j / (n_fft * grid.delta_nu)
    gamma = np.exp(2j * np.pi * grid.nu_start * tau) * spec
    gamma[0] = math.fsum(w)
    order = np.argsort(tau, kind="stable")
    tau, gamma = tau[order], gamma[order]
    centre = int(np.searchsorted(tau, 0.0))
    lo = centre - tau_count // 2
    return CoherenceFunction(tau[lo : lo + tau_count], gamma[lo : lo + tau_count])


def mutual_coherence(sd: SpectralDensity, tau_count: int | None = None) -> CoherenceFunction:
    """Inverse Fourier transform of ``sd`` by trapezoid quadrature.

    ``Gamma(0)`` is exactly the trapezoid integral of the density.
    """
    return coherence_from_weights(sd.grid, sd.grid.trapezoid_weights() * sd.values, tau_count)
