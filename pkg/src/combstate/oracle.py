"""Brute-force checks of the analytic comb spectrum.

Two independent routes lead back to the closed form:

* Monte Carlo: draw ``(nu_ceo, nu_rep)`` pairs, drop every resulting comb line
  into a frequency histogram and average.
* Time domain: synthesize the real pulse train of one draw and estimate its
  finite-duration spectrum with a periodogram.

Random draws come from a counter-based Philox stream; draw ``i`` lives in
block ``i // BLOCK_SIZE`` whose generator is keyed by ``(seed, block)``, so any
split of the sample range over workers reproduces the sequential result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .spectral import (
    CombParams,
    EnvelopeModel,
    FrequencyGrid,
    GridError,
    SpectralDensity,
    TruncationPolicy,
    check_resolution,
    psd_analytic,
)

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class SampleDraw:
    nu_ceo: float
    nu_rep: float


@dataclass(frozen=True)
class SignalSpec:
    dt: float
    count: int
    t_start: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.count < 2:
            raise ValueError("count must be >= 2")


@dataclass(frozen=True)
class TimeSignal:
    t_start: float
    dt: float
    values: NDArray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("signal must be one-dimensional")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def duration_T(self) -> float:
        return self.count * self.dt

    @property
    def t(self) -> NDArray:
        return self.t_start + self.dt * np.arange(self.count)


@dataclass(frozen=True)
class OracleReport:
    estimate: SpectralDensity
    n_samples: int
    seed: int
    sup_error_vs_analytic: float
    l2_error_vs_analytic: float

    def to_dict(self) -> dict:
        g = self.estimate.grid
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "sup_error": self.sup_error_vs_analytic,
            "l2_error": self.l2_error_vs_analytic,
            "grid": {"start": g.nu_start, "step": g.delta_nu, "count": g.count},
        }


# --------------------------------------------------------------------------
# Random draws
# --------------------------------------------------------------------------


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent Philox stream for one block of draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_params(params: CombParams, rng: np.random.Generator) -> SampleDraw:
    """One independent normal pair; consumes two standard normals (ceo, then rep)."""
    z = rng.standard_normal(2)
    return SampleDraw(
        nu_ceo=float(params.mu_ceo + params.sigma_ceo * z[0]),
        nu_rep=float(params.mu_rep + params.sigma_rep * z[1]),
    )


def draw_block(params: CombParams, seed: int, block: int, size: int = BLOCK_SIZE) -> tuple[NDArray, NDArray]:
    """Arrays ``(nu_ceo, nu_rep)`` for the first ``size`` draws of ``block``.

    Identical to calling :func:`sample_params` ``size`` times on
    ``block_generator(seed, block)``.
    """
    z = block_generator(seed, block).standard_normal((size, 2))
    return params.mu_ceo + params.sigma_ceo * z[:, 0], params.mu_rep + params.sigma_rep * z[:, 1]


def draws(params: CombParams, seed: int, start: int, stop: int) -> tuple[NDArray, NDArray]:
    """Draws with global indices ``start <= i < stop``."""
    ceo, rep = [], []
    for b in range(start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE + 1 if stop > start else 0):
        lo = max(start, b * BLOCK_SIZE) - b * BLOCK_SIZE
        hi = min(stop, (b + 1) * BLOCK_SIZE) - b * BLOCK_SIZE
        c, r = draw_block(params, seed, b, hi)
        ceo.append(c[lo:hi])
        rep.append(r[lo:hi])
    if not ceo:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(ceo), np.concatenate(rep)


# --------------------------------------------------------------------------
# Monte Carlo spectrum
# --------------------------------------------------------------------------


def _block_histogram(
    params: CombParams, env: EnvelopeModel, grid: FrequencyGrid, ms: NDArray, seed: int, block: int, size: int
) -> NDArray:
    nu_ceo, nu_rep = draw_block(params, seed, block, size)
    pos = nu_ceo[:, None] + ms[None, :] * nu_rep[:, None]
    # positive half: weight 1/4 |P(nu - nu_c)|^2 at +nu_m; negative half mirrors it
    w = 0.25 * env.power(pos)
    pos = np.concatenate([pos.ravel(), -pos.ravel()])
    w = np.concatenate([w.ravel(), w.ravel()])
    idx = np.floor((pos - grid.nu_start) / grid.delta_nu + 0.5).astype(np.int64)
    inside = (idx >= 0) & (idx < grid.count)
    return np.bincount(idx[inside], weights=w[inside], minlength=grid.count)


def mc_histogram(
    params: CombParams,
    env: EnvelopeModel,
    grid: FrequencyGrid,
    n_samples: int,
    seed: int,
    trunc: TruncationPolicy | None = None,
    workers: int = 1,
) -> SpectralDensity:
    """Monte Carlo estimate of the two-sided PSD by line deposition.

    Each draw deposits ``1/4 |P(+-nu_m -+ nu_c)|^2`` into the grid cell of width
    ``delta_nu`` containing ``+-nu_m``; the histogram is divided by
    ``n_samples * delta_nu``. Per-block histograms are summed in ascending
    block order whatever the number of workers.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    ms_range = (trunc or TruncationPolicy()).resolve(params, env)
    if params.sigma_ceo > 0 or params.sigma_rep > 0:
        check_resolution(params, grid, ms_range)
    ms = np.arange(ms_range.start, ms_range.stop, dtype=float)

    n_blocks = math.ceil(n_samples / BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE) for b in range(n_blocks)]

    def job(b):
        return _block_histogram(params, env, grid, ms, seed, b, sizes[b])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_blocks)))
    else:
        parts = [job(b) for b in range(n_blocks)]

    total = np.zeros(grid.count)
    for part in parts:
        total += part
    return SpectralDensity(grid, total / (n_samples * grid.delta_nu), normalized=False)


def compare(estimate: SpectralDensity, reference: SpectralDensity, positive_only: bool = True) -> tuple[float, float]:
    """Relative sup and L2 distances, both scaled by the reference.

    ``sup = max|est - ref| / max(ref)`` and ``l2 = ||est - ref|| / ||ref||``,
    evaluated over ``nu >= 0`` when ``positive_only``.
    """
    if not estimate.grid.same_as(reference.grid):
        raise GridError("estimate and reference are sampled on different grids")
    mask = estimate.nu >= 0 if positive_only else np.ones(estimate.grid.count, bool)
    est, ref = estimate.values[mask], reference.values[mask]
    if ref.size == 0 or not np.any(ref > 0):
        raise ValueError("reference density vanishes on the comparison range")
    diff = est - ref
    return float(np.max(np.abs(diff)) / np.max(ref)), float(np.linalg.norm(diff) / np.linalg.norm(ref))


def mc_psd(
    params: CombParams,
    env: EnvelopeModel,
    grid: FrequencyGrid,
    n_samples: int,
    seed: int,
    trunc: TruncationPolicy | None = None,
    workers: int = 1,
    reference: SpectralDensity | None = None,
) -> OracleReport:
    """Monte Carlo estimate plus its distance to the analytic PSD on the same grid."""
    est = mc_histogram(params, env, grid, n_samples, seed, trunc, workers)
    ref = reference if reference is not None else psd_analytic(params, env, grid, trunc)
    sup, l2 = compare(est, ref)
    return OracleReport(est, n_samples, seed, sup, l2)


# --------------------------------------------------------------------------
# Time domain
# --------------------------------------------------------------------------


def synth_pulse_train(
    draw: SampleDraw,
    env: EnvelopeModel,
    trunc: range,
    spec: SignalSpec,
) -> TimeSignal:
    """Real pulse train ``g(t) = sum_m |P(nu_m - nu_c)| cos(2 pi nu_m t)``.

    Only lines with ``nu_m > 0`` are used; the cosines are all in phase at
    ``t = 0``. Raises ``ValueError`` if the signal spans fewer than ten
    repetition periods or a line lies at or above the Nyquist frequency.
    """
    if spec.count * spec.dt < 10.0 / draw.nu_rep:
        raise ValueError("signal must cover at least 10 repetition periods")
    ms = np.arange(trunc.start, trunc.stop)
    nu_m = draw.nu_ceo + ms * draw.nu_rep
    nu_m = nu_m[nu_m > 0]
    if nu_m.size and nu_m.max() >= 0.5 / spec.dt:
        raise ValueError(f"line at {nu_m.max()} is not below the Nyquist frequency {0.5 / spec.dt}")
    weights = np.abs(env(nu_m))
    t = spec.t_start + spec.dt * np.arange(spec.count)
    g = np.zeros(spec.count)
    for nu, w in zip(nu_m, weights):
        g += w * np.cos(2.0 * np.pi * nu * t)
    return TimeSignal(spec.t_start, spec.dt, g)


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def periodogram(signal: TimeSignal) -> SpectralDensity:
    """Finite-duration PSD ``|FT_T[g](nu)|^2 / T`` with a rectangular window.

    The signal is zero-padded to a power of two; ``T`` stays the unpadded
    duration. The result is two-sided on the conjugate grid, ascending.
    """
    n = _next_pow2(signal.count)
    T = signal.duration_T
    spec = signal.dt * np.fft.fft(signal.values, n=n)
    power = np.fft.fftshift(spec.real**2 + spec.imag**2) / T
    dnu = 1.0 / (n * signal.dt)
    return SpectralDensity(FrequencyGrid(-(n // 2) * dnu, dnu, n), power, normalized=False)


def autocorrelation(signal: TimeSignal) -> NDArray:
    """Circular autocorrelation ``R[k] = (1/N) sum_n g[(n + k) mod N] g[n]``.

    Evaluated directly in the time domain, lag by lag (``R[k]`` belongs to
    delay ``k * dt``; negative delays are ``R[N - k]``).
    """
    g = signal.values
    n = g.size
    ext = np.concatenate([g, g])
    out = np.empty(n)
    block = 256
    for k0 in range(0, n, block):
        k1 = min(n, k0 + block)
        rows = np.lib.stride_tricks.sliding_window_view(ext[k0 : k1 + n - 1], n)
        out[k0:k1] = rows @ g
    return out / n


def wiener_khintchine_residual(signal: TimeSignal) -> float:
    """Relative L2 gap between the periodogram and the transform of the autocorrelation."""
    n = _next_pow2(signal.count)
    if n != signal.count:
        padded = np.zeros(n)
        padded[: signal.count] = signal.values
        signal = TimeSignal(signal.t_start, signal.dt, padded)
    direct = np.fft.ifftshift(periodogram(signal).values)
    via_r = signal.dt * np.fft.fft(autocorrelation(signal)).real
    norm = np.linalg.norm(direct)
    if norm == 0.0:
        return 0.0 if np.linalg.norm(via_r) == 0.0 else math.inf
    return float(np.linalg.norm(direct - via_r) / norm)


def epsilon_estimate(nu: ArrayLike, nu_prime: ArrayLike, T: ArrayLike) -> NDArray:
    """Finite-``T`` epsilon function ``(1/T) int_{-T/2}^{T/2} exp(i 2 pi (nu - nu') t) dt``.

    Closed form ``sin(pi x) / (pi x)`` with ``x = (nu - nu') * T``; real,
    exactly 1 at ``nu == nu'``.
    """
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("T must be > 0")
    x = (np.asarray(nu, dtype=float) - np.asarray(nu_prime, dtype=float)) * T
    return np.sinc(x)
