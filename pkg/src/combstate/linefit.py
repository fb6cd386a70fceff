"""Peak detection and line-shape fitting on sampled comb spectra.

Comb lines far from the carrier ride on a steep envelope, which drags the raw
maximum of ``S`` towards the carrier and narrows it. The fit therefore works on
the envelope-compensated profile ``S(nu) / |P(nu - nu_c)|^2``, where each line
is a plain Gaussian, and fits every line in the window jointly so that
overlapping neighbours do not bias one another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import argrelmax

from .spectral import CombParams, EnvelopeModel, SpectralDensity, TruncationPolicy

# below this envelope power the compensated profile is numerically meaningless
_MIN_ENVELOPE_POWER = 1e-200


@dataclass(frozen=True)
class LineFit:
    m: int
    center: float
    width: float
    ratio: float  # fitted peak of S / |P|^2
    height: float  # ratio * |P(center - nu_c)|^2
    raw_position: float | None
    raw_height: float | None

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "position": self.center,
            "height": self.height,
            "fitted_width": self.width,
            "height_over_envelope_sq": self.ratio,
            "raw_max_position": self.raw_position,
            "raw_max_height": self.raw_height,
        }


def raw_local_maxima(sd: SpectralDensity) -> np.ndarray:
    """Grid indices of strict local maxima of the sampled density."""
    return argrelmax(sd.values)[0]


def _mixture(theta: np.ndarray, nu: np.ndarray) -> np.ndarray:
    a, c, s = theta[0::3], theta[1::3], theta[2::3]
    d = (nu[:, None] - c[None, :]) / s[None, :]
    return np.exp(-0.5 * d * d) @ a


def fit_lines(
    sd: SpectralDensity,
    params: CombParams,
    env: EnvelopeModel,
    trunc: TruncationPolicy | None = None,
) -> list[LineFit]:
    """Fit every positive-frequency comb line whose centre lies on the grid.

    The model is ``|P(nu - nu_c)|^2 * sum_m a_m exp(-(nu - c_m)^2 / (2 s_m^2))``.
    Lines centred just outside the grid whose tails reach into it are fitted
    as well but not reported.
    """
    ms = (trunc or TruncationPolicy()).resolve(params, env)
    nu = sd.nu
    env_pow = env.power(nu)
    keep = (env_pow > _MIN_ENVELOPE_POWER) & (nu >= 0)
    nu_fit, y = nu[keep], sd.values[keep] / env_pow[keep]
    if nu_fit.size == 0:
        return []
    lo, hi = nu_fit[0], nu_fit[-1]

    m_all = np.arange(ms.start, ms.stop)
    centers = params.line_center(m_all)
    sigmas = params.line_sigma(m_all)
    near = (centers > 0) & (centers + 6 * sigmas >= lo) & (centers - 6 * sigmas <= hi)
    m_fit = m_all[near]
    if m_fit.size == 0:
        return []

    # initial peak heights read off the data at the nominal centres
    c0, s0 = centers[near], sigmas[near]
    a0 = np.interp(c0, nu_fit, y)
    a0 = np.where(a0 > 0, a0, y.max())
    theta0 = np.column_stack([a0, c0, s0]).ravel()
    lower = np.column_stack([np.zeros_like(a0), c0 - 0.5 * params.mu_rep, 0.05 * s0]).ravel()
    upper = np.column_stack([np.full_like(a0, np.inf), c0 + 0.5 * params.mu_rep, 20 * s0]).ravel()

    res = least_squares(
        lambda th: _mixture(th, nu_fit) - y,
        theta0,
        bounds=(lower, upper),
        x_scale="jac",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    theta = res.x

    maxima = raw_local_maxima(sd)
    fits = []
    for k, m in enumerate(m_fit):
        a, c, s = theta[3 * k : 3 * k + 3]
        if not lo <= c0[k] <= hi:
            continue
        near_max = maxima[np.abs(nu[maxima] - c0[k]) < 0.5 * params.mu_rep]
        if near_max.size:
            i = near_max[np.argmax(sd.values[near_max])]
            raw_pos, raw_h = float(nu[i]), float(sd.values[i])
        else:
            raw_pos = raw_h = None
        fits.append(
            LineFit(
                m=int(m),
                center=float(c),
                width=float(s),
                ratio=float(a),
                height=float(a * env.power(c)),
                raw_position=raw_pos,
                raw_height=raw_h,
            )
        )
    return fits
