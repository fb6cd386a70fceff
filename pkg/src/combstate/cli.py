"""Command-line driver.

Exit codes: 0 success, 2 validation failure (bad config, flags or grid),
3 acceptance-gate failure (``oracle`` only).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, fig1_config, load_config
from .linefit import fit_lines
from .oracle import mc_psd
from .spectral import SpectralError, mutual_coherence, normalize, one_sided, psd_analytic
from .state import (
    MixedCoherentState,
    coherence_time,
    photon_number_pmf,
    purity,
    single_photon_state,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_GATE = 3

ORACLE_L2_GATE = 0.05
# below this the Monte Carlo noise alone exceeds the gate; report without judging
ORACLE_MIN_GATED_SAMPLES = 100_000

DEFAULT_FORMATS = {
    "psd": ("csv", "json"),
    "oracle": ("csv", "json"),
    "state": ("csv", "json"),
    "coherence": ("csv", "json"),
    "fig1": ("csv", "svg"),
}


def _formats(args, cfg: RunConfig, command: str) -> set[str]:
    if args.format:
        return set(args.format)
    return set(cfg.formats or DEFAULT_FORMATS[command])


def _outdir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output_directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _state_tau_count(cfg: RunConfig) -> int:
    return cfg.tau_count or 4 * cfg.grid.count


def cmd_psd(cfg: RunConfig, out: Path, formats: set[str]) -> int:
    raw = psd_analytic(cfg.comb, cfg.envelope, cfg.grid, cfg.trunc)
    norm = normalize(raw)
    if "csv" in formats:
        io.write_density_csv(out / "psd.csv", raw)
        io.write_density_csv(out / "psd_normalized.csv", norm)
    if "json" in formats:
        ms = cfg.trunc.resolve(cfg.comb, cfg.envelope)
        peaks = fit_lines(raw, cfg.comb, cfg.envelope, cfg.trunc)
        io.write_json(
            out / "meta.json",
            {
                "truncation": {"m_min": ms.start, "m_max": ms.stop - 1, "rel_tol": cfg.trunc.rel_tol},
                "integral": raw.integral(),
                "grid": {"start": cfg.grid.nu_start, "step": cfg.grid.delta_nu, "count": cfg.grid.count},
                "peaks": [p.as_dict() for p in peaks],
            },
        )
    if "svg" in formats:
        io.write_line_plot(out / "psd.svg", raw.nu, [(raw.values, "S", "k-")], "frequency", "S")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out: Path, formats: set[str]) -> int:
    reference = None
    if cfg.oracle.reference is not None:
        try:
            reference = io.density_from_csv(cfg.oracle.reference)
        except (OSError, ValueError) as exc:
            raise ConfigError("oracle.reference", str(exc)) from None
        if not reference.grid.same_as(cfg.grid):
            raise ConfigError("oracle.reference", "reference grid does not match the configured grid")
    report = mc_psd(
        cfg.comb,
        cfg.envelope,
        cfg.grid,
        cfg.oracle.n_samples,
        cfg.oracle.seed,
        cfg.trunc,
        reference=reference,
    )
    applied = cfg.oracle.n_samples >= ORACLE_MIN_GATED_SAMPLES
    passed = report.l2_error_vs_analytic < ORACLE_L2_GATE
    status = ("pass" if passed else "fail") if applied else "insufficient samples"
    doc = report.to_dict()
    doc["gate"] = {"applied": applied, "l2_threshold": ORACLE_L2_GATE, "status": status}
    if "csv" in formats:
        io.write_density_csv(out / "oracle.csv", report.estimate)
    if "json" in formats:
        io.write_json(out / "oracle_report.json", doc)
    if "svg" in formats:
        ref = reference or psd_analytic(cfg.comb, cfg.envelope, cfg.grid, cfg.trunc)
        io.write_line_plot(
            out / "oracle.svg",
            ref.nu,
            [(report.estimate.values, "Monte Carlo", "C1-"), (ref.values, "analytic", "k--")],
            "frequency",
            "S",
        )
    print(f"oracle: n={report.n_samples} seed={report.seed} l2={report.l2_error_vs_analytic:.4g} [{status}]")
    return EXIT_GATE if applied and not passed else EXIT_OK


def cmd_state(cfg: RunConfig, out: Path, formats: set[str]) -> int:
    if cfg.alpha_sq is None:
        raise ConfigError("state.alpha_sq", "missing required key for the state command")
    sd = normalize(psd_analytic(cfg.comb, cfg.envelope, cfg.grid, cfg.trunc))
    rho = single_photon_state(sd)
    pmf, tail = photon_number_pmf(MixedCoherentState(rho, cfg.alpha_sq))
    n = np.arange(pmf.size)
    doc = {
        "trace": rho.trace(),
        "purity": purity(rho),
        "coherence_time": coherence_time(rho, _state_tau_count(cfg)),
        "alpha_sq": cfg.alpha_sq,
        "mean_photon_number": math.fsum(n * pmf),
        "photon_pmf": pmf.tolist(),
        "tail_mass": tail,
    }
    if "json" in formats:
        io.write_json(out / "state.json", doc)
    if "csv" in formats:
        io.write_csv(out / "rho_diag.csv", ["nu", "p"], [rho.nu, rho.probs])
    if "svg" in formats:
        io.write_line_plot(out / "rho_diag.svg", rho.nu, [(rho.probs, "p", "k-")], "frequency", "p")
    return EXIT_OK


def cmd_coherence(cfg: RunConfig, out: Path, formats: set[str]) -> int:
    sd = normalize(psd_analytic(cfg.comb, cfg.envelope, cfg.grid, cfg.trunc))
    tau_count = _state_tau_count(cfg)
    gamma = mutual_coherence(sd, tau_count)
    if "csv" in formats:
        io.write_csv(
            out / "coherence.csv",
            ["tau", "re", "im", "abs"],
            [gamma.tau, gamma.values.real, gamma.values.imag, gamma.magnitude],
        )
    if "json" in formats:
        io.write_json(
            out / "coherence.json",
            {
                "coherence_time": coherence_time(sd, tau_count),
                "gamma0": float(gamma.values[gamma.zero_index].real),
                "tau_step": float(gamma.tau[1] - gamma.tau[0]),
                "tau_count": tau_count,
            },
        )
    if "svg" in formats:
        io.write_line_plot(out / "coherence.svg", gamma.tau, [(gamma.magnitude, "|Gamma|", "k-")], "delay", "|Gamma|")
    return EXIT_OK


def cmd_fig1(cfg: RunConfig, out: Path, formats: set[str]) -> int:
    """One-sided PSD on the unit-envelope scale next to the envelope itself."""
    sd = one_sided(cfg.comb, cfg.envelope, cfg.grid, cfg.trunc)
    envelope = cfg.envelope(sd.nu)
    if "csv" in formats:
        io.write_csv(out / "fig1.csv", ["nu", "S", "envelope"], [sd.nu, sd.values, envelope])
    if "json" in formats:
        peaks = fit_lines(sd, cfg.comb, cfg.envelope, cfg.trunc)
        io.write_json(out / "fig1_peaks.json", {"peaks": [p.as_dict() for p in peaks]})
    if "svg" in formats:
        io.write_line_plot(
            out / "fig1.svg",
            sd.nu,
            [(sd.values, "power spectral density", "k-"), (envelope, "envelope", "b--")],
            "frequency (arb. units)",
            "arb. units",
        )
    return EXIT_OK


COMMANDS = {
    "psd": cmd_psd,
    "oracle": cmd_oracle,
    "state": cmd_state,
    "coherence": cmd_coherence,
    "fig1": cmd_fig1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="combstate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="run configuration (flat dotted key = value)", required=name != "fig1")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--seed", type=int, help="override oracle.seed")
        p.add_argument("--samples", type=int, help="override oracle.n_samples")
        p.add_argument("--format", action="append", choices=["csv", "json", "svg"], help="restrict outputs; repeatable")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else fig1_config()
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed", "must be >= 0")
            cfg = replace(cfg, oracle=replace(cfg.oracle, seed=args.seed))
        if args.samples is not None:
            if args.samples < 1:
                raise ConfigError("--samples", "must be >= 1")
            cfg = replace(cfg, oracle=replace(cfg.oracle, n_samples=args.samples))
        out = _outdir(args, cfg)
        return COMMANDS[args.command](cfg, out, _formats(args, cfg, args.command))
    except (ConfigError, SpectralError, OSError) as exc:
        print(f"combstate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
