"""Experiment description and the flat key=value config file format.

Recognized keys (one per line, ``key = value``, ``#`` starts a comment):

    M                 transmit antennas (int, required)
    K                 user count (int, required)
    N_k               per-user receive antennas, comma list or one int for all
    L_k               per-user stream counts, comma list or one int for all
    B                 feedback bits per quantized vector (int, required)
    B_s_list          shape-bit values to sweep (comma list of ints)
    snr_db_list       SNR grid in dB (comma list of reals; default 0..30 by 5)
    trials            Monte Carlo trials per grid point (default 100000)
    master_seed       64-bit reproducibility seed (default 0)
    modulation        qpsk | 16qam (default 16qam)
    sigma2            receiver noise variance (default 1.0)
    training_samples  codebook training sample count (default 1000000)
    sigmaE2_source    analytic | empirical  (default analytic)

Environment overrides: SGVQ_MASTER_SEED replaces master_seed, SGVQ_OUTPUT_DIR
replaces the CLI output directory.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .channel import SystemConfig
from .modulation import get_modulation

__all__ = [
    "ExperimentSpec",
    "parse_experiment_text",
    "parse_experiment_file",
    "env_master_seed",
    "env_output_dir",
    "DEFAULT_SNR_GRID",
]

DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

SEED_ENV = "SGVQ_MASTER_SEED"
OUTDIR_ENV = "SGVQ_OUTPUT_DIR"


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one experiment grid."""

    M: int
    K: int
    N: tuple
    L: tuple
    B: int
    B_s_list: tuple = ()
    snr_db_list: tuple = DEFAULT_SNR_GRID
    trials: int = 100000
    master_seed: int = 0
    modulation: str = "16qam"
    sigma2: float = 1.0
    training_samples: int = 1000000
    sigmaE2_source: str = "analytic"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.training_samples < 1:
            raise ValueError("training_samples must be at least 1")
        if self.B < 0:
            raise ValueError("B must be nonnegative")
        for b_s in self.B_s_list:
            if not 0 <= b_s <= self.B:
                raise ValueError("every B_s must lie in [0, B]")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        get_modulation(self.modulation)  # raises on unknown scheme
        if self.sigmaE2_source not in ("analytic", "empirical"):
            raise ValueError("sigmaE2_source must be 'analytic' or 'empirical'")
        # dimension checks happen in SystemConfig; run them now at unit power
        self.system_config(1.0)

    def system_config(self, P_max):
        return SystemConfig(
            M=self.M,
            K=self.K,
            N=self.N,
            L=self.L,
            P_max=P_max,
            sigma2=self.sigma2,
            B=self.B,
        )

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


def _parse_int_list(text):
    return tuple(int(tok) for tok in text.replace(",", " ").split())

def _parse_float_list(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


_REQUIRED = ("M", "K", "N_k", "L_k", "B")

_PARSERS = {
    "M": int,
    "K": int,
    "N_k": _parse_int_list,
    "L_k": _parse_int_list,
    "B": int,
    "B_s_list": _parse_int_list,
    "snr_db_list": _parse_float_list,
    "trials": int,
    "master_seed": int,
    "modulation": str,
    "sigma2": float,
    "training_samples": int,
    "sigmaE2_source": str,
}


def parse_experiment_text(text):
    """Parse the flat key=value format into an ExperimentSpec."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in body.split("=", 1))
        if key not in _PARSERS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            raw[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ValueError(f"missing required keys: {', '.join(missing)}")
    K = raw["K"]
    N = raw.pop("N_k")
    L = raw.pop("L_k")
    if len(N) == 1:
        N = N * K
    if len(L) == 1:
        L = L * K
    return ExperimentSpec(N=N, L=L, **raw)


def parse_experiment_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_experiment_text(fh.read())


def env_master_seed(environ=None):
    """Master-seed override from the environment, or None."""
    environ = os.environ if environ is None else environ
    val = environ.get(SEED_ENV)
    if val is None or val == "":
        return None
    return int(val)


def env_output_dir(environ=None):
    """Output-directory override from the environment, or None."""
    environ = os.environ if environ is None else environ
    val = environ.get(OUTDIR_ENV)
    return val if val else None
