"""Splitting a feedback bit budget between shape and gain quantizers.

Total distortion of the product quantizer in the high-rate regime:

    D(B_s, B_g) = Ks_bar * 2**(-2 B_s / (2M-1)) + Kg * 2**(-2 B_g)

with Ks_bar = K_s * E[g^2] folding the mean squared gain into the shape term.
Under B_s + B_g = B the objective is convex in B_s; its stationary point is
available in closed form, and the integer optimum is found by exhaustive
search (the budget is small).  At the real optimum the total scales as
2**(-B/M), i.e. adding M bits halves the distortion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DistortionModel",
    "BitAllocation",
    "total_distortion",
    "optimal_real_allocation",
    "optimal_integer_allocation",
    "asymptotic_allocation",
    "distortion_at_optimum",
    "distortion_scaling_constant",
    "fit_constants_empirical",
]


@dataclass(frozen=True)
class DistortionModel:
    """Constants of the two-term distortion law."""

    Kg: float
    Ks_bar: float
    M: int

    def __post_init__(self):
        if not (self.Kg > 0 and self.Ks_bar > 0):
            raise ValueError("distortion constants must be positive")
        if self.M < 1:
            raise ValueError("M must be a positive integer")


@dataclass(frozen=True)
class BitAllocation:
    """An integer split of B feedback bits, with the unrounded optimum kept."""

    B: int
    B_s: int
    B_g: int
    real_Bs: float

    def __post_init__(self):
        if self.B_s < 0 or self.B_g < 0 or self.B_s + self.B_g != self.B:
            raise ValueError("split must be nonnegative and sum to B")


def total_distortion(B_s, B_g, model):
    """Shape term plus gain term; accepts scalars or arrays of bit counts."""
    B_s = np.asarray(B_s, dtype=float)
    B_g = np.asarray(B_g, dtype=float)
    if np.any(B_s < 0) or np.any(B_g < 0):
        raise ValueError("bit counts must be nonnegative")
    out = model.Ks_bar * 2.0 ** (-2.0 * B_s / (2 * model.M - 1)) + model.Kg * 2.0 ** (
        -2.0 * B_g
    )
    if out.ndim == 0:
        return float(out)
    return out


def optimal_real_allocation(model, B):
    """Stationary point of the budgeted objective, clamped to [0, B].

    B_s = (2M-1)/(2M) * B + (2M-1)/(4M) * log2(Ks_bar / (Kg (2M-1))),
    B_g the remainder.
    """
    if B < 0:
        raise ValueError("budget must be nonnegative")
    M = model.M
    B_s = (2 * M - 1) / (2 * M) * B + (2 * M - 1) / (4 * M) * math.log2(
        model.Ks_bar / (model.Kg * (2 * M - 1))
    )
    B_s = min(max(B_s, 0.0), float(B))
    return B_s, B - B_s


def optimal_integer_allocation(model, B):
    """Exhaustive minimization over integer splits; ties go to larger B_s."""
    if B < 0:
        raise ValueError("budget must be nonnegative")
    best, best_d = 0, math.inf
    for b_s in range(B + 1):
        d = total_distortion(b_s, B - b_s, model)
        if d <= best_d:
            best, best_d = b_s, d
    real_Bs, _ = optimal_real_allocation(model, B)
    return BitAllocation(B=B, B_s=best, B_g=B - best, real_Bs=real_Bs)


def asymptotic_allocation(M, B):
    """Large-budget limit: the constant offset drops, leaving fixed fractions
    B_s = (2M-1)B/(2M) and B_g = B/(2M)."""
    if B < 0:
        raise ValueError("budget must be nonnegative")
    return (2 * M - 1) * B / (2 * M), B / (2 * M)


def distortion_at_optimum(model, B):
    """Total distortion at the (clamped) real optimum split."""
    B_s, B_g = optimal_real_allocation(model, B)
    return total_distortion(B_s, B_g, model)


def distortion_scaling_constant(model, B):
    """D_c such that the optimal distortion equals D_c * 2**(-B/M).

    Constant in B while the optimum stays interior.
    """
    return distortion_at_optimum(model, B) * 2.0 ** (B / model.M)


def fit_constants_empirical(gain_curve, shape_curve, Eg2, M):
    """Distortion-law constants from measured (bits, distortion) curves.

    Each measured point yields one estimate of its constant by removing the
    known rate slope; the geometric mean over points is returned.  The shape
    constant is scaled by ``Eg2`` to fold in the gain power.
    """
    gain_curve = list(gain_curve)
    shape_curve = list(shape_curve)
    if len(gain_curve) < 3 or len(shape_curve) < 3:
        raise ValueError("need at least 3 points per curve")
    if Eg2 <= 0:
        raise ValueError("mean squared gain must be positive")
    for _, d in gain_curve + shape_curve:
        if d <= 0:
            raise ValueError("distortions must be positive")
    log_kg = [math.log2(d) + 2.0 * b for b, d in gain_curve]
    log_ks = [math.log2(d) + 2.0 * b / (2 * M - 1) for b, d in shape_curve]
    Kg = 2.0 ** (sum(log_kg) / len(log_kg))
    Ks = 2.0 ** (sum(log_ks) / len(log_ks))
    return DistortionModel(Kg=Kg, Ks_bar=Ks * Eg2, M=M)
