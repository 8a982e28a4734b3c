"""Rendering of sweep reports: delimited text plus matplotlib figures.

Every figure function takes a SweepReport straight from the simulation layer
and writes a PNG next to the CSV, so a report directory is self-describing.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_gain_curve",
    "render_shape_curve",
    "render_bitalloc",
    "render_smse",
    "render_ber",
    "render_ccdf",
    "render_allocation",
]

_DPI = 130


def _finish(fig, ax, path, xlabel, ylabel, title):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_gain_curve(report, path):
    """Gain quantizer distortion vs bit count, log scale, with the model line."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    b = report.column("B_g")
    ax.semilogy(b, report.column("distortion_mean"), "o-", label="trained codebook")
    ax.semilogy(b, report.column("analytic_distortion"), "k--", label="high-rate law")
    _finish(fig, ax, path, "gain bits", "mean squared gain error", "Gain quantization")


def render_shape_curve(report, path):
    """Shape quantizer distortion vs bit count with bound and series."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    b = report.column("B_s")
    ax.semilogy(b, report.column("distortion_mean"), "o-", label="random codebook")
    ax.semilogy(b, report.column("analytic_bound"), "k--", label="upper bound")
    ax.semilogy(b, report.column("series"), "g:", label="mean series")
    _finish(fig, ax, path, "shape bits", "mean squared shape error", "Shape quantization")


def render_bitalloc(report, path):
    """Feedback distortion vs the shape/gain split of a fixed bit budget."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    b = report.column("B_s")
    ax.errorbar(
        b,
        report.column("distortion_mean"),
        yerr=report.column("distortion_stderr"),
        fmt="o-",
        capsize=3,
        label="measured",
    )
    ax.plot(b, report.column("analytic_distortion"), "k--", label="distortion law")
    ax.set_yscale("log")
    _finish(fig, ax, path, "shape bits", "mean squared feedback error", "Bit allocation")


def _series_split(report, ycol):
    """Group rows by the B_s column, preserving first appearance order."""
    b_col = report.column("B_s")
    snr = report.column("snr_db")
    y = report.column(ycol)
    out = []
    for b in dict.fromkeys(b_col.tolist()):
        mask = b_col == b
        out.append((int(b), snr[mask], y[mask]))
    return out


def render_smse(report, path):
    """Sum MSE vs SNR, one curve per shape-bit choice."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for b, snr, y in _series_split(report, "smse_mean"):
        lbl = "perfect CSI" if b < 0 else f"B_s = {b}"
        ax.semilogy(snr, y, "o-", label=lbl)
    for b, snr, y in _series_split(report, "predicted_smse"):
        ax.semilogy(snr, y, "--", color="gray", alpha=0.6)
    _finish(fig, ax, path, "SNR (dB)", "sum MSE", "Downlink sum MSE")


def render_ber(report, path):
    """Bit error rate vs SNR, one curve per shape-bit choice."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for b, snr, y in _series_split(report, "ber_mean"):
        lbl = "perfect CSI" if b < 0 else f"B_s = {b}"
        ax.semilogy(snr, np.maximum(y, 1e-12), "o-", label=lbl)
    _finish(fig, ax, path, "SNR (dB)", "bit error rate", "Uncoded BER")


def render_allocation(report, model, path):
    """Fitted distortion law over the bit split with both optima marked."""
    from .allocation import total_distortion

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    B = int(report.column("B")[0])
    bs = np.linspace(0.0, B, 481)
    ax.semilogy(bs, total_distortion(bs, B - bs, model), label="distortion law")
    real_bs = float(report.column("real_B_s")[0])
    int_bs = int(report.column("int_B_s")[0])
    ax.axvline(real_bs, color="k", linestyle="--", label=f"real optimum {real_bs:.1f}")
    ax.plot(
        [int_bs],
        [total_distortion(int_bs, B - int_bs, model)],
        "r*",
        markersize=12,
        label=f"integer optimum {int_bs}",
    )
    _finish(fig, ax, path, "shape bits", "total distortion", "Optimal bit split")


def render_ccdf(report, path):
    """CCDF of the minimum squared shape distance: MC vs analytic forms."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    x = report.column("sqdist")
    ax.plot(x, report.column("mc_ccdf"), label="Monte Carlo")
    ax.plot(x, report.column("exact_ccdf"), "k--", label="exact")
    ax.plot(x, report.column("approx_ccdf_angle"), ":", label="approx (angle)")
    ax.plot(x, report.column("approx_ccdf_smallangle"), "-.", label="approx (small angle)")
    _finish(fig, ax, path, "squared distance", "CCDF", "Minimum shape distance")
