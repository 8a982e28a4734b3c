"""Full-scale benchmark suite: the nine headline behaviors of the toolkit.

Every test runs the reference configuration (M = 2 transmit antennas, two
single-stream users, 16 feedback bits, master seed 123) at its stated scale
and prints one PASS/FAIL line with the measured numbers before asserting.
"""

import time
from fractions import Fraction

import mpmath
import numpy as np

from sgvq import sim
from sgvq.allocation import (
    DistortionModel,
    distortion_at_optimum,
    optimal_integer_allocation,
    optimal_real_allocation,
    total_distortion,
)
from sgvq.config import ExperimentSpec
from sgvq.precoder import (
    NoiseModel,
    QuantizedCSI,
    optimize_virtual_uplink_power,
    smse_gradient,
)
from sgvq.shape import analytic_shape_distortion, ks_constant, shape_distortion_series

BENCH = ExperimentSpec(
    M=2,
    K=2,
    N=(2, 2),
    L=(1, 1),
    B=16,
    B_s_list=(9, 10, 11, 12, 13, 14, 15, 16),
    snr_db_list=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    trials=100000,
    master_seed=123,
    training_samples=100000,
)

REFERENCE = DistortionModel(Kg=1.0, Ks_bar=39.9098, M=2)


def _verdict(num, slug, checks, detail):
    ok = all(flag for flag, _ in checks)
    print(f"criterion {num} ({slug}): {'PASS' if ok else 'FAIL'} -- {detail}")
    failed = [msg for flag, msg in checks if not flag]
    assert not failed, f"criterion {num} ({slug}): " + "; ".join(failed)


def _interior_models(count, seed, B=16.0):
    """Models whose real optimum sits strictly inside (1, B-1)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        model = DistortionModel(
            Kg=float(rng.uniform(0.2, 3.0)),
            Ks_bar=float(rng.uniform(0.5, 60.0)),
            M=int(rng.integers(1, 4)),
        )
        bs, _ = optimal_real_allocation(model, B)
        if 1.0 < bs < B - 1.0:
            out.append(model)
    return out


def test_criterion_1_gain_distortion_law():
    t0 = time.monotonic()
    rep = sim.gain_distortion_curve(
        BENCH.replace(training_samples=10**6), bits_list=(6, 7, 8, 9, 10)
    )
    wall = time.monotonic() - t0
    bits = rep.column("B_g")
    emp = rep.column("distortion_mean")
    ana = rep.column("analytic_distortion")
    slope = float(np.polyfit(bits, np.log2(emp), 1)[0])
    ratios = ana / emp
    checks = [
        (abs(slope + 2.0) < 0.15, f"slope {slope:.4f} outside -2 +/- 0.15"),
        (
            bool(np.all((ratios > 0.7) & (ratios < 1.4))),
            f"analytic/empirical ratios {ratios} leave [0.7, 1.4]",
        ),
        (wall <= 120.0, f"runtime {wall:.1f} s exceeds 120 s"),
    ]
    _verdict(
        1,
        "gain distortion law",
        checks,
        f"slope {slope:.3f}, ratios [{ratios.min():.3f}, {ratios.max():.3f}], {wall:.1f} s",
    )


def test_criterion_2_shape_distortion_bound():
    t0 = time.monotonic()
    rep = sim.shape_distortion_curve(BENCH, bits_list=tuple(range(6, 15)), queries=10**4)
    wall = time.monotonic() - t0
    bits = rep.column("B_s")
    emp = rep.column("distortion_mean")
    bound = rep.column("analytic_bound")
    slope = float(np.polyfit(bits, np.log2(emp), 1)[0])
    gap = np.log2(bound) - np.log2(emp)
    checks = [
        (bool(np.all(emp < bound)), "empirical distortion exceeds the bound somewhere"),
        (abs(slope + 2.0 / 3.0) < 0.05, f"slope {slope:.4f} outside -2/3 +/- 0.05"),
        (float(gap.std()) < 0.15, f"log2 gap wanders: std {gap.std():.3f}"),
        (wall <= 300.0, f"runtime {wall:.1f} s exceeds 300 s"),
    ]
    _verdict(
        2,
        "shape distortion bound",
        checks,
        f"slope {slope:.4f}, gap {gap.mean():.3f} +/- {gap.std():.3f} bits, {wall:.1f} s",
    )


def test_criterion_3_bit_allocation_optimum():
    t0 = time.monotonic()
    model = sim.fitted_distortion_model(BENCH)
    real_bs, real_bg = optimal_real_allocation(model, BENCH.B)
    alloc = optimal_integer_allocation(model, BENCH.B)
    rep = sim.sweep_bit_allocation(BENCH.replace(trials=20000))
    wall = time.monotonic() - t0
    bs = rep.column("B_s")
    mean = rep.column("distortion_mean")
    se = rep.column("distortion_stderr")
    i_min = int(np.argmin(mean))
    best = int(bs[i_min])
    i_13 = int(np.flatnonzero(bs == 13)[0])
    margin = float(mean[i_13] - mean[i_min])
    combined_se = float(np.hypot(se[i_13], se[i_min]))
    checks = [
        (abs(real_bs - 13.4) < 0.3, f"real shape bits {real_bs:.3f} outside 13.4 +/- 0.3"),
        (abs(real_bg - 2.6) < 0.3, f"real gain bits {real_bg:.3f} outside 2.6 +/- 0.3"),
        ((alloc.B_s, alloc.B_g) == (13, 3), f"integer split ({alloc.B_s},{alloc.B_g}) != (13,3)"),
        (best in (12, 13, 14), f"empirical argmin B_s={best} outside 12..14"),
        (margin <= combined_se, f"split 13 sits {margin:.2e} above the minimum (> 1 se)"),
        (wall <= 600.0, f"runtime {wall:.1f} s exceeds 600 s"),
    ]
    _verdict(
        3,
        "bit allocation optimum",
        checks,
        f"real ({real_bs:.2f},{real_bg:.2f}), integer ({alloc.B_s},{alloc.B_g}), "
        f"sweep argmin {best}, {wall:.1f} s",
    )


def test_criterion_4_system_ordering():
    t0 = time.monotonic()
    spec = BENCH.replace(B_s_list=(12, 13, 16))
    smse, ber = sim.link_sweep(spec)
    wall = time.monotonic() - t0

    def separations(rep, value_col, err_col):
        snr = rep.column("snr_db")
        series = rep.column("B_s")
        val = rep.column(value_col)
        err = rep.column(err_col)
        seps = []
        for s in spec.snr_db_list:
            if s < 10.0:
                continue
            at = {int(b): (v, e) for b, v, e in zip(series[snr == s], val[snr == s], err[snr == s])}
            for b in (12, 13):
                gap = at[16][0] - at[b][0]
                seps.append(gap / np.hypot(at[16][1], at[b][1]))
        return float(min(seps))

    smse_sep = separations(smse, "smse_mean", "smse_stderr")
    ber_sep = separations(ber, "ber_mean", "ber_stderr")
    checks = [
        (smse_sep > 3.0, f"smallest SMSE separation {smse_sep:.2f} sigma <= 3"),
        (ber_sep > 3.0, f"smallest BER separation {ber_sep:.2f} sigma <= 3"),
        (wall <= 1800.0, f"runtime {wall:.1f} s exceeds 1800 s"),
    ]
    _verdict(
        4,
        "system ordering",
        checks,
        f"min separation {smse_sep:.1f} sigma (SMSE), {ber_sep:.1f} sigma (BER), {wall:.0f} s",
    )


def test_criterion_5_ccdf_fidelity():
    t0 = time.monotonic()
    rep = sim.ccdf_compare(2, 10, 10**5, sim.trial_stream(123, "acceptance-ccdf", 0))
    wall = time.monotonic() - t0
    mc = rep.column("mc_ccdf")
    exact = rep.column("exact_ccdf")
    gap_mc = float(np.max(np.abs(mc - exact)))
    gap_angle = float(np.max(np.abs(exact - rep.column("approx_ccdf_angle"))))
    gap_small = float(np.max(np.abs(exact - rep.column("approx_ccdf_smallangle"))))
    checks = [
        (gap_mc < 0.01, f"sup|MC - exact| = {gap_mc:.4f} >= 0.01"),
        (gap_angle < 0.02, f"sup|exact - angle approx| = {gap_angle:.4f} >= 0.02"),
        (gap_small < 0.02, f"sup|exact - small-angle approx| = {gap_small:.4f} >= 0.02"),
        (wall <= 120.0, f"runtime {wall:.1f} s exceeds 120 s"),
    ]
    _verdict(
        5,
        "ccdf fidelity",
        checks,
        f"gaps {gap_mc:.4f} (MC), {gap_angle:.4f}/{gap_small:.4f} (approx), {wall:.1f} s",
    )


def test_criterion_6_allocation_stationarity():
    worst_grad = worst_curv = worst_stat = 0.0
    B = 16.0
    for model in _interior_models(25, seed=1606) + [REFERENCE]:
        bs, bg = optimal_real_allocation(model, B)
        h = 1e-4
        fd = (
            total_distortion(bs + h, B - bs - h, model)
            - total_distortion(bs - h, B - bs + h, model)
        ) / (2 * h)
        worst_grad = max(worst_grad, abs(fd) / total_distortion(bs, bg, model))
        grid = np.linspace(0.25, B - 0.25, 64)
        vals = total_distortion(grid, B - grid, model)
        curv = np.diff(vals, 2)
        worst_curv = max(worst_curv, float(-curv.min() / vals.max()))
        m = model.M
        lhs = model.Ks_bar / (2 * m - 1) * 2.0 ** (-2.0 * bs / (2 * m - 1))
        rhs = model.Kg * 2.0 ** (-2.0 * bg)
        worst_stat = max(worst_stat, abs(lhs - rhs) / rhs)
    checks = [
        (worst_grad < 1e-6, f"finite-difference gradient {worst_grad:.2e} >= 1e-6"),
        (worst_curv < 1e-9, f"negative curvature {worst_curv:.2e} on the grid"),
        (worst_stat < 1e-9, f"stationarity identity off by {worst_stat:.2e}"),
    ]
    _verdict(
        6,
        "allocation stationarity",
        checks,
        f"gradient {worst_grad:.1e}, curvature {worst_curv:.1e}, identity {worst_stat:.1e}",
    )


def test_criterion_7_series_and_bound_machinery():
    worst_series = 0.0
    for M in (2, 3):
        for bits in range(1, 7):  # codebooks up to N = 2**6
            N = 2**bits
            c = Fraction(2, 2 * M - 1)
            total = Fraction(0)
            binom = 1
            for k in range(N + 1):
                total += Fraction((-1) ** k * binom) / (c + k)
                binom = binom * (N - k) // (k + 1)
            exact = ks_constant(M).K3 * float(c) * float(total)
            val = shape_distortion_series(M, bits)
            worst_series = max(worst_series, abs(val - exact) / exact)

    kershaw_ok = True
    min_margin = np.inf
    with mpmath.workdps(50):
        for M in (2, 3, 4):
            t = mpmath.mpf(1) - mpmath.mpf(2) / (2 * M - 1)
            for e in range(4, 17):
                y = mpmath.mpf(2) ** e
                lhs = mpmath.gamma(y + t) / mpmath.gamma(y + 1)
                rhs = (y + t / 2) ** (t - 1)
                kershaw_ok = kershaw_ok and (lhs < rhs)
                min_margin = min(min_margin, float((rhs - lhs) / rhs))

    dominance_ok = all(
        analytic_shape_distortion(M, bits) > shape_distortion_series(M, bits)
        for M in (2, 3, 4)
        for bits in range(1, 15)
    )
    checks = [
        (worst_series < 1e-9, f"series vs rational sum off by {worst_series:.2e}"),
        (kershaw_ok, "gamma-ratio inequality violated"),
        (dominance_ok, "closed-form bound fails to dominate the series"),
    ]
    _verdict(
        7,
        "series and bound machinery",
        checks,
        f"series error {worst_series:.1e}, gamma-ratio margin >= {min_margin:.1e}",
    )


def test_criterion_8_precoder_correctness():
    t0 = time.monotonic()
    smse, _ = sim.link_sweep(
        BENCH.replace(trials=10000), series=[None], label="accept8", collect_ber=False
    )
    wall = time.monotonic() - t0
    z = np.abs(smse.column("smse_mean") - smse.column("predicted_smse")) / smse.column(
        "smse_stderr"
    )
    worst_z = float(z.max())

    rng = np.random.default_rng(1608)
    worst_budget = -np.inf
    worst_balance = 0.0
    for _ in range(40):
        M = int(rng.integers(2, 5))
        L = int(rng.integers(2, M + 1))
        F = rng.standard_normal((M, L)) + 1j * rng.standard_normal((M, L))
        F /= np.linalg.norm(F, axis=0)
        csi = QuantizedCSI(F_hat=F, labels=[(i, 0) for i in range(L)])
        for P in (1.0, 10.0, 100.0):
            noise = NoiseModel(sigma2=1.0, sigmaE2=0.0, P_max=P)
            q = optimize_virtual_uplink_power(csi, noise)
            worst_budget = max(worst_budget, (q.sum() - P) / P)
            g = smse_gradient(csi, q, noise)
            active = g[q > 1e-8 * P]
            worst_balance = max(
                worst_balance, float((active.max() - active.min()) / abs(np.mean(active)))
            )
    checks = [
        (worst_z <= 3.0, f"Monte Carlo SMSE departs prediction by {worst_z:.2f} sigma"),
        (worst_budget <= 1e-9, f"power budget exceeded by {worst_budget:.2e} relative"),
        (worst_balance < 1e-5, f"active-stream gradient imbalance {worst_balance:.2e}"),
    ]
    _verdict(
        8,
        "precoder correctness",
        checks,
        f"max |z| {worst_z:.2f}, budget slack {worst_budget:.1e}, "
        f"balance {worst_balance:.1e}, {wall:.1f} s",
    )


def test_criterion_9_overall_scaling():
    worst = 0.0
    # interior at B=8 implies interior at every larger budget, so the clamp
    # in the optimum never engages on this family
    for model in _interior_models(25, seed=1609, B=8.0) + [REFERENCE]:
        for B in (8.0, 16.0, 24.0):
            ratio = distortion_at_optimum(model, B + model.M) / distortion_at_optimum(model, B)
            worst = max(worst, abs(ratio - 0.5) / 0.5)
    checks = [(worst < 1e-9, f"halving ratio off by {worst:.2e} relative")]
    _verdict(9, "overall scaling", checks, f"max |ratio - 1/2| / (1/2) = {worst:.1e}")
