"""Monte Carlo engine: codebook training, downlink trials, and sweeps.

Determinism contract: every random quantity of trial ``t`` under purpose
``label`` comes from ``default_rng(SeedSequence((master_seed, hash(label),
t)))``, so runs with the same master seed are reproducible to the byte and
trials never share a stream.  Within a trial the draw order is frozen:
channels for users 0..K-1, then symbol bits, then receiver noise for users
0..K-1.

The per-trial physics: each user's channel is decomposed into its dominant
modes, the per-stream vectors H v (one column per stream) are shape-gain
quantized and fed back, the transmitter optimizes virtual uplink powers and
builds the MMSE precoder, and each receiver applies its per-stream MMSE
scalar to the combined observation.  Batched helpers vectorize the identical
arithmetic across trials.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .allocation import total_distortion
from .allocation import DistortionModel, fit_constants_empirical
from .channel import (
    dominant_modes,
    dominant_modes_batch,
    estimate_eigen_stats,
    sample_channel,
    sample_channel_batch,
)
from .config import ExperimentSpec
from .gain import (
    analytic_gain_distortion,
    kg_constant,
    params_from_stats,
    quantize_gain,
    quantize_gain_batch,
    train_gain_codebook,
)
from .modulation import get_modulation
from .precoder import (
    NoiseModel,
    QuantizedCSI,
    mmse_precoder,
    mmse_precoder_batch,
    optimize_power_batch,
    optimize_virtual_uplink_power,
    predicted_smse_batch,
)
from .shape import (
    analytic_shape_distortion,
    approx_min_ccdf,
    approx_min_ccdf_smallangle,
    empirical_shape_distortion,
    exact_min_ccdf,
    generate_shape_codebook,
    ks_constant,
    quantize_shape,
    quantize_shape_batch,
    random_shapes,
    shape_distortion_series,
)

__all__ = [
    "SweepReport",
    "TrialResult",
    "trial_stream",
    "derived_seed",
    "gain_sample_ensemble",
    "train_codebooks",
    "eigen_stats",
    "analytic_distortion_model",
    "sigma_e2_value",
    "quantize_csi",
    "quantize_vectors_batch",
    "run_downlink_trial",
    "link_sweep",
    "sweep_smse",
    "sweep_ber",
    "sweep_bit_allocation",
    "gain_distortion_curve",
    "shape_distortion_curve",
    "fitted_distortion_model",
    "allocate_report",
    "ccdf_compare",
]

_CHUNK = 4096


# ---------------------------------------------------------------------------
# random stream derivation


def _label_int(label):
    return int.from_bytes(hashlib.blake2s(label.encode("utf-8"), digest_size=8).digest(), "big")


def trial_stream(master_seed, label, index):
    """Independent generator for one (purpose, trial) pair."""
    ss = np.random.SeedSequence((master_seed, _label_int(label), index))
    return np.random.default_rng(ss)


def derived_seed(master_seed, label):
    """Stable 63-bit integer seed for objects that record their seed."""
    digest = hashlib.blake2s(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


# ---------------------------------------------------------------------------
# reports


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


@dataclass
class SweepReport:
    """A small result table: column names, tuple rows, free-form metadata."""

    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name):
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])

    def to_csv(self, path):
        """Header row plus one line per row; floats at 12 significant digits."""
        with open(path, "w", encoding="ascii") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def _mean_se(sums, sqsums, n):
    """Mean and standard error from per-chunk partial sums (compensated)."""
    mean = math.fsum(sums) / n
    if n < 2:
        return mean, 0.0
    var = max(0.0, (math.fsum(sqsums) - n * mean * mean) / (n - 1))
    return mean, math.sqrt(var / n)


# ---------------------------------------------------------------------------
# codebooks and model constants


@lru_cache(maxsize=None)
def _gain_ensemble(spec, count, label):
    """Pooled gain samples ||H v|| over all configured streams."""
    cfg = spec.system_config(1.0)
    rng = trial_stream(spec.master_seed, label, 0)
    per_draw = sum(spec.L)
    draws = -(-count // per_draw)
    parts = []
    done = 0
    while done < draws:
        n = min(16384, draws - done)
        for k in range(spec.K):
            if spec.L[k] == 0:
                continue
            H = sample_channel_batch(cfg, k, rng, n)
            sv = np.linalg.svd(H, compute_uv=False)
            parts.append(sv[:, : spec.L[k]].ravel())
        done += n
    return np.concatenate(parts)[:count]


def gain_sample_ensemble(spec, count, label="train-gain"):
    return _gain_ensemble(spec, count, label).copy()


@lru_cache(maxsize=None)
def train_codebooks(spec, B_s):
    """Gain codebook by k-means on sampled gains, shape codebook by seed.

    The shape seed is derived from the master seed and B_s, so retraining
    with the same spec reproduces both codebooks exactly.
    """
    if not 0 <= B_s <= spec.B:
        raise ValueError("B_s must lie in [0, B]")
    gains = _gain_ensemble(spec, spec.training_samples, "train-gain")
    gain_cb = train_gain_codebook(gains, spec.B - B_s)
    shape_cb = generate_shape_codebook(
        spec.M, B_s, derived_seed(spec.master_seed, f"shape-codebook-{B_s}")
    )
    return gain_cb, shape_cb


@lru_cache(maxsize=None)
def eigen_stats(spec, user=0, order=0, trials=100000):
    rng = trial_stream(spec.master_seed, f"eigen-stats-{user}-{order}", 0)
    return estimate_eigen_stats(spec.system_config(1.0), order, trials, rng, user=user)


@lru_cache(maxsize=None)
def analytic_distortion_model(spec):
    """Distortion-law constants averaged over the configured streams.

    Homogeneous setups (equal N_k, single dominant stream each) collapse to
    the dominant-mode constants.
    """
    kgs, egs = [], []
    for k in range(spec.K):
        for i in range(spec.L[k]):
            st = eigen_stats(spec, user=k, order=i)
            params = params_from_stats(spec.M, spec.N[k], i, st.lambda_tilde)
            kgs.append(kg_constant(params).K_g)
            egs.append(st.Eg2)
    Kg = float(np.mean(kgs))
    Eg2 = float(np.mean(egs))
    return DistortionModel(Kg=Kg, Ks_bar=ks_constant(spec.M).K_s * Eg2, M=spec.M)


@lru_cache(maxsize=None)
def sigma_e2_value(spec, B_s):
    """Quantization-error variance the transmitter assumes per fed-back vector."""
    if spec.sigmaE2_source == "analytic":
        model = analytic_distortion_model(spec)
        return float(total_distortion(B_s, spec.B - B_s, model))
    gain_cb, shape_cb = train_codebooks(spec, B_s)
    count = 10000
    sums = []
    n_vec = 0
    for t0 in range(0, count, _CHUNK):
        n = min(_CHUNK, count - t0)
        H, _, _ = _draw_trial_inputs(spec, "sigma-e2", t0, n, want_symbols=False)
        F, _ = _stream_vectors_batch(spec, H)
        _, dist = quantize_vectors_batch(F, gain_cb, shape_cb)
        sums.append(float(np.sum(dist)))
        n_vec += dist.size
    return math.fsum(sums) / n_vec


# ---------------------------------------------------------------------------
# trial inputs and CSI extraction


def _draw_trial_inputs(spec, label, start, count, want_symbols=True):
    """Channels (and optionally bits, noise) for trials [start, start+count).

    One generator per trial; the in-trial draw order is part of the
    reproducibility contract (see module docstring).
    """
    cfg = spec.system_config(1.0)
    mod = get_modulation(spec.modulation)
    L_total = sum(spec.L)
    nbits = L_total * mod.bits_per_symbol
    H = [np.empty((count, spec.M, spec.N[k]), dtype=complex) for k in range(spec.K)]
    bits = np.empty((count, nbits), dtype=np.int64) if want_symbols else None
    noise = (
        [np.empty((count, spec.N[k]), dtype=complex) for k in range(spec.K)]
        if want_symbols
        else None
    )
    scale = math.sqrt(spec.sigma2 / 2.0)
    for i in range(count):
        rng = trial_stream(spec.master_seed, label, start + i)
        for k in range(spec.K):
            H[k][i] = sample_channel(cfg, k, rng)
        if want_symbols:
            bits[i] = rng.integers(0, 2, nbits)
            for k in range(spec.K):
                noise[k][i] = scale * (
                    rng.standard_normal(spec.N[k]) + 1j * rng.standard_normal(spec.N[k])
                )
    return H, bits, noise


def _stream_vectors_batch(spec, H_list):
    """Physical per-stream vectors F (T, M, L_total) plus receive combiners.

    Returns (F, combiners) where combiners[l] = (user, v vectors (T, N_k))
    for stream column l.
    """
    T = H_list[0].shape[0]
    L_total = sum(spec.L)
    F = np.empty((T, spec.M, L_total), dtype=complex)
    combiners = []
    col = 0
    for k in range(spec.K):
        if spec.L[k] == 0:
            continue
        _, V, _ = dominant_modes_batch(H_list[k], spec.L[k])
        for i in range(spec.L[k]):
            F[:, :, col] = np.einsum("tmn,tn->tm", H_list[k], V[:, :, i])
            combiners.append((k, V[:, :, i]))
            col += 1
    return F, combiners


def quantize_vectors_batch(F, gain_cb, shape_cb):
    """Shape-gain quantize each stream column; returns (F_hat, sq distortion)."""
    T, _, L = F.shape
    Fh = np.empty_like(F)
    dist = np.empty((T, L))
    for l in range(L):
        z = F[:, :, l]
        g = np.linalg.norm(z, axis=1)
        s = z / np.where(g > 0, g, 1.0)[:, None]
        _, ghat = quantize_gain_batch(g, gain_cb)
        _, shat = quantize_shape_batch(s, shape_cb)
        Fh[:, :, l] = ghat[:, None] * shat
        dist[:, l] = np.sum(np.abs(z - Fh[:, :, l]) ** 2, axis=1)
    return Fh, dist


def quantize_csi(F, gain_cb, shape_cb, labels=None):
    """Quantize the columns of one M x L matrix of stream vectors."""
    F = np.asarray(F, dtype=complex)
    if labels is None:
        labels = tuple((0, i) for i in range(F.shape[1]))
    Fh, _ = quantize_vectors_batch(F[None, :, :], gain_cb, shape_cb)
    return QuantizedCSI(F_hat=Fh[0], labels=tuple(labels))


# ---------------------------------------------------------------------------
# single reference trial


@dataclass
class TrialResult:
    """Everything one downlink trial records."""

    sq_errors: np.ndarray
    distortion: np.ndarray
    bits_sent: int
    bit_errors: int
    predicted_smse: float


def run_downlink_trial(spec, snr_db, B_s, codebooks, rng, sigma_e2=None, power_mode="optimal"):
    """One full downlink trial; the unbatched reference implementation.

    ``codebooks`` is the (gain, shape) pair; None bypasses the quantizer
    (perfect CSI at the transmitter, zero assumed error variance).
    ``power_mode`` selects the virtual-uplink power vector: "optimal" runs
    the minimizer, "equal" spreads the budget uniformly across streams —
    useful as a baseline when checking that optimizing actually helps.
    """
    mod = get_modulation(spec.modulation)
    P = 10.0 ** (snr_db / 10.0) * spec.sigma2
    cfg = spec.system_config(P)
    L_total = sum(spec.L)
    labels = cfg.stream_labels

    H = [sample_channel(cfg, k, rng) for k in range(spec.K)]
    bits = rng.integers(0, 2, L_total * mod.bits_per_symbol)
    scale = math.sqrt(spec.sigma2 / 2.0)
    noise = [
        scale * (rng.standard_normal(spec.N[k]) + 1j * rng.standard_normal(spec.N[k]))
        for k in range(spec.K)
    ]

    F = np.empty((spec.M, L_total), dtype=complex)
    combiners = []
    col = 0
    for k in range(spec.K):
        modes = dominant_modes(H[k], spec.L[k]) if spec.L[k] else []
        for mode in modes:
            # same contraction as the batched engine, bit for bit
            F[:, col] = np.einsum("mn,n->m", H[k], mode.v)
            combiners.append((k, mode.v))
            col += 1

    if codebooks is None:
        F_hat = F.copy()
        dist = np.zeros(L_total)
        se2 = 0.0
    else:
        gain_cb, shape_cb = codebooks
        F_hat = np.empty_like(F)
        for l in range(L_total):
            g = float(np.linalg.norm(F[:, l]))
            s = F[:, l] / g if g > 0 else np.eye(spec.M, dtype=complex)[:, 0]
            _, ghat = quantize_gain(g, gain_cb)
            _, shat = quantize_shape(s, shape_cb)
            F_hat[:, l] = ghat * shat
        dist = np.sum(np.abs(F - F_hat) ** 2, axis=0)
        se2 = sigma_e2_value(spec, B_s) if sigma_e2 is None else sigma_e2

    noise_model = NoiseModel(sigma2=spec.sigma2, sigmaE2=se2, P_max=P)
    csi = QuantizedCSI(F_hat=F_hat, labels=labels)
    if power_mode == "optimal":
        q = optimize_virtual_uplink_power(csi, noise_model)
    elif power_mode == "equal":
        q = np.full(L_total, P / L_total)
    else:
        raise ValueError("power_mode must be 'optimal' or 'equal'")
    sol = mmse_precoder(csi, q, noise_model)

    x = mod.modulate(bits)
    tx_cols = sol.U * np.sqrt(sol.p)
    amp = F.conj().T @ tx_cols  # amp[i, j] = true channel i -> precoder column j
    den = np.sum(np.abs(amp) ** 2, axis=1) + spec.sigma2
    lam = np.conj(np.diagonal(amp)) / den
    ntilde = np.array([np.vdot(v, noise[k]) for k, v in combiners])
    xhat = lam * (amp @ x + ntilde)

    sq_errors = np.abs(xhat - x) ** 2
    bhat = mod.demodulate(xhat)
    return TrialResult(
        sq_errors=sq_errors,
        distortion=dist,
        bits_sent=int(bits.size),
        bit_errors=int(np.sum(bhat != bits)),
        predicted_smse=sol.predicted_smse,
    )


# ---------------------------------------------------------------------------
# batched link sweeps


def link_sweep(spec, series=None, label="link", collect_ber=True):
    """SMSE and BER versus SNR, one curve per shape-bit value.

    ``series`` entries are B_s integers; None means perfect transmitter CSI
    (reported with B_s = -1).  Channels, symbols, and noise are shared across
    series and SNR points (common random numbers), so curve differences are
    paired comparisons.
    """
    if series is None:
        series = list(spec.B_s_list)
    if not series:
        raise ValueError("no shape-bit series requested")
    mod = get_modulation(spec.modulation)
    L_total = sum(spec.L)
    nbits = L_total * mod.bits_per_symbol
    cbs = {b: train_codebooks(spec, b) for b in series if b is not None}
    se2 = {b: (sigma_e2_value(spec, b) if b is not None else 0.0) for b in series}
    P_list = [10.0 ** (s / 10.0) * spec.sigma2 for s in spec.snr_db_list]

    acc = {
        (b, s): {"e": [], "e2": [], "pred": [], "berr": [], "berr2": []}
        for b in series
        for s in spec.snr_db_list
    }
    for t0 in range(0, spec.trials, _CHUNK):
        count = min(_CHUNK, spec.trials - t0)
        H, bits, noise = _draw_trial_inputs(spec, label, t0, count)
        F, combiners = _stream_vectors_batch(spec, H)
        x = mod.modulate(bits.ravel()).reshape(count, L_total)
        ntilde = np.empty((count, L_total), dtype=complex)
        for col, (k, v) in enumerate(combiners):
            ntilde[:, col] = np.einsum("tn,tn->t", v.conj(), noise[k])
        for b in series:
            if b is None:
                F_hat = F
            else:
                F_hat, _ = quantize_vectors_batch(F, *cbs[b])
            for snr_db, P in zip(spec.snr_db_list, P_list):
                rho = spec.sigma2 + se2[b] * P / spec.M
                q = optimize_power_batch(F_hat, rho, P)
                U, p = mmse_precoder_batch(F_hat, q, rho)
                pred = predicted_smse_batch(F_hat, q, rho)
                amp = np.einsum("tmi,tmj->tij", F.conj(), U, optimize=True)
                amp *= np.sqrt(p)[:, None, :]
                den = np.sum(np.abs(amp) ** 2, axis=2) + spec.sigma2
                lam = np.conj(np.einsum("tii->ti", amp)) / den
                xhat = lam * (np.einsum("tij,tj->ti", amp, x) + ntilde)
                err = np.abs(xhat - x) ** 2
                smse_t = err.sum(axis=1)
                slot = acc[(b, snr_db)]
                slot["e"].append(float(np.sum(smse_t)))
                slot["e2"].append(float(np.sum(smse_t * smse_t)))
                slot["pred"].append(float(np.sum(pred)))
                if collect_ber:
                    bhat = mod.demodulate(xhat.ravel()).reshape(count, nbits)
                    e_t = np.sum(bhat != bits, axis=1)
                    slot["berr"].append(float(np.sum(e_t)))
                    slot["berr2"].append(float(np.sum(e_t * e_t)))

    n = spec.trials
    smse_rows, ber_rows = [], []
    for b in series:
        b_col = -1 if b is None else b
        for snr_db in spec.snr_db_list:
            slot = acc[(b, snr_db)]
            mean, se = _mean_se(slot["e"], slot["e2"], n)
            pred_mean = math.fsum(slot["pred"]) / n
            smse_rows.append((snr_db, b_col, mean, se, pred_mean, n))
            if collect_ber:
                errs = math.fsum(slot["berr"])
                frac_mean, frac_se = _mean_se(
                    [v / nbits for v in slot["berr"]],
                    [v / nbits**2 for v in slot["berr2"]],
                    n,
                )
                ber_rows.append(
                    (snr_db, b_col, frac_mean, frac_se, n * nbits, int(errs), n)
                )

    meta = {"modulation": spec.modulation, "trials": str(n)}
    smse = SweepReport(
        columns=("snr_db", "B_s", "smse_mean", "smse_stderr", "predicted_smse", "trials"),
        rows=smse_rows,
        meta=meta,
    )
    ber = SweepReport(
        columns=("snr_db", "B_s", "ber_mean", "ber_stderr", "bits", "bit_errors", "trials"),
        rows=ber_rows,
        meta=meta,
    )
    return smse, ber


def sweep_smse(spec):
    """Monte Carlo SMSE vs SNR for every configured B_s."""
    smse, _ = link_sweep(spec, collect_ber=False)
    return smse


def sweep_ber(spec):
    """Monte Carlo bit error rate vs SNR for every configured B_s."""
    _, ber = link_sweep(spec, collect_ber=True)
    return ber


# ---------------------------------------------------------------------------
# quantizer-only sweeps


def sweep_bit_allocation(spec):
    """Mean feedback quantization distortion versus the shape/gain bit split."""
    if not spec.B_s_list:
        raise ValueError("B_s_list must be nonempty")
    model = analytic_distortion_model(spec)
    rows = []
    for B_s in spec.B_s_list:
        gain_cb, shape_cb = train_codebooks(spec, B_s)
        sums, sqs = [], []
        n_vec = 0
        for t0 in range(0, spec.trials, _CHUNK):
            count = min(_CHUNK, spec.trials - t0)
            H, _, _ = _draw_trial_inputs(spec, "bitalloc", t0, count, want_symbols=False)
            F, _ = _stream_vectors_batch(spec, H)
            _, dist = quantize_vectors_batch(F, gain_cb, shape_cb)
            d = dist.ravel()
            sums.append(float(np.sum(d)))
            sqs.append(float(np.sum(d * d)))
            n_vec += d.size
        mean, se = _mean_se(sums, sqs, n_vec)
        analytic = float(total_distortion(B_s, spec.B - B_s, model))
        rows.append((B_s, spec.B - B_s, mean, se, analytic, n_vec))
    return SweepReport(
        columns=(
            "B_s",
            "B_g",
            "distortion_mean",
            "distortion_stderr",
            "analytic_distortion",
            "vectors",
        ),
        rows=rows,
        meta={"B": str(spec.B)},
    )


def gain_distortion_curve(spec, bits_list=(6, 7, 8, 9, 10)):
    """Trained-codebook gain distortion vs bit count, with the analytic law."""
    model = analytic_distortion_model(spec)
    train = _gain_ensemble(spec, spec.training_samples, "train-gain")
    test = _gain_ensemble(spec, spec.training_samples, "gain-curve")
    rows = []
    for b in bits_list:
        cb = train_gain_codebook(train, b)
        _, rec = quantize_gain_batch(test, cb)
        err = (test - rec) ** 2
        mean = float(np.mean(err))
        se = float(np.std(err, ddof=1) / math.sqrt(err.size))
        rows.append((b, mean, se, float(analytic_gain_distortion(b, _KgModel(model.Kg))), err.size))
    return SweepReport(
        columns=("B_g", "distortion_mean", "distortion_stderr", "analytic_distortion", "samples"),
        rows=rows,
        meta={},
    )


class _KgModel:
    """Adapter so the curve reuses the analytic gain law with a plain constant."""

    def __init__(self, K_g):
        self.K_g = K_g


def shape_distortion_curve(spec, bits_list=tuple(range(6, 15)), queries=10000):
    """Random-VQ shape distortion vs bit count, with bound and series."""
    shapes = random_shapes(spec.M, queries, trial_stream(spec.master_seed, "shape-curve", 0))
    rows = []
    for b in bits_list:
        cb = generate_shape_codebook(
            spec.M, b, derived_seed(spec.master_seed, f"shape-codebook-{b}")
        )
        _, rec = quantize_shape_batch(shapes, cb)
        err = np.sum(np.abs(shapes - rec) ** 2, axis=1)
        mean = float(np.mean(err))
        se = float(np.std(err, ddof=1) / math.sqrt(queries))
        rows.append(
            (
                b,
                mean,
                se,
                float(analytic_shape_distortion(spec.M, b)),
                float(shape_distortion_series(spec.M, b)),
                queries,
            )
        )
    return SweepReport(
        columns=(
            "B_s",
            "distortion_mean",
            "distortion_stderr",
            "analytic_bound",
            "series",
            "queries",
        ),
        rows=rows,
        meta={},
    )


@lru_cache(maxsize=None)
def fitted_distortion_model(
    spec, gain_bits=(6, 7, 8, 9, 10), shape_bits=tuple(range(6, 15)), queries=10000
):
    """Distortion-law constants fitted to Monte Carlo quantizer curves."""
    g_rep = gain_distortion_curve(spec, gain_bits)
    s_rep = shape_distortion_curve(spec, shape_bits, queries)
    egs = [
        eigen_stats(spec, user=k, order=i).Eg2
        for k in range(spec.K)
        for i in range(spec.L[k])
    ]
    gain_pairs = list(zip(g_rep.column("B_g"), g_rep.column("distortion_mean")))
    shape_pairs = list(zip(s_rep.column("B_s"), s_rep.column("distortion_mean")))
    return fit_constants_empirical(gain_pairs, shape_pairs, float(np.mean(egs)), spec.M)


def allocate_report(spec):
    """Optimal real and integer bit splits under the fitted distortion law."""
    from .allocation import (
        distortion_at_optimum,
        distortion_scaling_constant,
        optimal_integer_allocation,
        optimal_real_allocation,
    )

    model = fitted_distortion_model(spec)
    real_Bs, real_Bg = optimal_real_allocation(model, spec.B)
    alloc = optimal_integer_allocation(model, spec.B)
    rows = [
        (
            spec.B,
            real_Bs,
            real_Bg,
            alloc.B_s,
            alloc.B_g,
            model.Kg,
            model.Ks_bar,
            distortion_at_optimum(model, spec.B),
            distortion_scaling_constant(model, spec.B),
        )
    ]
    return SweepReport(
        columns=(
            "B",
            "real_B_s",
            "real_B_g",
            "int_B_s",
            "int_B_g",
            "Kg",
            "Ks_bar",
            "distortion_at_optimum",
            "scaling_constant",
        ),
        rows=rows,
        meta={},
    )


# ---------------------------------------------------------------------------
# CCDF comparison


def ccdf_compare(M, B_s, trials, rng, grid_points=201):
    """Monte Carlo vs analytic CCDF of the minimum squared shape distance."""
    if B_s < 1:
        raise ValueError("B_s must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    N = 2**B_s
    mean = shape_distortion_series(M, B_s)
    grid = np.linspace(0.0, min(4.0, 8.0 * mean), grid_points)
    mind = np.empty(trials)
    chunk = max(1, (1 << 19) // N)
    for t0 in range(0, trials, chunk):
        n = min(chunk, trials - t0)
        s = random_shapes(M, n, rng)
        C = random_shapes(M, n * N, rng).reshape(n, N, M)
        best = np.max(
            np.einsum("tm,tnm->tn", s.conj(), C, optimize=True).real, axis=1
        )
        mind[t0 : t0 + n] = np.maximum(2.0 - 2.0 * best, 0.0)
    mind.sort()
    mc = 1.0 - np.searchsorted(mind, grid, side="right") / trials
    exact = exact_min_ccdf(grid, M, N)
    a_angle = approx_min_ccdf(grid, M, N)
    a_small = approx_min_ccdf_smallangle(grid, M, N)
    rows = [
        (float(b), float(m), float(e), float(aa), float(asm))
        for b, m, e, aa, asm in zip(grid, mc, exact, a_angle, a_small)
    ]
    return SweepReport(
        columns=("sqdist", "mc_ccdf", "exact_ccdf", "approx_ccdf_angle", "approx_ccdf_smallangle"),
        rows=rows,
        meta={"trials": str(trials), "M": str(M), "B_s": str(B_s)},
    )
