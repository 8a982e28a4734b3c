"""Rayleigh MIMO downlink channel model and per-user eigen-mode extraction.

A base station with ``M`` antennas serves ``K`` users; user ``k`` has ``N_k``
receive antennas and decodes ``L_k`` spatial streams through the dominant
singular modes of its own channel.  Everything downstream (quantization,
bit allocation, precoding) consumes the per-stream effective channels
produced here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemConfig",
    "EigenMode",
    "EffectiveChannel",
    "EigenStats",
    "sample_channel",
    "sample_channel_batch",
    "dominant_modes",
    "dominant_modes_batch",
    "effective_channel",
    "stream_vectors",
    "estimate_eigen_stats",
]

_PHASE_TOL = 1e-12


@dataclass(frozen=True)
class SystemConfig:
    """Static system description.

    Attributes
    ----------
    M : int
        Base-station antennas.
    K : int
        Number of users.
    N : tuple of int
        Receive antennas per user, length ``K``.
    L : tuple of int
        Streams decoded per user, length ``K``; ``L[k] <= N[k]`` and the
        total stream count must not exceed ``M``.
    P_max : float
        Transmit power budget.
    sigma2 : float
        Receiver noise variance per antenna.
    B : int
        Total feedback bits per quantized stream (gain bits + shape bits).
    """

    M: int
    K: int
    N: tuple
    L: tuple
    P_max: float
    sigma2: float
    B: int

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        object.__setattr__(self, "L", tuple(int(l) for l in self.L))
        if self.M < 1 or self.K < 1:
            raise ValueError("M and K must be positive")
        if len(self.N) != self.K or len(self.L) != self.K:
            raise ValueError("N and L must have one entry per user")
        if any(n < 1 for n in self.N):
            raise ValueError("antenna counts must be positive")
        if any(l < 1 or l > n for l, n in zip(self.L, self.N)):
            raise ValueError("stream counts must satisfy 1 <= L_k <= N_k")
        if sum(self.L) > self.M:
            raise ValueError("total stream count exceeds transmit antennas")
        if not self.P_max > 0:
            raise ValueError("P_max must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.B < 0:
            raise ValueError("B must be nonnegative")

    @property
    def total_streams(self):
        return int(sum(self.L))

    @property
    def stream_labels(self):
        """(user, stream-order) pairs in transmission order."""
        return [(k, e) for k in range(self.K) for e in range(self.L[k])]


@dataclass
class EigenMode:
    """One singular mode of a user channel: ``H v = sigma u``."""

    sigma: float
    v: np.ndarray  # right singular vector, N_k-dim, unit norm
    u: np.ndarray  # left singular vector, M-dim, unit norm
    lam: float  # sigma**2, the matched eigenvalue of H^H H


@dataclass
class EffectiveChannel:
    """Product vector z = H v sigma for one stream, split into gain and shape."""

    z: np.ndarray
    g: float
    s: np.ndarray


@dataclass
class EigenStats:
    """Monte Carlo moments of one ordered eigen-mode."""

    lambda_tilde: float  # mean of the order-e eigenvalue of H^H H
    Eg2: float  # mean squared norm of the product vector H v sigma (= mean eigenvalue**2)
    order: int
    trials: int


def sample_channel(config, k, rng):
    """Draw one M x N_k channel with iid unit-variance complex Gaussian entries."""
    n = config.N[k]
    h = rng.standard_normal((config.M, n)) + 1j * rng.standard_normal((config.M, n))
    return h / np.sqrt(2.0)


def sample_channel_batch(config, k, rng, count):
    """Draw ``count`` iid channels for user ``k`` as a (count, M, N_k) array."""
    n = config.N[k]
    h = rng.standard_normal((count, config.M, n)) + 1j * rng.standard_normal(
        (count, config.M, n)
    )
    return h / np.sqrt(2.0)


def _align_phase(v, u):
    """Rotate (v, u) by a common unit phase so v's first nonzero entry is real >= 0."""
    idx = np.flatnonzero(np.abs(v) > _PHASE_TOL)
    if idx.size == 0:
        return v, u
    pivot = v[idx[0]]
    phase = pivot / abs(pivot)
    return v * phase.conj(), u * phase.conj()


def dominant_modes(H, count):
    """Extract the ``count`` strongest singular modes of ``H``, sorted descending.

    Each mode is phase-aligned so the first nonzero component of the right
    vector is real and nonnegative, which makes the decomposition unique and
    reproducible across BLAS implementations.
    """
    m = min(H.shape)
    if not 1 <= count <= m:
        raise ValueError(f"count must be in [1, {m}]")
    U, S, Vh = np.linalg.svd(H)
    modes = []
    for i in range(count):
        v = Vh[i].conj()
        u = U[:, i]
        v, u = _align_phase(v, u)
        modes.append(EigenMode(sigma=float(S[i]), v=v, u=u, lam=float(S[i]) ** 2))
    return modes


def dominant_modes_batch(H_batch, count):
    """Batched variant of :func:`dominant_modes`.

    Returns ``(sigmas, V, U)`` with shapes (T, count), (T, N, count), (T, M, count).
    """
    U, S, Vh = np.linalg.svd(H_batch)
    V = np.conj(np.swapaxes(Vh[:, :count, :], 1, 2))  # (T, N, count)
    U = U[:, :, :count]
    # common phase so the first entry of each right vector is real nonnegative;
    # a zero first entry has probability zero for continuous H but is guarded.
    pivot = V[:, 0, :].copy()
    tiny = np.abs(pivot) <= _PHASE_TOL
    if np.any(tiny):
        t, c = np.nonzero(tiny)
        for ti, ci in zip(t, c):
            col = V[ti, :, ci]
            nz = np.flatnonzero(np.abs(col) > _PHASE_TOL)
            if nz.size:
                pivot[ti, ci] = col[nz[0]]
            else:
                pivot[ti, ci] = 1.0
    phase = (pivot / np.abs(pivot)).conj()
    V = V * phase[:, None, :]
    U = U * phase[:, None, :]
    return S[:, :count], V, U


def effective_channel(H, modes):
    """Per-stream product vectors z_i = H v_i sigma_i with gain/shape split.

    The gain is the vector norm (the mode's eigenvalue) and the shape is the
    unit-norm direction.
    """
    out = []
    for mode in modes:
        z = H @ mode.v * mode.sigma
        g = float(np.linalg.norm(z))
        s = z / g if g > 0 else mode.u.copy()
        out.append(EffectiveChannel(z=z, g=g, s=s))
    return out


def stream_vectors(H, modes):
    """Per-stream vectors at physical channel scale: H v_i, norm sigma_i.

    This is what the feedback link quantizes and the precoder consumes; the
    product vector from :func:`effective_channel` carries an extra factor
    sigma_i that only rescales the same direction.
    """
    return [H @ mode.v for mode in modes]


def estimate_eigen_stats(config, order, trials, rng, user=0, chunk=8192):
    """Monte Carlo moments of the ordered eigenvalue ``order`` for one user.

    Averages the order-``order`` eigenvalue of H^H H (descending, 0-based)
    over ``trials`` independent channel draws.  ``lambda_tilde`` is the mean
    eigenvalue, which scales the analytic gain density.  ``Eg2`` is the mean
    squared norm of the product vector H v sigma — the eigenvalue squared —
    which weights the shape term of the product-quantizer distortion split.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= order < min(config.M, config.N[user]):
        raise ValueError("order out of range for this antenna geometry")
    s1 = 0.0
    s2 = 0.0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        H = sample_channel_batch(config, user, rng, n)
        lam = np.linalg.svd(H, compute_uv=False)[:, order] ** 2
        s1 += float(np.sum(lam))
        s2 += float(np.sum(lam * lam))
        done += n
    return EigenStats(
        lambda_tilde=s1 / trials, Eg2=s2 / trials, order=order, trials=trials
    )
