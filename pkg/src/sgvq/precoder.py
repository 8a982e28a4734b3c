"""Transmitter-side computation from quantized per-stream channel vectors.

Given the matrix F_hat of quantized effective channels (one column per
stream), the transmitter forms

    J = F_hat diag(q) F_hat^H + (sigma2 + sigmaE2 * P_max / M) I,

whose inverse trace predicts the sum of per-stream MSEs:

    SMSE(q) = L - M + (sigma2 + sigmaE2 * P_max / M) * tr(J^{-1}).

The virtual-uplink powers q minimize that convex objective over the budget
set {q >= 0, sum q <= P_max} by projected gradient descent; the precoder
columns are the normalized J^{-1} f_hat_l sqrt(q_l) directions and the
downlink stream powers equal q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuantizedCSI",
    "NoiseModel",
    "PrecoderSolution",
    "regularizer",
    "build_J",
    "predicted_smse",
    "smse_gradient",
    "projected_gradient_norm",
    "optimize_virtual_uplink_power",
    "mmse_precoder",
    "downlink_power",
    "project_power",
    "optimize_power_batch",
    "predicted_smse_batch",
    "mmse_precoder_batch",
]


@dataclass
class QuantizedCSI:
    """Quantized per-stream channel vectors as columns of an M x L matrix.

    ``labels[i]`` records which (user, stream-order) pair column i serves.
    """

    F_hat: np.ndarray
    labels: tuple

    def __post_init__(self):
        self.F_hat = np.asarray(self.F_hat, dtype=complex)
        if self.F_hat.ndim != 2:
            raise ValueError("F_hat must be an M x L matrix")
        if len(self.labels) != self.F_hat.shape[1]:
            raise ValueError("one label per column required")
        if not np.all(np.isfinite(self.F_hat.view(float))):
            raise ValueError("F_hat entries must be finite")

    @property
    def M(self):
        return self.F_hat.shape[0]

    @property
    def L(self):
        return self.F_hat.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise power, assumed quantization-error power, power budget."""

    sigma2: float
    sigmaE2: float
    P_max: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.sigmaE2 < 0:
            raise ValueError("sigmaE2 must be nonnegative")
        if not self.P_max > 0:
            raise ValueError("P_max must be positive")


@dataclass
class PrecoderSolution:
    """Unit-norm precoder columns, stream powers, and the SMSE prediction."""

    U: np.ndarray
    q: np.ndarray
    p: np.ndarray
    J: np.ndarray
    predicted_smse: float


def regularizer(noise, M):
    """Diagonal loading sigma2 + sigmaE2 * P_max / M of the J matrix."""
    return noise.sigma2 + noise.sigmaE2 * noise.P_max / M


def _check_q(q, L):
    q = np.asarray(q, dtype=float)
    if q.shape != (L,):
        raise ValueError("power vector length must match stream count")
    if np.any(q < 0):
        raise ValueError("powers must be nonnegative")
    return q


def build_J(csi, q, noise):
    q = _check_q(q, csi.L)
    F = csi.F_hat
    return (F * q) @ F.conj().T + regularizer(noise, csi.M) * np.eye(csi.M)


def predicted_smse(csi, q, noise, L=None):
    """Model prediction L - M + rho * tr(J^{-1}) of the sum MSE."""
    if L is None:
        L = csi.L
    J = build_J(csi, q, noise)
    rho = regularizer(noise, csi.M)
    return L - csi.M + rho * float(np.trace(np.linalg.inv(J)).real)


def smse_gradient(csi, q, noise):
    """Exact gradient of the SMSE prediction: -rho * ||J^{-1} f_l||^2."""
    q = _check_q(q, csi.L)
    J = build_J(csi, q, noise)
    JinvF = np.linalg.solve(J, csi.F_hat)
    rho = regularizer(noise, csi.M)
    return -rho * np.sum(np.abs(JinvF) ** 2, axis=0)


def project_power(q, P_max):
    """Euclidean projection onto {q >= 0, sum q <= P_max}."""
    return _project_batch(np.asarray(q, dtype=float)[None, :], P_max)[0]


def _project_batch(V, P):
    clipped = np.maximum(V, 0.0)
    over = clipped.sum(axis=1) > P
    if np.any(over):
        clipped[over] = _simplex_batch(V[over], P)
    return clipped


def _simplex_batch(V, P):
    # sort-based projection onto {q >= 0, sum q = P}
    u = -np.sort(-V, axis=1)
    css = np.cumsum(u, axis=1) - P
    j = np.arange(1, V.shape[1] + 1)
    cond = u - css / j > 0
    last = V.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(V.shape[0]), last] / (last + 1.0)
    return np.maximum(V - tau[:, None], 0.0)


def _build_J_batch(F, q, rho):
    # Fixed contraction order so an instance's trajectory is independent of
    # how many others it is batched with.
    M = F.shape[1]
    J = (F * q[:, None, :]) @ F.conj().swapaxes(1, 2)
    J[:, np.arange(M), np.arange(M)] += rho
    return J


def _tr_inv_batch(F, q, rho):
    return np.einsum("tmm->t", np.linalg.inv(_build_J_batch(F, q, rho))).real


def _grad_batch(F, q, rho):
    JinvF = np.linalg.solve(_build_J_batch(F, q, rho), F)
    return -np.sum(np.abs(JinvF) ** 2, axis=1)


def optimize_power_batch(F, rho, P_max, tol=1e-10, max_iters=10**4):
    """Projected gradient descent on tr(J^{-1}) for a stack of instances.

    F has shape (T, M, L).  Per-instance adaptive step: an accepted move
    grows the step, a rejected candidate halves it without moving, so the
    objective is non-increasing throughout.  An instance retires after 20
    consecutive stalls (rejections or accepted moves improving by less than
    ``tol`` relative) -- at a constrained minimum the projected step stops
    producing descent, so stalls are the convergence signal.
    """
    T, M, L = F.shape
    q = np.full((T, L), P_max / L)
    obj = _tr_inv_batch(F, q, rho)
    step = np.full(T, P_max / max(1.0, L))
    stall = np.zeros(T, dtype=np.int64)
    active = np.ones(T, dtype=bool)
    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Fa = F[idx]
        grad = _grad_batch(Fa, q[idx], rho)
        cand = _project_batch(q[idx] - step[idx, None] * grad, P_max)
        cand_obj = _tr_inv_batch(Fa, cand, rho)
        accept = cand_obj < obj[idx]
        acc, rej = idx[accept], idx[~accept]
        gain = obj[acc] - cand_obj[accept]
        q[acc] = cand[accept]
        obj[acc] = cand_obj[accept]
        step[acc] *= 1.3
        step[rej] *= 0.5
        real_progress = gain > tol * np.maximum(obj[acc], 1e-300)
        stall[acc[real_progress]] = 0
        stall[acc[~real_progress]] += 1
        stall[rej] += 1
        active[stall >= 20] = False
    return q


def optimize_virtual_uplink_power(csi, noise, L=None, tol=1e-10, max_iters=10**4):
    """Minimize the predicted SMSE over the power budget set.

    The objective rho * tr(J^{-1}) is convex (trace of the inverse of an
    affine positive-definite map), so projected gradient descent from the
    equal-power point converges to the global optimum.
    """
    del L  # stream count is carried by the csi columns
    q = optimize_power_batch(
        csi.F_hat[None, :, :], regularizer(noise, csi.M), noise.P_max, tol=tol, max_iters=max_iters
    )[0]
    return q


def projected_gradient_norm(csi, q, noise):
    """Norm of q - Proj(q - grad): zero exactly at a constrained minimum."""
    g = smse_gradient(csi, q, noise)
    return float(np.linalg.norm(q - project_power(q - g, noise.P_max)))


def mmse_precoder(csi, q, noise):
    """Precoder columns J^{-1} f_hat_l sqrt(q_l), normalized; powers p = q.

    A zero-power column carries no signal; its direction falls back to the
    quantized channel itself so the output stays well formed.
    """
    q = _check_q(q, csi.L)
    J = build_J(csi, q, noise)
    W = np.linalg.solve(J, csi.F_hat) * np.sqrt(q)
    norms = np.linalg.norm(W, axis=0)
    fallback = csi.F_hat.copy()
    fnorms = np.linalg.norm(fallback, axis=0)
    for l in np.flatnonzero(fnorms == 0):
        fallback[:, l] = 0.0
        fallback[l % csi.M, l] = 1.0
        fnorms[l] = 1.0
    use_fb = norms <= 0
    U = np.where(use_fb, fallback / fnorms, np.divide(W, np.where(norms > 0, norms, 1.0)))
    smse = predicted_smse(csi, q, noise)
    return PrecoderSolution(U=U, q=q, p=downlink_power(q), J=J, predicted_smse=smse)


def predicted_smse_batch(F, q, rho):
    """Model SMSE prediction L - M + rho * tr(J^{-1}) per stacked instance."""
    T, M, L = F.shape
    return (L - M) + rho * _tr_inv_batch(F, q, rho)


def mmse_precoder_batch(F, q, rho):
    """Batched precoder directions and powers for F of shape (T, M, L)."""
    J = _build_J_batch(F, q, rho)
    W = np.linalg.solve(J, F) * np.sqrt(q)[:, None, :]
    norms = np.linalg.norm(W, axis=1, keepdims=True)
    fnorms = np.linalg.norm(F, axis=1, keepdims=True)
    safe_f = np.divide(F, np.where(fnorms > 0, fnorms, 1.0))
    U = np.where(norms > 0, W / np.where(norms > 0, norms, 1.0), safe_f)
    return U, q.copy()


def downlink_power(q):
    """Downlink stream powers equal the virtual uplink powers."""
    return np.asarray(q, dtype=float).copy()
