"""Random vector quantization of unit-norm shapes on the complex sphere.

A shape codebook is a set of 2**bits independent uniformly distributed unit
vectors in C^M (real dimension 2M).  Quantization picks the codeword at
minimum Euclidean distance, which for unit vectors is the codeword of maximum
real inner product:  ||s - c||^2 = 2 - 2 Re<c, s>.

The analytic side works on the real sphere S^{2M-1}: spherical-cap areas give
the CCDF of the minimum squared distance to a random codebook, a small-cap
power law turns its integral into a beta-function series, and a gamma-ratio
bound turns the series into the 2**(-2 bits / (2M-1)) distortion law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "ShapeCodebook",
    "ShapeDistortionModel",
    "ball_coefficient",
    "sphere_surface",
    "angle_from_sqdist",
    "cap_area",
    "generate_shape_codebook",
    "random_shapes",
    "quantize_shape",
    "quantize_shape_batch",
    "empirical_shape_distortion",
    "exact_min_ccdf",
    "approx_min_ccdf",
    "approx_min_ccdf_smallangle",
    "ks_constant",
    "shape_distortion_series",
    "analytic_shape_distortion",
    "save_shape_codebook",
    "load_shape_codebook",
]

_UNIT_TOL = 1e-6


@dataclass
class ShapeCodebook:
    """2**bits unit-norm complex M-vectors drawn from the given seed."""

    vectors: np.ndarray
    bits: int
    seed: int

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=complex)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != 2**self.bits:
            raise ValueError("vector count must equal 2**bits")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("all codewords must be unit norm")

    @property
    def M(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class ShapeDistortionModel:
    """Shape distortion law D_s(bits) = K_s * 2**(-2*bits/(2M-1)).

    K1, K2, K3 are the intermediate cap-geometry constants:
    K1 = (2M-1) C_{2M-1} / (2M C_{2M}),  K2 = K1/(2M-1),  K3 = K2**(-2/(2M-1)).
    """

    K_s: float
    M: int
    K1: float
    K2: float
    K3: float

    def __post_init__(self):
        if min(self.K_s, self.K1, self.K2, self.K3) <= 0:
            raise ValueError("constants must be positive")
        if abs(self.K2 - self.K1 / (2 * self.M - 1)) > 1e-12 * self.K2:
            raise ValueError("K2 must equal K1/(2M-1)")
        if abs(self.K3 - self.K2 ** (-2.0 / (2 * self.M - 1))) > 1e-12 * self.K3:
            raise ValueError("K3 must equal K2**(-2/(2M-1))")


def ball_coefficient(n):
    """Volume of the unit ball in R^n:  C_n = pi**(n/2) / Gamma(n/2 + 1)."""
    if n < 1:
        raise ValueError("dimension must be a positive integer")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def sphere_surface(n):
    """Surface area of the unit sphere bounding the n-ball:  n * C_n."""
    return n * ball_coefficient(n)


def angle_from_sqdist(b):
    """Polar angle of the chord with squared length ``b``: arccos(1 - b/2)."""
    b = np.asarray(b, dtype=float)
    if np.any(b < 0) or np.any(b > 4):
        raise ValueError("squared chord length must lie in [0, 4]")
    theta = np.arccos(np.clip(1.0 - 0.5 * b, -1.0, 1.0))
    if theta.ndim == 0:
        return float(theta)
    return theta


def cap_area(theta, M):
    """Area of the spherical cap of polar angle theta on S^{2M-1}.

    (2M-1) * C_{2M-1} * integral_0^theta sin^{2M-2}(phi) dphi, evaluated by
    adaptive quadrature (abs tol 1e-10).
    """
    if not 0 <= theta <= math.pi:
        raise ValueError("cap angle must lie in [0, pi]")
    if M < 1:
        raise ValueError("M must be a positive integer")
    coef = (2 * M - 1) * ball_coefficient(2 * M - 1)
    val, _ = integrate.quad(lambda p: math.sin(p) ** (2 * M - 2), 0.0, theta, epsabs=1e-10)
    return coef * val


def generate_shape_codebook(M, bits, seed):
    """2**bits independent uniform unit vectors in C^M from an integer seed.

    The seed is part of the codebook identity (it travels with the
    serialization header), so a generator object is not accepted here.
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    if bits < 0:
        raise ValueError("bits must be nonnegative")
    rng = np.random.default_rng(seed)
    return ShapeCodebook(vectors=random_shapes(M, 2**bits, rng), bits=bits, seed=seed)


def random_shapes(M, count, rng):
    """``count`` independent uniform points on the unit sphere of C^M."""
    raw = rng.standard_normal((count, 2 * M)).view(complex)
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _best_index(shapes, codebook, chunk=None):
    """Argmax of Re<c_i, s> per row; ties resolve to the lowest index."""
    C = codebook.vectors
    n = C.shape[0]
    if chunk is None:
        # keep the (rows x codewords) score block around 32 MB
        chunk = max(1, (1 << 22) // n)
    cr, ci = np.ascontiguousarray(C.real), np.ascontiguousarray(C.imag)
    out = np.empty(shapes.shape[0], dtype=np.int64)
    for lo in range(0, shapes.shape[0], chunk):
        blk = shapes[lo : lo + chunk]
        # Re(conj(s) . c) = s_r.c_r + s_i.c_i, kept in real arithmetic
        scores = blk.real @ cr.T + blk.imag @ ci.T
        out[lo : lo + chunk] = np.argmax(scores, axis=1)
    return out


def quantize_shape(s, codebook):
    """Nearest codeword to the unit vector ``s``; returns (index, codeword)."""
    s = np.asarray(s, dtype=complex).ravel()
    if abs(np.linalg.norm(s) - 1.0) > _UNIT_TOL:
        raise ValueError("shape must be unit norm")
    idx = int(_best_index(s[None, :], codebook)[0])
    return idx, codebook.vectors[idx]


def quantize_shape_batch(shapes, codebook, chunk=None):
    """Vectorized nearest-codeword search; returns (indices, codewords)."""
    shapes = np.asarray(shapes, dtype=complex)
    idx = _best_index(shapes, codebook, chunk=chunk)
    return idx, codebook.vectors[idx]


def empirical_shape_distortion(codebook, shapes):
    """Mean min-distance squared of ``shapes`` against the codebook."""
    shapes = np.asarray(shapes, dtype=complex)
    if shapes.size == 0:
        raise ValueError("shapes must be nonempty")
    _, rec = quantize_shape_batch(shapes, codebook)
    return float(np.mean(np.sum(np.abs(shapes - rec) ** 2, axis=1)))


def _cap_fraction(b, M):
    return cap_area(angle_from_sqdist(float(b)), M) / sphere_surface(2 * M)


def exact_min_ccdf(b, M, N_s):
    """P(min squared distance to N_s random codewords > b), exact geometry.

    One random codeword misses the cap of squared-chord radius b with
    probability 1 - cap/sphere; independence raises that to the N_s.
    """
    if N_s < 1:
        raise ValueError("codebook size must be at least 1")
    b_arr = np.atleast_1d(np.asarray(b, dtype=float))
    base = np.array([1.0 - _cap_fraction(x, M) for x in b_arr])
    # at b = 4 the cap is the whole sphere; pin the endpoint the quadrature
    # residue would otherwise smear
    base[b_arr >= 4.0] = 0.0
    out = np.clip(base, 0.0, 1.0) ** N_s
    if np.ndim(b) == 0:
        return float(out[0])
    return out


def approx_min_ccdf(b, M, N_s):
    """Small-cap power-law CCDF: (1 - K2 * theta**(2M-1))**N_s.

    Replaces the cap probability by its leading power in the polar angle
    (sin phi ~ phi); the inner term is clamped at 0 once the nominal cap
    fraction passes 1, which keeps the output a valid CCDF.
    """
    if N_s < 1:
        raise ValueError("codebook size must be at least 1")
    model = ks_constant(M)
    theta = np.asarray(angle_from_sqdist(b), dtype=float)
    inner = np.maximum(1.0 - model.K2 * theta ** (2 * M - 1), 0.0)
    out = inner**N_s
    if np.ndim(b) == 0:
        return float(out)
    return out


def approx_min_ccdf_smallangle(b, M, N_s):
    """As approx_min_ccdf, additionally equating angle and chord: theta = sqrt(b).

    This is the variant whose integral the beta-function series evaluates in
    closed form.
    """
    if N_s < 1:
        raise ValueError("codebook size must be at least 1")
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or np.any(b_arr > 4):
        raise ValueError("squared chord length must lie in [0, 4]")
    model = ks_constant(M)
    inner = np.maximum(1.0 - model.K2 * b_arr ** ((2 * M - 1) / 2.0), 0.0)
    out = inner**N_s
    if np.ndim(b) == 0:
        return float(out)
    return out


def ks_constant(M):
    """Shape distortion-law constants for dimension M.

    K_s is evaluated from its explicit gamma-function form in the log domain;
    K1..K3 follow from the ball coefficients.  K_s and K3 are the same number
    by construction (the dataclass enforces agreement to 1e-12).
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    two_m = 2 * M
    K1 = (two_m - 1) * ball_coefficient(two_m - 1) / (two_m * ball_coefficient(two_m))
    K2 = K1 / (two_m - 1)
    K3 = K2 ** (-2.0 / (two_m - 1))
    log_k2 = (
        0.5 * (two_m - 1) * math.log(math.pi)
        + math.lgamma(M)
        - math.log(2.0)
        - M * math.log(math.pi)
        - math.lgamma((two_m - 1) / 2.0 + 1.0)
    )
    K_s = math.exp(-2.0 / (two_m - 1) * log_k2)
    return ShapeDistortionModel(K_s=K_s, M=M, K1=K1, K2=K2, K3=K3)


def shape_distortion_series(M, bits):
    """Expected min squared distance of random VQ, beta-function closed form.

    Integrating the small-angle CCDF gives K3 * c * Beta(c, N+1) with
    N = 2**bits codewords and c = 2/(2M-1).  Evaluated with log-gamma: the
    equivalent alternating sum loses all precision beyond a few hundred
    codewords.
    """
    if bits < 1:
        raise ValueError("bits must be at least 1 (high-rate form)")
    model = ks_constant(M)
    n = 2**bits
    c = 2.0 / (2 * M - 1)
    log_beta = math.lgamma(c) + math.lgamma(n + 1.0) - math.lgamma(n + 1.0 + c)
    return model.K3 * c * math.exp(log_beta)


def analytic_shape_distortion(M, bits):
    """Shape distortion law K_s * 2**(-2*bits/(2M-1)); upper-bounds the series."""
    if bits < 0:
        raise ValueError("bits must be nonnegative")
    model = ks_constant(M)
    return model.K_s * 2.0 ** (-2.0 * bits / (2 * M - 1))


def save_shape_codebook(codebook, path):
    """Text serialization: header (M, bits, seed), one codeword per line as
    interleaved real/imag decimals with round-tripping repr."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"shape-codebook M={codebook.M} bits={codebook.bits} seed={codebook.seed}\n"
        )
        for row in codebook.vectors:
            parts = []
            for z in row:
                parts.append(repr(float(z.real)))
                parts.append(repr(float(z.imag)))
            fh.write(" ".join(parts) + "\n")


def load_shape_codebook(path):
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "shape-codebook":
            raise ValueError(f"not a shape codebook file: {path}")
        fields = dict(part.split("=", 1) for part in header[1:])
        M = int(fields["M"])
        bits = int(fields["bits"])
        seed = int(fields["seed"])
        rows = []
        for line in fh:
            vals = [float(tok) for tok in line.split()]
            if len(vals) != 2 * M:
                raise ValueError("codeword line has wrong component count")
            rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    return ShapeCodebook(vectors=np.array(rows), bits=bits, seed=seed)
