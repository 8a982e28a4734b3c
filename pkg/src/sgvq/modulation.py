"""Gray-mapped QPSK and square 16-QAM with unit average symbol energy.

Per-axis 16-QAM levels are {-3, -1, +1, +3}/sqrt(10) in the Gray order
00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, so adjacent levels differ in one bit
and the constellation mean energy is exactly (9+1+1+9)/10 / 2 per axis = 1.
Demodulation is per-axis nearest-level slicing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Modulation",
    "get_modulation",
    "modulate_qpsk",
    "demodulate_qpsk",
    "modulate_16qam",
    "demodulate_16qam",
]

_QAM_SCALE = 1.0 / np.sqrt(10.0)
# level of the bit pair (b0 b1) read as an index 2*b0 + b1
_QAM_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0]) * _QAM_SCALE
# bit pairs of the sorted levels [-3, -1, 1, 3]
_QAM_BITS_OF_SLOT = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.int64)
_QAM_EDGES = np.array([-2.0, 0.0, 2.0]) * _QAM_SCALE


def _check_bits(bits, group):
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % group:
        raise ValueError(f"bit count must be a multiple of {group}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0 or 1")
    return bits.astype(np.int64)


def modulate_qpsk(bits):
    """Pairs of bits to unit-energy QPSK symbols; one bit per axis."""
    bits = _check_bits(bits, 2)
    b = bits.reshape(-1, 2)
    return ((1.0 - 2.0 * b[:, 0]) + 1j * (1.0 - 2.0 * b[:, 1])) / np.sqrt(2.0)


def demodulate_qpsk(symbols):
    """Hard-decision QPSK slicing back to bits."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    out = np.empty((symbols.size, 2), dtype=np.int64)
    out[:, 0] = symbols.real < 0
    out[:, 1] = symbols.imag < 0
    return out.ravel()


def modulate_16qam(bits):
    """Quadruples of bits to unit-energy Gray 16-QAM symbols.

    Bits [b0 b1 b2 b3] map (b0 b1) to the in-phase level and (b2 b3) to the
    quadrature level.
    """
    bits = _check_bits(bits, 4)
    b = bits.reshape(-1, 4)
    re = _QAM_LEVELS[2 * b[:, 0] + b[:, 1]]
    im = _QAM_LEVELS[2 * b[:, 2] + b[:, 3]]
    return re + 1j * im


def demodulate_16qam(symbols):
    """Hard-decision per-axis slicing of 16-QAM back to bits."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    slot_re = np.searchsorted(_QAM_EDGES, symbols.real)
    slot_im = np.searchsorted(_QAM_EDGES, symbols.imag)
    out = np.empty((symbols.size, 4), dtype=np.int64)
    out[:, 0:2] = _QAM_BITS_OF_SLOT[slot_re]
    out[:, 2:4] = _QAM_BITS_OF_SLOT[slot_im]
    return out.ravel()


@dataclass(frozen=True)
class Modulation:
    name: str
    bits_per_symbol: int
    modulate: callable
    demodulate: callable


_SCHEMES = {
    "qpsk": Modulation("qpsk", 2, modulate_qpsk, demodulate_qpsk),
    "16qam": Modulation("16qam", 4, modulate_16qam, demodulate_16qam),
}


def get_modulation(name):
    key = name.lower().replace("-", "").replace("_", "")
    if key not in _SCHEMES:
        raise ValueError(f"unknown modulation {name!r}; choose from {sorted(_SCHEMES)}")
    return _SCHEMES[key]
