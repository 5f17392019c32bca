"""Deterministic, seedable random generation of quantum objects.

Every draw is addressed by a :class:`SeedSpec` ``(master_seed, stream_index)``.
The derived generator is a Philox-4x64 counter stream:

* key   = ``master_seed`` (low 64 bits of the 128-bit Philox key),
* start = counter block ``stream_index * 2**32`` (4 words of 64 bits per block).

Each stream therefore owns 2**34 raw words, far more than any single draw
consumes, and distinct stream indices can never overlap.  Uniforms come from
the top 53 bits of each word, ``u = ((w >> 11) + 1) * 2**-53`` in (0, 1], and
standard normals from Box-Muller pairs

    z[2t]   = sqrt(-2 ln u[2t]) * cos(2 pi u[2t+1])
    z[2t+1] = sqrt(-2 ln u[2t]) * sin(2 pi u[2t+1]).

The same ``SeedSpec`` yields bit-identical output within one build of this
package; bit-exactness is not promised across numpy versions or platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import DensityMatrix, HermitianObservable, InvalidInputError, PureStateVector

_UINT64_MAX = (1 << 64) - 1
_BLOCKS_PER_STREAM = 1 << 32
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 2.0 ** -53


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one random stream: a master seed plus a per-sample counter."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _UINT64_MAX:
                raise InvalidInputError(f"{name} must be an unsigned 64-bit integer")


class StreamDrawer:
    """Reusable Philox handle for fast repeated stream positioning.

    Constructing a Philox bit generator is much slower than resetting its
    state, so batch loops keep one drawer per master seed and jump it to each
    sample's counter block.
    """

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)
        self._bg = np.random.Philox(key=self.master_seed)
        self._template = self._bg.state

    def raw_words(self, stream_index: int, n_words: int) -> np.ndarray:
        st = self._template
        counter = st["state"]["counter"]
        counter[:] = 0
        # counter blocks are 64-bit words; stream_index * 2**32 blocks
        counter[0] = (int(stream_index) << 32) & _UINT64_MAX
        counter[1] = int(stream_index) >> 32
        st["buffer_pos"] = 4  # discard any buffered words
        self._bg.state = st
        return self._bg.random_raw(n_words)


def _normals_from_words(words: np.ndarray) -> np.ndarray:
    """Box-Muller transform over counter-derived uniforms (last axis even)."""
    u = ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u1 = u[..., 0::2]
    u2 = u[..., 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty_like(u)
    out[..., 0::2] = r * np.cos(_TWO_PI * u2)
    out[..., 1::2] = r * np.sin(_TWO_PI * u2)
    return out


def stream_normals(drawer: StreamDrawer, stream_index: int, n: int) -> np.ndarray:
    """n standard normals from one stream (pads the word count to even)."""
    n_words = n + (n & 1)
    z = _normals_from_words(drawer.raw_words(stream_index, n_words))
    return z[:n]


def _complex_normals(drawer: StreamDrawer, stream_index: int, n: int) -> np.ndarray:
    """n entries with independent standard normal real and imaginary parts."""
    z = stream_normals(drawer, stream_index, 2 * n)
    return z[0::2] + 1j * z[1::2]


@dataclass(frozen=True)
class GinibreMatrix:
    """d x k matrix of i.i.d. standard complex Gaussians (Re, Im ~ N(0,1))."""

    rows: int
    cols: int
    entries: np.ndarray


def ginibre(d: int, k: int, seed: SeedSpec) -> GinibreMatrix:
    """Draw a d x k complex Ginibre matrix."""
    if d < 1 or k < 1:
        raise InvalidInputError("ginibre dimensions must be positive")
    drawer = StreamDrawer(seed.master_seed)
    z = _complex_normals(drawer, seed.stream_index, d * k).reshape(d, k)
    return GinibreMatrix(d, k, z)


def induced_state(d_a: int, d_b: int, k: int, seed: SeedSpec) -> DensityMatrix:
    """Random density matrix from the k-induced measure: Z Z^dag / tr(Z Z^dag)."""
    if d_a < 1 or d_b < 1 or k < 1:
        raise InvalidInputError("dimensions must be positive")
    z = ginibre(d_a * d_b, k, seed).entries
    m = z @ z.conj().T
    m /= m.trace().real
    return DensityMatrix(d_a, d_b, m)


def _haar_from_ginibre(z: np.ndarray) -> np.ndarray:
    # QR with the R-diagonal phase fix; plain QR is not Haar distributed
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def haar_unitary(d: int, seed: SeedSpec) -> np.ndarray:
    """Haar-random d x d unitary."""
    if d < 1:
        raise InvalidInputError("dimension must be positive")
    z = ginibre(d, d, seed).entries
    return _haar_from_ginibre(z)


def random_pure_state(d: int, seed: SeedSpec) -> PureStateVector:
    """Haar-random pure state as a normalized complex Gaussian vector."""
    if d < 1:
        raise InvalidInputError("dimension must be positive")
    drawer = StreamDrawer(seed.master_seed)
    v = _complex_normals(drawer, seed.stream_index, d)
    return PureStateVector(d, v / np.linalg.norm(v))


def max_entangled_amplitudes(u_a: np.ndarray, u_b: np.ndarray) -> np.ndarray:
    """Amplitudes of (U_A (x) U_B) sum_i |ii> / sqrt(d_a), row-major (A slow)."""
    d_a = u_a.shape[-1]
    return np.einsum("...ai,...bi->...ab", u_a, u_b).reshape(*u_a.shape[:-2], d_a * d_a) / np.sqrt(d_a)


def random_max_entangled(
    d_a: int, seed: SeedSpec, unitaries: tuple[np.ndarray, np.ndarray] | None = None
) -> PureStateVector:
    """Random maximally entangled state (U_A (x) U_B) sum_i |ii> / sqrt(d_a).

    ``unitaries`` is a test hook that bypasses the random draw.
    """
    if d_a < 1:
        raise InvalidInputError("dimension must be positive")
    if unitaries is None:
        drawer = StreamDrawer(seed.master_seed)
        z = _complex_normals(drawer, seed.stream_index, 2 * d_a * d_a)
        u_a = _haar_from_ginibre(z[: d_a * d_a].reshape(d_a, d_a))
        u_b = _haar_from_ginibre(z[d_a * d_a :].reshape(d_a, d_a))
    else:
        u_a, u_b = unitaries
    return PureStateVector(d_a * d_a, max_entangled_amplitudes(u_a, u_b))


def gue_observable(d: int, seed: SeedSpec) -> HermitianObservable:
    """Random Hermitian observable (G + G^dag)/2 with G complex Ginibre."""
    if d < 1:
        raise InvalidInputError("dimension must be positive")
    g = ginibre(d, d, seed).entries
    return HermitianObservable(d, (g + g.conj().T) / 2.0)
