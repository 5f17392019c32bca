"""Complex linear algebra primitives for bipartite operators.

Basis convention: the tensor-product basis |i_A> (x) |j_B> is enumerated
row-major with the A index slow, i.e. the composite index is
``i * dim_b + j``.  Every index permutation below (partial trace, partial
transpose, realignment) is written against this convention.

All operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tolerances import TOL


class InvalidInputError(ValueError):
    """Input violates an operation precondition."""


def _as_complex_matrix(entries, dim: int) -> np.ndarray:
    m = np.asarray(entries, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise InvalidInputError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInputError("matrix entries must be finite")
    return m


@dataclass(frozen=True)
class DensityMatrix:
    """A d x d Hermitian PSD unit-trace matrix with a recorded bipartition."""

    dim_a: int
    dim_b: int
    entries: np.ndarray

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise InvalidInputError("subsystem dimensions must be positive")
        d = self.dim_a * self.dim_b
        m = _as_complex_matrix(self.entries, d)
        object.__setattr__(self, "entries", m)
        if np.abs(m - m.conj().T).max() > TOL.hermitian:
            raise InvalidInputError("density matrix is not Hermitian within tolerance")
        if abs(m.trace().real - 1.0) > TOL.unit_trace or abs(m.trace().imag) > TOL.unit_trace:
            raise InvalidInputError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m)[0] < -TOL.psd:
            raise InvalidInputError("density matrix is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True)
class HermitianObservable:
    """A dense Hermitian matrix."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dimension must be positive")
        m = _as_complex_matrix(self.entries, self.dim)
        object.__setattr__(self, "entries", m)
        if np.abs(m - m.conj().T).max() > TOL.hermitian:
            raise InvalidInputError("observable is not Hermitian within tolerance")


@dataclass(frozen=True)
class PureStateVector:
    """A unit-norm complex amplitude vector."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.shape != (self.dim,):
            raise InvalidInputError(f"expected {self.dim} amplitudes, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise InvalidInputError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", v)
        if abs(np.linalg.norm(v) - 1.0) > TOL.unit_norm:
            raise InvalidInputError("state vector is not normalized")

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise InvalidInputError("spectrum must be a nonempty 1-d real array")
        if not np.isfinite(w).all():
            raise InvalidInputError("eigenvalues must be finite")
        if np.any(np.diff(w) > 0):
            raise InvalidInputError("eigenvalues must be sorted descending")
        object.__setattr__(self, "eigenvalues", w)


# ---------------------------------------------------------------------------
# eigendecomposition


def eigh_desc(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian array, eigenvalues descending.

    Returns ``(w, v)`` with columns of ``v`` the eigenvectors matching ``w``.
    """
    w, v = np.linalg.eigh(m)
    return w[::-1], v[:, ::-1]


def hermitian_eigs(m: HermitianObservable) -> Spectrum:
    """Real spectrum of a Hermitian observable, sorted descending."""
    w, _ = eigh_desc(m.entries)
    return Spectrum(w)


# ---------------------------------------------------------------------------
# index permutations (partial trace / transpose / realignment)


def _to_tensor(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    # T[a, b, a', b'] = M[(a b), (a' b')]
    return m.reshape(dim_a, dim_b, dim_a, dim_b)


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Trace out one subsystem; ``keep`` is ``"A"`` or ``"B"``."""
    t = _to_tensor(rho.entries, rho.dim_a, rho.dim_b)
    if keep == "A":
        reduced = np.einsum("abcb->ac", t)
        return DensityMatrix(rho.dim_a, 1, reduced)
    if keep == "B":
        reduced = np.einsum("abad->bd", t)
        return DensityMatrix(rho.dim_b, 1, reduced)
    raise InvalidInputError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace_array(m: np.ndarray, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    """Array-level partial trace (no unit-trace requirement)."""
    t = _to_tensor(m, dim_a, dim_b)
    if keep == "A":
        return np.einsum("abcb->ac", t)
    if keep == "B":
        return np.einsum("abad->bd", t)
    raise InvalidInputError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose_array(m: np.ndarray, dim_a: int, dim_b: int, sub: str) -> np.ndarray:
    """Transpose the indices of one subsystem.

    For ``sub="B"``: out[(i l), (j k)] = m[(i k), (j l)].
    """
    t = _to_tensor(m, dim_a, dim_b)
    if sub == "A":
        out = t.transpose(2, 1, 0, 3)
    elif sub == "B":
        out = t.transpose(0, 3, 2, 1)
    else:
        raise InvalidInputError(f"sub must be 'A' or 'B', got {sub!r}")
    d = dim_a * dim_b
    return out.reshape(d, d)


def partial_transpose(
    m: HermitianObservable, sub: str, split: tuple[int, int]
) -> HermitianObservable:
    """Partial transposition of a Hermitian observable over one subsystem."""
    dim_a, dim_b = split
    if dim_a * dim_b != m.dim:
        raise InvalidInputError(
            f"split {split} does not factor dimension {m.dim}"
        )
    return HermitianObservable(m.dim, partial_transpose_array(m.entries, dim_a, dim_b, sub))


def realign_array(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Realignment R[(i,j),(k,l)] = m[(i,k),(j,l)], shape (dim_a^2, dim_b^2)."""
    t = _to_tensor(m, dim_a, dim_b)
    return t.transpose(0, 2, 1, 3).reshape(dim_a * dim_a, dim_b * dim_b)


def realign(m: HermitianObservable, split: tuple[int, int]) -> np.ndarray:
    """Realignment of a bipartite observable; preserves the Frobenius norm."""
    dim_a, dim_b = split
    if dim_a * dim_b != m.dim:
        raise InvalidInputError(f"split {split} does not factor dimension {m.dim}")
    return realign_array(m.entries, dim_a, dim_b)


# ---------------------------------------------------------------------------
# expectations


def expectation(o: HermitianObservable, rho: DensityMatrix) -> float:
    """Re tr(O rho); raises if the imaginary part is not negligible."""
    if o.dim != rho.dim:
        raise InvalidInputError(f"dimension mismatch: O is {o.dim}, rho is {rho.dim}")
    val = np.einsum("ij,ji->", o.entries, rho.entries)
    if abs(val.imag) > TOL.expectation_imag:
        raise InvalidInputError(f"tr(O rho) has imaginary part {val.imag:.3e}")
    return float(val.real)


# Named copy pairings: each entry maps copy index i to its image.
PAIRING_PURITY = ((1, 0), (1, 0))            # tr(rho^2)
PAIRING_MARGINAL_A = ((1, 0), (0, 1))        # tr(rho_A^2)
PAIRING_MARGINAL_B = ((0, 1), (1, 0))        # tr(rho_B^2)
# fourth realignment moment: swaps (1,2)(3,4) on A and (2,3)(4,1) on B
PAIRING_REALIGN_M4 = ((1, 0, 3, 2), (3, 2, 1, 0))


def _check_permutation(perm: Sequence[int], n: int, name: str) -> tuple[int, ...]:
    p = tuple(int(x) for x in perm)
    if len(p) != n or sorted(p) != list(range(n)):
        raise InvalidInputError(f"{name} is not a permutation of 0..{n - 1}: {perm}")
    return p


def multicopy_swap_expectation(
    rho: DensityMatrix, perm_a: Sequence[int], perm_b: Sequence[int]
) -> float:
    """tr[(P_A(perm_a) (x) P_B(perm_b)) rho^(x n)] without building rho^(x n).

    ``perm_a``/``perm_b`` give the image of each copy index under the
    permutation acting on the n copies of subsystem A resp. B.  The value is
    contracted copy by copy, so memory stays polynomial in the single-copy
    dimension.  Supports up to 4 copies.
    """
    n = len(perm_a)
    if n != len(perm_b):
        raise InvalidInputError("perm_a and perm_b must act on the same number of copies")
    if not 1 <= n <= 4:
        raise InvalidInputError(f"copy count must be between 1 and 4, got {n}")
    pa = _check_permutation(perm_a, n, "perm_a")
    pb = _check_permutation(perm_b, n, "perm_b")
    inv_a = [0] * n
    inv_b = [0] * n
    for i in range(n):
        inv_a[pa[i]] = i
        inv_b[pb[i]] = i

    t = _to_tensor(rho.entries, rho.dim_a, rho.dim_b)
    # value = sum over indices of prod_i T[a_i, b_i, a_{inv_a(i)}, b_{inv_b(i)}]
    operands = []
    for i in range(n):
        operands.append(t)
        operands.append([i, n + i, inv_a[i], n + inv_b[i]])
    operands.append([])
    val = np.einsum(*operands, optimize=True)
    return float(np.real(val))
