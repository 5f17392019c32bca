"""Vectorized detection counting over blocks of sample indices.

Sample ``i`` of an experiment draws its state from stream ``2 i`` and any
per-sample criterion randomness from stream ``2 i + 1`` of the experiment's
master seed; experiment-level randomness uses the reserved top stream index.
Work is blocked in fixed-size chunks so results never depend on how chunks
are distributed across workers.
"""

from __future__ import annotations

import math

import numpy as np

from .criteria import CriterionSpec
from .quantum import InvalidInputError
from .sampling import StreamDrawer, _haar_from_ginibre, _normals_from_words
from .tolerances import TOL

CHUNK_SIZE = 4096
EXPERIMENT_STREAM = (1 << 64) - 1


def state_stream(sample_index: int) -> int:
    return 2 * sample_index


def criterion_stream(sample_index: int) -> int:
    return 2 * sample_index + 1


def _batch_complex_normals(
    drawer: StreamDrawer, streams: range, n: int
) -> np.ndarray:
    """(len(streams), n) complex normals, one stream per row."""
    n_words = 2 * n
    words = np.empty((len(streams), n_words), dtype=np.uint64)
    for row, stream in enumerate(streams):
        words[row] = drawer.raw_words(stream, n_words)
    z = _normals_from_words(words)
    return z[:, 0::2] + 1j * z[:, 1::2]


def batch_states(
    drawer: StreamDrawer, dim_a: int, dim_b: int, k: int, lo: int, hi: int
) -> np.ndarray:
    """States for sample indices [lo, hi) as a (hi-lo, d, d) stack."""
    d = dim_a * dim_b
    streams = range(state_stream(lo), state_stream(hi), 2)
    z = _batch_complex_normals(drawer, streams, d * k).reshape(-1, d, k)
    rho = z @ z.conj().transpose(0, 2, 1)
    tr = np.einsum("nii->n", rho).real
    return rho / tr[:, None, None]


def _pt_b(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    n, d, _ = rho.shape
    t = rho.reshape(n, dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 1, 4, 3, 2).reshape(n, d, d)


def _pt_a(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    n, d, _ = rho.shape
    t = rho.reshape(n, dim_a, dim_b, dim_a, dim_b)
    return t.transpose(0, 3, 2, 1, 4).reshape(n, d, d)


def _marginals(rho: np.ndarray, dim_a: int, dim_b: int) -> tuple[np.ndarray, np.ndarray]:
    t = rho.reshape(-1, dim_a, dim_b, dim_a, dim_b)
    return np.einsum("nabcb->nac", t), np.einsum("nabad->nbd", t)


def _purities(rho: np.ndarray) -> np.ndarray:
    return np.einsum("nij,nji->n", rho, rho).real


def _count_ew_fixed(spec: CriterionSpec, rho: np.ndarray, **_) -> int:
    w = spec.witness.observable.entries
    if w.shape[0] != rho.shape[1]:
        raise InvalidInputError(
            f"witness dimension {w.shape[0]} does not match state dimension {rho.shape[1]}"
        )
    vals = np.einsum("ij,nji->n", w, rho).real
    return int((vals < 0.0).sum())


def _count_ew_ppt(
    spec: CriterionSpec, rho: np.ndarray, drawer: StreamDrawer,
    dim_a: int, dim_b: int, lo: int, hi: int,
) -> int:
    d = dim_a * dim_b
    streams = range(criterion_stream(lo), criterion_stream(hi), 2)
    phi = _batch_complex_normals(drawer, streams, d)
    phi /= np.linalg.norm(phi, axis=1)[:, None]
    # tr(|phi><phi|^T_A rho) = <phi| rho^T_A |phi>
    vals = np.einsum("ni,nij,nj->n", phi.conj(), _pt_a(rho, dim_a, dim_b), phi).real
    return int((vals < 0.0).sum())


def _count_ew_faithful(
    spec: CriterionSpec, rho: np.ndarray, drawer: StreamDrawer,
    dim_a: int, dim_b: int, lo: int, hi: int,
) -> int:
    if dim_a != dim_b:
        raise InvalidInputError("ew_faithful requires a square bipartition")
    d = dim_a * dim_b
    streams = range(criterion_stream(lo), criterion_stream(hi), 2)
    z = _batch_complex_normals(drawer, streams, 2 * dim_a * dim_a)
    u_a = _haar_from_ginibre(z[:, : dim_a * dim_a].reshape(-1, dim_a, dim_a))
    u_b = _haar_from_ginibre(z[:, dim_a * dim_a :].reshape(-1, dim_a, dim_a))
    psi = np.einsum("nai,nbi->nab", u_a, u_b).reshape(-1, d) / math.sqrt(dim_a)
    overlap = np.einsum("ni,nij,nj->n", psi.conj(), rho, psi).real
    vals = 1.0 / math.sqrt(d) - overlap
    return int((vals < 0.0).sum())


def _count_ppt(spec: CriterionSpec, rho: np.ndarray, dim_a: int, dim_b: int, **_) -> int:
    lam = np.linalg.eigvalsh(_pt_b(rho, dim_a, dim_b))
    return int((lam[:, 0] < 0.0).sum())


def _count_purity(spec: CriterionSpec, rho: np.ndarray, dim_a: int, dim_b: int, **_) -> int:
    red_a, _ = _marginals(rho, dim_a, dim_b)
    return int((_purities(rho) > _purities(red_a)).sum())


def _count_fisher(
    spec: CriterionSpec, rho: np.ndarray, drawer: StreamDrawer,
    dim_a: int, dim_b: int, lo: int, hi: int,
) -> int:
    n = rho.shape[0]
    d = dim_a * dim_b
    lam, v = np.linalg.eigh(rho)
    num = (lam[:, :, None] - lam[:, None, :]) ** 2
    den = 2.0 * (lam[:, :, None] + lam[:, None, :])
    weights = np.zeros_like(num)
    np.divide(num, den, out=weights, where=den > TOL.qfi_degenerate)

    if spec.fisher_pairs is not None:
        pair_list = [
            (np.broadcast_to(a, (n, dim_a, dim_a)), np.broadcast_to(b, (n, dim_b, dim_b)))
            for a, b in spec.fisher_pairs
        ]
    else:
        streams = range(criterion_stream(lo), criterion_stream(hi), 2)
        per_pair = dim_a * dim_a + dim_b * dim_b
        z = _batch_complex_normals(drawer, streams, spec.n_pairs * per_pair)
        pair_list = []
        pos = 0
        for _ in range(spec.n_pairs):
            ga = z[:, pos : pos + dim_a * dim_a].reshape(n, dim_a, dim_a)
            pos += dim_a * dim_a
            gb = z[:, pos : pos + dim_b * dim_b].reshape(n, dim_b, dim_b)
            pos += dim_b * dim_b
            pair_list.append(
                ((ga + ga.conj().transpose(0, 2, 1)) / 2.0,
                 (gb + gb.conj().transpose(0, 2, 1)) / 2.0)
            )

    vh = v.conj().transpose(0, 2, 1)
    v4 = v.reshape(n, dim_a, dim_b, d)
    rho4 = rho.reshape(n, dim_a, dim_b, dim_a, dim_b)
    red_a, red_b = _marginals(rho, dim_a, dim_b)
    hit = np.zeros(n, dtype=bool)
    for a, b in pair_list:
        # (A (x) I + I (x) B) v, contracted against the tensor legs of v
        left = (a @ v4.reshape(n, dim_a, dim_b * d)).reshape(n, dim_a, dim_b, d)
        right = np.matmul(b[:, None, :, :], v4)
        c = vh @ (left + right).reshape(n, d, d)
        f = np.sum(weights * (c.real**2 + c.imag**2), axis=(1, 2))
        # variance of A (x) I - I (x) B from the marginals and the cross term
        aa = a @ a
        bb = b @ b
        e2 = (
            np.einsum("nij,nji->n", red_a, aa).real
            + np.einsum("nij,nji->n", red_b, bb).real
            - 2.0 * np.einsum("nabcd,nca,ndb->n", rho4, a, b).real
        )
        e1 = (
            np.einsum("nij,nji->n", red_a, a).real
            - np.einsum("nij,nji->n", red_b, b).real
        )
        hit |= f > (e2 - e1 * e1)
    return int(hit.sum())


def _batch_e4(m2: np.ndarray, m4: np.ndarray) -> np.ndarray:
    pos = m2 > 0.0
    m4c = np.where(pos, np.minimum(np.maximum(m4, 1e-300), m2 * m2), 1.0)
    q = np.floor(m2 * m2 / m4c)
    u = np.sqrt(np.clip(q * (q + 1.0) * m4c - q * m2 * m2, 0.0, None))
    est = np.sqrt(np.clip(q * (q * m2 + u), 0.0, None) / (q + 1.0)) + np.sqrt(
        np.clip(m2 - u, 0.0, None) / (q + 1.0)
    )
    return np.where(pos, est, 0.0)


def _count_m4(spec: CriterionSpec, rho: np.ndarray, dim_a: int, dim_b: int, **_) -> int:
    n = rho.shape[0]
    red_a, red_b = _marginals(rho, dim_a, dim_b)
    if spec.m4_moments_on == "centered":
        product = np.einsum("nik,njl->nijkl", red_a, red_b).reshape(n, rho.shape[1], rho.shape[2])
        operand = rho - product
    else:
        operand = rho
    r = operand.reshape(n, dim_a, dim_b, dim_a, dim_b).transpose(0, 1, 3, 2, 4)
    r = r.reshape(n, dim_a * dim_a, dim_b * dim_b)
    g = np.einsum("nij,nkj->nik", r, r.conj())
    m2 = np.einsum("nii->n", g).real
    m4 = np.sum(np.abs(g) ** 2, axis=(1, 2))
    est = _batch_e4(m2, m4)
    thr = np.sqrt(
        np.clip(1.0 - _purities(red_a), 0.0, None)
        * np.clip(1.0 - _purities(red_b), 0.0, None)
    )
    return int((est > thr).sum())


def _count_d3opt(spec: CriterionSpec, rho: np.ndarray, dim_a: int, dim_b: int, **_) -> int:
    purity = _purities(rho)
    beta = np.maximum(np.floor(1.0 / purity), 1.0)
    rad = np.clip(beta * ((beta + 1.0) * purity - 1.0), 0.0, None)
    x = (beta + np.sqrt(rad)) / (beta * (beta + 1.0))
    lhs = beta * x**3 + (1.0 - beta * x) ** 3
    lam = np.linalg.eigvalsh(_pt_b(rho, dim_a, dim_b))
    m3 = np.sum(lam**3, axis=1)
    return int((lhs > m3).sum())


_COUNTERS = {
    "ew_fixed": _count_ew_fixed,
    "ew_ppt": _count_ew_ppt,
    "ew_faithful": _count_ew_faithful,
    "ppt": _count_ppt,
    "purity": _count_purity,
    "fisher": _count_fisher,
    "m4": _count_m4,
    "d3opt": _count_d3opt,
}


def count_detections(
    spec: CriterionSpec,
    dim_a: int,
    dim_b: int,
    k: int,
    master_seed: int,
    lo: int,
    hi: int,
) -> int:
    """Number of detections among sample indices [lo, hi)."""
    drawer = StreamDrawer(master_seed)
    rho = batch_states(drawer, dim_a, dim_b, k, lo, hi)
    counter = _COUNTERS[spec.kind]
    return counter(
        spec, rho, drawer=drawer, dim_a=dim_a, dim_b=dim_b, lo=lo, hi=hi
    )
