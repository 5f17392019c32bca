"""Entanglement-detection criteria: witnesses, PPT, purity, Fisher, moments.

Detection is strict everywhere: a tied statistic counts as not detected
(boundary cases have measure zero under the induced distributions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import (
    DensityMatrix,
    HermitianObservable,
    InvalidInputError,
    PureStateVector,
    eigh_desc,
    partial_trace_array,
    partial_transpose_array,
    realign_array,
)
from .sampling import SeedSpec, StreamDrawer, _complex_normals, random_max_entangled, random_pure_state
from .tolerances import TOL

CRITERION_KINDS = (
    "ew_fixed",      # fixed witness, detected iff tr(W rho) < 0
    "ew_ppt",        # per-sample random |phi><phi|^T_A witness
    "ew_faithful",   # per-sample random I/sqrt(d) - |psi><psi| witness
    "ppt",           # negative eigenvalue of rho^T_B
    "purity",        # tr(rho_AB^2) > tr(rho_A^2)
    "fisher",        # quantum Fisher information vs local variance
    "m4",            # realignment-moment trace-norm estimate
    "d3opt",         # third moment of the partial transpose
)

# long-form spellings accepted anywhere a kind is named
KIND_ALIASES = {
    "ew_rerandomized_ppt": "ew_ppt",
    "ew_rerandomized_faithful": "ew_faithful",
}

WITNESS_KINDS = ("ppt_type", "faithful", "custom")


class InvalidMomentsError(ValueError):
    """Moment pair (m2, m4) cannot come from any matrix."""


def witness_alpha(m: np.ndarray) -> float:
    """tr(W) / sqrt(tr(W^2)); +inf sentinel when tr(W^2) vanishes."""
    t = float(np.trace(m).real)
    s2 = float(np.einsum("ij,ji->", m, m).real)
    if s2 <= 0.0:
        return math.inf
    return t / math.sqrt(s2)


@dataclass(frozen=True)
class Witness:
    """Hermitian observable used as an entanglement witness.

    ``alpha`` caches tr(W)/sqrt(tr(W^2)); for the ppt_type and faithful kinds
    it must satisfy the alpha >= 1 necessary condition for validity.
    """

    observable: HermitianObservable
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in WITNESS_KINDS:
            raise InvalidInputError(f"unknown witness kind {self.kind!r}")
        a = witness_alpha(self.observable.entries)
        if self.alpha is None:
            object.__setattr__(self, "alpha", a)
        elif not math.isinf(a) and abs(a - self.alpha) > TOL.alpha_cache:
            raise InvalidInputError(
                f"cached alpha {self.alpha} does not match recomputed {a}"
            )
        if self.kind in ("ppt_type", "faithful") and self.alpha < 1.0 - TOL.alpha_witness:
            raise InvalidInputError(
                f"{self.kind} witness has alpha = {self.alpha} < 1"
            )


def ppt_witness(phi: PureStateVector, split: tuple[int, int]) -> Witness:
    """Witness |phi><phi|^T_A for a pure state on the given bipartition."""
    dim_a, dim_b = split
    if dim_a * dim_b != phi.dim:
        raise InvalidInputError(f"split {split} does not factor dimension {phi.dim}")
    w = partial_transpose_array(phi.projector(), dim_a, dim_b, "A")
    return Witness(HermitianObservable(phi.dim, w), "ppt_type")


def faithful_witness(phi: PureStateVector, split: tuple[int, int]) -> Witness:
    """Fidelity witness I/sqrt(d) - |phi><phi| for maximally entangled phi."""
    dim_a, dim_b = split
    if dim_a != dim_b:
        raise InvalidInputError("faithful witness requires a square bipartition")
    if dim_a < 2:
        raise InvalidInputError("faithful witness requires subsystem dimension >= 2")
    if dim_a * dim_b != phi.dim:
        raise InvalidInputError(f"split {split} does not factor dimension {phi.dim}")
    proj = phi.projector()
    marginal = partial_trace_array(proj, dim_a, dim_b, "A")
    if np.abs(marginal - np.eye(dim_a) / dim_a).max() > TOL.faithful_marginal:
        raise InvalidInputError("phi is not maximally entangled within tolerance")
    d = phi.dim
    w = np.eye(d) / math.sqrt(d) - proj
    return Witness(HermitianObservable(d, w), "faithful")


@dataclass(frozen=True)
class WitnessCheck:
    alpha: float
    passes_inner_ball: bool
    inner_ball_value: float


def validate_witness_alpha(w: Witness) -> WitnessCheck:
    """Necessary-condition check for witness validity.

    Builds the separable state rho0 = I/d - sigma / (sqrt(d-1) d), where sigma
    is the traceless part of W rescaled to tr(sigma^2) = d, and reports whether
    tr(W rho0) >= 0.  A failure proves W is not a valid witness; a pass proves
    nothing.
    """
    m = w.observable.entries
    d = w.observable.dim
    t = float(np.trace(m).real)
    traceless = m - (t / d) * np.eye(d)
    n0 = float(np.einsum("ij,ji->", traceless, traceless).real)
    if n0 <= TOL.hermitian**2 * d:
        # multiples of the identity: rho0 degenerates to the maximally mixed state
        rho0 = np.eye(d) / d
    else:
        sigma = traceless * math.sqrt(d / n0)
        rho0 = np.eye(d) / d - sigma / (math.sqrt(d - 1) * d)
    value = float(np.einsum("ij,ji->", m, rho0).real)
    return WitnessCheck(
        alpha=witness_alpha(m),
        passes_inner_ball=value >= -TOL.inner_ball,
        inner_ball_value=value,
    )


# ---------------------------------------------------------------------------
# scalar criterion ingredients


def qfi(rho: DensityMatrix, a: HermitianObservable) -> float:
    """Quantum Fisher information F(rho, A) from the eigendecomposition.

    Uses the spectral sum over eigenpairs (k, l) of
    (lam_k - lam_l)^2 / (2 (lam_k + lam_l)) |<k|A|l>|^2, skipping pairs whose
    eigenvalue sum is numerically zero (the numerator vanishes faster there).
    On pure states this normalization equals the variance of A.
    """
    if a.dim != rho.dim:
        raise InvalidInputError(f"dimension mismatch: A is {a.dim}, rho is {rho.dim}")
    lam, v = eigh_desc(rho.entries)
    c = v.conj().T @ a.entries @ v
    num = (lam[:, None] - lam[None, :]) ** 2
    den = 2.0 * (lam[:, None] + lam[None, :])
    mask = den > TOL.qfi_degenerate
    weights = np.zeros_like(num)
    np.divide(num, den, out=weights, where=mask)
    return max(0.0, float(np.sum(weights * np.abs(c) ** 2)))


def variance(rho: DensityMatrix, a: HermitianObservable) -> float:
    """<A^2> - <A>^2 in the state rho."""
    m = a.entries
    e2 = float(np.einsum("ij,jk,ki->", rho.entries, m, m).real)
    e1 = float(np.einsum("ij,ji->", rho.entries, m).real)
    return e2 - e1 * e1


def realignment_moments(x: HermitianObservable, split: tuple[int, int]) -> tuple[float, float]:
    """(tr(R R^dag), tr((R R^dag)^2)) for the realignment R of x."""
    dim_a, dim_b = split
    if dim_a * dim_b != x.dim:
        raise InvalidInputError(f"split {split} does not factor dimension {x.dim}")
    r = realign_array(x.entries, dim_a, dim_b)
    g = r @ r.conj().T
    m2 = float(np.trace(g).real)
    m4 = float(np.sum(np.abs(g) ** 2))
    return m2, m4


def e4(m2: float, m4: float) -> float:
    """Trace-norm lower estimate from the second and fourth singular moments.

    With q = floor(m2^2 / m4) and U = sqrt(q (q+1) m4 - q m2^2):
    e4 = sqrt(q (q m2 + U) / (q+1)) + sqrt((m2 - U) / (q+1)).
    """
    if m2 < 0.0 or (m2 > 0.0 and m4 <= 0.0):
        raise InvalidMomentsError(f"invalid moments m2={m2}, m4={m4}")
    if m2 == 0.0:
        return 0.0
    if m4 > m2 * m2 * (1.0 + 1e-9) + TOL.moment_consistency:
        raise InvalidMomentsError(f"m4={m4} exceeds m2^2={m2 * m2}")
    m4 = min(m4, m2 * m2)
    q = math.floor(m2 * m2 / m4)
    u = math.sqrt(max(q * (q + 1) * m4 - q * m2 * m2, 0.0))
    return math.sqrt(max(q * (q * m2 + u), 0.0) / (q + 1)) + math.sqrt(
        max(m2 - u, 0.0) / (q + 1)
    )


def pt_moment3(rho: DensityMatrix) -> float:
    """Third moment of the partially transposed state, sum of lam_i^3."""
    pt = partial_transpose_array(rho.entries, rho.dim_a, rho.dim_b, "B")
    lam = np.linalg.eigvalsh(pt)
    return float(np.sum(lam**3))


def d3opt_lhs(purity: float) -> float:
    """Separability floor beta x^3 + (1 - beta x)^3 for a given tr(rho^2)."""
    beta = max(1, math.floor(1.0 / purity))
    rad = beta * ((beta + 1) * purity - 1.0)
    x = (beta + math.sqrt(max(rad, 0.0))) / (beta * (beta + 1))
    return beta * x**3 + (1.0 - beta * x) ** 3


# ---------------------------------------------------------------------------
# criterion dispatch


@dataclass(frozen=True)
class CriterionSpec:
    """Addresses one detection rule plus its kind-specific payload."""

    kind: str
    witness: Witness | None = None          # ew_fixed
    n_pairs: int = 10                       # fisher
    fisher_schedule: str = "per_state"      # fisher: per_state | per_experiment
    fisher_pairs: tuple | None = None       # fisher: resolved (A, B) arrays
    m4_moments_on: str = "centered"         # m4: centered | raw

    def __post_init__(self):
        if self.kind in KIND_ALIASES:
            object.__setattr__(self, "kind", KIND_ALIASES[self.kind])
        if self.kind not in CRITERION_KINDS:
            raise InvalidInputError(f"unknown criterion kind {self.kind!r}")
        if self.kind == "ew_fixed" and self.witness is None:
            raise InvalidInputError("ew_fixed requires a witness payload")
        if self.kind != "ew_fixed" and self.witness is not None:
            raise InvalidInputError(f"{self.kind} does not take a witness payload")
        if self.n_pairs < 1:
            raise InvalidInputError("n_pairs must be positive")
        if self.fisher_schedule not in ("per_state", "per_experiment"):
            raise InvalidInputError(f"unknown fisher schedule {self.fisher_schedule!r}")
        if self.m4_moments_on not in ("centered", "raw"):
            raise InvalidInputError(f"unknown m4 moment operand {self.m4_moments_on!r}")


@dataclass(frozen=True)
class DetectionOutcome:
    """Detection flag with the signed margin that produced it."""

    detected: bool
    statistic: float
    threshold: float

    def __post_init__(self):
        if self.detected != (self.statistic > 0.0):
            raise InvalidInputError("detected flag must equal statistic > 0")


def _outcome(statistic: float, threshold: float) -> DetectionOutcome:
    return DetectionOutcome(statistic > 0.0, statistic, threshold)


def draw_fisher_pairs(
    dim_a: int, dim_b: int, n_pairs: int, seed: SeedSpec
) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """n_pairs GUE observable pairs (A on subsystem A, B on subsystem B)."""
    drawer = StreamDrawer(seed.master_seed)
    n = n_pairs * (dim_a * dim_a + dim_b * dim_b)
    z = _complex_normals(drawer, seed.stream_index, n)
    pairs = []
    pos = 0
    for _ in range(n_pairs):
        ga = z[pos : pos + dim_a * dim_a].reshape(dim_a, dim_a)
        pos += dim_a * dim_a
        gb = z[pos : pos + dim_b * dim_b].reshape(dim_b, dim_b)
        pos += dim_b * dim_b
        pairs.append(((ga + ga.conj().T) / 2.0, (gb + gb.conj().T) / 2.0))
    return tuple(pairs)


def _local_sum_ops(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    da, db = a.shape[0], b.shape[0]
    plus = np.kron(a, np.eye(db)) + np.kron(np.eye(da), b)
    minus = np.kron(a, np.eye(db)) - np.kron(np.eye(da), b)
    return plus, minus


def detect(spec: CriterionSpec, rho: DensityMatrix, seed: SeedSpec) -> DetectionOutcome:
    """Evaluate one criterion on one state.

    The seed is consumed only by kinds with per-sample randomness
    (ew_ppt, ew_faithful, and fisher on the per_state schedule).
    """
    da, db, d = rho.dim_a, rho.dim_b, rho.dim

    if spec.kind == "ew_fixed":
        if spec.witness.observable.dim != d:
            raise InvalidInputError("witness dimension does not match the state")
        val = float(np.einsum("ij,ji->", spec.witness.observable.entries, rho.entries).real)
        return _outcome(-val, 0.0)

    if spec.kind == "ew_ppt":
        phi = random_pure_state(d, seed)
        w = ppt_witness(phi, (da, db))
        val = float(np.einsum("ij,ji->", w.observable.entries, rho.entries).real)
        return _outcome(-val, 0.0)

    if spec.kind == "ew_faithful":
        if da != db:
            raise InvalidInputError("ew_faithful requires a square bipartition")
        psi = random_max_entangled(da, seed)
        w = faithful_witness(psi, (da, db))
        val = float(np.einsum("ij,ji->", w.observable.entries, rho.entries).real)
        return _outcome(-val, 0.0)

    if spec.kind == "ppt":
        pt = partial_transpose_array(rho.entries, da, db, "B")
        lam_min = float(np.linalg.eigvalsh(pt)[0])
        return _outcome(-lam_min, 0.0)

    if spec.kind == "purity":
        p_ab = float(np.einsum("ij,ji->", rho.entries, rho.entries).real)
        red = partial_trace_array(rho.entries, da, db, "A")
        p_a = float(np.einsum("ij,ji->", red, red).real)
        return _outcome(p_ab - p_a, p_a)

    if spec.kind == "fisher":
        if spec.fisher_pairs is not None:
            pairs = spec.fisher_pairs
        else:
            pairs = draw_fisher_pairs(da, db, spec.n_pairs, seed)
        best = -math.inf
        best_thr = 0.0
        for a, b in pairs:
            plus, minus = _local_sum_ops(a, b)
            f = qfi(rho, HermitianObservable(d, plus))
            var = variance(rho, HermitianObservable(d, minus))
            if f - var > best:
                best = f - var
                best_thr = var
        return _outcome(best, best_thr)

    if spec.kind == "m4":
        red_a = partial_trace_array(rho.entries, da, db, "A")
        red_b = partial_trace_array(rho.entries, da, db, "B")
        if spec.m4_moments_on == "centered":
            operand = rho.entries - np.kron(red_a, red_b)
        else:
            operand = rho.entries
        r = realign_array(operand, da, db)
        g = r @ r.conj().T
        m2 = float(np.trace(g).real)
        m4 = float(np.sum(np.abs(g) ** 2))
        est = e4(m2, m4)
        p_a = float(np.einsum("ij,ji->", red_a, red_a).real)
        p_b = float(np.einsum("ij,ji->", red_b, red_b).real)
        thr = math.sqrt(max(1.0 - p_a, 0.0) * max(1.0 - p_b, 0.0))
        return _outcome(est - thr, thr)

    if spec.kind == "d3opt":
        purity = float(np.einsum("ij,ji->", rho.entries, rho.entries).real)
        lhs = d3opt_lhs(purity)
        m3 = pt_moment3(rho)
        return _outcome(lhs - m3, m3)

    raise InvalidInputError(f"unknown criterion kind {spec.kind!r}")
