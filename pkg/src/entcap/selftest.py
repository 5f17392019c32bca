"""Fast invariant suite behind the ``selftest`` CLI command.

Each check is small enough to run in well under ten seconds total; the
tolerance record is injectable so tests can verify that a corrupted
tolerance is actually caught.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import bounds
from .criteria import (
    CriterionSpec,
    e4,
    faithful_witness,
    ppt_witness,
    qfi,
    realignment_moments,
    validate_witness_alpha,
)
from .capability import EstimateConfig, estimate
from .quantum import (
    HermitianObservable,
    PAIRING_REALIGN_M4,
    Spectrum,
    eigh_desc,
    multicopy_swap_expectation,
    partial_transpose_array,
    realign_array,
)
from .sampling import SeedSpec, ginibre, gue_observable, induced_state, random_max_entangled, random_pure_state
from .tolerances import TOL, Tolerances


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2.0


def _check_eig_reconstruction(tol: Tolerances) -> bool:
    rng = np.random.default_rng(11)
    for d in (4, 16, 32):
        m = _random_hermitian(rng, d)
        w, v = eigh_desc(m)
        if np.linalg.norm((v * w) @ v.conj().T - m) > tol.eig_reconstruction:
            return False
    return True


def _check_partial_transpose(tol: Tolerances) -> bool:
    rng = np.random.default_rng(12)
    for _ in range(100):
        m = _random_hermitian(rng, 6)
        pt = partial_transpose_array(m, 2, 3, "B")
        if not np.array_equal(partial_transpose_array(pt, 2, 3, "B"), m):
            return False
        if abs(pt.trace() - m.trace()) > tol.frobenius_preservation:
            return False
        if abs(np.linalg.norm(pt) - np.linalg.norm(m)) > tol.frobenius_preservation:
            return False
    return True


def _check_realign_norm(tol: Tolerances) -> bool:
    rng = np.random.default_rng(13)
    for _ in range(100):
        m = _random_hermitian(rng, 6)
        if abs(np.linalg.norm(realign_array(m, 2, 3)) - np.linalg.norm(m)) > tol.frobenius_preservation:
            return False
    return True


def _check_m4_oracle(tol: Tolerances) -> bool:
    for i in range(20):
        rho = induced_state(2, 2, 3, SeedSpec(77, i))
        perm = multicopy_swap_expectation(rho, *PAIRING_REALIGN_M4)
        _, m4 = realignment_moments(HermitianObservable(4, rho.entries), (2, 2))
        if abs(perm - m4) > tol.m4_oracle:
            return False
    return True


def _check_qfi_oracle(tol: Tolerances) -> bool:
    for i in range(10):
        rho = induced_state(2, 2, 4, SeedSpec(78, i))
        a = gue_observable(4, SeedSpec(79, i)).entries
        lam, v = eigh_desc(rho.entries)
        c = v.conj().T @ a @ v
        expected = 0.0
        for p in range(4):
            for q in range(4):
                den = lam[p] + lam[q]
                if den > tol.qfi_degenerate:
                    expected += (lam[p] - lam[q]) ** 2 / (2 * den) * abs(c[p, q]) ** 2
        got = qfi(rho, HermitianObservable(4, a))
        if abs(got - expected) > 1e-10:
            return False
    return True


def _check_e4_lower_bound(tol: Tolerances) -> bool:
    rng = np.random.default_rng(14)
    for _ in range(100):
        m = _random_hermitian(rng, 4)
        r = realign_array(m, 2, 2)
        sv = np.linalg.svd(r, compute_uv=False)
        est = e4(float(np.sum(sv**2)), float(np.sum(sv**4)))
        if est > float(np.sum(sv)) + tol.e4_lower_bound:
            return False
    return True


def _check_witness_alphas(tol: Tolerances) -> bool:
    for d_a in (2, 3):
        d = d_a * d_a
        expected = math.sqrt((d - d_a) / 2.0)
        for i in range(50):
            w = ppt_witness(random_pure_state(d, SeedSpec(80, i)), (d_a, d_a))
            if abs(w.alpha - 1.0) > tol.alpha_witness:
                return False
            if not validate_witness_alpha(w).passes_inner_ball:
                return False
            f = faithful_witness(random_max_entangled(d_a, SeedSpec(81, i)), (d_a, d_a))
            if abs(f.alpha - expected) > tol.alpha_witness:
                return False
            if not validate_witness_alpha(f).passes_inner_ball:
                return False
    return True


def _check_bound_identity(tol: Tolerances) -> bool:
    lhs = 3.0 - 2.0 * math.sqrt(2.0)
    rhs = (math.sqrt(2.0) - 1.0) ** 2
    return abs(lhs - rhs) <= 8 * np.finfo(float).eps


def _check_bound_dominance(tol: Tolerances) -> bool:
    rng = np.random.default_rng(15)
    done = 0
    while done < 100:
        lam = np.sort(rng.standard_normal(6))[::-1]
        if lam.sum() <= 0 or lam.min() >= 0:
            continue
        done += 1
        spec = Spectrum(lam)
        alpha = lam.sum() / math.sqrt(float(np.sum(lam**2)))
        rate_ew = (math.sqrt(1.0 + alpha) - 1.0) ** 2
        if bounds.spectrum_bound(spec, 10).exponent_rate < rate_ew - tol.bound_dominance:
            return False
    return True


def _check_sampler_determinism(tol: Tolerances) -> bool:
    a = ginibre(4, 7, SeedSpec(99, 3)).entries
    b = ginibre(4, 7, SeedSpec(99, 3)).entries
    if not np.array_equal(a, b):
        return False
    ra = induced_state(2, 2, 5, SeedSpec(99, 4)).entries
    rb = induced_state(2, 2, 5, SeedSpec(99, 4)).entries
    return np.array_equal(ra, rb)


def _check_estimate_reproducible(tol: Tolerances) -> bool:
    cfg = EstimateConfig(CriterionSpec("ppt"), 2, 2, 2, 2000, master_seed=5)
    return estimate(cfg).n_detected == estimate(cfg).n_detected


CHECKS: tuple[tuple[str, Callable[[Tolerances], bool]], ...] = (
    ("eigendecomposition reconstruction", _check_eig_reconstruction),
    ("partial transpose involution/trace/norm", _check_partial_transpose),
    ("realignment norm preservation", _check_realign_norm),
    ("four-copy permutation vs realignment moment", _check_m4_oracle),
    ("qfi double-loop oracle", _check_qfi_oracle),
    ("e4 below trace norm", _check_e4_lower_bound),
    ("witness alpha values and inner-ball check", _check_witness_alphas),
    ("(3-2sqrt2) = (sqrt2-1)^2 identity", _check_bound_identity),
    ("spectrum bound dominates generic bound", _check_bound_dominance),
    ("sampler determinism", _check_sampler_determinism),
    ("estimate reproducibility", _check_estimate_reproducible),
)


def run_selftest(tol: Tolerances = TOL, out=print) -> int:
    """Run every fast invariant; returns 0 iff all pass."""
    failures = 0
    for name, check in CHECKS:
        try:
            ok = check(tol)
        except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
            ok = False
            out(f"FAIL {name} ({type(exc).__name__}: {exc})")
            failures += 1
            continue
        out(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 1
