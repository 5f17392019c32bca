"""Artifact-wide numerical tolerances.

All modules read their tolerance constants from a single ``Tolerances``
record so there is one source of numerical truth.  ``TOL`` is the default
instance used everywhere; tests may construct modified copies.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12            # max |M - M^dag| entrywise
    unit_trace: float = 1e-12           # |tr(rho) - 1|
    psd: float = 1e-10                  # min eigenvalue >= -psd
    eig_reconstruction: float = 1e-10   # ||V w V^dag - M||_F
    frobenius_preservation: float = 1e-12
    index_oracle: float = 1e-14         # brute-force index-permutation oracles
    expectation_imag: float = 1e-10     # |Im tr(O rho)|
    unit_norm: float = 1e-12            # | ||v|| - 1 |
    unitarity: float = 1e-10            # ||U^dag U - I||_F
    max_entangled_marginal: float = 1e-10
    faithful_marginal: float = 1e-8     # marginal check before building a faithful witness
    alpha_cache: float = 1e-12          # cached alpha vs recomputed
    alpha_witness: float = 1e-9         # alpha >= 1 for ppt/faithful witnesses
    inner_ball: float = 1e-10           # tr(W rho0) >= -inner_ball
    qfi_degenerate: float = 1e-12       # skip eigenpairs with lam_k + lam_l below this
    moment_consistency: float = 1e-12   # m4 <= m2^2 slack
    m4_oracle: float = 1e-9             # permutation value vs realignment moment
    e4_lower_bound: float = 1e-9        # e4 <= trace norm slack
    bound_dominance: float = 1e-12      # spectrum bound vs generic alpha bound
    bound_reconstruction: float = 1e-12 # value vs exp(prefactor - rate*k)


TOL = Tolerances()
