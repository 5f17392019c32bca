"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 flag or configuration errors.
Worker parallelism is controlled by the ``ENTCAP_WORKERS`` environment
variable and never changes numerical results.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import bounds
from .capability import (
    EstimateConfig,
    SweepRow,
    bound_value_for,
    estimate,
    sweep,
)
from .criteria import (
    CRITERION_KINDS,
    CriterionSpec,
    Witness,
    ppt_witness,
    faithful_witness,
    validate_witness_alpha,
)
from .csvio import serialize_rows, write_rows
from .quantum import HermitianObservable, InvalidInputError, Spectrum, hermitian_eigs
from .runconfig import ConfigError, SweepSection, load_config
from .sampling import SeedSpec, random_max_entangled, random_pure_state
from .selftest import run_selftest


def canonical_witness(kind: str, d_a: int, d_b: int, seed: int) -> Witness:
    """Reference witness for a CLI criterion: ppt or faithful on a square split."""
    if kind == "ppt":
        return ppt_witness(random_pure_state(d_a * d_b, SeedSpec(seed)), (d_a, d_b))
    if kind == "faithful":
        if d_a != d_b:
            raise InvalidInputError("faithful witnesses need a square bipartition")
        return faithful_witness(random_max_entangled(d_a, SeedSpec(seed)), (d_a, d_b))
    raise InvalidInputError(f"unknown witness kind {kind!r}")


def _fixed_bell_witness(d_a: int, d_b: int) -> Witness:
    if d_a != d_b:
        raise InvalidInputError("ew_fixed on the CLI needs a square bipartition")
    phi = random_max_entangled(d_a, SeedSpec(0), unitaries=(np.eye(d_a), np.eye(d_a)))
    return ppt_witness(phi, (d_a, d_b))


def build_criterion(name: str, d_a: int, d_b: int) -> CriterionSpec:
    if name == "ew_fixed":
        return CriterionSpec("ew_fixed", witness=_fixed_bell_witness(d_a, d_b))
    return CriterionSpec(name)


def read_matrix_file(path: str | Path) -> np.ndarray:
    """Plain-text complex matrix: one row per line, entries like ``1.5-0.5i``."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([complex(tok.replace("i", "j")) for tok in line.split()])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InvalidInputError(f"{path}: expected a square whitespace-separated matrix")
    return np.array(rows, dtype=np.complex128)


def write_matrix_file(path: str | Path, m: np.ndarray) -> None:
    lines = []
    for row in np.asarray(m, dtype=np.complex128):
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}i" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_k_range(text: str) -> range:
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise InvalidInputError(f"bad k range {text!r}, expected lo:hi[:step]") from None
    if len(nums) == 2:
        lo, hi, step = nums[0], nums[1], 1
    elif len(nums) == 3:
        lo, hi, step = nums
    else:
        raise InvalidInputError(f"bad k range {text!r}, expected lo:hi[:step]")
    if hi < lo or step < 1:
        raise InvalidInputError(f"bad k range {text!r}")
    return range(lo, hi + 1, step)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entcap",
        description="Monte Carlo detection-capability estimation with closed-form bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="one capability estimate, CSV row on stdout")
    p_est.add_argument("--criterion", required=True, choices=CRITERION_KINDS)
    p_est.add_argument("--da", required=True, type=int)
    p_est.add_argument("--db", required=True, type=int)
    p_est.add_argument("--k", required=True, type=int)
    p_est.add_argument("--samples", required=True, type=int)
    p_est.add_argument("--seed", required=True, type=int)
    p_est.add_argument("--ci", type=float, default=0.95)
    p_est.add_argument("--ci-method", choices=("wilson", "clopper_pearson"), default="wilson")
    p_est.add_argument("--bound", choices=("ew", "spectrum"))

    p_sweep = sub.add_parser("sweep", help="run the sweeps of a config file")
    p_sweep.add_argument("config", help="path to a sweep config (or a bundled name like fig2a.cfg)")

    p_bound = sub.add_parser("bound", help="evaluate a capability bound over a k range")
    p_bound.add_argument(
        "--type",
        required=True,
        choices=("ew", "ewset", "spectrum", "param", "posmap", "faithful", "singlecopy", "adaptive"),
    )
    p_bound.add_argument("--k-range", required=True)
    p_bound.add_argument("--alpha", type=float, help="witness factor (ew, ewset, param, posmap)")
    p_bound.add_argument("--n", type=int, help="witness count (ewset)")
    p_bound.add_argument("--m", type=int, help="parameter/observable/query count (param, singlecopy, adaptive)")
    p_bound.add_argument("--lipschitz", type=float, help="Lipschitz constant (param, posmap)")
    p_bound.add_argument("--d", type=int, help="system dimension (param, posmap, faithful, singlecopy)")
    p_bound.add_argument("--eps", type=float, default=0.5)
    p_bound.add_argument("--eigs", help="comma-separated spectrum (spectrum)")

    p_chk = sub.add_parser("check-witness", help="alpha and inner-ball report for a witness")
    p_chk.add_argument("--kind", choices=("ppt", "faithful"))
    p_chk.add_argument("--da", type=int)
    p_chk.add_argument("--db", type=int)
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--file", help="plain-text complex matrix file")

    sub.add_parser("selftest", help="run the fast invariant suite")
    return parser


def _cmd_estimate(args, parser) -> int:
    try:
        criterion = build_criterion(args.criterion, args.da, args.db)
        cfg = EstimateConfig(
            criterion=criterion,
            dim_a=args.da,
            dim_b=args.db,
            k=args.k,
            n_samples=args.samples,
            master_seed=args.seed,
            ci_level=args.ci,
            ci_method=args.ci_method,
        )
        bound_value = None if args.bound is None else bound_value_for(cfg, args.bound)
    except (InvalidInputError, ValueError) as exc:
        parser.error(str(exc))  # exits 2
    est = estimate(cfg)
    row = SweepRow(
        experiment_id="cli",
        criterion=args.criterion,
        d_a=args.da,
        d_b=args.db,
        k=args.k,
        n_samples=est.n_samples,
        n_detected=est.n_detected,
        p_hat=est.p_hat,
        ci_low=est.ci_low,
        ci_high=est.ci_high,
        master_seed=args.seed,
        bound_value=bound_value,
        wall_time_s=est.wall_time_s,
    )
    sys.stdout.write(serialize_rows([row]))
    return 0


def bundled_config_path(name: str) -> Path | None:
    candidate = resources.files("entcap").joinpath("configs", name)
    return Path(str(candidate)) if candidate.is_file() else None


def _cmd_sweep(args, parser) -> int:
    path = Path(args.config)
    if not path.is_file():
        bundled = bundled_config_path(args.config)
        if bundled is None:
            parser.error(f"config file not found: {args.config}")
        path = bundled
    try:
        config = load_config(path)
    except ConfigError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return 2
    any_ok = False
    for section in config.sections:
        rows = run_section(section)
        write_rows(section.output, rows)
        ok = sum(1 for r in rows if not r.error)
        any_ok = any_ok or ok > 0
        print(f"[{section.name}] {ok}/{len(rows)} points -> {section.output}", file=sys.stderr)
    return 0 if any_ok else 1


def run_section(section: SweepSection) -> list[SweepRow]:
    criterion = build_criterion(section.criterion, section.d_a, section.d_b)
    grid = [
        EstimateConfig(
            criterion=criterion,
            dim_a=section.d_a,
            dim_b=section.d_b,
            k=k,
            n_samples=section.n_samples,
            master_seed=section.master_seed,
            ci_level=section.ci_level,
        )
        for k in section.k_values
    ]
    return sweep(grid, bound_attach=section.bound, experiment_id=section.name)


def _cmd_bound(args, parser) -> int:
    def need(name):
        value = getattr(args, name)
        if value is None:
            parser.error(f"--type {args.type} requires --{name.replace('_', '-')}")
        return value

    try:
        ks = _parse_k_range(args.k_range)
        results = []
        for k in ks:
            if args.type == "ew":
                res = bounds.ew_bound(need("alpha"), k)
            elif args.type == "ewset":
                res = bounds.ew_set_bound(need("n"), need("alpha"), k)
            elif args.type == "spectrum":
                eigs = np.array(sorted((float(t) for t in need("eigs").split(",")), reverse=True))
                res = bounds.spectrum_bound(Spectrum(eigs), k)
            elif args.type == "param":
                res = bounds.param_ew_bound(need("m"), need("lipschitz"), need("d"), need("alpha"), k, args.eps)
            elif args.type == "posmap":
                res = bounds.positive_map_bound(need("d"), need("lipschitz"), need("alpha"), k)
            elif args.type == "faithful":
                res = bounds.faithful_ratio_bound(need("d"), k)
            elif args.type == "singlecopy":
                res = bounds.single_copy_bound(need("m"), need("d"), k, args.eps)
            else:
                res = bounds.adaptive_bound(need("m"), k)
            results.append((k, res.value))
    except (InvalidInputError, ValueError) as exc:
        parser.error(str(exc))
    print("k,bound_value")
    for k, value in results:
        print(f"{k},{value:.17g}")
    return 0


def _cmd_check_witness(args, parser) -> int:
    try:
        if args.file is not None:
            m = read_matrix_file(args.file)
            witness = Witness(HermitianObservable(m.shape[0], m), "custom")
        elif args.kind is not None:
            if args.da is None or args.db is None:
                parser.error("--kind requires --da and --db")
            witness = canonical_witness(args.kind, args.da, args.db, args.seed)
        else:
            parser.error("provide either --kind or --file")
    except (InvalidInputError, ValueError, OSError) as exc:
        parser.error(str(exc))
    check = validate_witness_alpha(witness)
    spectrum = hermitian_eigs(witness.observable)
    print(f"alpha = {check.alpha:.12g}")
    print(f"inner_ball_value = {check.inner_ball_value:.12g}")
    print(f"inner_ball = {'pass' if check.passes_inner_ball else 'FAIL'}")
    print("spectrum =", " ".join(f"{x:.12g}" for x in spectrum.eigenvalues))
    return 0 if check.passes_inner_ball else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args, parser)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        if args.command == "bound":
            return _cmd_bound(args, parser)
        if args.command == "check-witness":
            return _cmd_check_witness(args, parser)
        return run_selftest()
    except (InvalidInputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
