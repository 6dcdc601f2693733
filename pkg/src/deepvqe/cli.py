"""Three-step pipeline orchestration and command-line interface.

Subcommands:

* ``run``            execute the full pipeline from a config file or flags
* ``ed``             exact-diagonalization baseline of the chosen model
* ``verify-penalty`` check the embedded spectrum against the block
                     decomposition of the padded model
* ``table1``         reproduce the spin-chain benchmark grid (four splits,
                     both single-site excitation bases, exact backends)

All randomness flows from the single ``seed`` field; stochastic stages
derive child seeds deterministically, so rerunning a config reproduces the
report bit for bit (timing aside).  Exit codes: 0 success, 2 invalid
configuration, 3 stage failure (the stage tag is printed to stderr).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import models
from .coarse_grain import build_local_basis
from .effective_model import (
    EmbeddedOperator,
    PenaltyVector,
    assemble_effective,
    block_spectrum_decomposition,
    embedding_qubits,
    penalty_bounds,
    resource_metrics,
)
from .eigensolvers import (
    OptimizerConfig,
    SsvqeConfig,
    exact_spectrum,
    ssvqe,
    vqe_ground,
)
from .errors import DeepVqeError, StageError, ValidationError
from .pauli import DENSE_QUBIT_LIMIT
from .statevector import AnsatzSpec, StateVector, expectation

BACKENDS = ("vqe", "exact")
PENALTY_MODES = ("ground", "excited", "unconditional", "zero")
BACKEND_LABELS = {
    ("vqe", "vqe"): "deep-vqe",
    ("vqe", "exact"): "effective",
    ("exact", "exact"): "effective-ed",
    ("exact", "vqe"): "effective-ssvqe",
}

#: Circuit depths for spin models keyed by register size (step 1, step 3).
SPIN_DEPTHS = {4: (10, 15), 6: (15, 20), 8: (20, 25)}
FERMION_DEPTHS = (20, 80)


def default_depth(model: str, n_qubits: int, step: int) -> int:
    if model == "fermion":
        return FERMION_DEPTHS[0 if step == 1 else 1]
    if n_qubits in SPIN_DEPTHS:
        return SPIN_DEPTHS[n_qubits][0 if step == 1 else 1]
    base = 10 if step == 1 else 15
    return base + max(0, round(2.5 * (n_qubits - 4)))


@dataclass
class RunConfig:
    """Everything one pipeline execution depends on."""

    model: str = "heisenberg"
    n_sites: int = 8
    n_subsystems: int = 2
    terms_file: str | None = None
    n_k: int | None = None
    orbitals_per_k: int | None = None
    n_qubit_per_subsystem: int | None = None
    basis: str = "w2"
    complete_second_order: bool = False
    step1: str = "exact"
    step3: str = "exact"
    n_levels: int = 2
    step1_depth: int | None = None
    step3_depth: int | None = None
    step3_restarts: int | None = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    ssvqe_weights: tuple[float, ...] | None = None
    penalty_mode: str = "excited"
    delta_star: float | None = None
    rank_tol: float = 1e-8
    seed: int = 0
    ed: str = "auto"
    ed_limit: int = 16
    output: str | None = None
    output_format: str = "json"

    def __post_init__(self):
        if self.model not in ("heisenberg", "fermion"):
            raise ValidationError("model must be 'heisenberg' or 'fermion'")
        if self.step1 not in BACKENDS or self.step3 not in BACKENDS:
            raise ValidationError(f"backends must be one of {BACKENDS}")
        if self.penalty_mode not in PENALTY_MODES:
            raise ValidationError(f"penalty_mode must be one of {PENALTY_MODES}")
        if self.n_levels < 1:
            raise ValidationError("n_levels must be >= 1")
        if self.model == "heisenberg":
            if self.basis not in models.SPIN_EXCITATION_KINDS:
                raise ValidationError("spin models use basis w, w1 or w2")
            if self.n_sites % self.n_subsystems:
                raise ValidationError("n_sites must divide evenly into subsystems")
        else:
            if self.basis not in models.FERMION_EXCITATION_KINDS:
                raise ValidationError("fermionic models use basis ws or wd")
            if not self.terms_file:
                raise ValidationError("fermionic models need a terms_file")
            if not (self.n_k and self.orbitals_per_k and self.n_qubit_per_subsystem):
                raise ValidationError(
                    "fermionic models need n_k, orbitals_per_k and n_qubit_per_subsystem"
                )
        if self.output_format not in ("json", "csv"):
            raise ValidationError("output_format must be json or csv")

    def weights(self) -> tuple[float, ...]:
        if self.ssvqe_weights is not None:
            return tuple(self.ssvqe_weights)
        if self.model == "fermion" and self.n_levels == 2:
            return (7.0, 2.0)
        return tuple(float(w) for w in range(self.n_levels, 0, -1))

    def to_json_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["optimizer"] = dataclasses.asdict(self.optimizer)
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        opt = data.pop("optimizer", {})
        if isinstance(opt, dict):
            opt = OptimizerConfig(**opt)
        weights = data.pop("ssvqe_weights", None)
        cfg = cls(
            optimizer=opt,
            ssvqe_weights=tuple(weights) if weights is not None else None,
            **data,
        )
        return cfg


CSV_HEADER = "model,split,basis,E0,E0_err,E1,E1_err,TR,N_req,seed"


@dataclass
class RunReport:
    """Numeric outcome of one pipeline run.

    ``timing_seconds`` is excluded from equality so identical configurations
    compare equal across reruns.
    """

    model: str
    split: str
    basis: str
    backends: str
    energies: list[float]
    ed_energies: list[float] | None
    relative_errors: list[float] | None
    e0_local: float | None
    tr: float
    n_req: int
    step3_qubits: int
    k_per_subsystem: list[int]
    lambdas: list[float]
    penalty_mode: str
    penalty_verified: bool | None
    seed: int
    timing_seconds: float = field(compare=False, default=0.0)

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "RunReport":
        return cls(**data)

    def csv_row(self) -> str:
        def fmt(value):
            return "" if value is None else repr(float(value))

        e1 = self.energies[1] if len(self.energies) > 1 else None
        err0 = self.relative_errors[0] if self.relative_errors else None
        err1 = (
            self.relative_errors[1]
            if self.relative_errors and len(self.relative_errors) > 1
            else None
        )
        return ",".join(
            [
                self.model,
                self.split,
                self.basis,
                fmt(self.energies[0]),
                fmt(err0),
                fmt(e1),
                fmt(err1),
                fmt(self.tr),
                str(self.n_req),
                str(self.seed),
            ]
        )


def emit_report(report: RunReport, path: str, fmt: str = "json"):
    """Write a report file; JSON mirrors the report fields, CSV is one row."""
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            fh.write(report.csv_row() + "\n")
    else:
        raise ValidationError("format must be json or csv")


# -- pipeline ----------------------------------------------------------------


def _stage(tag: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(tag, exc) from exc
            return False

    return _Ctx()


def _build_model(cfg: RunConfig):
    if cfg.model == "heisenberg":
        partition = models.Partition.from_sizes(
            [cfg.n_sites // cfg.n_subsystems] * cfg.n_subsystems
        )
        intra, inter = models.heisenberg_chain(cfg.n_sites, partition)
        full = models.heisenberg_hamiltonian(cfg.n_sites)
        label = f"heisenberg-{cfg.n_sites}"
        sets = [
            models.spin_excitation_set(cfg.basis, partition, i)
            for i in range(partition.n_subsystems)
        ]
    else:
        terms = models.load_fermion_terms(cfg.terms_file)
        partition = models.momentum_partition(
            cfg.n_k, cfg.orbitals_per_k, cfg.n_qubit_per_subsystem
        )
        full = models.jordan_wigner_hamiltonian(terms, partition.n_total)
        intra, inter = models.split_hamiltonian(full, partition)
        label = f"fermion-{partition.n_total}"
        sets = [
            models.fermion_excitation_set(
                cfg.basis,
                partition.subsystems[i],
                subsystem_id=i,
                complete_second_order=cfg.complete_second_order,
            )
            for i in range(partition.n_subsystems)
        ]
    return partition, intra, inter, full, sets, label


def _perturbative_gap(intra, n_levels: int) -> float:
    """Gap to the (n_levels - 1)-th level of the unperturbed product spectrum,
    built from the per-subsystem exact spectra; a cheap first-order stand-in
    for the coarse-grained gap."""
    per_sub = []
    for h in intra:
        k = min(n_levels, 1 << h.n_qubits)
        per_sub.append(exact_spectrum(h, k=k).eigenvalues)
    sums = np.array([0.0])
    for vals in per_sub:
        sums = (sums[:, None] + vals[None, :]).reshape(-1)
    sums.sort()
    top = min(n_levels - 1, sums.size - 1)
    return float(sums[top] - sums[0])


def run_pipeline(cfg: RunConfig) -> RunReport:
    """Execute reference construction, coarse-graining and the final solve."""
    t0 = time.perf_counter()
    seed_seq = np.random.SeedSequence(cfg.seed)

    with _stage("model-build"):
        partition, intra, inter, full, sets, label = _build_model(cfg)
        n_qubit = partition.size(0)
        if any(partition.size(i) != n_qubit for i in range(partition.n_subsystems)):
            raise ValidationError("subsystems must have equal size")

    with _stage("step1"):
        child_seeds = seed_seq.spawn(partition.n_subsystems + 1)
        references: list[StateVector] = []
        for i in range(partition.n_subsystems):
            if cfg.step1 == "exact":
                spectrum = exact_spectrum(intra[i], k=1, with_vectors=True)
                vec = spectrum.eigenvectors[:, 0]
                references.append(StateVector(n_qubit, vec / np.linalg.norm(vec)))
            else:
                depth = cfg.step1_depth or default_depth(cfg.model, n_qubit, step=1)
                opt = dataclasses.replace(
                    cfg.optimizer, seed=int(child_seeds[i].generate_state(1)[0])
                )
                result = vqe_ground(intra[i], AnsatzSpec(n_qubit, depth), opt)
                references.append(result.state)

    with _stage("step2"):
        bases = [
            build_local_basis(references[i], sets[i], cfg.rank_tol)
            for i in range(partition.n_subsystems)
        ]
        eff = assemble_effective(partition, bases, intra, inter)

    with _stage("local-energy"):
        e0_local = sum(
            float(expectation(references[i], intra[i]))
            for i in range(partition.n_subsystems)
        )
        for term in inter:
            ev = complex(expectation(references[term.i], term.v))
            ew = complex(expectation(references[term.j], term.w))
            e0_local += (term.nu * ev * ew).real

    with _stage("penalty"):
        if cfg.penalty_mode == "zero":
            penalties = PenaltyVector.zero(eff.n_subsystems)
        else:
            gap = cfg.delta_star
            if gap is None and cfg.penalty_mode == "excited":
                gap = _perturbative_gap(intra, cfg.n_levels)
            penalties = penalty_bounds(
                eff, n=cfg.n_levels - 1, gap_estimate=gap or 0.0, mode=cfg.penalty_mode
            )
        padded_total = int(
            np.prod([1 << max(1, (k - 1).bit_length()) for k in eff.dims])
        )
        penalty_verified: bool | None = None
        if cfg.penalty_mode == "zero" or padded_total <= 1 << 14:
            reference_spectrum = eff.spectrum(k=cfg.n_levels)
            padded_spectrum = block_spectrum_decomposition(eff, penalties)
            penalty_verified = bool(
                np.allclose(
                    padded_spectrum[: cfg.n_levels], reference_spectrum, atol=1e-9
                )
            )
            if cfg.penalty_mode == "zero" and not penalty_verified:
                raise ValidationError(
                    "zero penalties corrupt the low spectrum; raise the penalty mode"
                )

    with _stage("step3"):
        if cfg.step3 == "exact":
            energies = [float(v) for v in eff.spectrum(k=cfg.n_levels)]
        else:
            embedded = EmbeddedOperator(eff, penalties)
            depth = cfg.step3_depth or default_depth(
                cfg.model, embedded.n_qubits, step=3
            )
            restarts = 10 if cfg.step3_restarts is None else cfg.step3_restarts
            opt = dataclasses.replace(
                cfg.optimizer,
                seed=int(child_seeds[-1].generate_state(1)[0]),
                restarts=restarts,
            )
            result = ssvqe(
                embedded,
                AnsatzSpec(embedded.n_qubits, depth),
                opt,
                SsvqeConfig(weights=cfg.weights()),
            )
            energies = [float(e) for e in result.energies]

    with _stage("ed-baseline"):
        run_ed = cfg.ed == "force" or (
            cfg.ed == "auto" and partition.n_total <= cfg.ed_limit
        )
        ed_energies = relative_errors = None
        if run_ed:
            ed = exact_spectrum(full, k=cfg.n_levels, dense_limit=DENSE_QUBIT_LIMIT)
            ed_energies = [float(v) for v in ed.eigenvalues]
            relative_errors = [
                abs(e - x) / abs(x) for e, x in zip(energies, ed_energies)
            ]

    tr, n_req = resource_metrics(eff, n_qubit)
    return RunReport(
        model=label,
        split=f"{partition.n_subsystems}x{n_qubit}",
        basis=cfg.basis,
        backends=BACKEND_LABELS[(cfg.step1, cfg.step3)],
        energies=energies,
        ed_energies=ed_energies,
        relative_errors=relative_errors,
        e0_local=float(e0_local),
        tr=tr,
        n_req=n_req,
        step3_qubits=embedding_qubits(eff),
        k_per_subsystem=[int(k) for k in eff.dims],
        lambdas=[float(l) for l in penalties.lambdas],
        penalty_mode=cfg.penalty_mode,
        penalty_verified=penalty_verified,
        seed=cfg.seed,
        timing_seconds=time.perf_counter() - t0,
    )


# -- benchmark grid ----------------------------------------------------------

GRID_ROWS = ((8, 2), (12, 3), (12, 2), (16, 2))


def run_grid(bases=("w1", "w2"), rows=GRID_ROWS, seed: int = 0, step1="exact", step3="exact"):
    """The spin-chain benchmark grid; ED baselines are shared across rows
    with the same chain length."""
    reports = []
    ed_cache: dict[int, list[float]] = {}
    for n_sites, n_sub in rows:
        for basis in bases:
            cfg = RunConfig(
                model="heisenberg",
                n_sites=n_sites,
                n_subsystems=n_sub,
                basis=basis,
                step1=step1,
                step3=step3,
                seed=seed,
                ed="skip",
            )
            report = run_pipeline(cfg)
            if n_sites not in ed_cache:
                ed = exact_spectrum(models.heisenberg_hamiltonian(n_sites), k=cfg.n_levels)
                ed_cache[n_sites] = [float(v) for v in ed.eigenvalues]
            report.ed_energies = ed_cache[n_sites]
            report.relative_errors = [
                abs(e - x) / abs(x) for e, x in zip(report.energies, report.ed_energies)
            ]
            reports.append(report)
    return reports


# -- command line ------------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with a full run configuration")
    p.add_argument("--model", choices=["heisenberg", "fermion"])
    p.add_argument("--sites", type=int, dest="n_sites")
    p.add_argument("--subsystems", type=int, dest="n_subsystems")
    p.add_argument("--basis", choices=["w", "w1", "w2", "ws", "wd"])
    p.add_argument("--terms-file", dest="terms_file")
    p.add_argument("--n-k", type=int, dest="n_k")
    p.add_argument("--orbitals-per-k", type=int, dest="orbitals_per_k")
    p.add_argument(
        "--qubits-per-subsystem", type=int, dest="n_qubit_per_subsystem"
    )
    p.add_argument(
        "--complete-second-order", action="store_true", default=None,
        dest="complete_second_order",
    )
    p.add_argument("--levels", type=int, dest="n_levels")
    p.add_argument("--seed", type=int)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--step1", choices=list(BACKENDS))
    p.add_argument("--step3", choices=list(BACKENDS))
    p.add_argument("--penalty-mode", choices=list(PENALTY_MODES), dest="penalty_mode")
    p.add_argument("--delta-star", type=float, dest="delta_star")
    p.add_argument("--rank-tol", type=float, dest="rank_tol")
    p.add_argument("--depth1", type=int, dest="step1_depth")
    p.add_argument("--depth3", type=int, dest="step3_depth")
    p.add_argument("--weights", dest="ssvqe_weights")
    p.add_argument("--step3-restarts", type=int, dest="step3_restarts")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iter", type=int, dest="max_iterations")
    p.add_argument("--polish", type=int, dest="polish_iterations")
    p.add_argument("--grad-mode", dest="gradient_mode")
    p.add_argument("--ed", choices=["auto", "skip", "force"])
    p.add_argument("--output")
    p.add_argument("--format", dest="output_format", choices=["json", "csv"])


def _config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    config_fields = {f.name for f in dataclasses.fields(RunConfig)} - {"optimizer"}
    overrides = {
        k: v for k, v in vars(args).items() if v is not None and k in config_fields
    }
    if isinstance(overrides.get("ssvqe_weights"), str):
        overrides["ssvqe_weights"] = tuple(
            float(w) for w in overrides["ssvqe_weights"].split(",")
        )
    data.update(overrides)
    opt_data = data.pop("optimizer", {})
    for flag in ("restarts", "max_iterations", "gradient_mode", "polish_iterations"):
        value = getattr(args, flag, None)
        if value is not None:
            opt_data[flag] = value
    data["optimizer"] = opt_data
    return RunConfig.from_json_dict(data)


def _print_report(report: RunReport, stream=sys.stdout):
    labels = [f"E{i}" for i in range(len(report.energies))]
    print(f"{report.model} split={report.split} basis={report.basis} "
          f"backends={report.backends} seed={report.seed}", file=stream)
    for label, e in zip(labels, report.energies):
        print(f"  {label} = {e:+.6f}", file=stream)
    if report.ed_energies:
        for label, e, err in zip(labels, report.ed_energies, report.relative_errors):
            print(f"  {label}(ED) = {e:+.6f}   rel. error {err:.2%}", file=stream)
    if report.e0_local is not None:
        print(f"  E0(local) = {report.e0_local:+.6f}", file=stream)
    print(
        f"  TR = {report.tr:.2e}   N_req = {report.n_req}   "
        f"embedded register = {report.step3_qubits} qubits   "
        f"K = {report.k_per_subsystem}",
        file=stream,
    )
    if report.penalty_verified is not None:
        state = "verified" if report.penalty_verified else "FAILED"
        print(f"  penalty mode {report.penalty_mode}: low spectrum {state}", file=stream)
    print(f"  wall time {report.timing_seconds:.2f}s", file=stream)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    report = run_pipeline(cfg)
    _print_report(report)
    output = args.output or cfg.output
    if output:
        emit_report(report, output, args.output_format or cfg.output_format)
        print(f"report written to {output}")
    return 0


def _cmd_ed(args) -> int:
    cfg = _config_from_args(args)
    partition, intra, inter, full, sets, label = _build_model(cfg)
    result = exact_spectrum(full, k=cfg.n_levels)
    print(f"{label}: {result.method} diagonalization")
    for i, v in enumerate(result.eigenvalues):
        print(f"  E{i} = {v:+.6f}")
    return 0


def _cmd_verify_penalty(args) -> int:
    cfg = _config_from_args(args)
    partition, intra, inter, full, sets, label = _build_model(cfg)
    references = []
    for i in range(partition.n_subsystems):
        spectrum = exact_spectrum(intra[i], k=1, with_vectors=True)
        references.append(StateVector(partition.size(i), spectrum.eigenvectors[:, 0]))
    bases = [
        build_local_basis(references[i], sets[i], cfg.rank_tol)
        for i in range(partition.n_subsystems)
    ]
    eff = assemble_effective(partition, bases, intra, inter)
    if cfg.penalty_mode == "zero":
        penalties = PenaltyVector.zero(eff.n_subsystems)
    else:
        gap = cfg.delta_star if cfg.delta_star is not None else _perturbative_gap(
            intra, cfg.n_levels
        )
        penalties = penalty_bounds(eff, cfg.n_levels - 1, gap, cfg.penalty_mode)
    direct = eff.spectrum(k=cfg.n_levels)
    padded = block_spectrum_decomposition(eff, penalties)
    ok = np.allclose(padded[: cfg.n_levels], direct, atol=1e-9)
    print(f"{label} basis={cfg.basis} penalty_mode={cfg.penalty_mode}")
    print(f"  lambdas = {[round(l, 6) for l in penalties.lambdas]}")
    for i in range(cfg.n_levels):
        print(f"  E{i}: coarse {direct[i]:+.9f}   padded {padded[i]:+.9f}")
    print("  low spectrum preserved" if ok else "  LOW SPECTRUM CORRUPTED")
    return 0 if ok else 1


def _cmd_table1(args) -> int:
    rows = GRID_ROWS
    if args.rows:
        wanted = set(args.rows.split(","))
        rows = tuple(
            (n, s) for n, s in GRID_ROWS if f"{s}x{n // s}" in wanted
        )
        if not rows:
            raise ValidationError(f"no grid rows match {args.rows!r}")
    reports = run_grid(rows=rows, seed=args.seed or 0)
    print(f"{'split':>6} {'basis':>6} {'E0':>10} {'E1':>10} {'E0(ED)':>10} "
          f"{'E1(ED)':>10} {'TR':>9} {'N_req':>6}")
    for r in reports:
        print(
            f"{r.split:>6} {r.basis:>6} {r.energies[0]:>10.3f} {r.energies[1]:>10.3f} "
            f"{r.ed_energies[0]:>10.3f} {r.ed_energies[1]:>10.3f} "
            f"{r.tr:>9.1e} {r.step3_qubits:>6}"
        )
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in reports:
                fh.write(r.csv_row() + "\n")
        print(f"grid written to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepvqe",
        description="Divide-and-conquer VQE simulation with coarse-grained "
        "effective models and exact baselines",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the three-step pipeline")
    _add_model_flags(p_run)
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_ed = sub.add_parser("ed", help="exact-diagonalization baseline only")
    _add_model_flags(p_ed)
    p_ed.set_defaults(func=_cmd_ed)

    p_vp = sub.add_parser(
        "verify-penalty", help="check spectrum preservation of the padded model"
    )
    _add_model_flags(p_vp)
    _add_run_flags(p_vp)
    p_vp.set_defaults(func=_cmd_verify_penalty)

    p_t1 = sub.add_parser("table1", help="reproduce the spin-chain benchmark grid")
    p_t1.add_argument("--rows", help="comma list like 2x4,3x4,2x6,2x8 (default: all)")
    p_t1.add_argument("--seed", type=int)
    p_t1.add_argument("--output", help="CSV destination")
    p_t1.set_defaults(func=_cmd_table1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"pipeline failed at stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return 3
    except DeepVqeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
