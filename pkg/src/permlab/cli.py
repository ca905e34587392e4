"""``permlab`` command-line interface.

Exit status: 0 on success, 1 on bad input or a failed computation, 2 when a
verification subcommand (``fluct --verify``) finds a failing identity.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, fluctuations, kernel, permanent, scaling, tables
from .errors import DegenerateSpectrumError, InputError, PermlabError
from .serialize import dumps, format_number

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


@dataclass
class RunConfig:
    subcommand: str
    inputs: list = field(default_factory=list)
    ns: list = field(default_factory=list)
    tol: float | None = None
    workers: int = 1
    out: str | None = None
    fmt: str = "json"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(n <= 0 for n in self.ns) or any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise InputError("n-list must be strictly increasing positive integers")
        if self.tol is not None and not self.tol > 0:
            raise InputError("tolerances must be positive")
        if self.workers < 1:
            raise InputError("worker count must be >= 1")


def parse_n_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def load_matrix(path, allow_zero: bool = False) -> np.ndarray:
    """Read ``{"m": <int>, "entries": [[...], ...]}``."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "entries" not in doc or "m" not in doc:
        raise InputError(f"{path}: expected an object with keys 'm' and 'entries'")
    try:
        b = np.array(doc["entries"], dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError(f"{path}: entries must be a numeric matrix") from None
    m = doc["m"]
    if not isinstance(m, int) or b.shape != (m, m):
        raise InputError(f"{path}: entries must be an m x m matrix with m = {m!r}")
    if not np.all(np.isfinite(b)):
        raise InputError(f"{path}: entries must be finite")
    if allow_zero:
        if np.any(b < 0):
            raise InputError(f"{path}: entries must be nonnegative")
    else:
        scaling.PositiveBlockMatrix(b)  # raises DomainError on non-positive entries
    return b


def _emit(cfg: RunConfig, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(cfg: RunConfig, obj) -> None:
    if cfg.fmt == "csv" and isinstance(obj, asymptotics.SweepReport):
        _emit(cfg, obj.to_csv())
    elif isinstance(obj, asymptotics.SweepReport):
        _emit(cfg, obj.to_json())
    elif cfg.fmt == "csv":
        keys = list(obj)
        _emit(cfg, ",".join(keys) + "\n" + ",".join(_csv_cell(obj[k]) for k in keys))
    else:
        _emit(cfg, dumps(obj))


def _csv_cell(x) -> str:
    if isinstance(x, (int, float, np.integer, np.floating, bool)):
        return format_number(x)
    return json.dumps(x) if not isinstance(x, str) else x


def cmd_scale(cfg: RunConfig) -> int:
    b = load_matrix(cfg.inputs[0])
    sol = scaling.sinkhorn_scale(b, tol=cfg.tol or scaling.DEFAULT_TOL,
                                 max_iter=cfg.options["max_iter"])
    _report(cfg, sol.to_dict())
    return EXIT_OK


def cmd_perm(cfg: RunConfig) -> int:
    method = cfg.options["method"]
    allow_zero = cfg.options["allow_zero"]
    if allow_zero and method != "pinsky":
        raise InputError("--allow-zero is only accepted with --method pinsky")
    b = load_matrix(cfg.inputs[0], allow_zero=allow_zero)
    (n,) = cfg.ns
    m = b.shape[0]
    out = {"method": method, "m": m, "n": n}
    if method == "pinsky":
        res = tables.block_permanent_ratio(b, n, workers=cfg.workers, budget=cfg.options["budget"])
        out["log_ratio"] = res.log_ratio
        out["table_count"] = res.table_count
        out["argmax_table"] = [list(r) for r in res.argmax_table.q] if res.argmax_table else None
    else:
        a = permanent.build_block_matrix(b, n).entries
        if method == "naive":
            log_perm = permanent.permanent_naive(a)
        else:
            log_perm = permanent.permanent_ryser(a, workers=cfg.workers,
                                                 max_dim=cfg.options["max_dim"])
        out["log_ratio"] = log_perm - math.lgamma(m * n + 1.0)
    _report(cfg, out)
    return EXIT_OK


def cmd_predict(cfg: RunConfig) -> int:
    b = load_matrix(cfg.inputs[0])
    (n,) = cfg.ns
    sol = scaling.sinkhorn_scale(b, tol=cfg.tol or scaling.DEFAULT_TOL)
    pred = asymptotics.predict_ratio(b, n, sol, raise_on_degenerate=False)
    _report(cfg, {"m": b.shape[0], "n": n, **pred.to_dict()})
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    b = load_matrix(cfg.inputs[0])
    report = asymptotics.verify_sweep(b, cfg.ns, workers=cfg.workers, budget=cfg.options["budget"])
    _report(cfg, report)
    return EXIT_OK


def cmd_fluct(cfg: RunConfig) -> int:
    b = load_matrix(cfg.inputs[0])
    t = scaling.sinkhorn_scale(b).t
    if not cfg.options["verify"]:
        _report(cfg, fluctuations.fluctuation_model(t).to_dict())
        return EXIT_OK
    tol = cfg.tol or 1e-9
    lemma = fluctuations.verify_lemma_identity(t, tol=tol)
    spectrum = fluctuations.spectrum_pairing_check(t, tol=max(tol, 1e-8))
    doc = {"passed": lemma.passed and spectrum.passed,
           "lemma": lemma.to_dict(), "spectrum": spectrum.to_dict()}
    _report(cfg, doc)
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


def _kernel_spec(cfg: RunConfig) -> kernel.KernelSpec:
    opts = cfg.options
    if opts["grid"]:
        return kernel.KernelSpec.from_grid_file(opts["grid"])
    family = opts["family"]
    if family == "zero":
        return kernel.KernelSpec.zero()
    if family == "cosine":
        return kernel.KernelSpec.cosine(opts["eps"])
    if family == "gaussian-bump":
        return kernel.KernelSpec.gaussian_bump(opts["eps"], opts["sigma"])
    if family == "block":
        if not cfg.inputs:
            raise InputError("--family block needs --input with the seed matrix")
        return kernel.KernelSpec.block(load_matrix(cfg.inputs[0]))
    raise InputError(f"unknown kernel family {family!r}")


def cmd_kernel(cfg: RunConfig) -> int:
    spec = _kernel_spec(cfg)
    if cfg.options["mode"] == "trend":
        report = kernel.conjecture_trend(spec, cfg.ns, refine=cfg.options["refine"],
                                         workers=cfg.workers)
        _report(cfg, report)
        return EXIT_OK
    rows = []
    for n in cfg.ns:
        sol = kernel.bridge_potentials(spec, n)
        try:
            det, degenerate = kernel.fredholm_determinant(sol), False
        except DegenerateSpectrumError as exc:
            det, degenerate = exc.determinant, True
        rows.append({"N": n, "fredholm_det": det, "lambda_rate": sol.lambda_rate,
                     "residual": sol.residual, "degenerate": degenerate})
    _report(cfg, {"kernel": spec.to_dict(), "rows": rows})
    return EXIT_OK


COMMANDS = {
    "scale": cmd_scale,
    "perm": cmd_perm,
    "predict": cmd_predict,
    "sweep": cmd_sweep,
    "fluct": cmd_fluct,
    "kernel": cmd_kernel,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, needs_input=True, n_list=False, single_n=False):
        p.add_argument("--input", required=needs_input, help="JSON seed matrix {m, entries}")
        if n_list:
            p.add_argument("--n", type=parse_n_list, required=True, help="comma-separated sizes")
        if single_n:
            p.add_argument("--n", type=int, required=True, help="block size")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default="json", dest="fmt")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("scale", help="Sinkhorn-scale a seed matrix")
    common(p)
    p.add_argument("--max-iter", type=int, default=scaling.DEFAULT_MAX_ITER)

    p = sub.add_parser("perm", help="exact log perm(A(m,n)) / (mn)!")
    common(p, single_n=True)
    p.add_argument("--method", choices=["naive", "ryser", "pinsky"], default="pinsky")
    p.add_argument("--allow-zero", action="store_true", help="accept zero entries (pinsky only)")
    p.add_argument("--budget", type=int, default=tables.DEFAULT_BUDGET)
    p.add_argument("--max-dim", type=int, default=permanent.RYSER_MAX_DIM)

    p = sub.add_parser("predict", help="asymptotic prediction at block size n")
    common(p, single_n=True)

    p = sub.add_parser("sweep", help="exact vs predicted over a list of n")
    common(p, n_list=True)
    p.add_argument("--budget", type=int, default=tables.DEFAULT_BUDGET)

    p = sub.add_parser("fluct", help="Gaussian fluctuation model and identity checks")
    common(p)
    p.add_argument("--verify", action="store_true")

    p = sub.add_parser("kernel", help="kernel bridge, Fredholm determinant, trend")
    common(p, needs_input=False, n_list=True)
    p.add_argument("--mode", choices=["fredholm", "trend"], default="fredholm")
    p.add_argument("--family", choices=["zero", "cosine", "gaussian-bump", "block"],
                   default="cosine")
    p.add_argument("--grid", help="CSV grid file (overrides --family)")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--refine", type=int, default=8)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {"subcommand", "input", "n", "out", "fmt", "workers", "tol"}
    ns = args.n if isinstance(getattr(args, "n", None), list) else (
        [args.n] if getattr(args, "n", None) is not None else [])
    return RunConfig(
        subcommand=args.subcommand,
        inputs=[args.input] if args.input else [],
        ns=ns,
        tol=args.tol,
        workers=args.workers,
        out=args.out,
        fmt=args.fmt,
        options={k: v for k, v in vars(args).items() if k not in base},
    )


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.subcommand](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(config_from_args(args))
    except PermlabError as exc:
        print(f"permlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
