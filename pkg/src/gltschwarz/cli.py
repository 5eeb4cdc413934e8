"""Command-line front end: ``gltschwarz {assemble,solve,spectrum,cluster,table}``.

Every output starts with the run configuration.  CSV output carries it
as a single ``# config: {...}`` comment line ahead of the header row;
JSON output carries it under the ``config`` key.

Exit status: 0 success, 2 not admissible (``nac`` is printed), 64 usage
error, 74 I/O error.
"""
import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Optional

import numpy as np

from . import assembly, krylov, partition, schwarz, spectra
from .matrices import read_matrix_market, write_matrix_market
from .symbols import symbol_eig_branches

__all__ = [
    "RunConfig",
    "main",
    "load_registry",
    "table_entry",
    "table_cell",
    "table_rows",
    "EXIT_OK",
    "EXIT_NAC",
    "EXIT_USAGE",
    "EXIT_IO",
]

EXIT_OK = 0
EXIT_NAC = 2
EXIT_USAGE = 64
EXIT_IO = 74

_CLI_FAMILIES = {f.replace("_", "-"): f for f in assembly.FAMILIES}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    family: Optional[str] = None
    n: Optional[int] = None
    p: Optional[int] = None
    coeff: Optional[str] = None
    matrix: Optional[str] = None
    method: Optional[str] = None
    precond: Optional[str] = None
    weights: Optional[str] = None
    nu: Optional[int] = None
    overlap: int = 0
    tol: float = 1e-6
    cap: Optional[int] = None
    out: Optional[str] = None
    table_id: Optional[str] = None
    seed: Optional[int] = None  # reserved; nothing here is randomized

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol}")

    def header(self):
        return json.dumps(asdict(self), sort_keys=True)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def load_registry():
    """The packaged table manifest as a dict."""
    text = resources.files(__package__).joinpath("tables.json").read_text(encoding="utf-8")
    return json.loads(text)


def table_entry(table_id, registry=None):
    registry = registry or load_registry()
    for entry in registry["tables"]:
        if entry["id"] == table_id:
            return entry
    known = ", ".join(e["id"] for e in registry["tables"])
    raise UsageError(f"unknown table id {table_id!r}; known: {known}")


def _spec(family, n, p=None, coeff=None):
    d = 2 if family == "iga2d" else 1
    c = None if coeff in (None, "one") else assembly.coefficient_by_name(coeff, d)
    return assembly.ProblemSpec(family, n, c, p)


def _rhs(dim):
    return np.ones(dim)


def table_cell(entry, block, nu, n, tol=1e-6, restart=krylov.TABLE_RESTART):
    """One iteration count of a registered table, or ``"nac"``.

    ``block`` is one of ``CG``, ``PCG``, ``GMRES``, ``PGMRES``.  GMRES
    cells use the registry's restart length.
    """
    spec = _spec(entry["family"], n, entry.get("p"), entry.get("coeff"))
    dim = spec.dim
    A = assembly.assemble(spec).A
    P = None
    if block.startswith("P"):
        part = partition.make_partition(dim, nu, entry["overlap"])
        if not part:
            return "nac"
        P = schwarz.setup(A, part, entry["kind"])
    solver = krylov.cg if block.endswith("CG") else krylov.gmres
    kw = {} if solver is krylov.cg else {"restart": restart}
    return solver(A, _rhs(dim), tol=tol, P=P, **kw).iterations


def admissibility_cell(entry, nu, n):
    dim = _spec(entry["family"], n, entry.get("p"), entry.get("coeff")).dim
    return partition.is_admissible(dim, nu, entry["overlap"])


def cluster_cell(entry, nu, n, eps_list):
    spec = _spec(entry["family"], n, entry.get("p"), entry.get("coeff"))
    A = assembly.assemble(spec).A
    part = partition.make_partition(spec.dim, nu, entry["overlap"])
    if not part:
        return ["nac"] * len(eps_list)
    P = schwarz.setup(A, part, entry["kind"])
    rep = spectra.cluster_count(spectra.spectrum_of(P, "precond-applied"), eps_list)
    return rep.fractions if entry["quantity"] == "fraction" else rep.counts


def table_rows(entry, tol=1e-6, jobs=1, only_admissibility=False):
    """Rows of a reproduced table, in the registered layout.

    Iteration tables give ``[block, nu, v_1, ..., v_k]`` rows, one per
    method block and ``nu``; clustering tables give ``[nu, eps, ...]``.
    """
    ns = entry["ns"]
    if entry["type"] == "clustering":
        if only_admissibility:
            return [[nu, *[admissibility_cell(entry, nu, n) for n in ns]] for nu in entry["nus"]]
        jobs_list = [(nu, n) for nu in entry["nus"] for n in ns]
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as ex:
            cells = list(ex.map(lambda a: cluster_cell(entry, a[0], a[1], entry["eps"]), jobs_list))
        got = dict(zip(jobs_list, cells))
        rows = []
        for nu in entry["nus"]:
            for k, eps in enumerate(entry["eps"]):
                rows.append([nu, eps, *[got[nu, n][k] for n in ns]])
        return rows
    blocks = ("CG", "PCG", "GMRES", "PGMRES")
    if only_admissibility:
        return [[b, nu, *[admissibility_cell(entry, nu, n) for n in ns]]
                for b in blocks if b.startswith("P") for nu in entry["nus"]]
    # unpreconditioned counts do not depend on nu; compute them once
    tasks = [(b, 1, n) for b in ("CG", "GMRES") for n in ns]
    tasks += [(b, nu, n) for b in ("PCG", "PGMRES") for nu in entry["nus"] for n in ns]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as ex:
        cells = list(ex.map(lambda t: table_cell(entry, *t, tol=tol), tasks))
    got = dict(zip(tasks, cells))
    rows = []
    for b in blocks:
        for nu in entry["nus"]:
            key_nu = nu if b.startswith("P") else 1
            rows.append([b, nu, *[got[b, key_nu, n] for n in ns]])
    return rows


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(cfg, header, rows):
    buf = io.StringIO()
    buf.write(f"# config: {cfg.header()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(cfg, payload):
    return json.dumps({"config": asdict(cfg), **payload}, sort_keys=True) + "\n"


def _load_matrix(cfg):
    if cfg.matrix:
        if not os.path.isfile(cfg.matrix):
            raise FileNotFoundError(f"no such file: {cfg.matrix}")
        try:
            return read_matrix_market(cfg.matrix), None
        except ValueError as exc:
            raise OSError(f"cannot parse {cfg.matrix}: {exc}") from exc
    if cfg.family is None or cfg.n is None:
        raise UsageError("give --family and --n, or --matrix FILE")
    try:
        res = assembly.assemble(_spec(cfg.family, cfg.n, cfg.p, cfg.coeff))
    except assembly.AssemblyError as exc:
        raise UsageError(str(exc)) from exc
    return res.A, res.symbol


def _preconditioner(cfg, A):
    """Return the preconditioner, ``None`` when unpreconditioned, or ``"nac"``."""
    if cfg.precond in (None, "none"):
        return None
    nu = cfg.nu or 1
    if nu > A.dim:
        raise UsageError(f"--nu {nu} exceeds the dimension {A.dim}")
    part = partition.make_partition(A.dim, nu, cfg.overlap)
    if not part:
        return "nac"
    try:
        return schwarz.setup(A, part, cfg.precond, scheme=cfg.weights)
    except schwarz.SetupError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_assemble(cfg, args):
    if cfg.out is None:
        raise UsageError("assemble needs --out FILE.mtx")
    spec = _spec(cfg.family, cfg.n, cfg.p, cfg.coeff)
    res = assembly.assemble(spec)
    write_matrix_market(res.A, cfg.out, comment=f"config: {cfg.header()}")
    sidecar = {
        "family": cfg.family,
        "n": cfg.n,
        "p": cfg.p,
        "coefficient": spec.coeff.label,
        "scale_note": res.scale_note,
        "dim": spec.dim,
    }
    path = cfg.out[:-4] if cfg.out.endswith(".mtx") else cfg.out
    with open(path + ".json", "w", encoding="utf-8") as fh:
        fh.write(_json_text(cfg, sidecar))
    return EXIT_OK


def cmd_solve(cfg, args):
    A, _ = _load_matrix(cfg)
    P = _preconditioner(cfg, A)
    if P == "nac":
        print("nac")
        return EXIT_NAC
    method = cfg.method or "cg"
    b = _rhs(A.dim)
    if method == "cg":
        rep = krylov.cg(A, b, tol=cfg.tol, cap=cfg.cap, P=P)
    else:
        rep = krylov.gmres(A, b, tol=cfg.tol, cap=cfg.cap, P=P, restart=args.restart)
    payload = rep.to_dict(nu=cfg.nu, overlap=cfg.overlap, n=cfg.n, dim=A.dim)
    _emit(_json_text(cfg, {"report": payload}), cfg.out)
    return EXIT_OK


def cmd_spectrum(cfg, args):
    A, sym = _load_matrix(cfg)
    if A.dim > spectra.DENSE_GUARD:
        raise UsageError(f"dim {A.dim} exceeds the dense guard {spectra.DENSE_GUARD}")
    if args.of == "matrix":
        eigs = spectra.eigenvalues_dense(A.todense())
    else:
        P = _preconditioner(cfg, A)
        if P == "nac":
            print("nac")
            return EXIT_NAC
        if P is None:
            raise UsageError(f"--of {args.of} needs --precond")
        eigs = spectra.spectrum_of(P, args.of)
    eigs = np.sort_complex(np.asarray(eigs, dtype=complex))
    extra = {}
    if args.against_symbol:
        if sym is None:
            raise UsageError("this family has no reference symbol")
        n_theta = -(-len(eigs) // sym.s)
        samples = symbol_eig_branches(sym, n_theta=n_theta)
        extra["symbol"] = np.sort(samples.branch_values.ravel())
    rows = []
    for j, v in enumerate(eigs):
        row = [repr(float(v.real)), repr(float(v.imag))]
        row += [repr(float(c[j])) if j < len(c) else "" for c in extra.values()]
        rows.append(row)
    _emit(_csv_text(cfg, ["re", "im", *extra], rows), cfg.out)
    return EXIT_OK


def cmd_cluster(cfg, args):
    A, _ = _load_matrix(cfg)
    P = _preconditioner(cfg, A)
    if P == "nac":
        print("nac")
        return EXIT_NAC
    if P is None:
        raise UsageError("cluster needs --precond")
    rep = spectra.cluster_count(spectra.spectrum_of(P, "precond-applied"), args.eps)
    rows = [[e, c, repr(f)] for e, c, f in zip(rep.eps, rep.counts, rep.fractions)]
    _emit(_csv_text(cfg, ["eps", "count", "fraction"], rows), cfg.out)
    return EXIT_OK


def cmd_table(cfg, args):
    entry = table_entry(args.id)
    rows = table_rows(entry, tol=cfg.tol, jobs=args.jobs, only_admissibility=args.only_admissibility)
    ns = [f"n={n}" for n in entry["ns"]]
    header = ["nu", "eps", *ns] if entry["type"] == "clustering" else ["method", "nu", *ns]
    if args.only_admissibility and entry["type"] == "clustering":
        header = ["nu", *ns]
    _emit(_csv_text(cfg, header, rows), cfg.out)
    return EXIT_OK


_COMMANDS = {
    "assemble": cmd_assemble,
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "cluster": cmd_cluster,
    "table": cmd_table,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _family(value):
    try:
        return _CLI_FAMILIES[value]
    except KeyError:
        raise argparse.ArgumentTypeError(f"choose from {', '.join(_CLI_FAMILIES)}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--jobs", type=int, default=1, help="concurrent table cells")
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--cap", type=int, default=None, help="iteration cap (default dim)")

    problem = _Parser(add_help=False)
    problem.add_argument("--family", type=_family)
    problem.add_argument("--n", type=int)
    problem.add_argument("--p", type=int)
    problem.add_argument("--coeff", choices=["one", "1+x^2", "1+x1+x2"], default=None)
    problem.add_argument("--matrix", help="Matrix Market file instead of --family")

    precond = _Parser(add_help=False)
    precond.add_argument("--precond", choices=["none", *schwarz.KINDS])
    precond.add_argument("--weights", choices=partition.SCHEMES)
    precond.add_argument("--nu", type=int)
    precond.add_argument("--overlap", type=int, default=0)

    parser = _Parser(prog="gltschwarz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    sub.add_parser("assemble", parents=[common, problem])
    s = sub.add_parser("solve", parents=[common, problem, precond])
    s.add_argument("--method", choices=["cg", "gmres"], default="cg")
    s.add_argument("--restart", type=int, default=None, help="GMRES cycle length (default none)")
    s = sub.add_parser("spectrum", parents=[common, problem, precond])
    s.add_argument("--of", choices=["matrix", "precond", "precond-applied", "iteration"], default="matrix")
    s.add_argument("--against-symbol", action="store_true")
    s = sub.add_parser("cluster", parents=[common, problem, precond])
    s.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.05, 0.025])
    s = sub.add_parser("table", parents=[common])
    s.add_argument("--id", required=True)
    s.add_argument("--only-admissibility", action="store_true")
    return parser


def _config(args):
    keys = RunConfig.__dataclass_fields__
    values = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "id", None) is not None:
        values["table_id"] = args.id
    return RunConfig(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return _COMMANDS[args.subcommand](cfg, args)
    except (UsageError, assembly.AssemblyError, ValueError) as exc:
        print(f"gltschwarz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gltschwarz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
