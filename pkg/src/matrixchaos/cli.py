"""Command-line front end.

Every command writes a header echoing its run configuration (as ``#``
comment lines for CSV, a ``config`` key for JSON) so an output file records
how to regenerate it.  The thread count is left out of the echo: results do
not depend on it.

Exit codes: 0 success, 2 usage, 3 invalid input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import ensembles
from .errors import EnumerationCap, InputError, NumericalError
from .hermitian_graph import (
    HermitianMatrix,
    build_graph,
    gershgorin,
    is_bipartite,
    load_matrix,
    polar_entries,
)
from .lyapunov import (
    default_threads,
    local_lyapunov,
    lyapunov_report,
    mean_lyapunov,
    thermo_lyapunov,
)
from .markov_map import build_B, spectrum_B, to_csv
from .otoc import coef_bound, enumerate_trajectories, otoc_norm, T_MAX
from .quantum_poincare import (
    assemble_U,
    bipartite_reduce,
    find_spectrum,
    gershgorin_window,
    secular,
)

EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    ensemble: Optional[str] = None
    d: Optional[int] = None
    v: Optional[int] = None
    kind: str = "circulant"
    beta: Optional[float] = None
    alpha: Optional[float] = None
    j: list = field(default_factory=list)
    mean_field: bool = False
    n_spins: int = 4
    zero_threshold: float = 1e-14
    energy: Optional[float] = None
    egrid: Optional[str] = None
    seed: int = 0
    mc_samples: int = 0
    mc_steps: int = 1000
    bipartite_reduce: bool = False
    per_vertex: bool = False
    window: Optional[str] = None
    grid: Optional[float] = None
    t_max: int = 8
    a: int = 0
    b: Optional[int] = None
    format: str = "csv"

    def echo(self) -> dict:
        return asdict(self)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _parse_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise UsageError(f"--egrid expects start:stop:count, got {spec!r}") from exc
    if n < 1:
        raise UsageError("--egrid needs at least one point")
    return np.linspace(a, b, n)


def _energies(cfg: RunConfig) -> np.ndarray:
    if cfg.egrid is not None:
        return _parse_grid(cfg.egrid)
    if cfg.energy is not None:
        return np.array([cfg.energy])
    raise UsageError("give --energy E or --egrid a:b:n")


def _single_energy(cfg: RunConfig) -> float:
    if cfg.energy is None:
        raise UsageError("this command needs --energy")
    return cfg.energy


def _couplings(items) -> dict:
    out = {}
    for item in items:
        try:
            v, w, val = item.split(":")
            out[(int(v), int(w))] = float(val)
        except ValueError as exc:
            raise UsageError(f"--j expects v:w:value, got {item!r}") from exc
    return out


def _matrix(cfg: RunConfig) -> HermitianMatrix:
    if cfg.input and cfg.ensemble:
        raise UsageError("--input and --ensemble are exclusive")
    if cfg.input:
        return load_matrix(cfg.input)
    if cfg.ensemble == "regular":
        if cfg.d is None or cfg.v is None:
            raise UsageError("regular ensemble needs --d and --v")
        return ensembles.build_regular(
            ensembles.RegularGraphSpec(cfg.d, cfg.v, cfg.kind, cfg.seed)
        )
    if cfg.ensemble == "spin":
        spec = ensembles.SpinGraphSpec(
            n_spins=cfg.n_spins,
            couplings=_couplings(cfg.j) if cfg.j else dict(ensembles.DEMO_COUPLINGS),
            alpha=1.0 if cfg.alpha is None else cfg.alpha,
        )
        return ensembles.build_spin_hamiltonian(spec, cfg.zero_threshold)
    if cfg.ensemble == "gbe":
        if cfg.v is None or cfg.beta is None:
            raise UsageError("gbe ensemble needs --v and --beta")
        mode = "mean-field" if cfg.mean_field else "sample"
        return ensembles.gbe_sample(ensembles.GbetaESpec(cfg.v, cfg.beta, cfg.seed, mode))
    raise UsageError("give --input PATH or --ensemble {regular,spin,gbe}")


def _csv(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    lines = ["# matrixchaos " + json.dumps(cfg.echo(), sort_keys=True)]
    lines.append(",".join(header))
    lines += [",".join(fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"config": cfg.echo(), **payload}, indent=2, sort_keys=True) + "\n"


def cmd_inspect(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    gd = gershgorin(H)
    payload = {
        "V": g.V,
        "D": g.D,
        "degrees": g.degrees.tolist(),
        "gershgorin": gd.radius.tolist(),
        "connected": True,
        "bipartite": is_bipartite(g),
    }
    if cfg.format == "json":
        return _json(cfg, payload)
    rows = [[v, int(g.degrees[v]), gd.radius[v], H.diagonal[v]] for v in range(g.V)]
    text = _csv(cfg, ["vertex", "degree", "gamma", "diagonal"], rows)
    extra = f"# V={g.V} D={g.D} connected=true bipartite={fmt(payload['bipartite'])}\n"
    return extra + text


def _sweep_row(H, g, polar, E, cfg: RunConfig) -> list:
    try:
        U = assemble_U(H, g, E, polar)
        B = build_B(U)
        per_edge, per_vertex = local_lyapunov(B, g)
        thermo = thermo_lyapunov(B)
        Bg = build_B(bipartite_reduce(U, g)) if cfg.bipartite_reduce else B
        gap = spectrum_B(Bg).gap
        _, logabs = np.linalg.slogdet(np.eye(g.D) - U.matrix)
        row = [E, mean_lyapunov(B), thermo.variance, per_vertex.min(), per_vertex.max(),
               gap, float(np.exp(logabs)), "ok"]
        if cfg.per_vertex:
            row += list(per_vertex)
        return row
    except Exception as exc:  # a failing grid point is recorded, not fatal
        row = [E, None, None, None, None, None, None, f"error:{type(exc).__name__}"]
        if cfg.per_vertex:
            row += [None] * g.V
        return row


def cmd_sweep(cfg: RunConfig, threads: int) -> str:
    if cfg.egrid is None:
        raise UsageError("sweep needs --egrid a:b:n")
    Es = _parse_grid(cfg.egrid)
    H = _matrix(cfg)
    g = build_graph(H)
    polar = polar_entries(H, g)

    def row(E):
        return _sweep_row(H, g, polar, float(E), cfg)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(row, Es))
    else:
        rows = [row(E) for E in Es]
    header = ["E", "lambda_mean", "lambda_var", "local_min", "local_max", "gap",
              "abs_zeta", "status"]
    if cfg.per_vertex:
        header += [f"lambda_v{v}" for v in range(g.V)]
    if cfg.format == "json":
        return _json(cfg, {"columns": header, "rows": [[fmt(x) for x in r] for r in rows]})
    return _csv(cfg, header, rows)


def cmd_spectrum(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    if cfg.window:
        try:
            lo, hi = map(float, cfg.window.split(":"))
        except ValueError as exc:
            raise UsageError("--window expects a:b") from exc
    else:
        lo, hi = gershgorin_window(H)
    grid = cfg.grid or (hi - lo) / (50.0 * H.V)
    roots = find_spectrum(H, g, (lo, hi), grid)
    if cfg.format == "json":
        return _json(cfg, {"window": [lo, hi], "grid": grid,
                           "roots": [asdict(r) for r in roots]})
    return _csv(cfg, ["root", "multiplicity", "residual"],
                [[r.root, r.multiplicity, r.residual] for r in roots])


def cmd_secular(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    rows = []
    for E in _energies(cfg):
        z = secular(H, g, float(E)).zeta
        rows.append([E, z.real, z.imag, abs(z)])
    return _csv(cfg, ["E", "re_zeta", "im_zeta", "abs_zeta"], rows)


def cmd_markov(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    U = assemble_U(H, g, _single_energy(cfg))
    if cfg.bipartite_reduce:
        U = bipartite_reduce(U, g)
    B = build_B(U)
    if cfg.format == "json":
        return _json(cfg, spectrum_B(B).to_dict())
    return "# matrixchaos " + json.dumps(cfg.echo(), sort_keys=True) + "\n" + to_csv(B)


def cmd_lyapunov(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    rep = lyapunov_report(H, g, _single_energy(cfg), cfg.mc_samples, cfg.mc_steps,
                          cfg.seed, threads)
    return _json(cfg, rep.to_dict())


def cmd_otoc(cfg: RunConfig, threads: int) -> str:
    H = _matrix(cfg)
    g = build_graph(H)
    U = assemble_U(H, g, _single_energy(cfg))
    B = build_B(U)
    a = cfg.a
    b = g.D - 1 if cfg.b is None else cfg.b
    if not (0 <= a < g.D and 0 <= b < g.D):
        raise UsageError(f"edge indices must lie in [0, {g.D})")
    rows = []
    for t in range(1, cfg.t_max + 1):
        val = otoc_norm(U, t, a, b)
        n_traj = c_lhs = c_rhs = None
        if t <= T_MAX:
            S = enumerate_trajectories(g, a, b, t)
            n_traj = len(S)
            if n_traj and val.transition > 0:
                try:
                    cb = coef_bound(B, S, U)
                    c_lhs, c_rhs = cb.lhs, cb.rhs
                except NumericalError:
                    pass
        rows.append([t, a, b, val.lhs, val.rhs, val.transition, n_traj, c_lhs, c_rhs])
    header = ["t", "a", "b", "lhs", "rhs_formula", "abs_Ut_ba_sq", "n_trajectories",
              "coef_lhs", "coef_rhs"]
    return _csv(cfg, header, rows)


def cmd_ensemble(cfg: RunConfig, threads: int) -> str:
    if not cfg.ensemble:
        raise UsageError("ensemble needs --ensemble {regular,spin,gbe}")
    H = _matrix(cfg)
    doc = H.to_document()
    doc["generated_by"] = cfg.echo()
    return json.dumps(doc, sort_keys=True) + "\n"


COMMANDS = {
    "inspect": cmd_inspect,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "secular": cmd_secular,
    "markov": cmd_markov,
    "lyapunov": cmd_lyapunov,
    "otoc": cmd_otoc,
    "ensemble": cmd_ensemble,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matrixchaos", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    src = p.add_argument_group("matrix source")
    src.add_argument("--input", help="matrix document (JSON)")
    src.add_argument("--ensemble", choices=["regular", "spin", "gbe"])
    src.add_argument("--d", type=int)
    src.add_argument("--v", type=int)
    src.add_argument("--kind", default="circulant", choices=["complete", "circulant", "random"])
    src.add_argument("--beta", type=float)
    src.add_argument("--alpha", type=float)
    src.add_argument("--j", action="append", default=[], metavar="V:W:VALUE")
    src.add_argument("--n-spins", type=int, default=4)
    src.add_argument("--mean-field", action="store_true")
    src.add_argument("--zero-threshold", type=float, default=1e-14)
    run = p.add_argument_group("run")
    en = run.add_mutually_exclusive_group()
    en.add_argument("--energy", type=float)
    en.add_argument("--egrid", metavar="A:B:N")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--mc-samples", type=int, default=0)
    run.add_argument("--mc-steps", type=int, default=1000)
    run.add_argument("--bipartite-reduce", action="store_true")
    run.add_argument("--per-vertex", action="store_true")
    run.add_argument("--window", metavar="A:B")
    run.add_argument("--grid", type=float)
    run.add_argument("--t-max", type=int, default=8)
    run.add_argument("--a", type=int, default=0)
    run.add_argument("--b", type=int)
    out = p.add_argument_group("output")
    out.add_argument("--out", help="output path (default stdout)")
    out.add_argument("--format", choices=["csv", "json"], default="csv")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = vars(args).copy()
    threads = opts.pop("threads") or default_threads()
    out_path = opts.pop("out")
    cfg = RunConfig(**opts)
    try:
        text = COMMANDS[cfg.command](cfg, threads)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"matrixchaos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, EnumerationCap) as exc:
        print(f"matrixchaos: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"matrixchaos: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
