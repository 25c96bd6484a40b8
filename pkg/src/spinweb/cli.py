"""Command-line driver: ``spinweb <command> [input] [options]``.

Exit codes: 0 success, 1 failed check, 2 I/O or parse error, 3 domain
precondition violated. Numeric output is CSV at 17 significant digits;
human-readable summaries go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import projcalc, splitcore, su2rep, webgeo
from .errors import DomainError, InputError, NumericalError, UnsupportedInputError
from .projcalc import FilterDescriptor, RepTuple
from .splitcore import max_splitting

EXIT_OK, EXIT_CHECK, EXIT_IO, EXIT_DOMAIN = 0, 1, 2, 3

COMMANDS = ("verify", "moments", "rich", "splitting", "decompose", "degeneracy", "converge", "decay")


@dataclass
class CommandConfig:
    command: str
    input_path: str | None = None
    tol: float = 1e-9
    nodes: int | None = None
    seed: int = 0
    samples: int = 100_000
    output: str | None = None
    bubbles: int | None = None
    spins: str | None = None
    steps: int = 6
    gap: int = 20
    max_iter: int = 200

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.samples < 100:
            raise InputError("--samples must be >= 100")


@dataclass
class Check:
    name: str
    expected: float
    actual: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(abs(self.actual - self.expected) <= self.tolerance)


@dataclass
class RunReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, expected, actual, tolerance: float) -> None:
        self.checks.append(Check(name, float(expected), float(actual), float(tolerance)))


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def emit_csv(rows: Iterable[Sequence], header: Sequence[str], output=None) -> None:
    """Write a header and rows as CSV with LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    _write(buf.getvalue(), output)


def _write(text: str, output) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    try:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {output}: {exc.strerror}") from None


def _read(path: str | None, what: str) -> str:
    if path is None:
        raise InputError(f"this command needs an input file ({what})")
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None


def _rep(cfg: CommandConfig, n: int = 4) -> RepTuple:
    rep = RepTuple.parse(cfg.spins) if cfg.spins else RepTuple.parse(",".join(["1/2"] * n))
    return rep


def _spin_web(cfg: CommandConfig) -> webgeo.SpinWeb:
    if cfg.input_path is not None:
        web, labels = webgeo.load_web(_read(cfg.input_path, "web JSON"))
    else:
        web, labels = webgeo.standard_web(cfg.bubbles or 2), None
    if cfg.spins:
        labels = RepTuple.parse(cfg.spins)
    if labels is None:
        labels = _rep(cfg, web.n)
    return webgeo.SpinWeb(web, labels)


# ---------------------------------------------------------------------------
# verify


def run_verify(cfg: CommandConfig) -> tuple[RunReport, int]:
    """Reference checks against closed-form values; exit 0 iff all pass."""
    tol = cfg.tol
    rep = RepTuple.parse("1/2,1/2,1/2,1/2")
    V1, V2 = webgeo.V1, webgeo.V2
    report = RunReport()

    table = su2rep.pair_moment_table(cfg.nodes or 4)
    exact = np.array([float(su2rep.pair_moment(*(i + 1 for i in idx))) for idx in np.ndindex(*[2] * 8)])
    report.add("pair moments max |closed - quadrature|", 0.0, np.abs(table.ravel() - exact).max(), tol)

    p1 = projcalc.projector_PV(rep, V1)
    p2 = projcalc.projector_PV(rep, V2)
    p0 = projcalc.projector_P0(rep)
    row, col = ((1, 1, 1, 1), (1, 1, 1, 1)), ((1, 1, 1, 2), (1, 2, 1, 1))
    report.add("P_V1·P_V2 entry", 1 / 216, (p1 @ p2).entry(*row, *col).real, tol)
    report.add("P0 entry", 0.0, abs(p0.entry(*row, *col)), tol)
    vmax = max_splitting(4)
    for engine in ("lie_kernel", "quadrature"):
        diff = np.abs(p0.matrix - projcalc.projector_PV(rep, vmax, engine).matrix).max()
        report.add(f"P0 vs P_Vmax ({engine})", 0.0, diff, tol)
    report.add("trace P0", 1.0, np.trace(p0.matrix).real, tol)
    report.add("rank P_V1", 4, p1.rank, 0)
    report.add("rank P_V2", 4, p2.rank, 0)
    report.add("rank of intersection", 1, projcalc.intersection_projector([p1, p2]).rank, 0)
    report.add("intersection projector vs P0", 0.0, np.abs(projcalc.intersection_projector([p1, p2]).matrix - p0.matrix).max(), tol)

    conv = projcalc.product_limit({1: p1, 2: p2}, itertools.cycle([1, 2]), tol=1e-10, max_iter=200)
    report.add("alternating product converged", 1, int(conv.converged), 0)
    report.add("contraction of P_V1'P_V2'", 1 / 3, conv.contraction, tol)

    fd = FilterDescriptor(rep, V1, 1)
    q = projcalc.degeneracy_filter_operator(fd)
    c, resid = projcalc.sandwich_coefficient(q, rep)
    report.add("P0 sandwich c for Q_{V1,1}", 0.75, c, tol)
    report.add("P0 sandwich residual", 0.0, resid, tol)
    report.add("Frobenius norm of D_{V1,1}", math.sqrt(0.75), projcalc.frobenius_norm(projcalc.filter_descriptor(fd)), tol)
    decay = projcalc.decay_experiment(projcalc.DecaySchedule.ideal(fd, 6))
    for k, s in enumerate(decay):
        report.add(f"ideal decay s_{k}", 0.75 ** (k + 1), s, tol)

    report.add("closure dim, rich example", 12, su2rep.subalgebra_closure_dim(["1100", "1010", "0101", "0011"], 4), 0)
    report.add("closure dim, non-rich example", 9, su2rep.subalgebra_closure_dim(["1101", "1011", "0110"], 4), 0)
    report.add("word map rank V1V2V1V2", 12, webgeo.word_map_rank([V1, V2, V1, V2], seed=cfg.seed), 0)

    web = webgeo.standard_web(2)
    sw = webgeo.SpinWeb(web, rep)
    report.add("standard web degenerate", 1, int(webgeo.is_weakly_degenerate(sw).degenerate), 0)
    report.add("standard web (1/2,1,3/2,2) degenerate", 0, int(webgeo.is_weakly_degenerate(webgeo.SpinWeb(web, RepTuple.parse("1/2,1,3/2,2"))).degenerate), 0)
    report.add("standard web types rich", 1, int(splitcore.is_rich(webgeo.types_set(web), 4)), 0)

    return report, EXIT_OK if report.passed else EXIT_CHECK


# ---------------------------------------------------------------------------
# other commands


def _cmd_verify(cfg):
    report, code = run_verify(cfg)
    emit_csv(
        ([c.name, c.expected, c.actual, c.tolerance, c.ok] for c in report.checks),
        ["check", "expected", "actual", "tolerance", "ok"],
        cfg.output,
    )
    bad = [c.name for c in report.checks if not c.ok]
    print(f"{len(report.checks) - len(bad)}/{len(report.checks)} checks passed" + (f"; failed: {', '.join(bad)}" if bad else ""), file=sys.stderr)
    return code


def _cmd_moments(cfg):
    table = su2rep.pair_moment_table(cfg.nodes or 4)
    rows, worst = [], 0.0
    for idx in np.ndindex(*[2] * 8):
        ones = tuple(i + 1 for i in idx)
        fr = su2rep.pair_moment(*ones)
        val = complex(table[idx])
        diff = abs(val - float(fr))
        worst = max(worst, diff)
        rows.append([*ones, fr.numerator, fr.denominator, val.real, diff])
    emit_csv(rows, ["mu1", "nu1", "mu2", "nu2", "rho1", "sigma1", "rho2", "sigma2", "numerator", "denominator", "quadrature", "abs_diff"], cfg.output)
    print(f"max abs diff {worst:.3g}", file=sys.stderr)
    return EXIT_OK if worst <= cfg.tol else EXIT_CHECK


def _blocks(cfg):
    blocks = splitcore.parse_splitting_blocks(_read(cfg.input_path, "splitting text"))
    if not blocks:
        raise InputError("no input blocks found")
    return blocks


def _cmd_rich(cfg):
    lines = []
    for vs in _blocks(cfg):
        n = splitcore._common_length(vs)
        bad = splitcore.rich_violation(vs, n)
        if bad is None:
            lines.append("true")
        elif bad[0] == "unseparated":
            lines.append(f"false (i={bad[1][0]}, j={bad[1][1]} unseparated)")
        else:
            lines.append(f"false (i={bad[1][0]} uncovered)")
    _write("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def _cmd_splitting(cfg):
    lines = []
    for vs in _blocks(cfg):
        lines.append(fmt(splitcore.is_splitting(vs, splitcore._common_length(vs))))
    _write("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def _cmd_decompose(cfg):
    web, _ = webgeo.load_web(_read(cfg.input_path, "web JSON"))
    rep = webgeo.check_consistent(web.edges)
    if not rep.ok:
        raise DomainError("inconsistent parametrization: " + "; ".join(f"paths {i},{j} at t'={fmt(a)}, t''={fmt(b)}" for i, j, a, b in rep.violations))
    res = webgeo.decompose(web.edges)
    lines = [", ".join(fmt(t) for t in res.breakpoints)]
    for (a, b), (reps, V) in zip(res.intervals, res.pieces):
        lines.append(f"[{fmt(a)}, {fmt(b)}] reduction=({','.join(map(str, reps))}) splitting={V}")
    _write("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def _cmd_degeneracy(cfg):
    sw = _spin_web(cfg)
    _write(str(webgeo.is_weakly_degenerate(sw)) + "\n", cfg.output)
    return EXIT_OK


def _cmd_converge(cfg):
    if cfg.input_path is not None:
        web, labels = webgeo.load_web(_read(cfg.input_path, "web JSON"))
        family = sorted(webgeo.limit_splittings(web), key=lambda V: V.elements, reverse=True)
        rep = RepTuple.parse(cfg.spins) if cfg.spins else labels or _rep(cfg, web.n)
    else:
        family = [webgeo.V1, webgeo.V2]
        rep = _rep(cfg)
    projs = [projcalc.projector_PV(rep, V) for V in family]
    res = projcalc.product_limit(projs, itertools.cycle(range(len(projs))), tol=cfg.tol, max_iter=cfg.max_iter)
    emit_csv(res.rows(), ["step", "norm", "bound"], cfg.output)
    monotone = all(b <= a + 1e-12 for a, b in zip(res.norms, res.norms[1:]))
    bounded = all(n <= b + 1e-12 for n, b in zip(res.norms, res.bounds))
    print(f"converged={res.converged} steps={res.iterations} error={res.final_error:.3g} contraction={res.contraction:.6g}", file=sys.stderr)
    return EXIT_OK if res.converged and monotone and bounded else EXIT_CHECK


def _cmd_decay(cfg):
    if cfg.input_path is not None or cfg.bubbles is not None:
        sw = _spin_web(cfg)
        schedule = webgeo.degeneracy_schedule(sw, cfg.steps, cfg.gap)
    else:
        rep = _rep(cfg)
        schedule = projcalc.DecaySchedule.ideal(FilterDescriptor(rep, webgeo.V1, 1), cfg.steps)
    res = projcalc.run_decay(schedule)
    emit_csv(res.rows(), ["step", "norm", "bound"], cfg.output)
    ok = all(s <= b + cfg.tol for s, b in zip(res.norms, res.bounds))
    print(f"final s_{cfg.steps} = {res.norms[-1]:.6g}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


HANDLERS = {
    "verify": _cmd_verify,
    "moments": _cmd_moments,
    "rich": _cmd_rich,
    "splitting": _cmd_splitting,
    "decompose": _cmd_decompose,
    "degeneracy": _cmd_degeneracy,
    "converge": _cmd_converge,
    "decay": _cmd_decay,
}


def run_command(cfg: CommandConfig) -> int:
    return HANDLERS[cfg.command](cfg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinweb", description="Projector calculus and polyline webs for SU(2) spin networks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", nargs="?", default=None, help="input file (splitting text or web JSON); '-' for stdin")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--nodes", type=int, default=None, help="quadrature degree override for moment tables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--bubbles", type=int, default=None, help="use the generated standard web with this many bubbles per type")
    p.add_argument("--spins", default=None, help="comma-separated spin labels, e.g. 1/2,1/2,1/2,1/2")
    p.add_argument("--steps", type=int, default=6, help="number L of filter steps (decay)")
    p.add_argument("--gap", type=int, default=20, help="minimum gap chain length (decay on a web)")
    p.add_argument("--max-iter", type=int, default=200)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = CommandConfig(
            command=args.command,
            input_path=args.input,
            tol=args.tol,
            nodes=args.nodes,
            seed=args.seed,
            samples=args.samples,
            output=args.output,
            bubbles=args.bubbles,
            spins=args.spins,
            steps=args.steps,
            gap=args.gap,
            max_iter=args.max_iter,
        )
        return run_command(cfg)
    except (InputError, OSError, UnsupportedInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
