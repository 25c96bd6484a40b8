"""Planar polyline webs: consistent parametrization, decomposition into nice
pieces, point types and splittings along a web, cylinder integrals and the
strong-degeneracy decay series.

Paths are polylines in the plane with a parameter value at every vertex and
linear interpolation in between. Two paths coincide on an interval iff they
agree there as parametrized maps.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import projcalc, su2rep
from .errors import DomainError, InputError
from .projcalc import DecaySchedule, FilterDescriptor, RepTuple
from .splitcore import BitVector, Splitting, bitvector, format_bits, section_map, splitting_of_tuple
from .su2rep import Spin

GEOM_TOL = 1e-9
PARAM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ParamPolyline:
    """Polyline ``[0, 1] -> R^2`` with parameters ``params`` at ``vertices``."""

    vertices: np.ndarray
    params: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.params, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InputError(f"vertices must have shape (k, 2), got {v.shape}")
        if v.shape[0] < 2:
            raise InputError("a polyline needs at least 2 vertices")
        if t.shape != (v.shape[0],):
            raise InputError(f"need one parameter per vertex: {t.shape[0] if t.ndim else 0} params, {v.shape[0]} vertices")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(t)):
            raise InputError("vertices and params must be finite")
        if np.any(np.diff(t) <= 0):
            raise InputError("params must be strictly increasing")
        if abs(t[0]) > PARAM_TOL or abs(t[-1] - 1) > PARAM_TOL:
            raise InputError(f"params must run from 0 to 1, got {t[0]} .. {t[-1]}")
        if np.any(np.linalg.norm(np.diff(v, axis=0), axis=1) <= GEOM_TOL):
            raise InputError("consecutive vertices must be distinct")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "params", t)

    @classmethod
    def straight(cls, a, b) -> "ParamPolyline":
        return cls(np.array([a, b], float), np.array([0.0, 1.0]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, self.params, self.vertices[:, k]) for k in range(2)], axis=-1)

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Start points, end points, start params, end params."""
        return self.vertices[:-1], self.vertices[1:], self.params[:-1], self.params[1:]

    def distance_to(self, x) -> float:
        p, q, _, _ = self.segments
        d = q - p
        s = np.clip(np.einsum("kj,kj->k", np.asarray(x) - p, d) / np.einsum("kj,kj->k", d, d), 0, 1)
        return float(np.min(np.linalg.norm(p + s[:, None] * d - x, axis=1)))


@dataclass(frozen=True, eq=False)
class EdgeTuple:
    paths: tuple[ParamPolyline, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise InputError("an edge tuple needs at least one path")

    @property
    def n(self) -> int:
        return len(self.paths)


# ---------------------------------------------------------------------------
# intersections and consistency


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segment_events(a: ParamPolyline, b: ParamPolyline, same: bool = False) -> list[tuple[float, float]]:
    """Parameter pairs ``(t', t'')`` at which ``a(t') = b(t'')``: isolated
    intersection points and the endpoints of collinear overlaps."""
    p, p1, s0, s1 = a.segments
    q, q1, u0, u1 = b.segments
    r = p1 - p
    s = q1 - q
    rl = np.linalg.norm(r, axis=1)[:, None]
    sl = np.linalg.norm(s, axis=1)[None, :]
    qp = q[None, :, :] - p[:, None, :]
    denom = _cross(r[:, None, :], s[None, :, :])
    parallel = np.abs(denom) <= 1e-12 * rl * sl
    with np.errstate(divide="ignore", invalid="ignore"):
        x = _cross(qp, s[None, :, :]) / denom
        y = _cross(qp, r[:, None, :]) / denom
    ex = GEOM_TOL / rl
    ey = GEOM_TOL / sl
    hit = ~parallel & (x >= -ex) & (x <= 1 + ex) & (y >= -ey) & (y <= 1 + ey)
    if same:
        np.fill_diagonal(hit, False)
    events = []
    ii, jj = np.nonzero(hit)
    xs = np.clip(x[ii, jj], 0, 1)
    ys = np.clip(y[ii, jj], 0, 1)
    t1 = s0[ii] + xs * (s1[ii] - s0[ii])
    t2 = u0[jj] + ys * (u1[jj] - u0[jj])
    events.extend(zip(t1.tolist(), t2.tolist()))
    collinear = parallel & (np.abs(_cross(qp, r[:, None, :])) <= GEOM_TOL * rl)
    if same:
        np.fill_diagonal(collinear, False)
    for i, j in zip(*np.nonzero(collinear)):
        rr = float(r[i] @ r[i])
        c0 = float((q[j] - p[i]) @ r[i]) / rr
        c1 = float((q1[j] - p[i]) @ r[i]) / rr
        lo, hi = max(0.0, min(c0, c1)), min(1.0, max(c0, c1))
        if lo > hi + GEOM_TOL / math.sqrt(rr):
            continue
        for c in {lo, hi}:
            pt = p[i] + c * r[i]
            ss = float(s[j] @ s[j])
            d = min(max(float((pt - q[j]) @ s[j]) / ss, 0.0), 1.0)
            events.append((s0[i] + c * (s1[i] - s0[i]), u0[j] + d * (u1[j] - u0[j])))
    return events


@dataclass
class ConsistencyReport:
    ok: bool
    violations: list[tuple[int, int, float, float]] = field(default_factory=list)


def check_consistent(t: EdgeTuple | Sequence[ParamPolyline]) -> ConsistencyReport:
    """Whenever two paths (or one path twice) pass through the same point, the
    parameters must agree. Violations are ``(i, j, t', t'')`` with 1-based paths."""
    paths = t.paths if isinstance(t, EdgeTuple) else tuple(t)
    violations = []
    for i in range(len(paths)):
        for j in range(i, len(paths)):
            for ta, tb in _segment_events(paths[i], paths[j], same=(i == j)):
                if abs(ta - tb) > PARAM_TOL:
                    v = (i + 1, j + 1, round(ta, 12), round(tb, 12))
                    if i == j and (v[0], v[1], v[3], v[2]) in violations:
                        continue
                    if v not in violations:
                        violations.append(v)
    return ConsistencyReport(not violations, violations)


def _require_consistent(t: EdgeTuple) -> None:
    rep = check_consistent(t)
    if not rep.ok:
        i, j, a, b = rep.violations[0]
        raise InputError(
            f"inconsistent parametrization: paths {i} and {j} meet at t'={a:g}, t''={b:g}"
            + (f" (+{len(rep.violations) - 1} more)" if len(rep.violations) > 1 else "")
        )


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1] + PARAM_TOL:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out if b - a > PARAM_TOL]


def _coincidence(a: ParamPolyline, b: ParamPolyline) -> list[tuple[float, float]]:
    if a is b:
        return [(0.0, 1.0)]
    knots = np.union1d(a.params, b.params)
    knots = knots[np.concatenate([[True], np.diff(knots) > PARAM_TOL])]
    knots[-1] = 1.0
    gap = np.linalg.norm(a(knots) - b(knots), axis=1) <= GEOM_TOL
    both = gap[:-1] & gap[1:]
    return _merge([(float(knots[k]), float(knots[k + 1])) for k in np.nonzero(both)[0]])


def coincidence_intervals(t: EdgeTuple, i: int, j: int) -> list[tuple[float, float]]:
    """Maximal closed intervals on which paths ``i`` and ``j`` (1-based) agree
    as parametrized maps; single touching points are not reported."""
    _require_consistent(t)
    for k in (i, j):
        if not 1 <= k <= t.n:
            raise InputError(f"path index {k} outside 1..{t.n}")
    return _coincidence(t.paths[i - 1], t.paths[j - 1])


def _identity_classes(paths: Sequence[ParamPolyline], a: float, b: float) -> list[int]:
    """Label paths so that equal labels mean equal maps on ``[a, b]``."""
    labels: list[int] = []
    for k, p in enumerate(paths):
        for m in range(k):
            if labels[m] == m and any(lo <= a + PARAM_TOL and hi >= b - PARAM_TOL for lo, hi in _coincidence(paths[m], p)):
                labels.append(m)
                break
        else:
            labels.append(k)
    return labels


def reduction_and_splitting(t: EdgeTuple) -> tuple[tuple[int, ...], Splitting]:
    """Distinct paths (1-based indices of first occurrences) and the splitting
    that groups equal paths."""
    labels = _identity_classes(t.paths, 0.0, 1.0)
    reps = tuple(sorted({l + 1 for l in labels}))
    return reps, splitting_of_tuple(labels)


@dataclass
class DecompositionResult:
    breakpoints: tuple[float, ...]
    pieces: list[tuple[tuple[int, ...], Splitting]]

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.breakpoints[:-1], self.breakpoints[1:]))


def decompose(t: EdgeTuple, interval: Sequence[float] = (0.0, 1.0)) -> DecompositionResult:
    """Cut ``interval`` at every endpoint of a pairwise coincidence interval.

    On each piece two restricted paths either agree everywhere or share no
    nontrivial subinterval, so the distinct restricted pieces form a hyph.
    """
    a, b = (float(x) for x in interval)
    if not (0 - PARAM_TOL <= a < b <= 1 + PARAM_TOL) or b - a <= PARAM_TOL:
        raise InputError(f"interval must satisfy 0 <= a < b <= 1, got [{a}, {b}]")
    _require_consistent(t)
    cuts = [a, b]
    for i in range(t.n):
        for j in range(i + 1, t.n):
            for lo, hi in _coincidence(t.paths[i], t.paths[j]):
                cuts += [c for c in (lo, hi) if a < c < b]
    cuts.sort()
    bps = [cuts[0]]
    for c in cuts[1:]:
        if c - bps[-1] > PARAM_TOL:
            bps.append(c)
    bps[-1] = b
    pieces = []
    for lo, hi in zip(bps[:-1], bps[1:]):
        labels = _identity_classes(t.paths, lo, hi)
        pieces.append((tuple(sorted({l + 1 for l in labels})), splitting_of_tuple(labels)))
    return DecompositionResult(tuple(bps), pieces)


def is_hyph_piece(t: EdgeTuple, interval: Sequence[float]) -> bool:
    """Distinct restricted paths share no nontrivial parameter subinterval."""
    a, b = interval
    labels = _identity_classes(t.paths, a, b)
    reps = sorted(set(labels))
    for x in range(len(reps)):
        for y in range(x + 1, len(reps)):
            for lo, hi in _coincidence(t.paths[reps[x]], t.paths[reps[y]]):
                if min(hi, b) - max(lo, a) > PARAM_TOL:
                    return False
    return True


# ---------------------------------------------------------------------------
# webs


@dataclass(frozen=True, eq=False)
class Web:
    """Paths from a common base at parameter 0 plus a periodic tail descriptor:
    the splittings that repeat toward the base, realized ``realized`` times."""

    paths: tuple[ParamPolyline, ...]
    tail: tuple[Splitting, ...] | None = None
    realized: int = 0

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise InputError("a web needs at least one path")
        base = self.paths[0].vertices[0]
        for k, p in enumerate(self.paths):
            if np.linalg.norm(p.vertices[0] - base) > GEOM_TOL:
                raise InputError(f"paths[{k}] does not start at the common base")
        if self.tail is not None:
            object.__setattr__(self, "tail", tuple(self.tail))
            for V in self.tail:
                if V.n != len(self.paths):
                    raise InputError("tail splitting length does not match the number of paths")

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def edges(self) -> EdgeTuple:
        return EdgeTuple(self.paths)

    @functools.cached_property
    def _critical(self) -> np.ndarray:
        pts = [0.0, 1.0]
        for p in self.paths:
            pts.extend(p.params.tolist())
        for i in range(self.n):
            for j in range(i, self.n):
                for ta, tb in _segment_events(self.paths[i], self.paths[j], same=(i == j)):
                    pts += [ta, tb]
        pts = np.sort(np.asarray(pts))
        return pts[np.concatenate([[True], np.diff(pts) > PARAM_TOL])]

    @functools.cached_property
    def _regular(self) -> list[tuple[float, float]]:
        c = self._critical
        return [(float(a), float(b)) for a, b in zip(c[:-1], c[1:])]


@dataclass(frozen=True, eq=False)
class SpinWeb:
    web: Web
    labels: RepTuple

    def __post_init__(self):
        if not isinstance(self.labels, RepTuple):
            object.__setattr__(self, "labels", RepTuple.parse(self.labels))
        if self.labels.n != self.web.n:
            raise InputError(f"{self.labels.n} labels for {self.web.n} paths")


def validate_web(w: Web) -> list[str]:
    """Problems found by the implemented web checks (empty when valid):
    consistent parametrization, distinct images, and agreement of the realized
    regular splittings with the tail descriptor."""
    problems = []
    rep = check_consistent(w.edges)
    if not rep.ok:
        problems.append(f"inconsistent parametrization {rep.violations[:3]}")
    labels = _identity_classes(w.paths, 0.0, 1.0)
    if len(set(labels)) != w.n:
        problems.append("paths are not pairwise distinct")
    if w.tail and w.realized:
        seq = regular_sequence(w)
        want = list(w.tail) * w.realized
        if seq[: len(want)] != want:
            problems.append("regular splittings do not repeat the tail descriptor")
    return problems


def regular_set(w: Web) -> list[tuple[float, float]]:
    """Open intervals avoiding vertices, endpoints and meeting points of the
    paths; the complement in ``[0, 1]`` is finite."""
    return list(w._regular)


def point_types(w: Web, tau: float) -> list[BitVector]:
    """``v_i`` = indicator of the paths whose image contains ``w_i(tau)``."""
    pts = [p(tau) for p in w.paths]
    return [tuple(int(q.distance_to(x) <= GEOM_TOL) for q in w.paths) for x in pts]


def _check_regular(w: Web, tau: float) -> None:
    c = w._critical
    if not (0 < tau < 1) or np.min(np.abs(c - tau)) <= PARAM_TOL:
        raise InputError(f"tau={tau} is not a regular parameter")


def splitting_at(w: Web, tau: float) -> Splitting:
    """Splitting formed by the point types at a regular parameter."""
    _check_regular(w, tau)
    types = point_types(w, tau)
    try:
        return Splitting(tuple(set(types)))
    except InputError as exc:
        raise InputError(f"point types at tau={tau} do not form a splitting: {exc}") from None


def regular_sequence(w: Web) -> list[Splitting]:
    """Splittings on the regular intervals read along decreasing parameter,
    with consecutive repeats merged."""
    out: list[Splitting] = []
    for a, b in reversed(w._regular):
        V = splitting_at(w, (a + b) / 2)
        if not out or out[-1] != V:
            out.append(V)
    return out


def regular_splittings(w: Web) -> list[tuple[float, Splitting]]:
    """``(tau, splitting)`` at the midpoint of every regular interval, by decreasing tau."""
    return [((a + b) / 2, splitting_at(w, (a + b) / 2)) for a, b in reversed(w._regular)]


def types_set(w: Web) -> tuple[BitVector, ...]:
    """All point types occurring on regular intervals and in the tail, sorted
    descending."""
    types = {v for _, V in regular_splittings(w) for v in V}
    for V in w.tail or ():
        types.update(V)
    return tuple(sorted(types, reverse=True))


def limit_splittings(w: Web) -> set[Splitting]:
    """Splittings recurring in every neighbourhood of the base, read off the tail."""
    if not w.tail:
        raise InputError("web has no tail descriptor")
    return set(w.tail)


@dataclass
class Degeneracy:
    degenerate: bool
    tau: float | None = None
    element: BitVector | None = None
    splitting: Splitting | None = None

    @property
    def q(self) -> int | None:
        return None if self.element is None else self.element.index(1) + 1

    def __str__(self) -> str:
        if not self.degenerate:
            return "not degenerate"
        return "degenerate, witness (" + ",".join(str(b) for b in self.element) + ")"


def is_weakly_degenerate(sw: SpinWeb) -> Degeneracy:
    """Search the regular splittings (decreasing tau) for an element whose
    selected spins contain the trivial representation."""
    spins = sw.labels.spins
    for tau, V in regular_splittings(sw.web):
        for v in V:
            if su2rep.trivial_multiplicity([s for s, b in zip(spins, v) if b]) > 0:
                return Degeneracy(True, tau, v, V)
    return Degeneracy(False)


# ---------------------------------------------------------------------------
# the standard four-strand web

V1 = Splitting.of("1100", "0011")
V2 = Splitting.of("1010", "0101")


def standard_web(bubbles: int) -> Web:
    """Four strands from a common base, forming ``2 * bubbles`` lenses that
    shrink geometrically toward the base.

    Reading along decreasing parameter the lenses alternate between type V1
    (strands 1, 2 on the upper arc, 3, 4 on the lower) and type V2 (1, 3 up,
    2, 4 down). The x coordinate equals the parameter, which makes the
    parametrization consistent.
    """
    if bubbles < 1:
        raise InputError("bubbles must be >= 1")
    count = 2 * bubbles
    ratio = max(0.5, 1e-6 ** (1 / count))
    junctions = [ratio**k for k in range(count)] + [0.0]  # lens k spans junctions[k+1]..junctions[k]
    up = {0: (True, True, False, False), 1: (True, False, True, False)}
    strands = []
    for s in range(4):
        pts = [(0.0, 0.0)]
        for k in reversed(range(count)):
            lo, hi = junctions[k + 1], junctions[k]
            h = 0.25 * (hi - lo)
            pts.append(((lo + hi) / 2, h if up[k % 2][s] else -h))
            pts.append((hi, 0.0))
        v = np.array(pts)
        strands.append(ParamPolyline(v, v[:, 0].copy()))
    return Web(tuple(strands), (V1, V2), bubbles)


def word_map_rank(word: Sequence[Splitting], seed: int = 0, eps: float = 1e-6) -> int:
    """Rank of the differential of the map sending edge variables of a
    sequence of bubbles to the strand holonomies.

    Each bubble of splitting ``V`` carries one SU(2) variable per element of
    ``V``; strand ``i`` picks up the variable of its element. The strand
    holonomies are products in word order. Full rank ``3 n`` means the map is
    locally onto ``SU(2)^n``.
    """
    rng = np.random.default_rng(seed)
    n = word[0].n
    edges = [(b, v) for b, V in enumerate(word) for v in V]
    g0 = su2rep.sample_haar(rng, size=len(edges))
    gens = [1j * np.array(m) for m in ([[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]])]

    def holonomies(gs):
        out = []
        for i in range(n):
            h = np.eye(2, dtype=complex)
            for (b, v), g in zip(edges, gs):
                if v[i]:
                    h = h @ g
            out.append(h)
        return out

    base = holonomies(g0)
    cols = []
    for e in range(len(edges)):
        for x in gens:
            plus = g0.copy()
            minus = g0.copy()
            plus[e] = g0[e] @ (np.eye(2) + eps * x)
            minus[e] = g0[e] @ (np.eye(2) - eps * x)
            hp, hm = holonomies(plus), holonomies(minus)
            col = []
            for h, a, c in zip(base, hp, hm):
                d = h.conj().T @ (a - c) / (2 * eps)  # in su(2): i * (x sigma_x + ...)
                col += [d[0, 1].imag, d[0, 1].real, d[0, 0].imag]
            cols.append(col)
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.sum(s > 1e-6 * s[0]))


# ---------------------------------------------------------------------------
# cylinder functions


@dataclass(frozen=True)
class MatrixCoefficient:
    """``g_slot`` entry ``(row, col)`` in spin ``spin`` (1-based indices, 1 =
    highest weight), optionally complex conjugated."""

    slot: int
    row: int
    col: int
    spin: Spin = Spin(1)
    conj: bool = False


@dataclass(frozen=True)
class CoefficientProduct:
    """Product of matrix coefficients of the group elements of an edge tuple."""

    factors: tuple[MatrixCoefficient, ...] = ()

    @classmethod
    def one(cls) -> "CoefficientProduct":
        return cls(())

    def __mul__(self, other: "CoefficientProduct") -> "CoefficientProduct":
        return CoefficientProduct(self.factors + other.factors)

    def shifted(self, offset: int) -> "CoefficientProduct":
        return CoefficientProduct(tuple(MatrixCoefficient(f.slot + offset, f.row, f.col, f.spin, f.conj) for f in self.factors))

    def evaluate(self, g: Sequence[np.ndarray]) -> np.ndarray:
        """Value at a (batched) tuple of group elements ``g[k]`` of shape ``(..., 2, 2)``."""
        out = np.ones(np.shape(g[0])[:-2], dtype=complex)
        for f in self.factors:
            val = su2rep.spin_rep(f.spin, np.asarray(g[f.slot - 1]))[..., f.row - 1, f.col - 1]
            out = out * (np.conj(val) if f.conj else val)
        return out


def _check_slots(f: CoefficientProduct, n: int) -> None:
    for c in f.factors:
        if not 1 <= c.slot <= n:
            raise InputError(f"coefficient slot {c.slot} outside 1..{n}")
        if not (1 <= c.row <= c.spin.dim and 1 <= c.col <= c.spin.dim):
            raise InputError(f"coefficient index ({c.row},{c.col}) outside spin {c.spin}")


def _require_nice(t: EdgeTuple) -> Splitting:
    _require_consistent(t)
    reps, V = reduction_and_splitting(t)
    for x in range(len(reps)):
        for y in range(x + 1, len(reps)):
            if _coincidence(t.paths[reps[x] - 1], t.paths[reps[y] - 1]):
                raise InputError(f"paths {reps[x]} and {reps[y]} share a segment: reduction is not a hyph")
    return V


def integrate_cylinder(f: CoefficientProduct, t: EdgeTuple) -> complex:
    """Haar integral of ``f`` after collapsing equal paths onto one variable:
    one independent SU(2) variable per distinct path, by exact quadrature."""
    V = _require_nice(t)
    _check_slots(f, t.n)
    s = section_map(V)
    by_block: dict[int, list[MatrixCoefficient]] = {}
    for c in f.factors:
        by_block.setdefault(s[c.slot - 1], []).append(c)
    value = 1.0 + 0j
    for cs in by_block.values():
        prod = CoefficientProduct(tuple(MatrixCoefficient(1, c.row, c.col, c.spin, c.conj) for c in cs))
        degree = sum(c.spin.twice_j for c in cs)
        value *= complex(su2rep.haar_integrate(lambda g: prod.evaluate([g]), degree, vectorized=True))
    return value


@dataclass
class MCResult:
    estimate: complex
    stderr: float


def mc_cylinder_expect(f: CoefficientProduct, t: EdgeTuple, samples: int, seed: int | np.random.Generator) -> MCResult:
    """Monte-Carlo mean of ``f`` with i.i.d. Haar elements on the distinct
    paths, shared by equal paths."""
    if samples < 100:
        raise InputError("samples must be >= 100")
    V = _require_nice(t)
    _check_slots(f, t.n)
    rng = np.random.default_rng(seed)
    s = section_map(V)
    draws = {k: su2rep.sample_haar(rng, size=samples) for k in sorted(set(s))}
    vals = f.evaluate([draws[s[k]] for k in range(t.n)])
    est = complex(vals.mean())
    err = float(np.sqrt(np.mean(np.abs(vals - est) ** 2) / (samples - 1))) if samples > 1 else 0.0
    return MCResult(est, err)


# ---------------------------------------------------------------------------
# decay along a degenerate web


def degeneracy_schedule(sw: SpinWeb, L: int, gap: int = 20, engine: str = "lie_kernel") -> DecaySchedule:
    """Filter bubbles at the witness splitting, separated by gap chains made of
    the intervening regular splittings (at least ``gap`` of them).

    Splittings are applied in order of decreasing parameter, so each gap chain
    is stored reversed (left-to-right multiplication order).
    """
    if L < 0 or gap < 0:
        raise InputError("L and gap must be >= 0")
    wit = is_weakly_degenerate(sw)
    if not wit.degenerate:
        raise DomainError("spin web is not weakly degenerate: no witness splitting")
    W = wit.splitting
    seq = regular_sequence(sw.web)
    fd = FilterDescriptor(sw.labels, W, wit.q)
    chains, cursor = [], 0
    for nu in range(L + 1):
        stop = cursor + gap
        while stop < len(seq) and seq[stop] != W:
            stop += 1
        if stop >= len(seq):
            raise InputError(
                f"web tail too short: {len(seq)} regular pieces supply only {nu} of {L + 1} filter bubbles with gap {gap}"
            )
        chains.append(list(reversed(seq[cursor:stop])))
        cursor = stop + 1
    return DecaySchedule(fd, chains, L, engine=engine)


def strong_degeneracy_series(sw: SpinWeb, L: int, gap: int = 20, engine: str = "lie_kernel") -> list[float]:
    """Norms ``s_0..s_L`` of the decay experiment built from the web."""
    return projcalc.decay_experiment(degeneracy_schedule(sw, L, gap, engine))


def bubbles_needed(L: int, gap: int) -> int:
    """Smallest ``bubbles`` for which the standard web supplies the schedule."""
    return math.ceil(((L + 1) * (gap + 2)) / 2) + 1


# ---------------------------------------------------------------------------
# JSON


def _field(obj: dict, key: str, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{path}.{key}: missing field" if path else f"{key}: missing field")
    return obj[key]


def _parse_path(p: Any, where: str) -> ParamPolyline:
    if not isinstance(p, dict):
        raise InputError(f"{where}: expected an object")
    verts = _field(p, "vertices", where)
    params = _field(p, "params", where)
    if not isinstance(verts, list):
        raise InputError(f"{where}.vertices: expected a list")
    for k, v in enumerate(verts):
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
            raise InputError(f"{where}.vertices[{k}]: expected [x, y] numbers")
    if not isinstance(params, list):
        raise InputError(f"{where}.params: expected a list")
    for k, t in enumerate(params):
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise InputError(f"{where}.params[{k}]: expected a number")
    try:
        return ParamPolyline(np.array(verts, float), np.array(params, float))
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def web_from_dict(doc: Any) -> tuple[Web, RepTuple | None]:
    if not isinstance(doc, dict):
        raise InputError("<root>: expected an object")
    paths = _field(doc, "paths", "")
    if not isinstance(paths, list) or not paths:
        raise InputError("paths: expected a non-empty list")
    polys = tuple(_parse_path(p, f"paths[{k}]") for k, p in enumerate(paths))
    labels = None
    if "labels" in doc:
        raw = doc["labels"]
        if not isinstance(raw, list):
            raise InputError("labels: expected a list")
        spins = []
        for k, s in enumerate(raw):
            try:
                spins.append(Spin.parse(s))
            except (InputError, ValueError, TypeError) as exc:
                raise InputError(f"labels[{k}]: {exc}") from None
        if len(spins) != len(polys):
            raise InputError(f"labels: {len(spins)} labels for {len(polys)} paths")
        labels = RepTuple(tuple(spins))
    tail, realized = None, 0
    if "tail" in doc:
        td = doc["tail"]
        raw = _field(td, "splittings", "tail")
        if not isinstance(raw, list):
            raise InputError("tail.splittings: expected a list")
        tail = []
        for k, V in enumerate(raw):
            try:
                tail.append(Splitting(tuple(bitvector(v) for v in V)))
            except (InputError, TypeError) as exc:
                raise InputError(f"tail.splittings[{k}]: {exc}") from None
        realized = _field(td, "realized", "tail")
        if not isinstance(realized, int) or isinstance(realized, bool) or realized < 0:
            raise InputError("tail.realized: expected a non-negative integer")
    try:
        web = Web(polys, tuple(tail) if tail is not None else None, realized)
    except InputError as exc:
        raise InputError(f"paths: {exc}") from None
    return web, labels


def load_web(text: str) -> tuple[Web, RepTuple | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"<root>: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return web_from_dict(doc)


def web_to_dict(w: Web, labels: RepTuple | None = None) -> dict:
    doc: dict[str, Any] = {
        "paths": [{"vertices": p.vertices.tolist(), "params": p.params.tolist()} for p in w.paths]
    }
    if labels is not None:
        doc["labels"] = [str(s) for s in labels.spins]
    if w.tail is not None:
        doc["tail"] = {"splittings": [[format_bits(v) for v in V] for V in w.tail], "realized": w.realized}
    return doc
