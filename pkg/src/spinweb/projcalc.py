"""Operator-valued Haar integrals on ``Y = conj(X) (x) X``.

Layout of ``Y``: the entry written ``^{i m}_{j n}`` (``i, j`` on the conjugated
leg, ``m, n`` on the plain leg) sits at row ``(i, m)`` and column ``(j, n)``.
Multi-indices are flattened lexicographically with the leftmost slot most
significant, conjugated leg first, so ``conj(A) (x) B`` is ``np.kron(A.conj(), B)``.

Every integrand handled here is separable across group variables: slots that
share a block of a splitting share one SU(2) variable, distinct blocks have
independent variables. Integrals are done block by block on the SU(2)
quadrature and assembled by permuting tensor legs.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import su2rep
from .errors import DomainError, InputError, NumericalError, UnsupportedInputError
from .splitcore import Splitting, max_splitting
from .su2rep import Spin

MAX_DIM_X = 64

RANGE_THRESHOLD = 1e-8  # eigenvalues above 1 - this count as 1
KERNEL_RTOL = 1e-9


@dataclass(frozen=True)
class RepTuple:
    """Spin labels of the strands; fixes ``X = (x)_k V_{j_k}``."""

    spins: tuple[Spin, ...]

    def __post_init__(self):
        labels = tuple(s if isinstance(s, Spin) else Spin.parse(s) for s in self.spins)
        if not labels:
            raise InputError("a representation tuple needs at least one spin")
        object.__setattr__(self, "spins", labels)

    @classmethod
    def parse(cls, text: str | Sequence) -> "RepTuple":
        items = text.split(",") if isinstance(text, str) else list(text)
        return cls(tuple(Spin.parse(x) if not isinstance(x, Spin) else x for x in items))

    @property
    def n(self) -> int:
        return len(self.spins)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spins)

    @property
    def dim_x(self) -> int:
        return math.prod(self.dims)

    def check_cap(self) -> None:
        if self.dim_x > MAX_DIM_X:
            raise DomainError(f"dim X = {self.dim_x} exceeds the cap {MAX_DIM_X} (Y would be {self.dim_x ** 2}^2)")

    def __str__(self) -> str:
        return "(" + ",".join(str(s) for s in self.spins) + ")"


@dataclass(frozen=True, eq=False)
class YOperator:
    """Dense operator on ``Y`` together with the representation that defines ``Y``."""

    matrix: np.ndarray
    rep: RepTuple

    def __post_init__(self):
        d = self.rep.dim_x ** 2
        if self.matrix.shape != (d, d):
            raise InputError(f"matrix shape {self.matrix.shape} does not match dim Y = {d}")

    def __matmul__(self, other: "YOperator") -> "YOperator":
        return YOperator(self.matrix @ _mat(other), self.rep)

    def entry(self, i: Sequence[int], m: Sequence[int], j: Sequence[int], n: Sequence[int]) -> complex:
        """Entry ``^{i m}_{j n}`` with 1-based multi-indices."""
        return complex(self.matrix[y_index(self.rep, i, m), y_index(self.rep, j, n)])

    def norm(self) -> float:
        return op_norm(self.matrix)

    @property
    def rank(self) -> int:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > KERNEL_RTOL * max(s[0], 1.0)))


def _mat(op) -> np.ndarray:
    return op.matrix if isinstance(op, YOperator) else np.asarray(op)


def _like(template, matrix: np.ndarray):
    return YOperator(matrix, template.rep) if isinstance(template, YOperator) else matrix


def op_norm(a) -> float:
    """Spectral norm; large matrices use the top eigenvalue of the Gram matrix."""
    a = _mat(a)
    if a.size == 0:
        return 0.0
    if a.shape[0] <= 300:
        return float(np.linalg.norm(a, 2))
    top = np.linalg.eigvalsh(a.conj().T @ a)[-1]
    return float(np.sqrt(max(top, 0.0)))


def x_index(rep: RepTuple, multi: Sequence[int]) -> int:
    if len(multi) != rep.n:
        raise InputError(f"multi-index {tuple(multi)} has length {len(multi)}, expected {rep.n}")
    for k, (a, d) in enumerate(zip(multi, rep.dims)):
        if not 1 <= a <= d:
            raise InputError(f"index {a} in slot {k + 1} outside 1..{d}")
    return int(np.ravel_multi_index([a - 1 for a in multi], rep.dims))


def y_index(rep: RepTuple, conj_multi: Sequence[int], plain_multi: Sequence[int]) -> int:
    return x_index(rep, conj_multi) * rep.dim_x + x_index(rep, plain_multi)


# ---------------------------------------------------------------------------
# representations on X and Y


def _batch_kron(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        b = out.shape[:-2]
        out = np.einsum("...ab,...cd->...acbd", out, m).reshape(
            b + (out.shape[-2] * m.shape[-2], out.shape[-1] * m.shape[-1])
        )
    return out


def rep_tensor(rep: RepTuple, g: Sequence[np.ndarray]) -> np.ndarray:
    """``(x)_k rho_{j_k}(g_k)`` as a ``dim X`` square matrix."""
    if len(g) != rep.n:
        raise InputError(f"need {rep.n} group elements, got {len(g)}")
    return _batch_kron([su2rep.spin_rep(s, np.asarray(x)) for s, x in zip(rep.spins, g)])


def double_rep(rep: RepTuple, g: Sequence[np.ndarray]) -> YOperator:
    r = rep_tensor(rep, g)
    return YOperator(np.kron(r.conj(), r), rep)


# ---------------------------------------------------------------------------
# separable operator-valued functions


@dataclass(frozen=True, eq=False)
class BlockFactor:
    """One independent SU(2) variable acting on the given (0-based, sorted) slots.

    ``func`` maps a batch of group elements ``(N, 2, 2)`` to ``(N, d_b, d_b)``
    where ``d_b`` is the product of the slot dimensions; ``degree`` bounds its
    polynomial degree in the spin-1/2 entries.
    """

    slots: tuple[int, ...]
    func: Callable[[np.ndarray], np.ndarray]
    degree: int


@dataclass(frozen=True, eq=False)
class SeparableOperator:
    """``D(g_1..g_n) = (x)_b D_b(g_{first slot of b})`` up to slot reordering."""

    rep: RepTuple
    factors: tuple[BlockFactor, ...]
    label: str = ""

    def __post_init__(self):
        seen = sorted(s for f in self.factors for s in f.slots)
        if seen != list(range(self.rep.n)):
            raise UnsupportedInputError(
                "factors must partition the slots 0..n-1 (non-separable or malformed descriptor)"
            )
        for f in self.factors:
            if tuple(sorted(f.slots)) != f.slots:
                raise InputError("factor slots must be sorted")

    def evaluate(self, g: Sequence[np.ndarray]) -> np.ndarray:
        """``D`` at a tuple of group elements; only each block's first slot is read."""
        if len(g) != self.rep.n:
            raise InputError(f"need {self.rep.n} group elements, got {len(g)}")
        mats = [f.func(np.asarray(g[f.slots[0]])[None])[0] for f in self.factors]
        return _assemble(self.rep.dims, [f.slots for f in self.factors], mats, legs=2)


def _assemble(dims: Sequence[int], blocks: Sequence[Sequence[int]], mats: Sequence[np.ndarray], legs: int) -> np.ndarray:
    """Tensor block operators into one operator on the full space.

    Each ``mats[b]`` has ``legs`` multi-index legs over the slots of block ``b``
    (X operators: row, column; Y operators: conj-row, row, conj-col, col).
    """
    n = len(dims)
    operands = []
    for slots, m in zip(blocks, mats):
        bd = [dims[s] for s in slots]
        operands.append(m.reshape(bd * legs))
        operands.append([leg * n + s for leg in range(legs) for s in slots])
    out = list(range(legs * n))
    total = math.prod(dims)
    if legs == 2:
        shape = (total, total)
    else:
        shape = (total * total, total * total)
    return np.einsum(*operands, out, optimize=True).reshape(shape)


def _block_rep_func(spins: Sequence[Spin]) -> Callable[[np.ndarray], np.ndarray]:
    def func(g: np.ndarray) -> np.ndarray:
        return _batch_kron([su2rep.spin_rep(s, g) for s in spins])

    return func


def rep_descriptor(rep: RepTuple, V: Splitting) -> SeparableOperator:
    """``rho o pi_V``: every block of ``V`` is driven by one group variable."""
    if V.n != rep.n:
        raise InputError(f"splitting length {V.n} does not match n = {rep.n}")
    factors = []
    for slots in V.blocks():
        sp_ = [rep.spins[s] for s in slots]
        factors.append(BlockFactor(tuple(slots), _block_rep_func(sp_), sum(s.twice_j for s in sp_)))
    return SeparableOperator(rep, tuple(factors), label=f"rho o pi_{V}")


@functools.lru_cache(maxsize=256)
def trivial_isotypic_projector(spins: tuple[Spin, ...]) -> np.ndarray:
    """Projector onto the SU(2)-invariant vectors of ``(x) V_{j}``: the null space
    of the Casimir of the diagonal action."""
    casimir = _casimir(spins, conj_too=False)
    return _null_projector(casimir)


@dataclass(frozen=True)
class FilterDescriptor:
    """Data of the degeneracy filter: remove the trivial isotypic part on the
    block of ``V`` that contains slot ``q`` (1-based)."""

    rep: RepTuple
    splitting: Splitting
    q: int

    def __post_init__(self):
        if self.splitting.n != self.rep.n:
            raise InputError("splitting length does not match the representation tuple")
        if not 1 <= self.q <= self.rep.n:
            raise InputError(f"q must be in 1..{self.rep.n}, got {self.q}")

    @property
    def block(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.splitting.block_of(self.q)) if b)

    @property
    def block_dims(self) -> tuple[int, int]:
        """``(d_q, d0_q)``: block dimension and number of trivial summands."""
        spins = [self.rep.spins[i] for i in self.block]
        return math.prod(s.dim for s in spins), su2rep.trivial_multiplicity(spins)


def filter_descriptor(fd: FilterDescriptor) -> SeparableOperator:
    base = rep_descriptor(fd.rep, fd.splitting)
    block = fd.block
    factors = []
    for f in base.factors:
        if f.slots == block:
            pi0 = trivial_isotypic_projector(tuple(fd.rep.spins[i] for i in block))
            inner = f.func
            f = BlockFactor(f.slots, lambda g, inner=inner, pi0=pi0: inner(g) - pi0, f.degree)
        factors.append(f)
    return SeparableOperator(fd.rep, tuple(factors), label=f"D_{{{fd.splitting},{fd.q}}}")


def zero_descriptor(rep: RepTuple) -> SeparableOperator:
    factors = [BlockFactor((0,), lambda g, d=rep.dims[0]: np.zeros((g.shape[0], d, d), complex), 0)]
    factors += [BlockFactor((k,), _block_rep_func([rep.spins[k]]), rep.spins[k].twice_j) for k in range(1, rep.n)]
    return SeparableOperator(rep, tuple(factors), label="0")


def _block_q(factor: BlockFactor) -> np.ndarray:
    """``int conj(D_b) (x) D_b`` as a (d_b^2, d_b^2) matrix in (conj, plain) order."""
    rule = su2rep.quadrature_rule(2 * factor.degree)

    def f(g):
        d = factor.func(g)
        return d.reshape(d.shape[0], -1)

    # m[(a b), (c d)] = sum_n w conj(D)[n, a, b] D[n, c, d]
    total = None
    g = rule.elements
    for start in range(0, rule.size, 2048):
        vals = f(g[start : start + 2048])
        if not np.all(np.isfinite(vals)):
            raise NumericalError("block function returned non-finite values")
        w = rule.weights[start : start + 2048]
        part = (vals.conj() * w[:, None]).T @ vals
        total = part if total is None else total + part
    d = int(round(math.sqrt(total.shape[0])))
    # (a, b, c, d) -> (a, c, b, d)
    return total.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def q_operator(D: SeparableOperator) -> YOperator:
    """``Q_D = int conj(D) (x) D`` over SU(2)^n, one group variable at a time."""
    if not isinstance(D, SeparableOperator):
        raise UnsupportedInputError(f"q_operator needs a SeparableOperator, got {type(D).__name__}")
    D.rep.check_cap()
    mats = [_block_q(f) for f in D.factors]
    return YOperator(_assemble(D.rep.dims, [f.slots for f in D.factors], mats, legs=4), D.rep)


def frobenius_norm(D: SeparableOperator) -> float:
    """Normalized Frobenius norm ``sqrt((1/dim X) int tr(D* D))``, by quadrature."""
    if not isinstance(D, SeparableOperator):
        raise UnsupportedInputError(f"frobenius_norm needs a SeparableOperator, got {type(D).__name__}")
    value = 1.0
    for f in D.factors:
        rule = su2rep.quadrature_rule(2 * f.degree)
        d = math.prod(D.rep.dims[s] for s in f.slots)

        def tr(g, f=f):
            m = f.func(g)
            return np.einsum("nab,nab->n", m.conj(), m).real

        value *= float(su2rep.integrate_batch(tr, rule)) / d
    return math.sqrt(max(value, 0.0))


# ---------------------------------------------------------------------------
# projectors


def _generators_on(spins: Sequence[Spin], slots: Iterable[int]) -> list[sp.csr_matrix]:
    """Hermitian generators of the diagonal SU(2) action on the given slots of
    ``(x)_k V_{j_k}``."""
    slots = list(slots)
    dims = [s.dim for s in spins]
    out = []
    for axis in range(3):
        total = None
        for s in slots:
            parts = [sp.identity(d, format="csr", dtype=complex) for d in dims]
            parts[s] = sp.csr_matrix(su2rep.spin_generators(spins[s])[axis])
            term = parts[0]
            for p in parts[1:]:
                term = sp.kron(term, p, format="csr")
            total = term if total is None else total + term
        out.append(total)
    return out


def _casimir(spins: Sequence[Spin], conj_too: bool, blocks: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """Sum of squared generators. With ``conj_too`` the generators act on
    ``conj(X) (x) X`` as ``-conj(J) (x) 1 + 1 (x) J``; one triple per block."""
    blocks = [list(range(len(spins)))] if blocks is None else blocks
    dim = math.prod(s.dim for s in spins)
    eye = sp.identity(dim, format="csr", dtype=complex)
    cas = None
    for b in blocks:
        for gen in _generators_on(spins, b):
            t = sp.kron(-gen.conj(), eye, format="csr") + sp.kron(eye, gen, format="csr") if conj_too else gen
            sq = t @ t
            cas = sq if cas is None else cas + sq
    return cas.toarray()


def _null_projector(hermitian_psd: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(hermitian_psd)
    scale = max(float(np.abs(w).max()), 1.0)
    keep = w <= KERNEL_RTOL * scale
    basis = u[:, keep]
    p = basis @ basis.conj().T
    p.setflags(write=False)
    return p


@functools.lru_cache(maxsize=128)
def _projector_pv_cached(rep: RepTuple, V: Splitting, engine: str) -> np.ndarray:
    if engine == "lie_kernel":
        m = _null_projector(_casimir(rep.spins, conj_too=True, blocks=V.blocks()))
    elif engine == "quadrature":
        m = q_operator(rep_descriptor(rep, V)).matrix
    else:
        raise InputError(f"unknown engine {engine!r} (use 'lie_kernel' or 'quadrature')")
    m.setflags(write=False)
    return m


def projector_PV(rep: RepTuple, V: Splitting, engine: str = "lie_kernel") -> YOperator:
    """Orthogonal projector onto the vectors of ``Y`` fixed by ``conj(rho) (x) rho``
    restricted to the subgroup where slots of a block carry equal elements.

    ``lie_kernel``: null space of the Casimir built from the block generators.
    ``quadrature``: Haar integral of ``conj(rho o pi_V) (x) (rho o pi_V)``.
    """
    if V.n != rep.n:
        raise InputError(f"splitting length {V.n} does not match n = {rep.n}")
    rep.check_cap()
    return YOperator(_projector_pv_cached(rep, V, engine), rep)


def projector_P0(rep: RepTuple) -> YOperator:
    """Closed form ``(1/dim X) delta^{i m} delta_{j n}``: the rank-one projector
    onto the normalized maximally entangled vector."""
    rep.check_cap()
    d = rep.dim_x
    omega = np.eye(d).ravel()
    return YOperator(np.outer(omega, omega).astype(complex) / d, rep)


def degeneracy_filter_operator(fd: FilterDescriptor) -> YOperator:
    """``Q_{V,q}``: Haar integral of ``conj(D) (x) D`` for the filter descriptor."""
    return q_operator(filter_descriptor(fd))


def sandwich_coefficient(Q, rep: RepTuple) -> tuple[float, float]:
    """Least-squares ``c`` in ``P0 Q P0 ~ c P0`` and the Frobenius residual."""
    p0 = projector_P0(rep).matrix
    sandwich = p0 @ _mat(Q) @ p0
    c = complex(np.vdot(p0, sandwich) / np.vdot(p0, p0))
    residual = float(np.linalg.norm(sandwich - c.real * p0))
    return c.real, residual


# ---------------------------------------------------------------------------
# intersections and products of projectors


def check_projector(p, tol: float = 1e-10, name: str = "operator") -> None:
    m = _mat(p)
    if np.abs(m - m.conj().T).max() > tol:
        raise DomainError(f"{name} is not hermitian within {tol}")
    if np.abs(m @ m - m).max() > tol:
        raise DomainError(f"{name} is not idempotent within {tol}")


def intersection_spectrum(ops: Sequence) -> np.ndarray:
    """Eigenvalues (ascending) of the average of the projectors; eigenvalue 1
    marks the common range."""
    avg = sum(_mat(p) for p in ops) / len(ops)
    return np.linalg.eigvalsh((avg + avg.conj().T) / 2)


def intersection_projector(ops: Sequence, threshold: float = RANGE_THRESHOLD):
    """Projector onto the common range of hermitian idempotents: the eigenspace
    of their average at eigenvalue 1 (eigenvalues above ``1 - threshold``)."""
    if not ops:
        raise InputError("need at least one projector")
    avg = sum(_mat(p) for p in ops) / len(ops)
    w, u = np.linalg.eigh((avg + avg.conj().T) / 2)
    basis = u[:, w > 1 - threshold]
    return _like(ops[0], basis @ basis.conj().T)


def spectral_gap(ops: Sequence, threshold: float = RANGE_THRESHOLD) -> float:
    """Distance from 1 of the largest average eigenvalue not counted as 1."""
    w = intersection_spectrum(ops)
    below = w[w <= 1 - threshold]
    return float(1 - below.max()) if below.size else 1.0


@dataclass
class ConvergenceReport:
    limit: object
    iterations: int
    final_error: float
    contraction: float
    converged: bool
    norms: list[float] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    indices: list[Hashable] = field(default_factory=list)

    def rows(self) -> list[tuple[int, float, float]]:
        return [(k, a, b) for k, (a, b) in enumerate(zip(self.norms, self.bounds))]


def covering_segments(indices: Sequence[Hashable]) -> list[tuple[int, int]]:
    """Greedy split of a stream into consecutive segments that each contain
    every distinct index of the stream; returns half-open ``(start, stop)``."""
    wanted = set(indices)
    segs, start, seen = [], 0, set()
    for k, idx in enumerate(indices):
        seen.add(idx)
        if seen == wanted:
            segs.append((start, k + 1))
            start, seen = k + 1, set()
    return segs


def product_limit(
    projectors: Mapping[Hashable, object] | Sequence,
    sequence: Iterable[Hashable],
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> ConvergenceReport:
    """Run the product ``A_N = P_{j_1} ... P_{j_N}`` along an index stream.

    The target is the projector onto the common range of the whole family, so
    the family should be the covering subfamily the stream keeps revisiting.
    Iteration stops when ``A_N`` is within ``tol`` of the target, or when
    ``||A_N - A_{N-1}|| < tol / 10``. Only the first case counts as converged;
    a stream that settles on anything else (a non-idempotent product or the
    projector of a smaller family) ends with ``converged=False``. The report carries the
    deflated norms ``||A_N - target||`` and the geometric bound
    ``theta ** (completed covering segments)``, where ``theta`` is the largest
    measured norm of a deflated product over one covering segment.
    """
    family = dict(projectors) if isinstance(projectors, Mapping) else dict(enumerate(projectors))
    if not family:
        raise InputError("empty projector family")
    for key, p in family.items():
        check_projector(p, 1e-10, name=f"projector {key!r}")
    template = next(iter(family.values()))
    target = _mat(intersection_projector(list(family.values())))
    eye = np.eye(target.shape[0], dtype=complex)

    a = eye
    norms = [op_norm(a - target)]
    indices: list[Hashable] = []
    converged = False
    for idx in sequence:
        if len(indices) >= max_iter:
            break
        if idx not in family:
            raise InputError(f"stream index {idx!r} not in the projector family")
        prev = a
        a = a @ _mat(family[idx])
        indices.append(idx)
        err = op_norm(a - target)
        norms.append(err)
        if err <= tol:
            converged = True
            break
        # Frobenius bounds the spectral norm, so this stop is conservative
        if np.linalg.norm(a - prev) < tol / 10:
            break

    segments = covering_segments(indices) if set(indices) == set(family) else []
    theta = 0.0
    for start, stop in segments:
        prod = eye
        for idx in indices[start:stop]:
            prod = prod @ (_mat(family[idx]) - target)
        theta = max(theta, op_norm(prod))
    completed = [sum(stop <= k for _, stop in segments) for k in range(len(indices) + 1)]
    bounds = [norms[0] * theta**c if c else norms[0] for c in completed]
    return ConvergenceReport(
        limit=_like(template, a),
        iterations=len(indices),
        final_error=norms[-1],
        contraction=theta if segments else 1.0,
        converged=converged,
        norms=norms,
        bounds=bounds,
        indices=indices,
    )


def deflated_power_norms(p1, p2, powers: int) -> list[float]:
    """``||(P1' P2')^k||`` for ``k = 1..powers`` where ``P'`` removes the common range."""
    m1, m2 = _mat(p1), _mat(p2)
    p0 = _mat(intersection_projector([m1, m2]))
    step = (m1 - p0) @ (m2 - p0)
    out, acc = [], np.eye(m1.shape[0], dtype=complex)
    for _ in range(powers):
        acc = acc @ step
        out.append(op_norm(acc))
    return out


# ---------------------------------------------------------------------------
# decay experiment


def tolerance_split(epsilon: float, count: int) -> list[float]:
    """``eps_nu = (1 + eps) ** (1 / 2 ** (nu + 2)) - 1`` for ``nu = 0..count-1``."""
    return [(1 + epsilon) ** (1 / 2 ** (nu + 2)) - 1 for nu in range(count)]


def product_deviation(A, As: Sequence, Bs: Sequence) -> float:
    """``||prod_i A_i B_i - prod_i A B_i||`` (products left to right)."""
    A = _mat(A)
    left = np.eye(A.shape[0], dtype=complex)
    right = left.copy()
    for Ai, Bi in zip(As, Bs):
        left = left @ _mat(Ai) @ _mat(Bi)
        right = right @ A @ _mat(Bi)
    return op_norm(left - right)


def random_perturbation_family(rng: np.random.Generator, dim: int, count: int, epsilon: float):
    """Random ``A`` with ``||A|| = 1``, ``A_i`` with ``||A_i - A|| <= (1 + eps) ** 2 ** -i - 1``
    (``i = 1..count``) and contractions ``B_i``."""

    def unit(scale=1.0):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return scale * m / op_norm(m)

    A = unit()
    As = [A + ((1 + epsilon) ** (2.0**-i) - 1) * rng.uniform(0, 1) * unit() for i in range(1, count + 1)]
    Bs = [unit(rng.uniform(0.5, 1.0)) for _ in range(count)]
    return A, As, Bs


@dataclass
class DecaySchedule:
    """Filter applications interleaved with chains of projectors.

    ``gap_blocks[nu]`` lists the splittings whose projectors follow the
    ``nu``-th filter, in multiplication order. A chain ``[max_splitting(n)]``
    is exactly ``P0``; an empty chain is the identity.
    """

    filter: FilterDescriptor
    gap_blocks: list[list[Splitting]]
    L: int
    epsilon: float = 0.1
    engine: str = "lie_kernel"

    def __post_init__(self):
        if self.L < 0:
            raise InputError("L must be >= 0")
        if len(self.gap_blocks) < self.L + 1:
            raise InputError(f"need {self.L + 1} gap chains, got {len(self.gap_blocks)}")
        n = self.filter.rep.n
        for chain in self.gap_blocks:
            for V in chain:
                if V.n != n:
                    raise InputError("gap splitting length does not match the representation tuple")

    @property
    def epsilons(self) -> list[float]:
        return tolerance_split(self.epsilon, self.L + 1)

    @classmethod
    def ideal(cls, fd: FilterDescriptor, L: int) -> "DecaySchedule":
        return cls(fd, [[max_splitting(fd.rep.n)] for _ in range(L + 1)], L)


@dataclass
class DecayResult:
    norms: list[float]
    bounds: list[float]
    ideal: list[float]
    gap_errors: list[float]

    def rows(self) -> list[tuple[int, float, float]]:
        return [(k, a, b) for k, (a, b) in enumerate(zip(self.norms, self.bounds))]


def _chain_product(rep: RepTuple, chain: Sequence[Splitting], engine: str) -> np.ndarray:
    out = np.eye(rep.dim_x**2, dtype=complex)
    for V in chain:
        out = out @ projector_PV(rep, V, engine).matrix
    return out


def run_decay(schedule: DecaySchedule) -> DecayResult:
    """Norms ``s_l = ||P0 prod_{nu=l..0} (Q_{W,q} G_nu)||`` plus bounds.

    ``G_nu`` is the projector chain of ``gap_blocks[nu]``. Since
    ``P0 Q P0 = c P0`` with ``c = ||D_{W,q}||_F^2``, the ideal chains ``G = P0``
    give ``s_l = c ** (l + 1)``; for general chains the bound
    ``c ** (l + 1) + prod_nu (1 + ||G_nu - P0||) - 1`` holds.
    """
    fd = schedule.filter
    rep = fd.rep
    q = degeneracy_filter_operator(fd).matrix
    p0 = projector_P0(rep).matrix
    c, _ = sandwich_coefficient(q, rep)
    acc = np.eye(rep.dim_x**2, dtype=complex)
    norms, bounds, ideal, gap_errors = [], [], [], []
    growth = 1.0
    for nu in range(schedule.L + 1):
        g = _chain_product(rep, schedule.gap_blocks[nu], schedule.engine)
        delta = op_norm(g - p0)
        gap_errors.append(delta)
        growth *= 1 + delta
        acc = q @ g @ acc
        norms.append(op_norm(p0 @ acc))
        ideal.append(c ** (nu + 1))
        bounds.append(min(1.0, c ** (nu + 1) + growth - 1))
    return DecayResult(norms, bounds, ideal, gap_errors)


def decay_experiment(schedule: DecaySchedule) -> list[float]:
    """The sequence ``s_0..s_L`` of :func:`run_decay`."""
    return run_decay(schedule).norms
