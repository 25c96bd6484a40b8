"""SU(2) representations and Haar integration.

Conventions
-----------
* Spins are stored as ``twice_j`` so half-integers stay exact.
* Basis order in every spin-j space is ``m = j, j-1, ..., -j``; index 1
  (1-based) is the highest weight. In this basis the spin-1/2 representation
  is the defining 2x2 matrix itself.
* Euler angles are zyz and active:
  ``g(a, b, c) = exp(-i a J3) exp(-i b J2) exp(-i c J3)`` with
  ``a in [0, 2pi)``, ``b in [0, pi]``, ``c in [0, 4pi)``.
* The normalized Haar density in these angles is ``sin(b) / (16 pi^2)``.
"""

from __future__ import annotations

import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError, NumericalError


@functools.total_ordering
@dataclass(frozen=True)
class Spin:
    """Spin label ``j`` stored as the integer ``2j``."""

    twice_j: int

    def __post_init__(self):
        if int(self.twice_j) != self.twice_j or self.twice_j < 0:
            raise InputError(f"twice_j must be a nonnegative integer, got {self.twice_j}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @classmethod
    def parse(cls, text: str | int | float | Fraction) -> "Spin":
        """Accept ``"1/2"``, ``"3"``, ``"1.5"``, ``Fraction(5, 2)`` or a number."""
        try:
            value = Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a spin label: {text!r}") from None
        twice = value * 2
        if twice.denominator != 1 or twice < 0:
            raise InputError(f"spin must be a nonnegative half-integer, got {text!r}")
        return cls(int(twice))

    @property
    def j(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    def __lt__(self, other: "Spin") -> bool:
        return self.twice_j < other.twice_j

    def __str__(self) -> str:
        return str(self.j)


def spins(*labels) -> tuple[Spin, ...]:
    """``spins("1/2", "1/2")`` -> tuple of Spin."""
    return tuple(lab if isinstance(lab, Spin) else Spin.parse(lab) for lab in labels)


class EulerAngles(NamedTuple):
    alpha: float
    beta: float
    gamma: float


# ---------------------------------------------------------------------------
# group elements


def su2_from_euler(angles: EulerAngles | Sequence[float]) -> np.ndarray:
    a, b, c = angles
    ch, sh = math.cos(b / 2), math.sin(b / 2)
    return np.array(
        [
            [np.exp(-0.5j * (a + c)) * ch, -np.exp(-0.5j * (a - c)) * sh],
            [np.exp(0.5j * (a - c)) * sh, np.exp(0.5j * (a + c)) * ch],
        ]
    )


def su2_from_euler_batch(alpha, beta, gamma) -> np.ndarray:
    alpha, beta, gamma = np.broadcast_arrays(*(np.asarray(x, float) for x in (alpha, beta, gamma)))
    ch, sh = np.cos(beta / 2), np.sin(beta / 2)
    g = np.empty(alpha.shape + (2, 2), complex)
    g[..., 0, 0] = np.exp(-0.5j * (alpha + gamma)) * ch
    g[..., 0, 1] = -np.exp(-0.5j * (alpha - gamma)) * sh
    g[..., 1, 0] = np.exp(0.5j * (alpha - gamma)) * sh
    g[..., 1, 1] = np.exp(0.5j * (alpha + gamma)) * ch
    return g


def euler_from_su2(g: np.ndarray) -> EulerAngles:
    """Inverse of :func:`su2_from_euler`, angles reduced to their ranges."""
    check_su2(g, tol=1e-9)
    a, b = g[0, 0], g[0, 1]
    beta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        plus, minus = -2 * np.angle(a), 0.0
    elif abs(a) < 1e-14:
        plus, minus = 0.0, -2 * np.angle(-b)
    else:
        plus, minus = -2 * np.angle(a), -2 * np.angle(-b)
    alpha = (plus + minus) / 2
    gamma = (plus - minus) / 2
    k = math.floor(alpha / (2 * math.pi))
    alpha -= 2 * math.pi * k
    gamma -= 2 * math.pi * k
    gamma %= 4 * math.pi
    return EulerAngles(alpha, beta, gamma)


def check_su2(g: np.ndarray, tol: float = 1e-12) -> None:
    g = np.asarray(g)
    if g.shape != (2, 2):
        raise InputError(f"group element must be 2x2, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericalError("group element has non-finite entries")
    if np.abs(g.conj().T @ g - np.eye(2)).max() > tol:
        raise InputError("group element is not unitary")
    if abs(np.linalg.det(g) - 1) > tol:
        raise InputError("group element does not have determinant 1")


def sample_haar(rng_seed: int | np.random.Generator | None = None, size: int | None = None) -> np.ndarray:
    """Haar-random SU(2) element(s) from a uniformly random unit quaternion.

    With an integer seed the result is reproducible. ``size`` returns a batch of
    shape ``(size, 2, 2)``.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    shape = () if size is None else (size,)
    x = rng.standard_normal(shape + (4,))
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    a = x[..., 0] + 1j * x[..., 3]
    b = x[..., 2] + 1j * x[..., 1]
    g = np.empty(shape + (2, 2), complex)
    g[..., 0, 0] = a
    g[..., 0, 1] = b
    g[..., 1, 0] = -b.conj()
    g[..., 1, 1] = a.conj()
    return g


# ---------------------------------------------------------------------------
# spin-j representation


@functools.lru_cache(maxsize=None)
def _rep_terms(t: int):
    """Monomial expansion of the spin-(t/2) matrix in the entries a, b, c, d of
    g = [[a, b], [c, d]], from the action on degree-t binary forms."""
    rows, coefs, ka, kb, kc, kd = [], [], [], [], [], []
    d = t + 1
    for r in range(d):
        for col in range(d):
            p, q = t - col, col
            norm = math.sqrt(math.factorial(t - r) * math.factorial(r) / (math.factorial(p) * math.factorial(q)))
            for k in range(max(0, t - r - q), min(p, t - r) + 1):
                l = t - r - k
                rows.append(r * d + col)
                coefs.append(norm * math.comb(p, k) * math.comb(q, l))
                ka.append(k)
                kc.append(p - k)
                kb.append(l)
                kd.append(q - l)
    incidence = np.zeros((len(rows), d * d))
    incidence[np.arange(len(rows)), rows] = 1.0
    return (np.array(coefs), np.array(ka), np.array(kb), np.array(kc), np.array(kd), incidence)


def spin_rep(j: Spin, g: np.ndarray) -> np.ndarray:
    """Matrix of the spin-j irrep at ``g`` (2x2 or a batch ``(..., 2, 2)``)."""
    g = np.asarray(g, complex)
    t = j.twice_j
    d = t + 1
    batch = g.shape[:-2]
    if t == 0:
        return np.ones(batch + (1, 1), complex)
    if t == 1:
        return g.copy()
    coefs, ka, kb, kc, kd, incidence = _rep_terms(t)
    powers = [g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]]
    pw = [np.stack([x**e for e in range(t + 1)], axis=-1) for x in powers]
    terms = coefs * pw[0][..., ka] * pw[1][..., kb] * pw[2][..., kc] * pw[3][..., kd]
    return (terms @ incidence).reshape(batch + (d, d))


def wigner_matrix(j: Spin, angles: EulerAngles | Sequence[float]) -> np.ndarray:
    """Spin-j matrix of the rotation with zyz Euler angles (active)."""
    return spin_rep(j, su2_from_euler(angles))


@functools.lru_cache(maxsize=None)
def spin_generators(j: Spin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian angular-momentum matrices ``(J1, J2, J3)`` in the m = j..-j basis
    (Condon-Shortley phases). ``exp(-i theta J_k)`` is the spin-j image of the
    rotation about axis k."""
    jj = float(j.j)
    m = jj - np.arange(j.dim)
    jz = np.diag(m).astype(complex)
    jp = np.zeros((j.dim, j.dim), complex)
    for r in range(1, j.dim):
        # <m+1| J+ |m>, with row r-1 holding m+1
        jp[r - 1, r] = math.sqrt(jj * (jj + 1) - m[r] * (m[r] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    for mat in (jx, jy, jz):
        mat.setflags(write=False)
    return jx, jy, jz


# ---------------------------------------------------------------------------
# Haar quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Product rule on Euler angles, exact for polynomials of degree <= ``degree``
    in the spin-1/2 matrix entries.

    ``alpha`` and ``gamma`` are equispaced on [0, 2pi) and [0, 4pi); ``cos(beta)``
    sits at Gauss-Legendre nodes. The integrand's beta dependence is
    ``cos(b/2)^p sin(b/2)^q``; terms with nonzero integral have ``p, q`` even, i.e.
    they are polynomials of degree ``(p + q) / 2`` in ``cos(b)``, and all other
    terms are annihilated exactly by the alpha/gamma sums.
    """

    degree: int
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.weights.size

    @functools.cached_property
    def elements(self) -> np.ndarray:
        return su2_from_euler_batch(self.alpha, self.beta, self.gamma)

    def nodes(self) -> list[EulerAngles]:
        return [EulerAngles(*x) for x in zip(self.alpha, self.beta, self.gamma)]


@functools.lru_cache(maxsize=32)
def quadrature_rule(degree: int) -> QuadratureRule:
    if degree < 0:
        raise InputError(f"degree must be nonnegative, got {degree}")
    k = 2 * degree + 2
    a = 2 * np.pi * np.arange(k) / k
    c = 4 * np.pi * np.arange(k) / k
    x, wx = np.polynomial.legendre.leggauss(k)
    b = np.arccos(x)
    A, B, C = np.meshgrid(a, b, c, indexing="ij")
    W = np.broadcast_to(wx[None, :, None], A.shape) / (2.0 * k * k)
    rule = QuadratureRule(degree, A.ravel(), B.ravel(), C.ravel(), W.ravel().copy())
    for arr in (rule.alpha, rule.beta, rule.gamma, rule.weights):
        arr.setflags(write=False)
    return rule


def integrate_batch(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule, chunk: int = 4096) -> np.ndarray:
    """Weighted sum of ``f`` over the rule; ``f`` maps a batch ``(N, 2, 2)`` to
    ``(N, ...)``. Chunks keep the memory bounded; the reduction order is fixed."""
    g = rule.elements
    total = None
    for start in range(0, rule.size, chunk):
        vals = np.asarray(f(g[start : start + chunk]))
        if not np.all(np.isfinite(vals)):
            raise NumericalError("integrand returned non-finite values")
        part = np.tensordot(rule.weights[start : start + chunk], vals, axes=(0, 0))
        total = part if total is None else total + part
    return total


def haar_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    degree: int,
    *,
    vectorized: bool = False,
    check: bool = True,
    tol: float = 1e-12,
) -> np.ndarray:
    """Haar integral over SU(2) of a matrix-valued polynomial of degree <= ``degree``.

    ``f`` receives a single 2x2 element (or a batch when ``vectorized``). With
    ``check`` the integral is recomputed on the rule of twice the degree and a
    discrepancy above ``tol`` raises :class:`NumericalError` (it means the
    declared degree was too small).
    """
    fb = f if vectorized else (lambda gs: np.stack([np.asarray(f(x)) for x in gs]))
    value = integrate_batch(fb, quadrature_rule(degree))
    if check:
        ref = integrate_batch(fb, quadrature_rule(2 * degree + 1))
        diff = np.max(np.abs(np.asarray(value - ref)))
        if diff > tol:
            raise NumericalError(f"quadrature not stable under node doubling (diff {diff:.3g})")
    return value


# ---------------------------------------------------------------------------
# second moments of the defining representation


def pair_moment(mu1, nu1, mu2, nu2, rho1, sigma1, rho2, sigma2) -> Fraction:
    """``<g^mu1_nu1 g^mu2_nu2, g^rho1_sigma1 g^rho2_sigma2>`` = integral of the
    conjugated first product times the second, indices in {1, 2}.

    Closed form: ``6 <..> = 2 (direct + crossed) - (half-crossed pairs)``.
    """
    idx = (mu1, nu1, mu2, nu2, rho1, sigma1, rho2, sigma2)
    if any(i not in (1, 2) for i in idx):
        raise InputError(f"indices must be 1 or 2, got {idx}")

    def dl(a, b):
        return int(a == b)

    direct = dl(mu1, rho1) * dl(nu1, sigma1) * dl(mu2, rho2) * dl(nu2, sigma2)
    crossed = dl(mu1, rho2) * dl(nu1, sigma2) * dl(mu2, rho1) * dl(nu2, sigma1)
    mixed_a = dl(mu1, rho1) * dl(nu1, sigma2) * dl(mu2, rho2) * dl(nu2, sigma1)
    mixed_b = dl(mu1, rho2) * dl(nu1, sigma1) * dl(mu2, rho1) * dl(nu2, sigma2)
    return Fraction(2 * (direct + crossed) - (mixed_a + mixed_b), 6)


def pair_moment_quadrature(mu1, nu1, mu2, nu2, rho1, sigma1, rho2, sigma2) -> complex:
    """Same inner product evaluated by Haar quadrature (degree 4)."""
    i = [x - 1 for x in (mu1, nu1, mu2, nu2, rho1, sigma1, rho2, sigma2)]

    def f(g):
        left = g[:, i[0], i[1]] * g[:, i[2], i[3]]
        right = g[:, i[4], i[5]] * g[:, i[6], i[7]]
        return left.conj() * right

    return complex(integrate_batch(f, quadrature_rule(4)))


def pair_moment_table(degree: int = 4) -> np.ndarray:
    """All 256 moments as quadrature values, array indexed ``[mu1-1, ..., sigma2-1]``.

    The integrand has degree 4; smaller ``degree`` gives an inexact rule.
    """
    rule = quadrature_rule(degree)
    g, w = rule.elements, rule.weights
    # m[n, a, b, c, d] = g_ab g_cd at node n
    m = np.einsum("nab,ncd->nabcd", g, g)
    return np.einsum("n,nabcd,nefgh->abcdefgh", w, m.conj(), m)


# ---------------------------------------------------------------------------
# Clebsch-Gordan multiplicities


@dataclass(frozen=True)
class MultiplicityTable:
    """Multiplicity of each total spin in a tensor product of irreps."""

    counts: Mapping[Spin, int]

    def __getitem__(self, j: Spin | str) -> int:
        key = j if isinstance(j, Spin) else Spin.parse(j)
        return self.counts.get(key, 0)

    @property
    def dimension(self) -> int:
        return sum(s.dim * c for s, c in self.counts.items())

    @property
    def trivial(self) -> int:
        return self.counts.get(Spin(0), 0)

    def as_dict(self) -> dict[str, int]:
        return {str(s): c for s, c in sorted(self.counts.items())}


def clebsch_multiplicities(labels: Iterable[Spin]) -> MultiplicityTable:
    """Iterate ``j (x) j' = |j - j'| + ... + (j + j')`` over the list."""
    acc: Counter[int] = Counter({0: 1})
    for s in labels:
        nxt: Counter[int] = Counter()
        for t, mult in acc.items():
            for u in range(abs(t - s.twice_j), t + s.twice_j + 1, 2):
                nxt[u] += mult
        acc = nxt
    return MultiplicityTable({Spin(t): c for t, c in sorted(acc.items()) if c})


def trivial_multiplicity(labels: Iterable[Spin]) -> int:
    return clebsch_multiplicities(labels).trivial


# ---------------------------------------------------------------------------
# Lie-algebra generation


def _su2_bracket(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bracket on su(2)^n in the basis e_k = -i sigma_k / 2, for which
    [e_a, e_b] = eps_abc e_c; coefficient arrays have shape (..., n, 3)."""
    return np.cross(x, y)


def _orthonormal_span(vectors: np.ndarray, rtol: float) -> np.ndarray:
    if vectors.size == 0:
        return vectors.reshape(0, vectors.shape[-1] if vectors.ndim > 1 else 0)
    u, s, vt = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return vt[:0]
    return vt[s > rtol * s[0]]


def subalgebra_closure_dim(vectors: Sequence[Iterable[int]], n: int, rtol: float = 1e-9) -> int:
    """Dimension of the real Lie algebra generated by ``X`` placed in the slots
    ``v_i = 1`` for every ``v`` in the set and every ``X`` in su(2).

    The value is at most ``3n``; ``3n`` means the placed one-parameter
    subgroups generate all of SU(2)^n.
    """
    vs = [tuple(int(b) for b in v) for v in vectors]
    if any(len(v) != n for v in vs):
        raise InputError(f"all vectors must have length {n}")
    gens = []
    for v in vs:
        for k in range(3):
            x = np.zeros((n, 3))
            x[np.array(v, bool), k] = 1.0
            gens.append(x.ravel())
    if not gens:
        return 0
    basis = _orthonormal_span(np.array(gens), rtol)
    while True:
        mats = basis.reshape(-1, n, 3)
        br = _su2_bracket(mats[:, None], mats[None, :]).reshape(-1, 3 * n)
        new = _orthonormal_span(np.vstack([basis, br]), rtol)
        if new.shape[0] == basis.shape[0]:
            return basis.shape[0]
        basis = new
