"""Freely independent unitary dilations on a truncated free product space.

Each factor gets its own finite unitary dilation; the joint model places all
of them on the free product of the pointed ambient spaces, truncated at a
maximum word length.  The left action of factor ``i`` touches only the first
letter of a basis word, so products of few letters are unaffected by the
truncation: moments and dilation identities are exact inside explicit budgets
and every verifier states its budget.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dilation import DilationResult, finite_unitary_dilation
from .operator_core import (
    DEFAULT_TOL,
    Embedding,
    State,
    adjoint,
    as_matrix,
    operator_norm,
    purify,
)

DEFAULT_DIM_CAP = 5000

# a basis word: tuple of (factor id, complement index), adjacent factors distinct
FockLabel = tuple[tuple[int, int], ...]


class FockDimensionError(ValueError):
    def __init__(self, dim: int, cap: int):
        self.dim = dim
        self.cap = cap
        super().__init__(
            f"truncated free product dimension {dim} exceeds cap {cap}; "
            "reduce the truncation length or factor dimensions"
        )


@dataclass(frozen=True)
class PointedSpace:
    """A finite-dimensional space with a distinguished unit vector and an
    orthonormal basis of its complement."""

    base_vector: np.ndarray
    complement_basis: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.base_vector, dtype=complex).reshape(-1)
        comp = np.asarray(self.complement_basis, dtype=complex)
        if comp.ndim != 2 or comp.shape != (xi.size, xi.size - 1):
            raise ValueError(
                f"complement basis must be {xi.size}x{xi.size - 1}, got {comp.shape}"
            )
        frame = np.concatenate([xi.reshape(-1, 1), comp], axis=1)
        gram = adjoint(frame) @ frame
        if operator_norm(gram - np.eye(xi.size)) > 1e-10:
            raise ValueError("base vector and complement basis must form an orthonormal basis")
        object.__setattr__(self, "base_vector", xi)
        object.__setattr__(self, "complement_basis", comp)

    @property
    def dim(self) -> int:
        return self.base_vector.size

    @property
    def complement_dim(self) -> int:
        return self.dim - 1

    @staticmethod
    def from_state_vector(xi: np.ndarray) -> "PointedSpace":
        """Complete a unit vector to an orthonormal basis (QR of ``[xi | I]``)."""
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(xi)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"pointed vector must be unit, got norm {norm}")
        xi = xi / norm
        d = xi.size
        q, _ = np.linalg.qr(np.concatenate([xi.reshape(-1, 1), np.eye(d)], axis=1)[:, : d + 1])
        return PointedSpace(base_vector=xi, complement_basis=q[:, 1:d])


@dataclass(frozen=True)
class FockBasis:
    """Canonically ordered basis of a truncated free product: the vacuum plus
    alternating words of complement indices, by length then lexicographically."""

    factors: dict
    max_len: int
    labels: tuple[FockLabel, ...]
    position: dict

    @property
    def dim(self) -> int:
        return len(self.labels)

    def short_indices(self) -> list[int]:
        """Columns whose word length is strictly below the truncation length."""
        return [p for p, lab in enumerate(self.labels) if len(lab) < self.max_len]


def fock_dimension(complement_dims: Mapping[int, int], max_len: int) -> int:
    ids = sorted(complement_dims)
    total = 1
    ways = {i: complement_dims[i] for i in ids}
    for _ in range(max_len):
        total += sum(ways.values())
        ways = {
            i: complement_dims[i] * sum(ways[j] for j in ids if j != i) for i in ids
        }
    return total


def build_fock(
    factors: Mapping[int, PointedSpace] | Sequence[PointedSpace],
    max_len: int,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> FockBasis:
    if not isinstance(factors, Mapping):
        factors = {i + 1: ps for i, ps in enumerate(factors)}
    if not factors:
        raise ValueError("build_fock needs at least one factor")
    if max_len < 1:
        raise ValueError(f"truncation length must be >= 1, got {max_len}")
    ids = sorted(factors)
    compl = {i: factors[i].complement_dim for i in ids}
    dim = fock_dimension(compl, max_len)
    if dim > dim_cap:
        raise FockDimensionError(dim, dim_cap)

    labels: list[FockLabel] = [()]
    for length in range(1, max_len + 1):
        stack: list[FockLabel] = [()]
        for _ in range(length):
            stack = [
                lab + ((i, m),)
                for lab in stack
                for i in ids
                if not lab or lab[-1][0] != i
                for m in range(compl[i])
            ]
        labels.extend(sorted(stack))
    position = {lab: p for p, lab in enumerate(labels)}
    return FockBasis(
        factors=dict(factors), max_len=max_len, labels=tuple(labels), position=position
    )


def left_representation(factor: int, a: np.ndarray, fb: FockBasis) -> np.ndarray:
    """Matrix of the left action of ``a`` (an operator on factor ``factor``'s
    space) on the truncated free product.

    Only the first letter of a word is touched: the base-vector component of
    the image stays or shortens, the complement component prepends or rewrites
    a letter.  Components that would exceed the truncation length are dropped.
    """
    if factor not in fb.factors:
        raise KeyError(f"unknown factor id {factor}; known ids: {sorted(fb.factors)}")
    ps = fb.factors[factor]
    a = as_matrix(a)
    if a.shape != (ps.dim, ps.dim):
        raise ValueError(f"operator shape {a.shape} does not match factor dim {ps.dim}")
    xi = ps.base_vector
    comp = ps.complement_basis
    c = ps.complement_dim

    a_xi = a @ xi
    alpha = complex(np.vdot(xi, a_xi))
    prepend = adjoint(comp) @ a_xi  # components of a(xi) in the complement
    a_comp = a @ comp
    shorten = (np.conj(xi) @ a_comp).reshape(-1)  # <a e_m, xi> per complement vector
    rewrite = adjoint(comp) @ a_comp  # complement-to-complement part

    dim = fb.dim
    out = np.zeros((dim, dim), dtype=complex)
    pos = fb.position
    for p, lab in enumerate(fb.labels):
        if lab and lab[0][0] == factor:
            m0 = lab[0][1]
            tail = lab[1:]
            out[pos[tail], p] += shorten[m0]
            for m in range(c):
                out[pos[((factor, m),) + tail], p] += rewrite[m, m0]
        else:
            out[p, p] += alpha
            if len(lab) < fb.max_len:
                for m in range(c):
                    out[pos[((factor, m),) + lab], p] += prepend[m]
    return out


@dataclass(frozen=True)
class FreeDilationScenario:
    """Joint free dilation: per-factor finite unitary dilations represented on
    the truncated free product of the dilation spaces.

    ``unitaries[i]`` acts on the big product space, ``s_ops[i]`` is the same
    construction applied to the original contractions, and ``embedding`` is
    the isometry between the two product spaces (labels map identically).
    ``vacuum`` is the joint state; single-factor moments match the input
    states exactly, and mixed moments realize free independence inside the
    stated budgets.
    """

    degree: int
    trunc: int
    factor_ops: tuple[np.ndarray, ...]
    pointed: tuple[PointedSpace, ...]
    dilations: tuple[DilationResult, ...]
    fock_h: FockBasis
    fock_k: FockBasis
    unitaries: tuple[np.ndarray, ...]
    s_ops: tuple[np.ndarray, ...]
    embedding: Embedding
    vacuum: State

    @property
    def n_factors(self) -> int:
        return len(self.unitaries)

    @property
    def dim(self) -> int:
        return self.fock_k.dim

    def fock_gens(self) -> dict[int, np.ndarray]:
        return {i + 1: u for i, u in enumerate(self.unitaries)}

    def base_gens(self) -> dict[int, np.ndarray]:
        return {i + 1: s for i, s in enumerate(self.s_ops)}

    def factor_model(self, factor: int) -> tuple[dict[int, np.ndarray], State]:
        """The single-factor dilation with its pointed state, on the small
        dilation space (exactly unitary, no truncation artifacts)."""
        if not 1 <= factor <= self.n_factors:
            raise ValueError(f"factor id {factor} outside 1..{self.n_factors}")
        res = self.dilations[factor - 1]
        xi = res.embedding.isometry @ self.pointed[factor - 1].base_vector
        return {factor: res.unitaries[0]}, State.from_vector(xi)


def _as_pointed_factor(t: np.ndarray, state) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a factor to (matrix, unit vector), purifying density states."""
    t = as_matrix(t)
    if isinstance(state, State):
        if state.kind == "vector":
            return t, state.vector
        pure, lift = purify(state)
        return lift(t), pure.vector
    xi = np.asarray(state, dtype=complex).reshape(-1)
    if xi.size != t.shape[0]:
        raise ValueError(f"state dim {xi.size} does not match matrix dim {t.shape[0]}")
    return t, State.from_vector(xi).vector


def free_unitary_dilation(
    factors: Sequence[tuple[np.ndarray, object]],
    n_degree: int,
    trunc_len: int,
    tol: float = DEFAULT_TOL,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> FreeDilationScenario:
    """Build the joint freely independent dilation of a family of contractions.

    ``factors`` is a sequence of ``(matrix, state)`` pairs; vector states are
    used as the pointed vectors, density states are purified first.  Each
    contraction is dilated to degree ``n_degree``; the dilations act on the
    free product truncated at words of length ``trunc_len``.
    """
    if not factors:
        raise ValueError("free_unitary_dilation needs at least one factor")
    mats: list[np.ndarray] = []
    xis: list[np.ndarray] = []
    for t, state in factors:
        m, xi = _as_pointed_factor(t, state)
        mats.append(m)
        xis.append(xi)

    pointed_h = [PointedSpace.from_state_vector(xi) for xi in xis]
    dils = [finite_unitary_dilation(m, n_degree, tol) for m in mats]

    pointed_k: list[PointedSpace] = []
    for ps, res in zip(pointed_h, dils):
        j = res.embedding.isometry
        d = ps.dim
        big = res.ambient_dim
        # embedded complement first, then the pure dilation blocks: every
        # small-space label keeps its complement index upstairs
        comp_k = np.concatenate(
            [j @ ps.complement_basis, np.eye(big, dtype=complex)[:, d:]], axis=1
        )
        pointed_k.append(PointedSpace(base_vector=j @ ps.base_vector, complement_basis=comp_k))

    ids = range(1, len(factors) + 1)
    compl_k = {i: pointed_k[i - 1].complement_dim for i in ids}
    dim_k = fock_dimension(compl_k, trunc_len)
    if dim_k > dim_cap:
        raise FockDimensionError(dim_k, dim_cap)

    fock_k = build_fock({i: pointed_k[i - 1] for i in ids}, trunc_len, dim_cap)
    fock_h = build_fock({i: pointed_h[i - 1] for i in ids}, trunc_len, dim_cap)

    unitaries = tuple(
        left_representation(i, dils[i - 1].unitaries[0], fock_k) for i in ids
    )
    s_ops = tuple(left_representation(i, mats[i - 1], fock_h) for i in ids)

    j_mat = np.zeros((fock_k.dim, fock_h.dim), dtype=complex)
    for idx_h, lab in enumerate(fock_h.labels):
        j_mat[fock_k.position[lab], idx_h] = 1.0

    return FreeDilationScenario(
        degree=n_degree,
        trunc=trunc_len,
        factor_ops=tuple(mats),
        pointed=tuple(pointed_h),
        dilations=tuple(dils),
        fock_h=fock_h,
        fock_k=fock_k,
        unitaries=unitaries,
        s_ops=s_ops,
        embedding=Embedding(j_mat),
        vacuum=State.basis_vector(fock_k.dim, 0),
    )


def dilated_state(fds: FreeDilationScenario) -> State:
    """The joint state of the dilated family: the vacuum vector state."""
    return fds.vacuum


def restricted_unitarity_residual(fds: FreeDilationScenario, factor: int) -> float:
    """``max(||(U*U - I) P||, ||(U U* - I) P||)`` over columns of length < trunc.

    The left action of a unitary is isometric except where the truncation
    drops a prepended letter, so the residual vanishes on short words.
    """
    if not 1 <= factor <= fds.n_factors:
        raise ValueError(f"factor id {factor} outside 1..{fds.n_factors}")
    u = fds.unitaries[factor - 1]
    eye = np.eye(fds.dim)
    cols = fds.fock_k.short_indices()
    res1 = operator_norm((adjoint(u) @ u - eye)[:, cols])
    res2 = operator_norm((u @ adjoint(u) - eye)[:, cols])
    return max(res1, res2)


def alternating_words_within(
    n_factors: int, max_alt: int, max_total: int
) -> list[tuple[tuple[int, int], ...]]:
    """All nonempty alternating signed-power run sequences with at most
    ``max_alt`` runs, positive powers summing to at most ``max_total``."""
    out: list[tuple[tuple[int, int], ...]] = []
    ids = list(range(1, n_factors + 1))

    def rec(prefix: tuple[tuple[int, int], ...], budget: int) -> None:
        if prefix:
            out.append(prefix)
        if len(prefix) == max_alt or budget == 0:
            return
        for i in ids:
            if prefix and prefix[-1][0] == i:
                continue
            for k in range(1, budget + 1):
                rec(prefix + ((i, k),), budget - k)

    rec((), max_total)
    out.sort(key=lambda runs: (sum(k for _, k in runs), len(runs), runs))
    return out
