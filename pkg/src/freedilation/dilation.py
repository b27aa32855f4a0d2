"""Finite unitary power-dilations of contractions and doubly commuting tuples.

The single-operator construction is the classic Schaffer block layout wrapped
cyclically at degree ``N``: the resulting matrix is exactly unitary and its
compression to the original space reproduces ``T^k`` and ``(T*)^k`` for all
``0 <= k <= N``.  Powers beyond ``N`` wrap around the cycle, so every verifier
here carries the degree as an explicit exactness budget and refuses words
outside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operator_core import (
    DEFAULT_TOL,
    ContractionError,
    Embedding,
    adjoint,
    as_matrix,
    compress,
    defect_pair,
    operator_norm,
)

# word letter: (factor id, signed power); k >= 0 means T^k, k < 0 means (T*)^{-k}
SignedPowerWord = Sequence[tuple[int, int]]


class BudgetError(ValueError):
    """A requested word lies outside the construction's exactness budget."""


class NotDoublyCommutingError(ValueError):
    def __init__(self, i: int, j: int, residual: float, starred: bool):
        self.pair = (i, j)
        self.residual = float(residual)
        which = "T_i* T_j - T_j T_i*" if starred else "T_i T_j - T_j T_i"
        super().__init__(
            f"factors {i} and {j} do not doubly commute: ||{which}|| = {residual:.3e}"
        )


def signed_power(a: np.ndarray, k: int) -> np.ndarray:
    """``a^k`` for ``k >= 0``, ``(a*)^{-k}`` for ``k < 0``."""
    a = as_matrix(a)
    if k >= 0:
        return np.linalg.matrix_power(a, k)
    return np.linalg.matrix_power(adjoint(a), -k)


@dataclass(frozen=True)
class DilationResult:
    """Unitaries on an ambient space together with the embedding of the original one."""

    unitaries: tuple[np.ndarray, ...]
    embedding: Embedding
    degree: int

    @property
    def ambient_dim(self) -> int:
        return self.embedding.big_dim

    def unitarity_residual(self) -> float:
        eye = np.eye(self.ambient_dim)
        return max(operator_norm(adjoint(u) @ u - eye) for u in self.unitaries)


def finite_unitary_dilation(t: np.ndarray, n_degree: int, tol: float = DEFAULT_TOL) -> DilationResult:
    """Degree-``N`` unitary power-dilation of a single contraction.

    Block layout on ``C^{N+1} (x) C^d`` (block indices 0..N)::

        U[0][0] = T      U[0][N] = D_{T*}
        U[1][0] = D_T    U[1][N] = -T*
        U[j+1][j] = I    for 1 <= j <= N-1

    The first column block is isometric because ``T*T + D_T^2 = I``, the last
    because ``D_{T*}^2 + T T* = I``, and they are orthogonal by the
    intertwining relation ``T D_T = D_{T*} T``.  Content injected by ``D_T``
    needs ``N+1`` consecutive applications to wrap back into block 0, so
    compressions of powers up to ``N`` are exact.
    """
    t = as_matrix(t)
    if t.shape[0] != t.shape[1]:
        raise ValueError(f"finite_unitary_dilation needs a square matrix, got {t.shape}")
    if n_degree < 1:
        raise ValueError(f"dilation degree must be >= 1, got {n_degree}")
    d = t.shape[0]
    d_t, d_tstar = defect_pair(t, tol)

    nb = n_degree + 1
    u = np.zeros((nb * d, nb * d), dtype=complex)

    def block(i: int, j: int, value: np.ndarray) -> None:
        u[i * d : (i + 1) * d, j * d : (j + 1) * d] = value

    block(0, 0, t)
    block(1, 0, d_t)
    block(0, n_degree, d_tstar)
    block(1, n_degree, -adjoint(t))
    for j in range(1, n_degree):
        block(j + 1, j, np.eye(d))

    embedding = Embedding.coordinate(nb * d, range(d))
    return DilationResult(unitaries=(u,), embedding=embedding, degree=n_degree)


def doubly_commuting_dilation(
    ts: Sequence[np.ndarray], n_degree: int, tol: float = DEFAULT_TOL
) -> DilationResult:
    """Simultaneous unitary dilation of a doubly commuting tuple.

    Iterates the single-operator construction: at step ``j`` the current
    ``j``-th operator is replaced by its dilation while every other operator is
    ampliated by ``I_{N+1} (x) .``; double commutation survives each step
    because the defect operators are functions of the dilated factor alone.
    """
    ops = [as_matrix(t) for t in ts]
    if not ops:
        raise ValueError("doubly_commuting_dilation needs at least one contraction")
    d = ops[0].shape[0]
    for i, t in enumerate(ops):
        if t.shape != (d, d):
            raise ValueError(f"factor {i + 1} has shape {t.shape}, expected ({d}, {d})")
        norm = operator_norm(t)
        if norm > 1.0 + tol:
            raise ContractionError(norm, tol)
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            plain = operator_norm(ops[i] @ ops[j] - ops[j] @ ops[i])
            if plain > tol:
                raise NotDoublyCommutingError(i + 1, j + 1, plain, starred=False)
            starred = operator_norm(adjoint(ops[i]) @ ops[j] - ops[j] @ adjoint(ops[i]))
            if starred > tol:
                raise NotDoublyCommutingError(i + 1, j + 1, starred, starred=True)

    embed = np.eye(d, dtype=complex)
    eye_nb = np.eye(n_degree + 1, dtype=complex)
    e0 = np.zeros((n_degree + 1, 1), dtype=complex)
    e0[0, 0] = 1.0
    for j in range(len(ops)):
        step = finite_unitary_dilation(ops[j], n_degree, tol)
        big = step.unitaries[0]
        prev_dim = ops[j].shape[0]
        for i in range(len(ops)):
            ops[i] = big if i == j else np.kron(eye_nb, ops[i])
        embed = np.kron(e0, np.eye(prev_dim, dtype=complex)) @ embed

    return DilationResult(unitaries=tuple(ops), embedding=Embedding(embed), degree=n_degree)


def double_commutation_residual(ops: Sequence[np.ndarray]) -> float:
    """Max over pairs of ``||[A_i, A_j]||`` and ``||[A_i*, A_j]||``."""
    worst = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            worst = max(worst, operator_norm(ops[i] @ ops[j] - ops[j] @ ops[i]))
            worst = max(
                worst, operator_norm(adjoint(ops[i]) @ ops[j] - ops[j] @ adjoint(ops[i]))
            )
    return worst


def orthonormal_columns(m: np.ndarray, rank_rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span, with a relative rank cutoff."""
    if m.size == 0:
        return m.reshape(m.shape[0], 0)
    q, s, _ = np.linalg.svd(m, full_matrices=False)
    keep = s > rank_rtol * s[0] if s.size else np.zeros(0, dtype=bool)
    return q[:, keep]


def minimal_reducing_subspace(
    us: Sequence[np.ndarray], e: Embedding, tol: float = DEFAULT_TOL, rank_rtol: float = 1e-10
) -> Embedding:
    """Smallest subspace containing ``range(e)`` invariant under every ``U_i`` and ``U_i*``.

    Alternates span growth (apply all generators and adjoints to the current
    basis) with SVD orthonormalization until the dimension stops increasing.
    """
    dim = e.big_dim
    for i, u in enumerate(us):
        u = as_matrix(u)
        if u.shape != (dim, dim):
            raise ValueError(f"unitary {i + 1} has shape {u.shape}, expected ({dim}, {dim})")
        res = operator_norm(adjoint(u) @ u - np.eye(dim))
        if res > tol:
            raise ValueError(f"operator {i + 1} is not unitary: ||U*U - I|| = {res:.3e}")

    basis = orthonormal_columns(e.isometry, rank_rtol)
    while True:
        blocks = [basis]
        for u in us:
            blocks.append(u @ basis)
            blocks.append(adjoint(u) @ basis)
        grown = orthonormal_columns(np.concatenate(blocks, axis=1), rank_rtol)
        if grown.shape[1] == basis.shape[1]:
            return Embedding(grown)
        basis = grown


def _merged_runs(word: SignedPowerWord) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    for factor, k in word:
        if k == 0:
            continue
        if runs and runs[-1][0] == factor and (runs[-1][1] >= 0) == (k >= 0):
            runs[-1] = (factor, runs[-1][1] + k)
        else:
            runs.append((factor, int(k)))
    return runs


@dataclass(frozen=True)
class WordResidual:
    word: tuple[tuple[int, int], ...]
    residual: float
    tol: float
    passed: bool


def verify_power_dilation(res, ts, word: SignedPowerWord, tol: float = 1e-10) -> WordResidual:
    """Residual of one joint power-dilation identity.

    Two variants, chosen by the type of ``res``:

    * a :class:`DilationResult` checks the ordered identity
      ``compress(U_1(k_1) ... U_n(k_n)) = T_1(k_1) ... T_n(k_n)`` — factors
      must appear in increasing order, one letter each, ``|k| <= degree``;
    * a free-product scenario (anything exposing ``unitaries``, ``s_ops``,
      ``embedding``, ``degree``, ``trunc``) checks
      ``J* U_{i1}^{k1} ... U_{im}^{km} J = S_{i1}^{k1} ... S_{im}^{km}`` for
      arbitrary factor sequences with nonnegative powers, total power
      ``<= degree`` and merged alternation length ``<= trunc``.

    Words outside the applicable budget raise :class:`BudgetError` — they are
    never silently evaluated.
    """
    word = tuple((int(f), int(k)) for f, k in word)
    if hasattr(res, "trunc") and hasattr(res, "s_ops"):
        return _verify_free(res, word, tol)
    return _verify_ordered(res, ts, word, tol)


def _verify_ordered(res: DilationResult, ts, word, tol) -> WordResidual:
    n = len(res.unitaries)
    runs = _merged_runs(word)
    factors = [f for f, _ in runs]
    if any(not 1 <= f <= n for f in factors):
        raise BudgetError(f"word uses factor outside 1..{n}: {factors}")
    if any(factors[a] >= factors[a + 1] for a in range(len(factors) - 1)):
        raise BudgetError(
            f"ordered variant requires one signed power per factor in increasing order, got {factors}"
        )
    for f, k in runs:
        if abs(k) > res.degree:
            raise BudgetError(f"|power| {abs(k)} of factor {f} exceeds dilation degree {res.degree}")
    big = np.eye(res.ambient_dim, dtype=complex)
    small = np.eye(res.embedding.small_dim, dtype=complex)
    for f, k in runs:
        big = big @ signed_power(res.unitaries[f - 1], k)
        small = small @ signed_power(as_matrix(ts[f - 1]), k)
    residual = operator_norm(compress(big, res.embedding) - small)
    return WordResidual(word=word, residual=residual, tol=tol, passed=residual <= tol)


def _verify_free(fds, word, tol) -> WordResidual:
    runs = _merged_runs(word)
    n = len(fds.unitaries)
    if any(not 1 <= f <= n for f, _ in runs):
        raise BudgetError(f"word uses factor outside 1..{n}")
    if any(k < 0 for _, k in runs):
        raise BudgetError("free variant admits nonnegative powers only")
    total = sum(k for _, k in runs)
    if total > fds.degree:
        raise BudgetError(f"total power {total} exceeds dilation degree {fds.degree}")
    if len(runs) > fds.trunc:
        raise BudgetError(
            f"alternation length {len(runs)} exceeds truncation length {fds.trunc}"
        )
    j = fds.embedding.isometry
    lhs = j.copy()
    rhs = np.eye(j.shape[1], dtype=complex)
    for f, k in reversed(runs):
        for _ in range(k):
            lhs = fds.unitaries[f - 1] @ lhs
            rhs = fds.s_ops[f - 1] @ rhs
    residual = operator_norm(adjoint(j) @ lhs - rhs)
    return WordResidual(word=word, residual=residual, tol=tol, passed=residual <= tol)
