"""Dense complex operator arithmetic: defects, compressions, embeddings, states.

Everything operates on plain ``numpy`` arrays of ``complex128``; a "matrix" is a
2-d array, a vector a 1-d array.  All functions are pure and never mutate their
arguments, so values can be shared freely across workers.

Tolerances are explicit parameters with documented defaults; residuals are
returned or raised inside errors rather than hidden behind booleans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Contraction / PSD tolerance used when the caller does not pass one.
DEFAULT_TOL = 1e-9


class ShapeMismatchError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ContractionError(ValueError):
    """Operator norm exceeds 1 beyond tolerance; carries the measured norm."""

    def __init__(self, norm: float, tol: float):
        self.norm = float(norm)
        self.tol = float(tol)
        super().__init__(f"not a contraction: operator norm {norm:.6e} > 1 + {tol:g}")


class PSDError(ValueError):
    """Matrix is not positive semidefinite; carries the offending eigenvalue."""

    def __init__(self, eigenvalue: float, tol: float):
        self.eigenvalue = float(eigenvalue)
        self.tol = float(tol)
        super().__init__(f"not PSD: eigenvalue {eigenvalue:.6e} < -{tol:g}")


class StateError(ValueError):
    """A vector or density state fails its defining invariant."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite complex 2-d array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeMismatchError(f"expected a matrix, got ndim={m.ndim}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(a)).T


def direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value, via Hermitian eigendecomposition of a*a."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(adjoint(a) @ a)
    return float(np.sqrt(max(w[-1], 0.0)))


def is_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and operator_norm(a - adjoint(a)) <= tol


def psd_sqrt(m: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-tol, tol]`` are clamped to 0 before square-rooting, so
    the defect of a near-isometry comes out exactly rank-deficient instead of
    leaking tiny imaginary parts.  An eigenvalue below ``-tol`` raises
    :class:`PSDError` carrying the value.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"psd_sqrt needs a square matrix, got {m.shape}")
    herm = 0.5 * (m + adjoint(m))
    if operator_norm(m - herm) > tol * max(1.0, operator_norm(herm)):
        raise ValueError("psd_sqrt: matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(herm)
    if w[0] < -tol:
        raise PSDError(w[0], tol)
    w = np.where(w <= tol, 0.0, w)
    return (v * np.sqrt(w)) @ adjoint(v)


def defect_pair(t: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Defect operators ``((I - t*t)^{1/2}, (I - t t*)^{1/2})`` of a contraction."""
    t = as_matrix(t)
    if t.shape[0] != t.shape[1]:
        raise ShapeMismatchError(f"defect_pair needs a square matrix, got {t.shape}")
    norm = operator_norm(t)
    if norm > 1.0 + tol:
        raise ContractionError(norm, tol)
    eye = np.eye(t.shape[0], dtype=complex)
    d_t = psd_sqrt(eye - adjoint(t) @ t, tol)
    d_tstar = psd_sqrt(eye - t @ adjoint(t), tol)
    return d_t, d_tstar


@dataclass(frozen=True)
class Embedding:
    """An isometry identifying a small space inside a large one.

    ``isometry`` is ``big_dim x small_dim`` with ``isometry* isometry = I``.
    """

    isometry: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "isometry", as_matrix(self.isometry))
        self.validate()

    @property
    def big_dim(self) -> int:
        return self.isometry.shape[0]

    @property
    def small_dim(self) -> int:
        return self.isometry.shape[1]

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        gram = adjoint(self.isometry) @ self.isometry
        res = operator_norm(gram - np.eye(self.small_dim))
        if res > tol:
            raise ValueError(f"not an isometry: ||V*V - I|| = {res:.3e} > {tol:g}")

    @staticmethod
    def identity(dim: int) -> "Embedding":
        return Embedding(np.eye(dim, dtype=complex))

    @staticmethod
    def coordinate(big_dim: int, indices) -> "Embedding":
        """Inclusion of the span of the listed coordinates."""
        v = np.zeros((big_dim, len(indices)), dtype=complex)
        for col, idx in enumerate(indices):
            v[idx, col] = 1.0
        return Embedding(v)


def compress(a: np.ndarray, e: Embedding) -> np.ndarray:
    """Corner ``V* a V`` of a big operator in the embedded small space."""
    a = as_matrix(a)
    if a.shape != (e.big_dim, e.big_dim):
        raise ShapeMismatchError(
            f"compress: operator is {a.shape}, embedding expects ({e.big_dim}, {e.big_dim})"
        )
    return adjoint(e.isometry) @ a @ e.isometry


@dataclass(frozen=True)
class State:
    """Positive normalized functional: a unit vector or a PSD trace-1 density."""

    kind: str
    vector: np.ndarray | None = None
    density: np.ndarray | None = None
    tol: float = field(default=1e-8, compare=False)

    def __post_init__(self):
        if self.kind == "vector":
            v = np.asarray(self.vector, dtype=complex).reshape(-1)
            if not np.all(np.isfinite(v.view(float))):
                raise StateError("state vector contains NaN or Inf")
            nrm = float(np.linalg.norm(v))
            if abs(nrm - 1.0) > self.tol:
                raise StateError(f"state vector norm {nrm:.12g} != 1 (tol {self.tol:g})")
            object.__setattr__(self, "vector", v)
        elif self.kind == "density":
            rho = as_matrix(self.density)
            if rho.shape[0] != rho.shape[1]:
                raise StateError(f"density matrix must be square, got {rho.shape}")
            if operator_norm(rho - adjoint(rho)) > self.tol:
                raise StateError("density matrix is not Hermitian within tolerance")
            w = np.linalg.eigvalsh(0.5 * (rho + adjoint(rho)))
            if w[0] < -self.tol:
                raise StateError(f"density matrix not PSD: eigenvalue {w[0]:.6e}")
            tr = float(np.trace(rho).real)
            if abs(tr - 1.0) > self.tol:
                raise StateError(f"density matrix trace {tr:.12g} != 1")
            object.__setattr__(self, "density", rho)
        else:
            raise StateError(f"unknown state kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == "vector":
            return self.vector.shape[0]
        return self.density.shape[0]

    @staticmethod
    def from_vector(v, tol: float = 1e-8) -> "State":
        return State(kind="vector", vector=v, tol=tol)

    @staticmethod
    def from_density(rho, tol: float = 1e-8) -> "State":
        return State(kind="density", density=rho, tol=tol)

    @staticmethod
    def basis_vector(dim: int, index: int = 0) -> "State":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return State.from_vector(v)

    @staticmethod
    def maximally_mixed(dim: int) -> "State":
        return State.from_density(np.eye(dim, dtype=complex) / dim)


def evaluate_state(s: State, a: np.ndarray) -> complex:
    """``<a xi, xi>`` for a vector state, ``trace(rho a)`` for a density state."""
    a = as_matrix(a)
    if a.shape != (s.dim, s.dim):
        raise ShapeMismatchError(f"evaluate_state: operator {a.shape} vs state dim {s.dim}")
    if s.kind == "vector":
        return complex(np.vdot(s.vector, a @ s.vector))
    return complex(np.trace(s.density @ a))


def purify(rho: State):
    """Vector-state purification of a density state.

    Returns ``(xi_state, lift)`` with ``xi`` a unit vector in the doubled space
    ``C^d (x) C^d`` and ``lift(a) = a (x) I`` such that
    ``<lift(a) xi, xi> = trace(rho a)`` for every ``d x d`` operator ``a``.
    """
    if rho.kind != "density":
        raise StateError("purify expects a density state")
    d = rho.dim
    w, v = np.linalg.eigh(rho.density)
    w = np.clip(w, 0.0, None)
    xi = np.zeros(d * d, dtype=complex)
    for k in range(d):
        if w[k] == 0.0:
            continue
        xi += np.sqrt(w[k]) * np.kron(v[:, k], np.conj(v[:, k]))
    xi /= np.linalg.norm(xi)
    eye = np.eye(d, dtype=complex)

    def lift(a: np.ndarray) -> np.ndarray:
        a = as_matrix(a)
        if a.shape != (d, d):
            raise ShapeMismatchError(f"purified lift expects ({d}, {d}), got {a.shape}")
        return np.kron(a, eye)

    return State.from_vector(xi), lift


def random_contraction(rng: np.random.Generator, dim: int, norm: float | None = None) -> np.ndarray:
    """Random contraction: a complex Ginibre matrix rescaled to the given norm.

    ``norm`` defaults to a uniform draw from (0, 1]; pass 1.0 for a matrix
    sitting exactly on the unit ball boundary.
    """
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    target = float(rng.uniform(0.05, 1.0)) if norm is None else float(norm)
    return g * (target / operator_norm(g))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    # fix the phase so the draw is a Haar sample, not a QR artifact
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, dim: int, kind: str = "vector") -> State:
    if kind == "vector":
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return State.from_vector(v / np.linalg.norm(v))
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ adjoint(g)
    return State.from_density(rho / np.trace(rho).real)
