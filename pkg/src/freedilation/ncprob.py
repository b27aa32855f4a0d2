"""Noncommutative probability toolkit: words, moments, independence certificates.

Everything here works against a plain ``gens`` dictionary mapping 1-based
factor ids to square matrices, together with a :class:`~.operator_core.State`
on the common space.  Checks return structured reports carrying the worst
residual and a witness sufficient to reproduce it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .operator_core import State, adjoint, as_matrix, operator_norm

MAX_PARTITION_SIZE = 12
MAX_ORACLE_LETTERS = 16
MAX_GRAM_WORDS = 4096


# ---------------------------------------------------------------------------
# words and elements


@dataclass(frozen=True)
class Word:
    """Finite product of generators and adjoints; ``letters`` is a tuple of
    ``(factor id, star flag)`` pairs, empty meaning the unit."""

    letters: tuple[tuple[int, bool], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "letters", tuple((int(f), bool(s)) for f, s in self.letters)
        )

    @staticmethod
    def from_runs(runs: Sequence[tuple[int, int]]) -> "Word":
        """Build from signed power runs: ``(i, k)`` contributes ``T_i^k`` for
        ``k >= 0`` and ``(T_i*)^{-k}`` for ``k < 0``."""
        letters: list[tuple[int, bool]] = []
        for factor, k in runs:
            letters.extend([(int(factor), k < 0)] * abs(int(k)))
        return Word(tuple(letters))

    @property
    def adjoint(self) -> "Word":
        return Word(tuple((f, not s) for f, s in reversed(self.letters)))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def runs(self) -> tuple[tuple[int, int], ...]:
        """Signed power runs, merging consecutive letters with equal factor and flag."""
        out: list[tuple[int, int]] = []
        for f, s in self.letters:
            step = -1 if s else 1
            if out and out[-1][0] == f and (out[-1][1] < 0) == s:
                out[-1] = (f, out[-1][1] + step)
            else:
                out.append((f, step))
        return tuple(out)

    def blocks(self) -> tuple[tuple[int, tuple[bool, ...]], ...]:
        """Maximal same-factor blocks (stars may mix inside a block)."""
        out: list[tuple[int, list[bool]]] = []
        for f, s in self.letters:
            if out and out[-1][0] == f:
                out[-1][1].append(s)
            else:
                out.append((f, [s]))
        return tuple((f, tuple(ss)) for f, ss in out)

    def format(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"{f}^{k}" for f, k in self.runs())


def parse_word(text: str) -> Word:
    """Parse ``"1^2 2^-1"`` style words; ``"2*"`` is shorthand for ``2^-1``
    and a bare ``"3"`` for ``3^1``; ``"1"`` alone with no letters is rejected,
    use ``""`` for the unit."""
    text = text.strip()
    if not text:
        return Word(())
    runs: list[tuple[int, int]] = []
    for token in text.split():
        head, sep, tail = token.partition("^")
        starred = head.endswith("*")
        if starred:
            head = head[:-1]
        try:
            factor = int(head)
        except ValueError:
            raise ValueError(f"bad word token {token!r}: factor must be an integer") from None
        if factor < 1:
            raise ValueError(f"bad word token {token!r}: factor ids are 1-based")
        if sep:
            try:
                power = int(tail)
            except ValueError:
                raise ValueError(f"bad word token {token!r}: power must be an integer") from None
        else:
            power = 1
        if starred:
            power = -power
        runs.append((factor, power))
    return Word.from_runs(runs)


@dataclass(frozen=True)
class Element:
    """Finite linear combination of words; immutable, terms collected."""

    terms: tuple[tuple[complex, Word], ...] = ()

    def __post_init__(self):
        collected: dict[Word, complex] = {}
        for coeff, word in self.terms:
            collected[word] = collected.get(word, 0.0) + complex(coeff)
        object.__setattr__(
            self,
            "terms",
            tuple((c, w) for w, c in collected.items() if c != 0),
        )

    @staticmethod
    def from_word(word: Word, coeff: complex = 1.0) -> "Element":
        return Element(((coeff, word),))

    @staticmethod
    def unit(coeff: complex = 1.0) -> "Element":
        return Element(((coeff, Word(())),))

    def __add__(self, other: "Element") -> "Element":
        return Element(self.terms + other.terms)

    def scaled(self, c: complex) -> "Element":
        return Element(tuple((c * coeff, w) for coeff, w in self.terms))

    @property
    def adjoint(self) -> "Element":
        return Element(tuple((np.conj(c), w.adjoint) for c, w in self.terms))


Gens = Mapping[int, np.ndarray]


def _gen(gens: Gens, factor: int, starred: bool) -> np.ndarray:
    try:
        m = gens[factor]
    except KeyError:
        raise KeyError(
            f"unknown factor id {factor}; known ids: {sorted(gens)}"
        ) from None
    return adjoint(m) if starred else as_matrix(m)


def _common_dim(gens: Gens) -> int:
    dims = {as_matrix(m).shape for m in gens.values()}
    if len(dims) != 1 or any(a != b for a, b in dims):
        raise ValueError(f"generators must be square matrices on a common space, got shapes {dims}")
    return next(iter(dims))[0]


def evaluate_word(word: Word, gens: Gens) -> np.ndarray:
    dim = _common_dim(gens)
    out = np.eye(dim, dtype=complex)
    for f, s in word.letters:
        out = out @ _gen(gens, f, s)
    return out


def apply_word(word: Word, gens: Gens, panel: np.ndarray) -> np.ndarray:
    """Apply a word to a vector or column panel, rightmost letter first."""
    out = np.asarray(panel, dtype=complex)
    for f, s in reversed(word.letters):
        out = _gen(gens, f, s) @ out
    return out


def apply_element(el: Element, gens: Gens, panel: np.ndarray) -> np.ndarray:
    panel = np.asarray(panel, dtype=complex)
    out = np.zeros(panel.shape, dtype=complex)
    for coeff, word in el.terms:
        out = out + coeff * apply_word(word, gens, panel)
    return out


def _state_panel(state: State) -> tuple[np.ndarray, np.ndarray]:
    """Columns to propagate and their weights: ``phi(a) = sum_k w_k <a v_k, v_k>``."""
    if state.kind == "vector":
        return state.vector.reshape(-1, 1), np.ones(1)
    w, v = np.linalg.eigh(state.density)
    keep = w > 1e-14
    return v[:, keep], w[keep]


def state_moment(state: State, gens: Gens, factors: Sequence[Element | Word]) -> complex:
    """``phi(a_1 a_2 ... a_m)`` evaluated by applying factors to the state columns."""
    panel, weights = _state_panel(state)
    out = panel
    for a in reversed(list(factors)):
        if isinstance(a, Word):
            out = apply_word(a, gens, out)
        else:
            out = apply_element(a, gens, out)
    vals = np.einsum("ik,ik->k", np.conj(panel), out)
    return complex(np.sum(weights * vals))


def word_moment(state: State, gens: Gens, word: Word) -> complex:
    return state_moment(state, gens, [word])


def element_moment(state: State, gens: Gens, el: Element) -> complex:
    return state_moment(state, gens, [el])


def center(el: Element, state: State, gens: Gens) -> Element:
    """Subtract the state mean: the result has vanishing moment."""
    return el + Element.unit(-element_moment(state, gens, el))


def single_factor_words(factor: int, max_len: int, include_adjoints: bool = True) -> list[Word]:
    """All words of length 1..max_len in one generator (and its adjoint)."""
    flags = (False, True) if include_adjoints else (False,)
    out: list[Word] = []
    for length in range(1, max_len + 1):
        for pattern in itertools.product(flags, repeat=length):
            out.append(Word(tuple((factor, s) for s in pattern)))
    return out


def random_element(
    rng: np.random.Generator, factor: int, degree: int, include_adjoints: bool = True
) -> Element:
    """Random combination of all words of length <= degree in one factor,
    coefficients uniform on the complex unit disc."""
    words = [Word(())] + single_factor_words(factor, degree, include_adjoints)
    radii = np.sqrt(rng.uniform(0.0, 1.0, size=len(words)))
    phases = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size=len(words)))
    return Element(tuple((complex(r * p), w) for r, p, w in zip(radii, phases, words)))


# ---------------------------------------------------------------------------
# check reports


@dataclass
class CheckReport:
    name: str
    residual: float
    tol: float
    passed: bool
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            "witness": self.witness,
            "details": self.details,
        }


def _derive_rng(seed: int, *salt: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, salt)])))


# ---------------------------------------------------------------------------
# tensor independence


def tensor_independence_check(
    state: State,
    gens: Gens,
    degree: int = 2,
    samples: int = 100,
    tol: float = 1e-8,
    seed: int = 0,
) -> CheckReport:
    """Certify a commuting family as tensor independent for the given state.

    Part (a) checks ``[w_i, w_j] = 0`` for all words up to the degree in
    distinct factors; part (b) checks ``phi(a_1 ... a_n) = prod phi(a_i)``
    over random one-per-factor tuples.
    """
    ids = sorted(gens)
    worst = 0.0
    witness: dict | None = None

    for ia, ib in itertools.combinations(ids, 2):
        words_a = single_factor_words(ia, degree)
        words_b = single_factor_words(ib, degree)
        mats_a = [evaluate_word(w, gens) for w in words_a]
        mats_b = [evaluate_word(w, gens) for w in words_b]
        for wa, ma in zip(words_a, mats_a):
            for wb, mb in zip(words_b, mats_b):
                res = operator_norm(ma @ mb - mb @ ma)
                if res > worst:
                    worst = res
                    witness = {
                        "part": "commutation",
                        "left": wa.format(),
                        "right": wb.format(),
                    }

    for s in range(samples):
        rng = _derive_rng(seed, 1, s)
        elements = [random_element(rng, i, degree) for i in ids]
        joint = state_moment(state, gens, elements)
        split = 1.0 + 0.0j
        for el in elements:
            split *= element_moment(state, gens, el)
        res = abs(joint - split)
        if res > worst:
            worst = res
            witness = {"part": "factorization", "sample": s, "seed": seed}

    return CheckReport(
        name="tensor_independence",
        residual=worst,
        tol=tol,
        passed=worst <= tol,
        witness=witness,
        details={"degree": degree, "samples": samples, "factors": ids},
    )


# ---------------------------------------------------------------------------
# free independence


def _alternating_sequences(ids: Sequence[int], max_len: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for length in range(2, max_len + 1):
        stack: list[tuple[int, ...]] = [(i,) for i in ids]
        for _ in range(length - 1):
            stack = [seq + (j,) for seq in stack for j in ids if j != seq[-1]]
        out.extend(stack)
    return out


def _centered_monomials(
    state: State, gens: Gens, factor: int, degree: int
) -> list[tuple[str, Element]]:
    """Centered ``T^p`` and ``(T*)^p`` for ``1 <= p <= min(degree, 3)``."""
    out: list[tuple[str, Element]] = []
    for p in range(1, min(degree, 3) + 1):
        for starred in (False, True):
            word = Word.from_runs([(factor, -p if starred else p)])
            out.append((f"c({word.format()})", center(Element.from_word(word), state, gens)))
    return out


def free_independence_check(
    state: State,
    gens: Gens,
    max_len: int = 4,
    degree: int = 2,
    samples: int = 20,
    tol: float = 1e-8,
    seed: int = 0,
) -> CheckReport:
    """Certify free independence: centered alternating products have zero moment.

    Runs a deterministic pass over centered monomials (exhaustive per
    alternating factor sequence), then a seeded random pass with centered
    random elements in each slot.
    """
    ids = sorted(gens)
    if len(ids) < 2:
        raise ValueError("free independence needs at least two factors")
    sequences = _alternating_sequences(ids, max_len)
    worst = 0.0
    witness: dict | None = None

    monomials = {f: _centered_monomials(state, gens, f, degree) for f in ids}
    for seq in sequences:
        slot_options = [monomials[f] for f in seq]
        for combo in itertools.product(*slot_options):
            res = abs(state_moment(state, gens, [el for _, el in combo]))
            if res > worst:
                worst = res
                witness = {
                    "part": "monomial",
                    "sequence": list(seq),
                    "slots": [label for label, _ in combo],
                }

    for si, seq in enumerate(sequences):
        for s in range(samples):
            rng = _derive_rng(seed, 2, si, s)
            elements = [
                center(random_element(rng, f, degree), state, gens) for f in seq
            ]
            res = abs(state_moment(state, gens, elements))
            if res > worst:
                worst = res
                witness = {
                    "part": "random",
                    "sequence": list(seq),
                    "sample": s,
                    "seed": seed,
                }

    return CheckReport(
        name="free_independence",
        residual=worst,
        tol=tol,
        passed=worst <= tol,
        witness=witness,
        details={
            "max_len": max_len,
            "degree": degree,
            "samples": samples,
            "factors": ids,
            "sequences": len(sequences),
        },
    )


# ---------------------------------------------------------------------------
# traciality


def trace_check(
    state: State,
    gens: Gens,
    degree: int = 3,
    samples: int = 100,
    tol: float = 1e-8,
    seed: int = 0,
) -> CheckReport:
    """Check ``phi(ab) = phi(ba)``: all single-letter pairs, then random word pairs."""
    ids = sorted(gens)
    letters = [Word(((f, s),)) for f in ids for s in (False, True)]
    worst = 0.0
    witness: dict | None = None

    for wa in letters:
        for wb in letters:
            res = abs(
                word_moment(state, gens, wa * wb) - word_moment(state, gens, wb * wa)
            )
            if res > worst:
                worst = res
                witness = {"part": "letters", "left": wa.format(), "right": wb.format()}

    for s in range(samples):
        rng = _derive_rng(seed, 3, s)
        wa = _random_word(rng, ids, degree)
        wb = _random_word(rng, ids, degree)
        res = abs(word_moment(state, gens, wa * wb) - word_moment(state, gens, wb * wa))
        if res > worst:
            worst = res
            witness = {
                "part": "random",
                "left": wa.format(),
                "right": wb.format(),
                "sample": s,
                "seed": seed,
            }

    return CheckReport(
        name="traciality",
        residual=worst,
        tol=tol,
        passed=worst <= tol,
        witness=witness,
        details={"degree": degree, "samples": samples, "factors": ids},
    )


def _random_word(rng: np.random.Generator, ids: Sequence[int], degree: int) -> Word:
    length = int(rng.integers(1, degree + 1))
    letters = tuple(
        (int(ids[rng.integers(0, len(ids))]), bool(rng.integers(0, 2)))
        for _ in range(length)
    )
    return Word(letters)


# ---------------------------------------------------------------------------
# faithfulness


@dataclass
class FaithfulnessReport:
    faithful_on_span: bool
    span_dim: int
    gram_rank: int
    word_count: int
    degree: int
    rank_rtol: float

    @property
    def rank_gap(self) -> int:
        return self.span_dim - self.gram_rank

    def to_obj(self) -> dict:
        return {
            "faithful_on_span": self.faithful_on_span,
            "span_dim": self.span_dim,
            "gram_rank": self.gram_rank,
            "rank_gap": self.rank_gap,
            "word_count": self.word_count,
            "degree": self.degree,
            "rank_rtol": self.rank_rtol,
        }


def _all_words(ids: Sequence[int], degree: int) -> list[Word]:
    letters = [(f, s) for f in ids for s in (False, True)]
    out: list[Word] = [Word(())]
    for length in range(1, degree + 1):
        for combo in itertools.product(letters, repeat=length):
            out.append(Word(tuple(combo)))
    return out


def _gram_rank(gram: np.ndarray, rank_rtol: float) -> int:
    s = np.linalg.svd(gram, compute_uv=False)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.sum(s > rank_rtol * s[0]))


def faithfulness_check(
    state: State,
    gens: Gens,
    degree: int = 2,
    rank_rtol: float = 1e-9,
    max_words: int = MAX_GRAM_WORDS,
) -> FaithfulnessReport:
    """Compare operator-space and state-space ranks of the word span.

    ``span_dim`` is the rank of the Hilbert-Schmidt Gram of all words up to
    the degree; ``gram_rank`` is the rank of the state Gram
    ``G[u, v] = phi(u* v)``.  Equality certifies that no nonzero element of
    the span is annihilated by the state's seminorm.
    """
    ids = sorted(gens)
    words = _all_words(ids, degree)
    if len(words) > max_words:
        raise ValueError(
            f"word count {len(words)} exceeds cap {max_words}; lower the degree"
        )
    mats = [evaluate_word(w, gens) for w in words]
    flat = np.stack([m.reshape(-1) for m in mats], axis=1)
    hs_gram = adjoint(flat) @ flat
    span_dim = _gram_rank(hs_gram, rank_rtol)

    panel, weights = _state_panel(state)
    applied = [apply_word(w, gens, panel) for w in words]
    state_gram = np.zeros((len(words), len(words)), dtype=complex)
    for k in range(panel.shape[1]):
        block = np.stack([a[:, k] for a in applied], axis=1)
        state_gram += weights[k] * (adjoint(block) @ block)
    gram_rank = _gram_rank(state_gram, rank_rtol)

    return FaithfulnessReport(
        faithful_on_span=span_dim == gram_rank,
        span_dim=span_dim,
        gram_rank=gram_rank,
        word_count=len(words),
        degree=degree,
        rank_rtol=rank_rtol,
    )


# ---------------------------------------------------------------------------
# noncrossing partitions and free cumulants

Partition = tuple[tuple[int, ...], ...]


@lru_cache(maxsize=None)
def _nc_shapes(length: int) -> tuple[Partition, ...]:
    """Noncrossing partitions of ``range(length)`` (0-based), canonical order."""
    if length == 0:
        return ((),)
    out: list[Partition] = []
    rest = list(range(1, length))
    # block of 0: any subset; the gaps between chosen points split independently
    for mask in range(1 << (length - 1)):
        chosen = [0] + [rest[i] for i in range(length - 1) if mask >> i & 1]
        gaps = [(a + 1, b) for a, b in zip(chosen, chosen[1:] + [length])]
        pieces: list[tuple[Partition, ...]] = []
        for lo, hi in gaps:
            pieces.append(
                tuple(
                    tuple(tuple(x + lo for x in block) for block in part)
                    for part in _nc_shapes(hi - lo)
                )
            )
        head = (tuple(chosen),)
        for combo in itertools.product(*pieces):
            blocks = list(head)
            for part in combo:
                blocks.extend(part)
            blocks.sort(key=lambda b: b[0])
            out.append(tuple(blocks))
    out.sort(key=lambda p: (len(p), p))
    return tuple(out)


def noncrossing_partitions(k: int) -> list[Partition]:
    """All noncrossing partitions of ``{1, ..., k}``; blocks sorted by least
    element, partitions ordered by block count then lexicographically."""
    if not 1 <= k <= MAX_PARTITION_SIZE:
        raise ValueError(f"partition size must be in 1..{MAX_PARTITION_SIZE}, got {k}")
    return [
        tuple(tuple(x + 1 for x in block) for block in part) for part in _nc_shapes(k)
    ]


def is_noncrossing(partition: Partition) -> bool:
    """Blocks cross iff their sorted merge alternates through 4+ runs."""
    blocks = [set(b) for b in partition]
    for bi, bj in itertools.combinations(blocks, 2):
        merged = sorted((x, x in bi) for x in bi | bj)
        runs = 1
        for (_, a), (_, b) in zip(merged, merged[1:]):
            if a != b:
                runs += 1
        if runs >= 4:
            return False
    return True


def all_set_partitions(k: int) -> list[Partition]:
    """Every set partition of ``{1, ..., k}`` via restricted growth strings."""
    if not 1 <= k <= 8:
        raise ValueError(f"set partition enumeration capped at 8, got {k}")
    out: list[Partition] = []

    def rec(i: int, assignment: list[int], nblocks: int) -> None:
        if i == k:
            blocks: list[list[int]] = [[] for _ in range(nblocks)]
            for pos, b in enumerate(assignment):
                blocks[b].append(pos + 1)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(nblocks):
            assignment.append(b)
            rec(i + 1, assignment, nblocks)
            assignment.pop()
        assignment.append(nblocks)
        rec(i + 1, assignment, nblocks + 1)
        assignment.pop()

    rec(0, [], 0)
    return out


def free_cumulants(moments: Sequence[complex]) -> list[complex]:
    """Free cumulants ``kappa_1..kappa_k`` from moments ``m_1..m_k`` by the
    noncrossing moment-cumulant recursion."""
    k = len(moments)
    if not 1 <= k <= MAX_PARTITION_SIZE:
        raise ValueError(f"need 1..{MAX_PARTITION_SIZE} moments, got {k}")
    kappas: list[complex] = []
    for n in range(1, k + 1):
        lower = 0.0 + 0.0j
        for part in noncrossing_partitions(n):
            if len(part) == 1:
                continue
            prod = 1.0 + 0.0j
            for block in part:
                prod *= kappas[len(block) - 1]
            lower += prod
        kappas.append(complex(moments[n - 1]) - lower)
    return kappas


def moments_from_cumulants(kappas: Sequence[complex]) -> list[complex]:
    k = len(kappas)
    if not 1 <= k <= MAX_PARTITION_SIZE:
        raise ValueError(f"need 1..{MAX_PARTITION_SIZE} cumulants, got {k}")
    out: list[complex] = []
    for n in range(1, k + 1):
        total = 0.0 + 0.0j
        for part in noncrossing_partitions(n):
            prod = 1.0 + 0.0j
            for block in part:
                prod *= complex(kappas[len(block) - 1])
            total += prod
        out.append(total)
    return out


# ---------------------------------------------------------------------------
# free mixed moment oracle

Marginal = Callable[[Word], complex]


def matrix_marginal(mat: np.ndarray, state: State) -> Marginal:
    """Marginal distribution of one matrix factor under a state."""
    gens = {1: as_matrix(mat)}

    def phi(word: Word) -> complex:
        relabeled = Word(tuple((1, s) for _, s in word.letters))
        return word_moment(state, gens, relabeled)

    return phi


def haar_unitary_marginal() -> Marginal:
    """Haar unitary marginal: ``phi(u^k) = 1`` iff the net exponent is 0."""

    def phi(word: Word) -> complex:
        net = sum(-1 if s else 1 for _, s in word.letters)
        return 1.0 + 0.0j if net == 0 else 0.0 + 0.0j

    return phi


def free_mixed_moment_oracle(
    marginals: Mapping[int, Marginal],
    word: Word,
    max_letters: int = MAX_ORACLE_LETTERS,
) -> complex:
    """Mixed moment of a word in freely independent factors, from marginals only.

    Uses the defining recursion: subtracting the mean from each factor block of
    an alternating word gives a product with zero moment, so the word's moment
    expands over subsets of blocks replaced by their means, with the
    complementary blocks re-merged and recursed on.
    """
    if len(word) > max_letters:
        raise ValueError(
            f"word length {len(word)} exceeds oracle cap {max_letters}"
        )
    for f, _ in word.letters:
        if f not in marginals:
            raise KeyError(f"no marginal for factor {f}; known: {sorted(marginals)}")

    memo: dict[tuple, complex] = {}

    def block_phi(block: tuple[int, tuple[bool, ...]]) -> complex:
        f, stars = block
        return marginals[f](Word(tuple((f, s) for s in stars)))

    def merge(blocks: Sequence[tuple[int, tuple[bool, ...]]]) -> tuple:
        out: list[tuple[int, tuple[bool, ...]]] = []
        for f, stars in blocks:
            if out and out[-1][0] == f:
                out[-1] = (f, out[-1][1] + stars)
            else:
                out.append((f, stars))
        return tuple(out)

    def rec(blocks: tuple) -> complex:
        if not blocks:
            return 1.0 + 0.0j
        if len(blocks) == 1:
            return block_phi(blocks[0])
        if blocks in memo:
            return memo[blocks]
        m = len(blocks)
        phis = [block_phi(b) for b in blocks]
        total = 0.0 + 0.0j
        for mask in range(1, 1 << m):
            coeff = 1.0 + 0.0j
            sign = -1.0
            kept: list[tuple[int, tuple[bool, ...]]] = []
            for j in range(m):
                if mask >> j & 1:
                    coeff *= phis[j]
                    sign = -sign
                else:
                    kept.append(blocks[j])
            if coeff == 0:
                continue
            total += sign * coeff * rec(merge(kept))
        memo[blocks] = total
        return total

    return rec(word.blocks())


# ---------------------------------------------------------------------------
# tensor product model


def make_tensor_independent(
    factors: Sequence[tuple[np.ndarray, State]], dim_cap: int = 4096
) -> tuple[dict[int, np.ndarray], State]:
    """Ampliate factors onto the tensor product space with the product state.

    Returns a ``gens`` dict keyed 1..n and the joint state; tensor
    independence holds by construction.
    """
    mats = [as_matrix(t) for t, _ in factors]
    states = [s for _, s in factors]
    dims = [m.shape[0] for m in mats]
    total = int(np.prod(dims))
    if total > dim_cap:
        raise ValueError(f"tensor product dimension {total} exceeds cap {dim_cap}")

    gens: dict[int, np.ndarray] = {}
    for i, m in enumerate(mats):
        before = int(np.prod(dims[:i])) if i else 1
        after = int(np.prod(dims[i + 1 :])) if i + 1 < len(dims) else 1
        gens[i + 1] = np.kron(
            np.eye(before, dtype=complex), np.kron(m, np.eye(after, dtype=complex))
        )

    if all(s.kind == "vector" for s in states):
        vec = np.array([1.0 + 0.0j])
        for s in states:
            vec = np.kron(vec, s.vector)
        return gens, State.from_vector(vec)

    rho = np.array([[1.0 + 0.0j]])
    for s in states:
        block = (
            np.outer(s.vector, np.conj(s.vector)) if s.kind == "vector" else s.density
        )
        rho = np.kron(rho, block)
    return gens, State.from_density(rho)
