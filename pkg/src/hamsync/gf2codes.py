"""Binary linear codes: parity-check matrices as packed integer rows,
syndromes, affine solves, random code sampling, and exhaustive decoding.

A matrix row is a Python int whose bit c is the entry in column c, matching
the Word convention, so a row-times-vector product is one AND and a popcount.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from random import Random
from typing import Optional, Sequence

from .bitword import Word
from .errors import CapabilityError, ContractError, InvariantError, RetryLimitError

_DECODE_ENUM_LIMIT = 24  # exhaustive decoding walks 2^k codewords; n capped too


@dataclass(frozen=True, slots=True)
class BitMatrix:
    rows: int
    cols: int
    row_masks: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ContractError("matrix dimensions must be positive")
        if len(self.row_masks) != self.rows:
            raise ContractError("row count does not match the mask tuple")
        limit = 1 << self.cols
        if any(not 0 <= m < limit for m in self.row_masks):
            raise ContractError("row mask has bits outside the column range")

    def entry(self, r: int, c: int) -> int:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise ContractError("matrix index out of range")
        return (self.row_masks[r] >> c) & 1


def mat_vec(m: BitMatrix, x: int) -> int:
    """Product over GF(2): output bit r is the parity of row r AND x."""
    out = 0
    for r, mask in enumerate(m.row_masks):
        out |= ((mask & x).bit_count() & 1) << r
    return out


def _rref(masks: Sequence[int], cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (reduced rows, pivot columns)."""
    rows = list(masks)
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(rows)) if (rows[i] >> c) & 1), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> c) & 1:
                rows[i] ^= rows[r]
        pivot_cols.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivot_cols


def rank(m: BitMatrix) -> int:
    _, pivots = _rref(m.row_masks, m.cols)
    return len(pivots)


class AffineSolver:
    """Prepared solver for H t = b with a fixed H: the row operations that
    reduce H are recorded once and replayed on each right-hand side."""

    def __init__(self, h: BitMatrix) -> None:
        self.h = h
        # Augment each row with an identity tag in the high bits; reducing the
        # combined rows yields [R | E] with R = E*H.
        cols = h.cols
        tagged = [mask | (1 << (cols + i)) for i, mask in enumerate(h.row_masks)]
        low_mask = (1 << cols) - 1
        # _rref only pivots on the first `cols` bit positions, so the identity
        # tags in the high bits just record the row operations.
        reduced, pivots = _rref(tagged, cols)
        self.pivot_cols = pivots
        self.reduced_rows = [row & low_mask for row in reduced]
        self.ops = [row >> cols for row in reduced]

    def solve(self, b: int) -> Optional[int]:
        """A solution with every free variable zero, or None if inconsistent."""
        t = 0
        nrows = len(self.reduced_rows)
        for i in range(nrows):
            b_bit = (self.ops[i] & b).bit_count() & 1
            if i < len(self.pivot_cols):
                if b_bit:
                    t |= 1 << self.pivot_cols[i]
            elif b_bit:
                return None  # zero row of H with a nonzero rhs
        return t


def solve_affine(h: BitMatrix, b: Word) -> Optional[Word]:
    """Solve H t = b over GF(2) by Gaussian elimination, free variables zero.

    Returns None exactly when the system is inconsistent.
    """
    if b.n != h.rows:
        raise ContractError(f"rhs has {b.n} bits, matrix has {h.rows} rows")
    t = AffineSolver(h).solve(b.value)
    return None if t is None else Word(t, h.cols)


@dataclass(frozen=True, slots=True)
class LinearCode:
    """[n, k] binary linear code given by a full-row-rank parity-check matrix.

    g_rows spans the code with g_rows[i] carrying a lone 1 in column
    message_positions[i] among the message columns, so a message embeds at
    message_positions and the remaining check_positions are determined.  When
    message_positions == (0..k-1) the generator is systematic in the strict
    first-k-columns sense; otherwise the tuple records the column role
    assignment that a permutation would normalize.
    """

    n: int
    k: int
    h: BitMatrix
    g_rows: tuple[int, ...]
    message_positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.k < self.n:
            raise ContractError("need 1 <= k < n")
        if self.h.rows != self.n - self.k or self.h.cols != self.n:
            raise ContractError("parity-check matrix has the wrong shape")
        if len(self.g_rows) != self.k or len(self.message_positions) != self.k:
            raise ContractError("generator data does not match k")

    @property
    def check_positions(self) -> tuple[int, ...]:
        msg = set(self.message_positions)
        return tuple(c for c in range(self.n) if c not in msg)

    @property
    def systematic_prefix(self) -> bool:
        return self.message_positions == tuple(range(self.k))


def code_from_parity(row_masks: Sequence[int], n: int) -> LinearCode:
    """Build a LinearCode from parity-check rows, which must be independent."""
    nrows = len(row_masks)
    if not 1 <= nrows < n:
        raise ContractError("need between 1 and n-1 parity rows")
    reduced, pivots = _rref(row_masks, n)
    if len(pivots) != nrows:
        raise ContractError("parity rows are linearly dependent")
    k = n - nrows
    pivot_set = set(pivots)
    free_cols = tuple(c for c in range(n) if c not in pivot_set)
    g_rows = []
    for f in free_cols:
        w = 1 << f
        for row, p in zip(reduced, pivots):
            if (row >> f) & 1:
                w |= 1 << p
        g_rows.append(w)
    h = BitMatrix(nrows, n, tuple(row_masks))
    for g in g_rows:
        if mat_vec(h, g):
            raise InvariantError("generator row is not in the null space")
    return LinearCode(n=n, k=k, h=h, g_rows=tuple(g_rows), message_positions=free_cols)


def encode(code: LinearCode, message: Word) -> Word:
    """Codeword whose message_positions carry the message bits."""
    if message.n != code.k:
        raise ContractError(f"message must have {code.k} bits")
    w = 0
    for i in range(code.k):
        if (message.value >> i) & 1:
            w ^= code.g_rows[i]
    return Word(w, code.n)


def extract_message(code: LinearCode, codeword: Word) -> Word:
    if codeword.n != code.n:
        raise ContractError("codeword length mismatch")
    value = 0
    for i, pos in enumerate(code.message_positions):
        value |= ((codeword.value >> pos) & 1) << i
    return Word(value, code.k) if code.k else Word(0, 1)


def syndrome(code: LinearCode, x: Word) -> Word:
    """H*x, as an (n-k)-bit word; zero exactly on codewords."""
    if x.n != code.n:
        raise ContractError(f"word has {x.n} bits, code length is {code.n}")
    return Word(mat_vec(code.h, x.value), code.n - code.k)


def random_linear_code(n: int, k: int, rng: Random, max_attempts: int = 1000) -> LinearCode:
    """Uniformly random (n-k) x n parity-check matrix, resampled until it has
    full row rank."""
    if not 1 <= k < n:
        raise ContractError("need 1 <= k < n")
    for _ in range(max_attempts):
        masks = tuple(rng.getrandbits(n) for _ in range(n - k))
        reduced, pivots = _rref(masks, n)
        if len(pivots) == n - k:
            return code_from_parity(masks, n)
    raise RetryLimitError(f"no full-rank parity matrix in {max_attempts} samples")


@lru_cache(maxsize=128)
def codewords(code: LinearCode) -> tuple[int, ...]:
    """All 2^k codeword values in ascending order, enumerated by spanning the
    generator rows (never by scanning the 2^n cube)."""
    if code.k > _DECODE_ENUM_LIMIT:
        raise CapabilityError(f"enumerating 2^{code.k} codewords is out of budget")
    words = [0]
    for g in code.g_rows:
        words += [w ^ g for w in words]
    words.sort()
    return tuple(words)


def list_decode_exhaustive(code: LinearCode, y: Word, radius: int) -> list[Word]:
    """All codewords within the given distance of y, ascending by value."""
    if code.n > _DECODE_ENUM_LIMIT:
        raise CapabilityError(f"exhaustive decoding is capped at n <= {_DECODE_ENUM_LIMIT}")
    if y.n != code.n:
        raise ContractError("word length does not match the code")
    if not 0 <= radius <= code.n:
        raise ContractError("radius must be in [0, n]")
    yv = y.value
    return [Word(c, code.n) for c in codewords(code) if (c ^ yv).bit_count() <= radius]


def unique_decode(code: LinearCode, y: Word) -> Word:
    """Nearest codeword to y; ties break toward the smaller value."""
    if y.n != code.n:
        raise ContractError("word length does not match the code")
    yv = y.value
    best = None
    best_d = code.n + 1
    for c in codewords(code):
        d = (c ^ yv).bit_count()
        if d < best_d:
            best, best_d = c, d
    assert best is not None
    return Word(best, code.n)


def min_distance(code: LinearCode) -> int:
    """Minimum weight of a nonzero codeword (enumerates all 2^k of them)."""
    return min(c.bit_count() for c in codewords(code) if c)


@lru_cache(maxsize=1)
def hamming_7_4() -> LinearCode:
    """The [7, 4] Hamming code with parity-check column c equal to the binary
    representation of c + 1, so a single-bit error's syndrome spells out its
    position."""
    rows = []
    for j in range(3):
        mask = 0
        for c in range(7):
            if ((c + 1) >> j) & 1:
                mask |= 1 << c
        rows.append(mask)
    return code_from_parity(tuple(rows), 7)


def bitmatrix_to_bytes(m: BitMatrix) -> bytes:
    """8-byte little-endian row and column counts, then the entries packed
    row-major, LSB-first, in one contiguous bit stream."""
    acc = 0
    for r, mask in enumerate(m.row_masks):
        acc |= mask << (r * m.cols)
    total_bits = m.rows * m.cols
    return (
        m.rows.to_bytes(8, "little")
        + m.cols.to_bytes(8, "little")
        + acc.to_bytes((total_bits + 7) // 8, "little")
    )


def bitmatrix_from_bytes(raw: bytes) -> BitMatrix:
    if len(raw) < 16:
        raise ContractError("serialized matrix shorter than its header")
    rows = int.from_bytes(raw[:8], "little")
    cols = int.from_bytes(raw[8:16], "little")
    if rows < 1 or cols < 1:
        raise ContractError("serialized matrix has empty dimensions")
    total_bits = rows * cols
    if len(raw) != 16 + (total_bits + 7) // 8:
        raise ContractError("serialized matrix has wrong payload size")
    acc = int.from_bytes(raw[16:], "little")
    if acc >> total_bits:
        raise ContractError("serialized matrix has nonzero padding bits")
    col_mask = (1 << cols) - 1
    masks = tuple((acc >> (r * cols)) & col_mask for r in range(rows))
    return BitMatrix(rows, cols, masks)
