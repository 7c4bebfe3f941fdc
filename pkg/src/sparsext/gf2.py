"""Packed GF(2) vectors and matrices with rank, kernel, and weight computations.

Conventions: coordinate ``i`` of a vector is bit ``i`` of a Python int payload
(so the leftmost character of a "0101" string is coordinate 0).  A matrix is a
tuple of packed row masks.  All values are immutable and all operations are
pure, so they are safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, TextIO

__all__ = [
    "BitVector",
    "BudgetExceededError",
    "DimensionError",
    "Exceeds",
    "Gf2Matrix",
    "SparsityReport",
    "left_kernel_basis",
    "matvec",
    "matvec_add",
    "min_weight_left_kernel",
    "rank",
    "read_matrix",
    "sparsity_and_locality",
    "write_matrix",
]


class DimensionError(ValueError):
    """Operand shapes do not line up."""


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class Exceeds:
    """Verdict that every nonzero left-kernel vector weighs more than ``cap``."""

    cap: int


@dataclass(frozen=True)
class BitVector:
    """A length-``n`` bit string packed into an int (bit i = coordinate i)."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"length must be >= 1, got {self.n}")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError("payload has bits beyond the declared length")

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def from_bits(cls, bits01: Iterable[int]) -> "BitVector":
        vals = list(bits01)
        payload = 0
        for i, b in enumerate(vals):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b}, expected 0 or 1")
            payload |= b << i
        return cls(len(vals), payload)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls.from_bits(int(ch) for ch in s)

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def weight(self) -> int:
        return self.bits.bit_count()

    def to_string(self) -> str:
        return "".join(str((self.bits >> i) & 1) for i in range(self.n))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionError(f"lengths differ: {self.n} vs {other.n}")
        return BitVector(self.n, self.bits ^ other.bits)


class SparsityReport(NamedTuple):
    total_ones: int
    max_row_weight: int
    max_col_weight: int


@dataclass(frozen=True)
class Gf2Matrix:
    """Dense packed-row binary matrix; ``row_masks[i]`` holds row i."""

    rows: int
    cols: int
    row_masks: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"shape must be >= 1x1, got {self.rows}x{self.cols}")
        if len(self.row_masks) != self.rows:
            raise ValueError("row count does not match payload")
        limit = 1 << self.cols
        for i, mask in enumerate(self.row_masks):
            if not 0 <= mask < limit:
                raise ValueError(f"row {i} has bits beyond column {self.cols - 1}")

    @classmethod
    def from_rows(cls, rows01: Iterable[Iterable[int]]) -> "Gf2Matrix":
        vecs = [BitVector.from_bits(r) for r in rows01]
        if not vecs:
            raise ValueError("matrix needs at least one row")
        cols = vecs[0].n
        if any(v.n != cols for v in vecs):
            raise ValueError("ragged rows")
        return cls(len(vecs), cols, tuple(v.bits for v in vecs))

    @classmethod
    def from_coords(cls, rows: int, cols: int, coords: Iterable[tuple[int, int]]) -> "Gf2Matrix":
        masks = [0] * rows
        seen = set()
        for i, j in coords:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"coordinate ({i}, {j}) outside {rows}x{cols}")
            if (i, j) in seen:
                raise ValueError(f"duplicate coordinate ({i}, {j})")
            seen.add((i, j))
            masks[i] |= 1 << j
        return cls(rows, cols, tuple(masks))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, (0,) * rows)

    def entry(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError((i, j))
        return (self.row_masks[i] >> j) & 1

    def coords(self) -> list[tuple[int, int]]:
        """Coordinate list of ones, sorted lexicographically (derived view)."""
        out = []
        for i, mask in enumerate(self.row_masks):
            while mask:
                low = mask & -mask
                out.append((i, low.bit_length() - 1))
                mask ^= low
        return out

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_masks[i])

    def column_mask(self, j: int) -> int:
        """Column j packed as an int over row indices."""
        if not 0 <= j < self.cols:
            raise IndexError(j)
        out = 0
        for i, mask in enumerate(self.row_masks):
            out |= ((mask >> j) & 1) << i
        return out

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(self.cols, self.rows,
                         tuple(self.column_mask(j) for j in range(self.cols)))

    def hstack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        """Concatenate columns: [self | other]."""
        if self.rows != other.rows:
            raise DimensionError(f"row counts differ: {self.rows} vs {other.rows}")
        masks = tuple(a | (b << self.cols)
                      for a, b in zip(self.row_masks, other.row_masks))
        return Gf2Matrix(self.rows, self.cols + other.cols, masks)


def matvec(M: Gf2Matrix, x: BitVector) -> BitVector:
    """Matrix-vector product over GF(2): bit j = parity of row j AND x."""
    if x.n != M.cols:
        raise DimensionError(f"vector length {x.n} != matrix columns {M.cols}")
    out = 0
    for i, mask in enumerate(M.row_masks):
        out |= ((mask & x.bits).bit_count() & 1) << i
    return BitVector(M.rows, out)


def matvec_add(M: Gf2Matrix, x: BitVector, B: Gf2Matrix, r: BitVector) -> BitVector:
    """Mx xor Br, the two-argument linear map."""
    if M.rows != B.rows:
        raise DimensionError(f"output lengths differ: {M.rows} vs {B.rows}")
    return matvec(M, x) ^ matvec(B, r)


def _eliminate(row_masks: Iterable[int]):
    """Forward elimination with combination tracking.

    Yields per input row either ("pivot", reduced_mask) or ("kernel", combo)
    where combo packs the GF(2) combination of input rows that vanished.
    """
    pivots: dict[int, tuple[int, int]] = {}  # lowest set bit -> (mask, combo)
    for i, mask in enumerate(row_masks):
        combo = 1 << i
        while mask:
            low = mask & -mask
            if low not in pivots:
                pivots[low] = (mask, combo)
                yield ("pivot", mask)
                break
            pmask, pcombo = pivots[low]
            mask ^= pmask
            combo ^= pcombo
        else:
            yield ("kernel", combo)


def rank(M: Gf2Matrix) -> int:
    """Rank over GF(2)."""
    return sum(1 for kind, _ in _eliminate(M.row_masks) if kind == "pivot")


def left_kernel_basis(M: Gf2Matrix) -> list[BitVector]:
    """Basis of {c : c^T M = 0}; has size rows - rank(M)."""
    return [BitVector(M.rows, combo)
            for kind, combo in _eliminate(M.row_masks) if kind == "kernel"]


#: Kernel dimensions up to this are enumerated outright; larger ones fall back
#: to subset search bounded by ``subset_budget``.
_KERNEL_ENUM_MAX_DIM = 24


def min_weight_left_kernel(M: Gf2Matrix, cap: int,
                           subset_budget: int = 1 << 26) -> int | Exceeds:
    """Minimum Hamming weight of a nonzero left-kernel vector, capped.

    Returns the exact minimum weight when it is <= ``cap``, otherwise
    ``Exceeds(cap)`` (also for a trivial kernel).  Equivalent statement:
    ``Exceeds(cap)`` certifies that every nonempty set of at most ``cap``
    rows is linearly independent.

    Raises :class:`BudgetExceededError` if neither the kernel subspace nor
    the row subsets up to ``cap`` can be enumerated within budget; never
    returns a wrong answer.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    basis = left_kernel_basis(M)
    dim = len(basis)
    if dim == 0:
        return Exceeds(cap)
    if dim <= _KERNEL_ENUM_MAX_DIM:
        masks = [v.bits for v in basis]
        best = None
        cur = 0
        for i in range(1, 1 << dim):
            cur ^= masks[(i & -i).bit_length() - 1]
            w = cur.bit_count()
            if best is None or w < best:
                best = w
                if best == 1:
                    break
        return best if best <= cap else Exceeds(cap)
    # Kernel too large to enumerate: search row subsets by increasing size.
    total = 0
    for size in range(1, cap + 1):
        total += math.comb(M.rows, size)
        if total > subset_budget:
            raise BudgetExceededError(
                f"subset search up to size {cap} needs {total} checks "
                f"(budget {subset_budget})")
        for subset in combinations(range(M.rows), size):
            acc = 0
            for i in subset:
                acc ^= M.row_masks[i]
            if acc == 0:
                return size
    return Exceeds(cap)


def sparsity_and_locality(M: Gf2Matrix) -> SparsityReport:
    """Count input-output dependencies: total ones, max row/column weight."""
    row_weights = [mask.bit_count() for mask in M.row_masks]
    col_weights = [0] * M.cols
    for mask in M.row_masks:
        while mask:
            low = mask & -mask
            col_weights[low.bit_length() - 1] += 1
            mask ^= low
    return SparsityReport(sum(row_weights), max(row_weights), max(col_weights))


def write_matrix(fp: TextIO, M: Gf2Matrix) -> None:
    """Write the text format: "rows cols" header, sorted "i j" lines, blank line."""
    fp.write(f"{M.rows} {M.cols}\n")
    for i, j in M.coords():
        fp.write(f"{i} {j}\n")
    fp.write("\n")


def read_matrix(fp: TextIO) -> Gf2Matrix:
    """Read one blank-line-terminated matrix block; inverse of write_matrix."""
    header = None
    for line in fp:
        if line.strip():
            header = line
            break
    if header is None:
        raise ValueError("no matrix block found")
    parts = header.split()
    if len(parts) != 2:
        raise ValueError(f"bad matrix header: {header!r}")
    rows, cols = int(parts[0]), int(parts[1])
    coords = []
    for line in fp:
        if not line.strip():
            break
        i, j = line.split()
        coords.append((int(i), int(j)))
    return Gf2Matrix.from_coords(rows, cols, coords)
