"""Exact rational dense linear algebra.

Rank, greedy row-basis selection, right null-space bases and
column-deleted rank over exact rationals.  All arithmetic is exact;
nothing here ever rounds.  Matrices are small and dense (evaluated
codistributions), so plain Gaussian elimination with exact division is
the right tool.  Pivots are chosen by minimal numerator+denominator bit
length to keep intermediate coefficients from blowing up; correctness
does not depend on the pivot choice.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Rat = Union[int, Fraction]


def _bit_size(x: Rat) -> int:
    if isinstance(x, int):
        return abs(x).bit_length()
    return x.numerator.bit_length() + x.denominator.bit_length()


class RationalMatrix:
    """Immutable dense matrix of exact rationals (row-major)."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Iterable[Rat]], cols: int | None = None):
        rows = tuple(tuple(r) for r in data)
        self.data = rows
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else (cols or 0)
        for r in rows:
            if len(r) != self.cols:
                raise ValueError("ragged rows")

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)])

    def __eq__(self, other):
        return (isinstance(other, RationalMatrix)
                and self.data == other.data)

    def __hash__(self):
        return hash(self.data)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"

    def row(self, i: int) -> tuple[Rat, ...]:
        return self.data[i]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self.data)) if self.rows else RationalMatrix([])

    @property
    def T(self) -> "RationalMatrix":
        return self.transpose()

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ "
                             f"{other.rows}x{other.cols}")
        bt = list(zip(*other.data)) if other.data else []
        return RationalMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in bt]
             for row in self.data])

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def without_column(self, col: int) -> "RationalMatrix":
        if not (0 <= col < self.cols):
            raise IndexError(f"column {col} out of range for {self.cols} columns")
        return RationalMatrix([r[:col] + r[col + 1:] for r in self.data],
                              cols=self.cols - 1)

    # -- rank family -----------------------------------------------------

    def rank(self) -> int:
        work = [list(r) for r in self.data]
        n_rows, n_cols = self.rows, self.cols
        rank = 0
        for col in range(n_cols):
            if rank == n_rows:
                break
            # smallest-entry pivot in this column
            pivot_row = -1
            pivot_size = 0
            for i in range(rank, n_rows):
                x = work[i][col]
                if x != 0:
                    size = _bit_size(x)
                    if pivot_row < 0 or size < pivot_size:
                        pivot_row, pivot_size = i, size
            if pivot_row < 0:
                continue
            work[rank], work[pivot_row] = work[pivot_row], work[rank]
            prow = work[rank]
            pval = prow[col]
            for i in range(rank + 1, n_rows):
                x = work[i][col]
                if x == 0:
                    continue
                factor = Fraction(x, pval) if isinstance(x, int) and isinstance(pval, int) else x / pval
                row_i = work[i]
                row_i[col] = 0
                for j in range(col + 1, n_cols):
                    pj = prow[j]
                    if pj != 0:
                        row_i[j] = row_i[j] - factor * pj
            rank += 1
        return rank

    def row_basis(self) -> list[int]:
        """Indices of a maximal independent row subset, earliest rows first."""
        reducer = RowReducer(self.cols)
        keep = []
        for i, r in enumerate(self.data):
            if reducer.add(r):
                keep.append(i)
        return keep

    def rank_without_column(self, col: int) -> int:
        return self.without_column(col).rank()

    def null_space(self) -> "RationalMatrix":
        """Basis of the right kernel, one basis vector per column.

        Column count is cols - rank; self @ null_space(self) is exactly
        zero.  Returns a cols x 0 matrix for a full-column-rank input.
        """
        n_cols = self.cols
        work = [[Fraction(x) for x in r] for r in self.data]
        pivots: list[int] = []  # pivot column per eliminated row
        r = 0
        for col in range(n_cols):
            pivot_row = -1
            pivot_size = 0
            for i in range(r, len(work)):
                x = work[i][col]
                if x != 0:
                    size = _bit_size(x)
                    if pivot_row < 0 or size < pivot_size:
                        pivot_row, pivot_size = i, size
            if pivot_row < 0:
                continue
            work[r], work[pivot_row] = work[pivot_row], work[r]
            prow = work[r]
            pval = prow[col]
            if pval != 1:
                work[r] = prow = [x / pval for x in prow]
            for i in range(len(work)):
                if i == r:
                    continue
                x = work[i][col]
                if x == 0:
                    continue
                row_i = work[i]
                work[i] = [a - x * b for a, b in zip(row_i, prow)]
            pivots.append(col)
            r += 1
            if r == len(work):
                break
        pivot_set = set(pivots)
        free_cols = [c for c in range(n_cols) if c not in pivot_set]
        basis = []
        for fc in free_cols:
            vec: list[Rat] = [0] * n_cols
            vec[fc] = 1
            for row_idx, pc in enumerate(pivots):
                coef = work[row_idx][fc]
                if coef != 0:
                    vec[pc] = -coef
            basis.append(vec)
        # kernel vectors as columns
        if not basis:
            return RationalMatrix([() for _ in range(n_cols)], cols=0)
        return RationalMatrix(zip(*basis), cols=len(basis))


class RowReducer:
    """Incremental row-space tracker via online Gaussian elimination.

    Rows are reduced against the pivots accumulated so far; add() returns
    True when the row extends the span (and keeps it as a new pivot row).
    The first row presenting a given pivot wins, so feeding rows in order
    implements the greedy earliest-rows-win basis selection.
    """

    def __init__(self, cols: int):
        self.cols = cols
        self.pivot_rows: list[list[Rat]] = []
        self.pivot_cols: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    def _reduce(self, row: Sequence[Rat]) -> list[Rat]:
        work = list(row)
        for prow, pcol in zip(self.pivot_rows, self.pivot_cols):
            x = work[pcol]
            if x != 0:
                work = [a - x * b for a, b in zip(work, prow)]
        return work

    def contains(self, row: Sequence[Rat]) -> bool:
        return all(x == 0 for x in self._reduce(row))

    def add(self, row: Sequence[Rat]) -> bool:
        work = self._reduce(row)
        for col, x in enumerate(work):
            if x != 0:
                inv = Fraction(1, 1) / x
                self.pivot_rows.append([v * inv for v in work])
                self.pivot_cols.append(col)
                return True
        return False
