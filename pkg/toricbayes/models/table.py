from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple
from ..utils.errors import TableFormatError


@dataclass(frozen=True, order=True)
class CellIndex:
    """A cell of a two-way table, 1-based."""
    row: int
    col: int

    @property
    def name(self) -> str:
        return f"{self.row}{self.col}" if self.row < 10 and self.col < 10 else f"{self.row},{self.col}"

    def as_list(self) -> List[int]:
        return [self.row, self.col]


@dataclass(frozen=True)
class ContingencyTable:
    """Observed counts on the free cells of an R x C grid.

    Structural zeros carry no count; a literal 0 in ``counts`` is a sampling zero.
    """
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    counts: Dict[CellIndex, int]
    structural_zeros: FrozenSet[CellIndex] = field(default_factory=frozenset)
    N: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'row_labels', tuple(self.row_labels))
        object.__setattr__(self, 'col_labels', tuple(self.col_labels))
        object.__setattr__(self, 'structural_zeros', frozenset(self.structural_zeros))
        object.__setattr__(self, 'counts', dict(self.counts))

        R, C = self.n_rows, self.n_cols
        if R == 0 or C == 0:
            raise TableFormatError("Table needs at least one row and one column")
        for cell in list(self.counts) + list(self.structural_zeros):
            if not (1 <= cell.row <= R and 1 <= cell.col <= C):
                raise TableFormatError(f"Cell ({cell.row},{cell.col}) outside the {R}x{C} grid")
        overlap = self.structural_zeros & set(self.counts)
        if overlap:
            cell = min(overlap)
            raise TableFormatError(f"Count present at structural zero ({cell.row},{cell.col})")
        for cell, n in self.counts.items():
            if isinstance(n, bool) or not isinstance(n, int):
                raise TableFormatError(f"Count at ({cell.row},{cell.col}) is not an integer: {n!r}")
            if n < 0:
                raise TableFormatError(f"Negative count {n} at ({cell.row},{cell.col})")
        covered = set(self.counts) | self.structural_zeros
        if len(covered) != R * C:
            missing = sorted(CellIndex(i, j) for i in range(1, R + 1) for j in range(1, C + 1)
                             if CellIndex(i, j) not in covered)
            raise TableFormatError(f"Cell ({missing[0].row},{missing[0].col}) has neither a count nor a structural zero")
        if not self.counts:
            raise TableFormatError("Every cell is a structural zero")

        object.__setattr__(self, 'N', sum(self.counts.values()))

    @property
    def n_rows(self) -> int:
        return len(self.row_labels)

    @property
    def n_cols(self) -> int:
        return len(self.col_labels)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    def count(self, cell: CellIndex) -> int:
        return self.counts.get(cell, 0)
