from dataclasses import dataclass
from typing import Dict, List, Tuple
from .table import CellIndex


@dataclass(frozen=True)
class DesignMatrix:
    """Nonnegative integer design: rows are cells, columns are parameters."""
    cells: Tuple[CellIndex, ...]
    param_names: Tuple[str, ...]
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, 'cells', tuple(self.cells))
        object.__setattr__(self, 'param_names', tuple(self.param_names))
        object.__setattr__(self, 'entries', tuple(tuple(int(v) for v in row) for row in self.entries))
        if len(self.entries) != len(self.cells):
            raise ValueError(f"Design has {len(self.entries)} rows for {len(self.cells)} cells")
        for row in self.entries:
            if len(row) != len(self.param_names):
                raise ValueError(f"Design row of length {len(row)}, expected {len(self.param_names)}")
            if any(v < 0 for v in row):
                raise ValueError("Design entries must be nonnegative")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.cells), len(self.param_names)

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    @property
    def columns(self) -> List[Tuple[int, ...]]:
        return [self.column(j) for j in range(len(self.param_names))]

    def zero_rows(self) -> List[CellIndex]:
        return [cell for cell, row in zip(self.cells, self.entries) if not any(row)]


@dataclass(frozen=True)
class KernelBasis:
    """Integer basis of the lattice orthogonal to the design columns."""
    cells: Tuple[CellIndex, ...]
    vectors: Tuple[Tuple[int, ...], ...]
    zero_sum: bool = True  # all-ones vector lies in the design's column span

    @property
    def rank(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class BinomialEquation:
    """prod q^plus - prod q^minus = 0 with disjoint supports."""
    plus: Tuple[Tuple[CellIndex, int], ...]
    minus: Tuple[Tuple[CellIndex, int], ...]

    @property
    def degree(self) -> Tuple[int, int]:
        return sum(e for _, e in self.plus), sum(e for _, e in self.minus)

    @property
    def is_homogeneous(self) -> bool:
        left, right = self.degree
        return left == right

    def sides(self) -> Tuple[Dict[CellIndex, int], Dict[CellIndex, int]]:
        return dict(self.plus), dict(self.minus)


@dataclass(frozen=True)
class HilbertBasis:
    """Minimal generators of the monoid of nonnegative vectors orthogonal to a kernel."""
    cells: Tuple[CellIndex, ...]
    generators: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: Tuple = ()
    detail: str = ''


@dataclass(frozen=True)
class VerificationReport:
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckResult:
        for result in self.checks:
            if result.name == name:
                return result
        raise KeyError(name)
