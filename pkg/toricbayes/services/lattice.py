import json
from itertools import combinations
from math import prod
from typing import IO, Dict, List, Mapping, Optional, Sequence, Tuple, Union
import jsonschema
from ..models.table import CellIndex, ContingencyTable
from ..models.lattice import BinomialEquation, DesignMatrix, KernelBasis
from ..utils.config_manager import config_manager
from ..utils.errors import TableFormatError
from ..utils.intmath import as_int_matrix, hermite_normal_form, left_kernel, primitive, rank
from ..utils.logger import get_logger
from .tables import free_cells

logger = get_logger('lattice')

DESIGN_SCHEMA = {
    'type': 'object',
    'required': ['cells', 'param_names', 'entries'],
    'properties': {
        'cells': {
            'type': 'array',
            'minItems': 1,
            'items': {'type': 'array', 'items': {'type': 'integer', 'minimum': 1},
                      'minItems': 2, 'maxItems': 2},
        },
        'param_names': {'type': 'array', 'items': {'type': 'string'}},
        'entries': {
            'type': 'array',
            'items': {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}},
        },
    },
}


def build_qi_design(table: ContingencyTable) -> DesignMatrix:
    """Quasi-independence design: one indicator per used row level and column level."""
    cells = free_cells(table)
    used_rows = sorted({cell.row for cell in cells})
    used_cols = sorted({cell.col for cell in cells})

    for i in range(1, table.n_rows + 1):
        if i not in used_rows:
            logger.warning(f"Row {i} consists of structural zeros only, dropping alpha_{i}")
    for j in range(1, table.n_cols + 1):
        if j not in used_cols:
            logger.warning(f"Column {j} consists of structural zeros only, dropping beta_{j}")

    names = [f'alpha_{i}' for i in used_rows] + [f'beta_{j}' for j in used_cols]
    entries = [
        [1 if cell.row == i else 0 for i in used_rows] + [1 if cell.col == j else 0 for j in used_cols]
        for cell in cells
    ]
    design = DesignMatrix(cells=cells, param_names=names, entries=entries)
    logger.info(f"QI design: {design.shape[0]} cells x {design.shape[1]} parameters")
    return design


def build_saturated_design(table: ContingencyTable) -> DesignMatrix:
    """Identity design on the free cells (the structural-zero model)."""
    cells = free_cells(table)
    names = [f'theta_{cell.name}' for cell in cells]
    entries = [[1 if k == m else 0 for m in range(len(cells))] for k in range(len(cells))]
    return DesignMatrix(cells=cells, param_names=names, entries=entries)


def load_design(source: Union[IO, bytes, str]) -> DesignMatrix:
    """Read a user-supplied design in the JSON design format."""
    data = source if isinstance(source, (bytes, str)) else source.read()
    try:
        doc = json.loads(data)
        jsonschema.validate(instance=doc, schema=DESIGN_SCHEMA)
    except json.JSONDecodeError as e:
        raise TableFormatError(f"Design is not valid JSON: {e}") from e
    except jsonschema.ValidationError as e:
        raise TableFormatError(f"Malformed design document: {e.message}") from e

    cells = [CellIndex(r, c) for r, c in doc['cells']]
    if len(set(cells)) != len(cells):
        raise TableFormatError("Duplicate cell in design")
    try:
        design = DesignMatrix(cells=cells, param_names=doc['param_names'], entries=doc['entries'])
    except ValueError as e:
        raise TableFormatError(str(e)) from e
    if design.zero_rows():
        cell = design.zero_rows()[0]
        raise TableFormatError(f"Cell ({cell.row},{cell.col}) is not touched by any parameter")
    return design


def _ones_in_span(design: DesignMatrix) -> bool:
    n, p = design.shape
    if p == 0:
        return False
    M = as_int_matrix(design.entries, p)
    augmented = as_int_matrix([list(row) + [1] for row in design.entries], p + 1)
    return rank(M) == rank(augmented)


def integer_kernel(design: DesignMatrix) -> KernelBasis:
    """Saturated integer basis of {k : M^T k = 0}, canonical reduced HNF rows."""
    n, p = design.shape
    M = as_int_matrix(design.entries, p)
    vectors = left_kernel(M)
    zero_sum = _ones_in_span(design)
    if not zero_sum and vectors:
        logger.warning("All-ones vector is not in the design's column span; kernel vectors need not sum to zero")
    logger.info(f"Kernel lattice of rank {len(vectors)} on {n} cells")
    return KernelBasis(cells=design.cells, vectors=tuple(vectors), zero_sum=zero_sum)


def same_lattice(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], n: int) -> bool:
    return hermite_normal_form(a, n) == hermite_normal_form(b, n)


def _circuits(K: KernelBasis) -> List[Tuple[int, ...]]:
    """Minimal-support vectors of the kernel lattice, primitive, first nonzero positive."""
    n = len(K.cells)
    # The lattice is the set of integer vectors orthogonal to its own orthogonal lattice.
    dual = left_kernel(as_int_matrix(K.vectors, n).T.copy())
    max_size = len(dual) + 1
    found = []
    for size in range(2, min(max_size, n) + 1):
        for subset in combinations(range(n), size):
            A = as_int_matrix([[d[x] for d in dual] for x in subset], len(dual))
            local = left_kernel(A) if dual else [tuple(1 if i == j else 0 for j in range(size)) for i in range(size)]
            if len(local) != 1 or any(v == 0 for v in local[0]):
                continue
            vector = [0] * n
            for x, v in zip(subset, local[0]):
                vector[x] = v
            found.append(primitive(vector))
    return found


def binomial_basis(K: KernelBasis) -> List[Tuple[int, ...]]:
    """Lattice basis used to write the binomials.

    Prefers circuits with low degree and compact support in cell order; falls
    back to the canonical HNF rows when the chosen circuits do not span the
    saturated lattice or the cell count exceeds the circuit search budget.
    """
    n = len(K.cells)
    if not K.vectors:
        return []
    if n > config_manager.get_budget('circuit_search_max_cells'):
        logger.debug(f"{n} cells exceed the circuit search budget, using HNF rows")
        return list(K.vectors)

    def key(v):
        support = [x for x, e in enumerate(v) if e != 0]
        degree = sum(e for e in v if e > 0)
        return degree, support[-1] - support[0], tuple(support), v

    chosen: List[Tuple[int, ...]] = []
    for circuit in sorted(set(_circuits(K)), key=key):
        candidate = chosen + [circuit]
        if rank(as_int_matrix(candidate, n)) == len(candidate):
            chosen = candidate
        if len(chosen) == K.rank:
            break

    if len(chosen) == K.rank and same_lattice(chosen, K.vectors, n):
        return chosen
    logger.debug("Circuits do not span the kernel lattice, using HNF rows")
    return list(K.vectors)


def kernel_binomials(K: KernelBasis) -> List[BinomialEquation]:
    """One binomial per basis vector: prod q^{k+} - prod q^{k-} = 0."""
    equations = []
    for vector in binomial_basis(K):
        vector = primitive(vector)
        plus = tuple((cell, e) for cell, e in zip(K.cells, vector) if e > 0)
        minus = tuple((cell, -e) for cell, e in zip(K.cells, vector) if e < 0)
        equation = BinomialEquation(plus=plus, minus=minus)
        if K.zero_sum and not equation.is_homogeneous:
            logger.warning(f"Binomial {format_binomial(equation)} is not homogeneous")
        equations.append(equation)
    return equations


def _format_monomial(terms) -> str:
    if not terms:
        return '1'
    return '*'.join(f'q_{cell.name}' + (f'^{e}' if e > 1 else '') for cell, e in terms)


def format_binomial(equation: BinomialEquation) -> str:
    return f'{_format_monomial(equation.plus)} - {_format_monomial(equation.minus)}'


def satisfies_binomials(q: Union[Mapping[CellIndex, float], Sequence[float]],
                        eqs: Sequence[BinomialEquation],
                        tol: float,
                        cells: Optional[Sequence[CellIndex]] = None) -> bool:
    """True iff |prod q^plus - prod q^minus| <= tol for every equation.

    ``q`` is either a cell mapping or a sequence aligned with ``cells``.
    Fractions or ints are evaluated exactly.
    """
    if not isinstance(q, Mapping):
        if cells is None:
            raise ValueError("cells are required when q is a sequence")
        if len(q) != len(cells):
            raise ValueError(f"q has {len(q)} entries for {len(cells)} cells")
        q: Dict[CellIndex, float] = dict(zip(cells, q))

    for equation in eqs:
        left = prod(q[cell] ** e for cell, e in equation.plus)
        right = prod(q[cell] ** e for cell, e in equation.minus)
        if abs(left - right) > tol:
            return False
    return True
