import io
import csv
import json
from pathlib import Path
from typing import IO, Iterable, List, Set, Union
import jsonschema
from ..models.table import CellIndex, ContingencyTable
from ..utils.errors import TableFormatError
from ..utils.logger import get_logger

logger = get_logger('tables')

TABLE_SCHEMA = {
    'type': 'object',
    'required': ['rows', 'cols', 'counts', 'structural_zeros'],
    'properties': {
        'rows': {'type': 'array', 'items': {'type': 'string'}, 'minItems': 1},
        'cols': {'type': 'array', 'items': {'type': 'string'}, 'minItems': 1},
        'counts': {
            'type': 'array',
            'items': {'type': 'array', 'items': {'type': ['integer', 'null']}},
        },
        'structural_zeros': {
            'type': 'array',
            'items': {
                'type': 'array',
                'items': {'type': 'integer', 'minimum': 1},
                'minItems': 2,
                'maxItems': 2,
            },
        },
    },
}


def _read_text(source: Union[IO, bytes, str]) -> str:
    if isinstance(source, bytes):
        return source.decode('utf-8')
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode('utf-8') if isinstance(data, bytes) else data


def parse_table_document(doc) -> ContingencyTable:
    """Build a table from an already-decoded JSON document."""
    try:
        jsonschema.validate(instance=doc, schema=TABLE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise TableFormatError(f"Malformed table document: {e.message}") from e

    rows, cols, grid = doc['rows'], doc['cols'], doc['counts']
    R, C = len(rows), len(cols)
    if len(grid) != R or any(len(line) != C for line in grid):
        raise TableFormatError(f"counts must be a {R}x{C} grid")

    zeros: Set[CellIndex] = set()
    for r, c in doc['structural_zeros']:
        cell = CellIndex(r, c)
        if not (r <= R and c <= C):
            raise TableFormatError(f"Structural zero ({r},{c}) outside the {R}x{C} grid")
        if cell in zeros:
            raise TableFormatError(f"Duplicate cell ({r},{c}) in structural_zeros")
        zeros.add(cell)

    counts = {}
    for i, line in enumerate(grid, start=1):
        for j, value in enumerate(line, start=1):
            cell = CellIndex(i, j)
            if value is None:
                if cell not in zeros:
                    raise TableFormatError(f"Null count at ({i},{j}) which is not a declared structural zero")
                continue
            if cell in zeros:
                raise TableFormatError(f"Count present at structural zero ({i},{j})")
            counts[cell] = value

    table = ContingencyTable(row_labels=rows, col_labels=cols, counts=counts, structural_zeros=zeros)
    logger.info(f"Loaded {R}x{C} table, N={table.N}, {len(free_cells(table))} free cells")
    return table


def load_table(source: Union[IO, bytes, str]) -> ContingencyTable:
    """Load a table from a stream (or bytes) in the JSON table format."""
    try:
        doc = json.loads(_read_text(source))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise TableFormatError(f"Table is not valid JSON: {e}") from e
    return parse_table_document(doc)


def load_csv_table(source: Union[IO, bytes, str]) -> ContingencyTable:
    """CSV with a header of column labels; first column holds row labels, '*' marks a structural zero."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    lines = [line for line in reader if any(field.strip() for field in line)]
    if len(lines) < 2:
        raise TableFormatError("CSV table needs a header and at least one row")

    header = [field.strip() for field in lines[0]]
    cols = header[1:]
    rows, grid, zeros = [], [], []
    for i, line in enumerate(lines[1:], start=1):
        if len(line) != len(header):
            raise TableFormatError(f"CSV row {i} has {len(line)} fields, expected {len(header)}")
        rows.append(line[0].strip())
        values = []
        for j, field in enumerate(line[1:], start=1):
            field = field.strip()
            if field == '*':
                values.append(None)
                zeros.append([i, j])
                continue
            try:
                values.append(int(field))
            except ValueError as e:
                raise TableFormatError(f"CSV cell ({i},{j}) is not an integer: {field!r}") from e
        grid.append(values)

    return parse_table_document({'rows': rows, 'cols': cols, 'counts': grid, 'structural_zeros': zeros})


def load_table_file(path: Union[str, Path]) -> ContingencyTable:
    path = Path(path)
    try:
        with open(path, 'rb') as f:
            if path.suffix.lower() == '.csv':
                return load_csv_table(f)
            return load_table(f)
    except OSError as e:
        raise TableFormatError(f"Cannot read table {path}: {e}") from e


def table_document(table: ContingencyTable) -> dict:
    grid = [
        [None if CellIndex(i, j) in table.structural_zeros else table.count(CellIndex(i, j))
         for j in range(1, table.n_cols + 1)]
        for i in range(1, table.n_rows + 1)
    ]
    return {
        'rows': list(table.row_labels),
        'cols': list(table.col_labels),
        'counts': grid,
        'structural_zeros': [cell.as_list() for cell in sorted(table.structural_zeros)],
    }


def dump_table(table: ContingencyTable) -> str:
    """Serialise to the JSON table format."""
    return json.dumps(table_document(table))


def free_cells(table: ContingencyTable) -> List[CellIndex]:
    """The free cell set A in row-major order."""
    return [
        CellIndex(i, j)
        for i in range(1, table.n_rows + 1)
        for j in range(1, table.n_cols + 1)
        if CellIndex(i, j) not in table.structural_zeros
    ]


def positive_cells(table: ContingencyTable) -> Set[CellIndex]:
    return {cell for cell, n in table.counts.items() if n > 0}


def column_major_permutation(table: ContingencyTable) -> List[int]:
    """Indices into free_cells(table) listing the free cells column by column."""
    cells = free_cells(table)
    position = {cell: k for k, cell in enumerate(cells)}
    return [position[cell] for cell in sorted(cells, key=lambda c: (c.col, c.row))]


def restrict_counts(table: ContingencyTable, cells: Iterable[CellIndex]) -> ContingencyTable:
    """Same layout, counts outside ``cells`` set to zero."""
    keep = set(cells)
    counts = {cell: (n if cell in keep else 0) for cell, n in table.counts.items()}
    return ContingencyTable(row_labels=table.row_labels, col_labels=table.col_labels,
                            counts=counts, structural_zeros=table.structural_zeros)


def imaginary_table(table: ContingencyTable, count: int = 1) -> ContingencyTable:
    """Same layout with ``count`` observations in every free cell."""
    counts = {cell: count for cell in free_cells(table)}
    return ContingencyTable(row_labels=table.row_labels, col_labels=table.col_labels,
                            counts=counts, structural_zeros=table.structural_zeros)
