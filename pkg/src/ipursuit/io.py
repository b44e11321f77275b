"""File formats: CSV datasets (points as rows), CSV tables, JSON records.

Conventions: comma separator, '.' decimal, LF line endings, UTF-8. JSON is
written with sorted keys and a fixed indent so identical records produce
identical bytes. Floats in CSV use repr(), the shortest round-tripping form.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .datagen import DataMatrix, SubspaceEnsemble
from .errors import EmptyFile, ParseError, ZeroRow


def _cell_to_float(cell: str, line: int):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(line, f"non-numeric cell {cell!r}") from None


def load_csv(path) -> DataMatrix:
    """Load a dataset CSV: one point per row, all-numeric cells.

    If no cell of the first row parses as a number it is taken as a header;
    a header whose last field is "label" marks the final column as integer
    cluster labels.
    Points are stored as columns and each is L2-normalized on load. Raises
    ParseError (with the 1-based file line), EmptyFile, or ZeroRow.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        raw = list(csv.reader(fh))
    rows = []
    header = None
    has_label = False
    width = None
    for line, cells in enumerate(raw, start=1):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        cells = [c.strip() for c in cells]
        if header is None and line == 1:
            # a header row has no numeric cells; a mix like "1,abc" is
            # malformed data and falls through to the cell parser below
            numeric_cells = 0
            for c in cells:
                try:
                    float(c)
                    numeric_cells += 1
                except ValueError:
                    pass
            if numeric_cells == 0:
                header = cells
                has_label = header[-1].lower() == "label"
                width = len(header)
                continue
        if width is None:
            width = len(cells)
        if len(cells) != width:
            raise ParseError(line, f"expected {width} cells, got {len(cells)}")
        values = [_cell_to_float(c, line) for c in cells]
        if has_label:
            lab = values[-1]
            if abs(lab - round(lab)) > 1e-9:
                raise ParseError(line, f"label {cells[-1]!r} is not an integer")
            rows.append((line, values[:-1], int(round(lab))))
        else:
            rows.append((line, values, None))
    if not rows:
        raise EmptyFile(f"{path} contains no data rows")
    points = np.array([r[1] for r in rows], dtype=float).T
    norms = np.linalg.norm(points, axis=0)
    for j, (line, _, _) in enumerate(rows):
        if norms[j] < 1e-12:
            raise ZeroRow(line)
    points = points / norms
    labels = None
    if has_label:
        labels = np.array([r[2] for r in rows], dtype=int)
    return DataMatrix(points, labels)


def save_labels_csv(path, labels) -> None:
    """One integer label per line, input order, LF endings."""
    labels = np.asarray(labels, dtype=int)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for lab in labels:
            fh.write(f"{int(lab)}\n")


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def save_table_csv(path, fieldnames, rows) -> None:
    """Write dict rows under a single header row; floats use repr()."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row[name]) for name in fieldnames])


def _plain(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def save_json(path, record: dict) -> None:
    """Stable-key-order JSON; identical records give identical bytes."""
    text = json.dumps(_plain(record), sort_keys=True, indent=2, ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text + "\n")


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_ensemble_json(path, ens: SubspaceEnsemble) -> None:
    """Serialize the subspace bases as nested lists (lossless via repr floats)."""
    record = {
        "intersection": ens.intersection.tolist(),
        "innovations": [V.tolist() for V in ens.innovations],
        "ambient_dim": ens.ambient_dim,
    }
    save_json(path, record)


def load_ensemble_json(path) -> SubspaceEnsemble:
    data = load_json(path)
    M = int(data["ambient_dim"])
    U = np.asarray(data["intersection"], dtype=float).reshape(M, -1)
    innovations = tuple(
        np.asarray(V, dtype=float).reshape(M, -1) for V in data["innovations"]
    )
    ens = SubspaceEnsemble(U, innovations)
    ens.validate(tol=1e-8)
    return ens
