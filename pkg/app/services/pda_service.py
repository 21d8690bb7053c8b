"""
PDA Service: verification of placement delivery arrays and multicast grouping.

A PDA is checked cell by cell in row-major order, so every violation report
carries the first witnessing cell (or cell pair) that scan meets.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from app.models.models import STAR, Cell, Label, Pda, PdaParams
from app.schemas.schemas import PdaReport

logger = logging.getLogger(__name__)

Grid = Sequence[Sequence[Cell]]


class PdaError(ValueError):
    """Malformed array or a PDA that fails its defining conditions."""


def _label_key(label: Union[Label, int]) -> Tuple:
    if isinstance(label, Label):
        return (1,) + label.sort_key()
    return (0, label)


def render_cell(cell: Cell) -> str:
    if cell == STAR:
        return STAR
    if isinstance(cell, Label):
        return cell.render()
    return str(cell)


class PdaService:
    """Checks the (K,F,Z,S) conditions and extracts multicast groups."""

    @staticmethod
    def verify_pda(candidate: Union[Pda, Grid], declared_labels: Optional[int] = None) -> PdaReport:
        """
        Verify C1 (equal star count per column), C2 (declared label count, when
        given) and C3 (equal labels: distinct rows and columns, stars on the
        opposite corners). Returns the parameters on success.
        """
        grid = candidate.entries if isinstance(candidate, Pda) else candidate
        if not grid or not grid[0]:
            return PdaReport(valid=False, condition="ragged", violation="array is empty")
        width = len(grid[0])
        for row_idx, row in enumerate(grid):
            if len(row) != width:
                return PdaReport(
                    valid=False,
                    condition="ragged",
                    violation=f"row {row_idx} has {len(row)} cells, row 0 has {width}",
                    cells=[(row_idx, 0)],
                )

        F, K = len(grid), width
        star_counts = [sum(1 for f in range(F) if grid[f][k] == STAR) for k in range(K)]
        Z = star_counts[0]
        for k, count in enumerate(star_counts):
            if count != Z:
                return PdaReport(
                    valid=False,
                    condition="C1",
                    violation=f"column {k} has {count} stars, column 0 has {Z}",
                    cells=[(0, 0), (0, k)],
                )

        seen: Dict[Any, List[Tuple[int, int]]] = {}
        for f in range(F):
            for k in range(K):
                cell = grid[f][k]
                if cell == STAR:
                    continue
                for (f2, k2) in seen.get(cell, []):
                    if f2 == f or k2 == k:
                        return PdaReport(
                            valid=False,
                            condition="C3a",
                            violation=f"label {render_cell(cell)} repeats in a row or column at ({f2},{k2}) and ({f},{k})",
                            cells=[(f2, k2), (f, k)],
                        )
                    if grid[f2][k] != STAR or grid[f][k2] != STAR:
                        return PdaReport(
                            valid=False,
                            condition="C3b",
                            violation=f"label {render_cell(cell)} at ({f2},{k2}) and ({f},{k}) lacks stars at ({f2},{k}) and ({f},{k2})",
                            cells=[(f2, k2), (f, k)],
                        )
                seen.setdefault(cell, []).append((f, k))

        S = len(seen)
        if declared_labels is not None and declared_labels != S:
            return PdaReport(
                valid=False,
                condition="C2",
                violation=f"{S} distinct labels present, {declared_labels} declared",
            )
        params = PdaParams(K=K, F=F, Z=Z, S=S)
        logger.debug(f"Verified PDA with (K,F,Z,S)={params.as_tuple()}")
        return PdaReport(valid=True, params=params)

    @staticmethod
    def require_pda(candidate: Union[Pda, Grid], declared_labels: Optional[int] = None) -> PdaParams:
        report = PdaService.verify_pda(candidate, declared_labels)
        if not report.valid:
            raise PdaError(f"{report.condition}: {report.violation}")
        return report.params

    @staticmethod
    def pda_multicast_groups(p: Union[Pda, Grid]) -> Dict[Any, List[Tuple[int, int]]]:
        """Label → cells carrying it, in row-major order; labels sorted."""
        grid = p.entries if isinstance(p, Pda) else p
        groups: Dict[Any, List[Tuple[int, int]]] = {}
        for f, row in enumerate(grid):
            for k, cell in enumerate(row):
                if cell != STAR:
                    groups.setdefault(cell, []).append((f, k))
        return {label: groups[label] for label in sorted(groups, key=_label_key)}

    @staticmethod
    def from_grid(grid: Grid, rows: Optional[Sequence[Any]] = None, cols: Optional[Sequence[Any]] = None) -> Pda:
        rows = tuple(rows) if rows is not None else tuple(range(1, len(grid) + 1))
        cols = tuple(cols) if cols is not None else tuple(range(1, len(grid[0]) + 1 if grid else 1))
        return Pda(rows=rows, cols=cols, entries=tuple(tuple(r) for r in grid))

    @staticmethod
    def dump_pda(p: Union[Pda, Grid]) -> str:
        """One line per row, `|`-separated cells, `*` for a star."""
        grid = p.entries if isinstance(p, Pda) else p
        return "\n".join("|".join(render_cell(c) for c in row) for row in grid)

    @staticmethod
    def parse_pda_text(text: str) -> List[List[Cell]]:
        """Inverse of dump_pda for integer-labelled arrays."""
        grid: List[List[Cell]] = []
        for line in text.strip().splitlines():
            cells: List[Cell] = []
            for token in line.split("|"):
                token = token.strip()
                if token == STAR:
                    cells.append(STAR)
                    continue
                try:
                    cells.append(int(token))
                except ValueError as exc:
                    raise PdaError(f"cell {token!r} is neither `*` nor an integer label") from exc
            grid.append(cells)
        return grid

    # -- small worked arrays ---------------------------------------------

    @staticmethod
    def toy_arrays() -> Dict[int, List[List[Cell]]]:
        """
        The two delivery arrays of the five-cache, three-online, r=2 toy
        instance (identity placement over five caches).
        """
        s = STAR
        return {
            1: [
                [s, s, 1, 2, 3, 4],
                [1, 2, s, s, 5, 6],
                [3, 4, 5, 6, s, s],
            ],
            2: [
                [s, s, 1],
                [s, 1, s],
                [1, s, s],
            ],
        }
