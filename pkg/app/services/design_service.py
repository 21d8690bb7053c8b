"""
Design Service: validation, intersection parameters and file ingestion for t-designs.

Every design the rest of the toolkit touches goes through `validate_design`, so
the λ identities used by the array constructions can be relied on downstream.
"""

import logging
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.core.catalog import CATALOG_BLOCKS, CATALOG_PARAMS, CATALOG_PREFIX, COMPLETE_PREFIX, CatalogDesign, catalog_names
from app.core.combinatorics import Subset, binom, exact_div, k_subsets, points
from app.models.models import DesignParams, TDesign
from app.schemas.schemas import DesignReport

logger = logging.getLogger(__name__)


class DesignError(ValueError):
    """Invalid design claim or out-of-range design parameter."""


class DesignService:
    """Builds, checks and queries t-(v,k,λ) designs."""

    @staticmethod
    def validate_design(
        v: int,
        blocks: Sequence[Iterable[int]],
        t: int,
        lam: int,
        k: Optional[int] = None,
        name: Optional[str] = None,
    ) -> DesignReport:
        """
        Check a candidate block list against the t-(v,k,λ) axioms.

        k defaults to the size of the first block. Blocks are sorted internally
        and the returned design stores them in lexicographic order. On failure
        the report names the first violation found (block checks first, then
        t-subsets in lexicographic order).
        """
        if not blocks:
            raise DesignError("block list is empty")
        if t < 1:
            raise DesignError(f"claimed strength t={t} must be >= 1")

        raw = [list(b) for b in blocks]
        k = len(raw[0]) if k is None else k

        if not v > k >= t:
            return DesignReport(valid=False, violation=f"parameter order violated: need v > k >= t, got v={v} k={k} t={t}")

        normalized: List[Subset] = []
        for idx, block in enumerate(raw):
            if len(set(block)) != len(block):
                return DesignReport(valid=False, violation=f"block #{idx + 1} {block} has duplicate points", block=tuple(block))
            if len(block) != k:
                return DesignReport(valid=False, violation=f"block #{idx + 1} {block} has size {len(block)} != k={k}", block=tuple(block))
            if any(p < 1 or p > v for p in block):
                return DesignReport(valid=False, violation=f"block #{idx + 1} {block} has points outside 1..{v}", block=tuple(block))
            normalized.append(tuple(sorted(block)))

        normalized.sort()
        for prev, cur in zip(normalized, normalized[1:]):
            if prev == cur:
                return DesignReport(valid=False, violation=f"block {cur} is repeated", block=cur)

        replication: Counter = Counter()
        for block in normalized:
            replication.update(combinations(block, t))
        for subset in k_subsets(points(v), t):
            count = replication.get(subset, 0)
            if count != lam:
                return DesignReport(
                    valid=False,
                    violation=f"{t}-subset {subset} lies in {count} blocks, expected {lam}",
                    t_subset=subset,
                    replication=count,
                )

        try:
            expected_b = exact_div(lam * binom(v, t), binom(k, t))
        except ValueError as exc:
            return DesignReport(valid=False, violation=f"b = λ·C(v,t)/C(k,t) is not integral: {exc}")
        if expected_b != len(normalized):
            return DesignReport(valid=False, violation=f"b={len(normalized)} but λ·C(v,t)/C(k,t)={expected_b}")

        design = TDesign(v=v, k=k, t=t, lam=lam, blocks=tuple(normalized), name=name)
        logger.debug(f"Validated {design.describe()} design with b={design.b}")
        return DesignReport(valid=True, design=design)

    @staticmethod
    def require_design(v: int, blocks: Sequence[Iterable[int]], t: int, lam: int, k: Optional[int] = None, name: Optional[str] = None) -> TDesign:
        report = DesignService.validate_design(v, blocks, t, lam, k=k, name=name)
        if not report.valid:
            raise DesignError(report.violation)
        return report.design

    # -- intersection parameters -------------------------------------------

    @staticmethod
    def lambda_s(d: TDesign, s: int) -> int:
        """λ_s = λ·C(v−s,t−s)/C(k−s,t−s): blocks through any fixed s-set."""
        if not 0 <= s <= d.t:
            raise DesignError(f"s={s} outside [0, {d.t}]")
        try:
            return exact_div(d.lam * binom(d.v - s, d.t - s), binom(d.k - s, d.t - s))
        except ValueError as exc:
            raise DesignError(f"λ_{s} not integral for {d.describe()}: {exc}") from exc

    @staticmethod
    def lambda_i_j(d: TDesign, i: int, j: int) -> int:
        """Blocks containing a fixed i-set and avoiding a disjoint fixed j-set (i + j <= t)."""
        if i < 0 or j < 0 or i + j > d.t:
            raise DesignError(f"need i + j <= t, got i={i} j={j} t={d.t}")
        try:
            return exact_div(d.lam * binom(d.v - i - j, d.k - i), binom(d.v - d.t, d.k - d.t))
        except ValueError as exc:
            raise DesignError(f"λ_{i}^{i + j} not integral for {d.describe()}: {exc}") from exc

    @staticmethod
    def lambda_s_t(d: TDesign, s: int) -> int:
        """λ_s^t: blocks meeting a fixed t-set T exactly in a given s-subset."""
        if not 1 <= s <= d.t:
            raise DesignError(f"s={s} outside [1, {d.t}]")
        return DesignService.lambda_i_j(d, s, d.t - s)

    @staticmethod
    def design_params(d: TDesign) -> DesignParams:
        return DesignParams(
            lambda_s={s: DesignService.lambda_s(d, s) for s in range(0, d.t + 1)},
            lambda_s_t={s: DesignService.lambda_s_t(d, s) for s in range(1, d.t + 1)},
        )

    @staticmethod
    def lambdas(d: TDesign) -> Dict[int, int]:
        return {s: DesignService.lambda_s(d, s) for s in range(0, d.t + 1)}

    # -- brute-force oracles -----------------------------------------------

    @staticmethod
    def incidence(d: TDesign) -> np.ndarray:
        """b×v 0/1 incidence matrix (row = block, column = point)."""
        m = np.zeros((d.b, d.v), dtype=np.int64)
        for row, block in enumerate(d.blocks):
            m[row, [p - 1 for p in block]] = 1
        return m

    @staticmethod
    def count_blocks(d: TDesign, contain: Iterable[int] = (), avoid: Iterable[int] = ()) -> int:
        contain, avoid = set(contain), set(avoid)
        return sum(1 for b in d.blocks if contain <= set(b) and not (avoid & set(b)))

    @staticmethod
    def point_count_identity(d: TDesign, j: int) -> Dict[str, int]:
        """
        Both sides of Σ_i (−1)^{i+1} C(j−1,i−1) λ_i = Σ_s λ_s^t C(t−j,s−1).

        Each side counts blocks through a fixed point x of a j-set J ⊆ T that
        miss J∖{x}; equality makes Y_j constant when a_{s,j} = λ_s^t.
        """
        if not 1 <= j <= d.t:
            raise DesignError(f"j={j} outside [1, {d.t}]")
        lhs = sum((-1) ** (i + 1) * binom(j - 1, i - 1) * DesignService.lambda_s(d, i) for i in range(1, j + 1))
        rhs = sum(DesignService.lambda_s_t(d, s) * binom(d.t - j, s - 1) for s in range(1, d.t - j + 2))
        return {"lhs": lhs, "rhs": rhs}

    # -- selectors ---------------------------------------------------------

    @staticmethod
    def blocks_for(d: TDesign, H: Iterable[int], I: Iterable[int]) -> List[Subset]:
        """A^I_H: blocks containing all of H and none of I∖H, lexicographic."""
        H, I = set(H), set(I)
        if len(I) != d.t:
            raise DesignError(f"|I|={len(I)} but the design has t={d.t}")
        if not H <= I:
            raise DesignError(f"H={sorted(H)} is not a subset of I={sorted(I)}")
        if not 1 <= len(H) < d.t:
            raise DesignError(f"need 1 <= |H| < t, got |H|={len(H)}")
        rest = I - H
        return [b for b in d.blocks if H <= set(b) and not (rest & set(b))]

    # -- generators and file I/O -------------------------------------------

    @staticmethod
    def complete_design(v: int, k: int, t: int) -> TDesign:
        """All k-subsets of [v]; every t-set lies in C(v−t,k−t) of them."""
        if not (v > k >= t >= 1):
            raise DesignError(f"complete design needs v > k >= t >= 1, got v={v} k={k} t={t}")
        blocks = tuple(k_subsets(points(v), k))
        return TDesign(v=v, k=k, t=t, lam=binom(v - t, k - t), blocks=blocks, name=f"complete:{v},{k},{t}")

    @staticmethod
    def parse_design_text(text: str, name: Optional[str] = None) -> TDesign:
        """
        Parse the design file format: header `v k t lambda`, then one block per
        line as ascending 1-based integers; `#` lines are comments.
        """
        header = None
        blocks: List[List[int]] = []
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values = [int(tok) for tok in line.split()]
            except ValueError as exc:
                raise DesignError(f"line {lineno}: not an integer list: {line!r}") from exc
            if header is None:
                if len(values) != 4:
                    raise DesignError(f"line {lineno}: header must be `v k t lambda`")
                header = values
                continue
            if any(p == 0 for p in values):
                raise DesignError(f"line {lineno}: point 0 found, design files are 1-based")
            if values != sorted(values):
                raise DesignError(f"line {lineno}: block points must be ascending")
            blocks.append(values)
        if header is None:
            raise DesignError("design file has no header line")
        v, k, t, lam = header
        return DesignService.require_design(v, blocks, t, lam, k=k, name=name)

    @staticmethod
    def load_design(path: Path) -> TDesign:
        path = Path(path)
        logger.info(f"Loading design file {path}")
        return DesignService.parse_design_text(path.read_text(encoding="utf-8"), name=path.stem)

    @staticmethod
    def dump_design_text(d: TDesign) -> str:
        lines = [f"# {d.describe()} design, b={d.b}", f"{d.v} {d.k} {d.t} {d.lam}"]
        lines.extend(" ".join(str(p) for p in block) for block in d.blocks)
        return "\n".join(lines) + "\n"

    # -- catalog -----------------------------------------------------------

    @staticmethod
    def catalog_design(name: str) -> TDesign:
        try:
            entry = CatalogDesign(name)
        except ValueError as exc:
            raise DesignError(f"unknown catalog design {name!r}; known: {', '.join(catalog_names())}") from exc
        v, k, t, lam = CATALOG_PARAMS[entry]
        blocks = [[int(ch) for ch in block] for block in CATALOG_BLOCKS[entry]]
        return DesignService.require_design(v, blocks, t, lam, k=k, name=entry.value)

    @staticmethod
    def resolve_design(ref: str) -> TDesign:
        """
        Resolve a design reference: `catalog:NAME`, a bare catalog name,
        `complete:v,k,t`, or a path to a design file.
        """
        ref = ref.strip()
        if ref.startswith(COMPLETE_PREFIX):
            try:
                v, k, t = (int(x) for x in ref[len(COMPLETE_PREFIX):].split(","))
            except ValueError as exc:
                raise DesignError(f"expected complete:v,k,t, got {ref!r}") from exc
            return DesignService.complete_design(v, k, t)
        if ref.startswith(CATALOG_PREFIX):
            return DesignService.catalog_design(ref[len(CATALOG_PREFIX):])
        if ref in catalog_names():
            return DesignService.catalog_design(ref)
        path = Path(ref)
        if not path.is_file():
            raise DesignError(f"design reference {ref!r} is neither a catalog entry nor a readable file")
        return DesignService.load_design(path)
