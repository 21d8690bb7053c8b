"""
Immutable domain objects for the hotplug coded caching toolkit.

Everything here is frozen after construction: designs, arrays and scheme
instances are shared read-only between concurrent certification workers.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.combinatorics import Subset, render_subset

STAR: Literal["*"] = "*"


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ---------------------------------------------------------------------------
# designs
# ---------------------------------------------------------------------------

class TDesign(FrozenModel):
    """A validated t-(v,k,λ) design; points are 1..v, blocks sorted lexicographically."""
    v: int
    k: int
    t: int
    lam: int = Field(alias="lambda")
    blocks: Tuple[Subset, ...]
    name: Optional[str] = None

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @property
    def b(self) -> int:
        return len(self.blocks)

    def describe(self) -> str:
        return f"{self.t}-({self.v},{self.k},{self.lam})"


class DesignParams(FrozenModel):
    lambda_s: Dict[int, int]
    lambda_s_t: Dict[int, int]


# ---------------------------------------------------------------------------
# placement delivery arrays
# ---------------------------------------------------------------------------

class Label(FrozenModel):
    """
    Multicast label (G, copy)_occ.

    `union` is Y ∪ (U∩[t]), `copy` the row copy index i, `tail` the column
    part U∖[t] and `occ` its 1-based lexicographic rank, which equals the
    left-to-right occurrence number of (G, copy) in the array.
    """
    union: Subset
    copy_index: int
    tail: Subset = ()
    occ: int = 1

    def sort_key(self) -> Tuple:
        return (len(self.union), self.union, self.copy_index, self.occ)

    def render(self) -> str:
        return f"({render_subset(self.union)},{self.copy_index})_{self.occ}"


Cell = Union[Literal["*"], Label, int]


class PdaParams(FrozenModel):
    K: int
    F: int
    Z: int
    S: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.K, self.F, self.Z, self.S)


class Pda(FrozenModel):
    """F×K grid of stars and labels with opaque row/column identifiers."""
    rows: Tuple[Any, ...]
    cols: Tuple[Any, ...]
    entries: Tuple[Tuple[Cell, ...], ...]

    @property
    def F(self) -> int:
        return len(self.entries)

    @property
    def K(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def is_star(self, row: int, col: int) -> bool:
        return self.entries[row][col] == STAR


class StarArray(FrozenModel):
    """Star/null array: rows are blocks, columns are caches (P_c) or r-subsets (P)."""
    rows: Tuple[Subset, ...]
    cols: Tuple[Subset, ...]
    cells: np.ndarray

    def column_star_counts(self) -> List[int]:
        return [int(c) for c in self.cells.sum(axis=0)]

    def star(self, block: Subset, col: Subset) -> bool:
        return bool(self.cells[self.rows.index(block), self.cols.index(col)])


# ---------------------------------------------------------------------------
# generalized hotplug PDA
# ---------------------------------------------------------------------------

AMap = Dict[Tuple[int, int], int]


class BjParams(FrozenModel):
    j: int
    K: int
    F: int
    Z: int
    S: int


class HppdaParams(FrozenModel):
    C: int
    C_online: int
    r: int
    F: int
    Z_c: int
    Z: int
    per_j: Dict[int, BjParams]


class GeneralizedHpPda(FrozenModel):
    design: TDesign
    r: int
    a: AMap
    Pc: StarArray
    P: StarArray
    B: Dict[int, Pda]
    params: HppdaParams

    def a_for(self, j: int) -> Dict[int, int]:
        return {s: v for (s, jj), v in self.a.items() if jj == j}


# ---------------------------------------------------------------------------
# MDS code
# ---------------------------------------------------------------------------

class FieldSpec(FrozenModel):
    m: int
    poly: int

    @property
    def order(self) -> int:
        return 1 << self.m


class MdsCode(FrozenModel):
    """[n, d] code; codeword = generatorᵀ · message with generator of shape d×n."""
    n: int
    d: int
    field: FieldSpec
    generator: Any  # galois FieldArray, shape (d, n)
    systematic: bool = True


class SplitFile(FrozenModel):
    """A file cut into d rows of field symbols, plus what is needed to undo the padding."""
    symbols: Any  # galois FieldArray, shape (d, L)
    length: int
    pad_bits: int


# ---------------------------------------------------------------------------
# scheme
# ---------------------------------------------------------------------------

class Library(FrozenModel):
    files: Tuple[bytes, ...]
    seed: Optional[int] = None
    source: str = "generated"

    @property
    def N(self) -> int:
        return len(self.files)


class SchemeInstance(FrozenModel):
    hppda: GeneralizedHpPda
    code: MdsCode
    library: Library
    split: Tuple[SplitFile, ...]
    # coded[n-1] has shape (b, L); row f is W^c_{n, blocks[f]}
    coded: Tuple[Any, ...]
    cache_contents: Dict[int, Dict[Tuple[int, Subset], Any]]

    @property
    def memory_ratio_measured(self) -> Tuple[int, int]:
        per_cache = len(next(iter(self.cache_contents.values()))) // max(self.library.N, 1)
        return per_cache, self.code.d


class DemandVector(FrozenModel):
    online: Subset
    demands: Dict[Subset, int]


class Participant(FrozenModel):
    user: Subset
    block: Subset


class Transmission(FrozenModel):
    index: int
    j: int
    label: Label
    participants: Tuple[Participant, ...]
    payload: Any

    def users(self) -> List[Subset]:
        return [p.user for p in self.participants]


class UserTranscript(FrozenModel):
    user: Subset
    j: int
    demand: int
    cached_blocks: Tuple[Subset, ...] = ()
    delivered_blocks: Tuple[Subset, ...] = ()
    transmissions: Tuple[int, ...] = ()
    decoded: bool = False
    matches_library: bool = False
    payload: Optional[bytes] = None


class DeliverySession(FrozenModel):
    online: Subset
    demand: DemandVector
    transmissions: Tuple[Transmission, ...]
    per_user: Dict[Subset, UserTranscript] = Field(default_factory=dict)
    stranded: Tuple[Subset, ...] = ()
    seed: Optional[int] = None
