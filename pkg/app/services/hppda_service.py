"""
HpPDA Service: builds the generalized hotplug PDA (P_c, P, {B_j}) of a t-design
and checks the star-match condition for online cache sets.

Canonical coordinates: B_j is built over the points of the design as if the
online set were [t]. For an actual online set I the bijection sending I
(ascending) onto [t] and the remaining points (ascending) onto [t+1..v] carries
B_j's rows and columns onto blocks (zeta) and users (tau).
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.combinatorics import Subset, alternating_union_count, binom, k_subsets, lex_rank, points
from app.core.config import settings
from app.models.models import (
    STAR,
    AMap,
    BjParams,
    GeneralizedHpPda,
    HppdaParams,
    Label,
    Pda,
    PdaParams,
    StarArray,
    TDesign,
)
from app.schemas.schemas import BjParamCheck, FeasibilityReport, HppdaMatchReport, StarMatch
from app.services.design_service import DesignService
from app.services.pda_service import PdaService

logger = logging.getLogger(__name__)

_A_ENTRY = re.compile(r"(\d+)\s*[.,:_]\s*(\d+)\s*=\s*(\d+)")


class HppdaError(ValueError):
    """Out-of-range access degree, online set or a_{s,j} map."""


def parse_a_map(text: str) -> AMap:
    """Parse `s.j=v` entries (separators `,` or `;`; `s,j=v` is accepted too)."""
    entries = _A_ENTRY.findall(text or "")
    if not entries and (text or "").strip():
        raise HppdaError(f"no `s.j=v` entries found in {text!r}")
    a: AMap = {}
    for s, j, value in entries:
        key = (int(s), int(j))
        if key in a:
            raise HppdaError(f"a_{{{s},{j}}} given twice")
        a[key] = int(value)
    return a


def format_a_map(a: AMap) -> str:
    """`a_s_j=v` entries ordered by j then s, `;`-separated (CSV-safe)."""
    return ";".join(f"a_{s}_{j}={a[(s, j)]}" for (s, j) in sorted(a, key=lambda key: (key[1], key[0])))


class HppdaService:
    """Array constructions and the online-set checks on them."""

    # -- parameter maps ----------------------------------------------------

    @staticmethod
    def a_keys(d: TDesign, r: int) -> List[Tuple[int, int]]:
        """Admissible (s, j) pairs: j in [r], s in [t-j], ordered by j then s."""
        return [(s, j) for j in range(1, r + 1) for s in range(1, d.t - j + 1)]

    @staticmethod
    def check_a(d: TDesign, r: int, a: AMap) -> AMap:
        """Bounds-check `a` and fill missing admissible keys with 0."""
        HppdaService._check_r(d, r)
        keys = HppdaService.a_keys(d, r)
        for (s, j), value in a.items():
            if (s, j) not in keys:
                raise HppdaError(f"a_{{{s},{j}}} is not admissible for t={d.t}, r={r} (need j in [r], s in [t-j])")
            bound = DesignService.lambda_s_t(d, s)
            if not 0 <= value <= bound:
                raise HppdaError(f"a_{{{s},{j}}}={value} outside [0, λ_{s}^t={bound}]")
        return {key: a.get(key, 0) for key in keys}

    @staticmethod
    def full_a_map(d: TDesign, r: int) -> AMap:
        """The map a_{s,j} = λ_s^t for every admissible (s, j)."""
        return {(s, j): DesignService.lambda_s_t(d, s) for (s, j) in HppdaService.a_keys(d, r)}

    @staticmethod
    def all_a_maps(d: TDesign, r: int, budget: Optional[int] = None) -> List[AMap]:
        """Every in-bounds nonzero a-map, in product order, capped at `budget`."""
        keys = HppdaService.a_keys(d, r)
        ranges = [range(0, DesignService.lambda_s_t(d, s) + 1) for (s, _) in keys]
        maps: List[AMap] = []
        for values in product(*ranges):
            if not any(values):
                continue
            maps.append(dict(zip(keys, values)))
            if budget is not None and len(maps) >= budget:
                logger.info(f"a-map enumeration capped at budget={budget}")
                break
        return maps

    @staticmethod
    def _check_r(d: TDesign, r: int) -> None:
        if not 1 <= r < d.v:
            raise HppdaError(f"access degree r={r} outside [1, v-1={d.v - 1}]")
        if r > d.t:
            raise HppdaError(f"access degree r={r} exceeds design strength t={d.t}; λ_r is not defined")

    # -- placement arrays --------------------------------------------------

    @staticmethod
    def build_Pc(d: TDesign) -> StarArray:
        """b×v: star at (A, i) iff i ∈ A."""
        cells = DesignService.incidence(d).astype(bool)
        return StarArray(rows=d.blocks, cols=tuple((i,) for i in points(d.v)), cells=cells)

    @staticmethod
    def build_P(d: TDesign, r: int) -> StarArray:
        """b×C(v,r): star at (A, U) iff U∩A ≠ ∅."""
        if not 1 <= r < d.v:
            raise HppdaError(f"access degree r={r} outside [1, v-1={d.v - 1}]")
        users = list(k_subsets(points(d.v), r))
        membership = np.zeros((d.v, len(users)), dtype=np.int64)
        for col, U in enumerate(users):
            membership[[p - 1 for p in U], col] = 1
        cells = (DesignService.incidence(d) @ membership) > 0
        return StarArray(rows=d.blocks, cols=tuple(users), cells=cells)

    # -- delivery arrays ---------------------------------------------------

    @staticmethod
    def row_index(d: TDesign, j: int, a_j: Dict[int, int]) -> List[Tuple[Subset, int]]:
        """ℛ_j: (Y, i) for s = 1..t-j, Y ∈ C([t], s) lexicographic, i = 1..a_{s,j}."""
        return [
            (Y, i)
            for s in range(1, d.t - j + 1)
            for Y in k_subsets(points(d.t), s)
            for i in range(1, a_j.get(s, 0) + 1)
        ]

    @staticmethod
    def col_index(d: TDesign, r: int, j: int) -> List[Subset]:
        """𝒞_j: r-subsets of [v] meeting [t] in exactly j points, lexicographic."""
        return [U for U in k_subsets(points(d.v), r) if sum(1 for p in U if p <= d.t) == j]

    @staticmethod
    def build_Bj(d: TDesign, r: int, j: int, a_j: Dict[int, int]) -> Pda:
        """
        Star at ((Y,i), U) iff Y meets U∩[t]; otherwise the label
        (Y ∪ (U∩[t]), i) whose occurrence index is the lexicographic rank of
        U∖[t] among the (r-j)-subsets of [t+1..v], plus one.
        """
        if not 1 <= j <= r:
            raise HppdaError(f"j={j} outside [1, r={r}]")
        for s, value in a_j.items():
            if not 1 <= s <= d.t - j:
                if value:
                    raise HppdaError(f"a_{{{s},{j}}} given but s must lie in [1, t-j={d.t - j}]")
                continue
            bound = DesignService.lambda_s_t(d, s)
            if not 0 <= value <= bound:
                raise HppdaError(f"a_{{{s},{j}}}={value} outside [0, λ_{s}^t={bound}]")

        rows = HppdaService.row_index(d, j, a_j)
        if not rows:
            raise HppdaError(f"ℛ_{j} is empty: every a_{{s,{j}}} is zero")
        cols = HppdaService.col_index(d, r, j)
        if not cols:
            raise HppdaError(f"𝒞_{j} is empty for v={d.v}, t={d.t}, r={r}")

        offline = list(range(d.t + 1, d.v + 1))
        entries = []
        for Y, i in rows:
            row = []
            for U in cols:
                J = tuple(p for p in U if p <= d.t)
                if set(J) & set(Y):
                    row.append(STAR)
                    continue
                W = tuple(p for p in U if p > d.t)
                row.append(Label(
                    union=tuple(sorted(set(Y) | set(J))),
                    copy_index=i,
                    tail=W,
                    occ=1 + lex_rank(W, offline),
                ))
            entries.append(tuple(row))
        return Pda(rows=tuple(rows), cols=tuple(cols), entries=tuple(entries))

    @staticmethod
    def occurrence_scan(p: Pda) -> List[List[Optional[Tuple[Subset, int, int]]]]:
        """
        Occurrence numbering by scanning each row left to right: the n-th cell
        of a row carrying set G with copy i gets index n. Stars map to None.
        """
        numbered = []
        for row in p.entries:
            counter: Dict[Tuple[Subset, int], int] = {}
            out: List[Optional[Tuple[Subset, int, int]]] = []
            for cell in row:
                if cell == STAR:
                    out.append(None)
                    continue
                key = (cell.union, cell.copy_index)
                counter[key] = counter.get(key, 0) + 1
                out.append((cell.union, cell.copy_index, counter[key]))
            numbered.append(out)
        return numbered

    # -- parameters --------------------------------------------------------

    @staticmethod
    def predicted_Bj(d: TDesign, r: int, j: int, a_j: Dict[int, int]) -> PdaParams:
        K = binom(d.t, j) * binom(d.v - d.t, r - j)
        F = sum(a_j.get(s, 0) * binom(d.t, s) for s in range(1, d.t - j + 1))
        Z = sum(a_j.get(s, 0) * (binom(d.t, s) - binom(d.t - j, s)) for s in range(1, d.t - j + 1))
        S = sum(a_j.get(s, 0) * binom(d.t, s + j) for s in range(1, d.t - j + 1)) * binom(d.v - d.t, r - j)
        return PdaParams(K=K, F=F, Z=Z, S=S)

    @staticmethod
    def build_hppda(d: TDesign, r: int, a: AMap) -> GeneralizedHpPda:
        a = HppdaService.check_a(d, r, a)
        lambdas = [DesignService.lambda_s(d, s) for s in range(0, d.t + 1)]
        B: Dict[int, Pda] = {}
        per_j: Dict[int, BjParams] = {}
        for j in range(1, r + 1):
            a_j = {s: v for (s, jj), v in a.items() if jj == j}
            predicted = HppdaService.predicted_Bj(d, r, j, a_j)
            per_j[j] = BjParams(j=j, **predicted.model_dump())
            if predicted.F > 0 and predicted.K > 0:
                B[j] = HppdaService.build_Bj(d, r, j, a_j)
            else:
                logger.info(f"B_{j} is empty for {d.describe()}, r={r}: users with {j} online caches get no transmissions")
        params = HppdaParams(
            C=d.v,
            C_online=d.t,
            r=r,
            F=d.b,
            Z_c=lambdas[1],
            Z=alternating_union_count(lambdas, r),
            per_j=per_j,
        )
        g = GeneralizedHpPda(
            design=d, r=r, a=a, Pc=HppdaService.build_Pc(d), P=HppdaService.build_P(d, r), B=B, params=params,
        )
        logger.info(
            f"Built generalized HpPDA on {d.describe()} r={r}: F={params.F} Z_c={params.Z_c} Z={params.Z} "
            f"S={sum(p.S for p in per_j.values())}"
        )
        return g

    @staticmethod
    def param_checks(g: GeneralizedHpPda) -> List[BjParamCheck]:
        """Measured (K,F,Z,S) of every built B_j against the closed forms."""
        checks = []
        for j in range(1, g.r + 1):
            pj = g.params.per_j[j]
            predicted = PdaParams(K=pj.K, F=pj.F, Z=pj.Z, S=pj.S)
            if j not in g.B:
                checks.append(BjParamCheck(j=j, predicted=predicted, match=predicted.F == 0 or predicted.K == 0))
                continue
            report = PdaService.verify_pda(g.B[j])
            checks.append(BjParamCheck(
                j=j, measured=report.params, predicted=predicted, match=report.valid and report.params == predicted,
            ))
        return checks

    @staticmethod
    def feasibility(g: GeneralizedHpPda) -> FeasibilityReport:
        return HppdaService.feasibility_for(g.design, g.r, g.a)

    @staticmethod
    def feasibility_for(d: TDesign, r: int, a: AMap) -> FeasibilityReport:
        """
        Y_j = Z_j + Σ_s a_{s,j} C(t-j, s) must not increase with j; j=1 is
        unconstrained. D = Y_r is the MDS dimension.
        """
        a = HppdaService.check_a(d, r, a)
        lambdas = [DesignService.lambda_s(d, s) for s in range(0, d.t + 1)]
        Z = {j: alternating_union_count(lambdas, j) for j in range(1, r + 1)}
        Y = {
            j: Z[j] + sum(a.get((s, j), 0) * binom(d.t - j, s) for s in range(1, d.t - j + 1))
            for j in range(1, r + 1)
        }
        violation = None
        for j in range(2, r + 1):
            if Y[j] > Y[j - 1]:
                violation = f"Y_{j}={Y[j]} > Y_{j - 1}={Y[j - 1]}"
                break
        return FeasibilityReport(Y=Y, Z=Z, feasible=violation is None, D=Y[r], violation=violation)

    # -- online sets -------------------------------------------------------

    @staticmethod
    def relabel(v: int, I: Iterable[int]) -> Dict[int, int]:
        """Canonical point → actual point: [t] onto I ascending, the rest onto [v]∖I ascending."""
        I = sorted(I)
        rest = [p for p in points(v) if p not in set(I)]
        return {canonical: actual for canonical, actual in enumerate(I + rest, start=1)}

    @staticmethod
    def _check_online(d: TDesign, I: Sequence[int]) -> Subset:
        I = tuple(sorted(I))
        if len(I) != d.t or len(set(I)) != d.t or any(p < 1 or p > d.v for p in I):
            raise HppdaError(f"online set {list(I)} must be {d.t} distinct points of 1..{d.v}")
        return I

    @staticmethod
    def tau(d: TDesign, r: int, I: Sequence[int], j: int) -> List[Subset]:
        """Users meeting I in exactly j caches, in B_j column order."""
        I = HppdaService._check_online(d, I)
        phi = HppdaService.relabel(d.v, I)
        return [tuple(sorted(phi[p] for p in U)) for U in HppdaService.col_index(d, r, j)]

    @staticmethod
    def zeta(d: TDesign, I: Sequence[int], j: int, a_j: Dict[int, int]) -> List[Subset]:
        """
        Blocks for B_j's rows: for s = 1..t-j and H ∈ C(I, s) lexicographic,
        the first a_{s,j} blocks of blocks_for(H, I).
        """
        I = HppdaService._check_online(d, I)
        out: List[Subset] = []
        for s in range(1, d.t - j + 1):
            count = a_j.get(s, 0)
            if count == 0:
                continue
            for H in k_subsets(I, s):
                out.extend(DesignService.blocks_for(d, H, I)[:count])
        return out

    @staticmethod
    def verify_hppda(g: GeneralizedHpPda, I: Sequence[int]) -> HppdaMatchReport:
        """
        For every j: (i) each star of B_j is a star of P on zeta × tau, and
        (ii) B_j's stars coincide with online-restricted availability, where
        block A serves user U iff A meets U∩I.
        """
        d = g.design
        I = HppdaService._check_online(d, I)
        online = set(I)
        P_rows = {A: f for f, A in enumerate(g.P.rows)}
        P_cols = {U: c for c, U in enumerate(g.P.cols)}
        per_j: List[StarMatch] = []
        for j in range(1, g.r + 1):
            if j not in g.B:
                per_j.append(StarMatch(j=j, containment_ok=True, availability_ok=True, detail="no delivery array"))
                continue
            Bj = g.B[j]
            blocks = HppdaService.zeta(d, I, j, g.a_for(j))
            users = HppdaService.tau(d, g.r, I, j)
            if len(blocks) != Bj.F or len(users) != Bj.K:
                per_j.append(StarMatch(
                    j=j, containment_ok=False, availability_ok=False,
                    detail=f"zeta/tau sizes {len(blocks)}x{len(users)} differ from B_{j} {Bj.F}x{Bj.K}",
                ))
                continue
            containment = None
            availability = None
            for f, A in enumerate(blocks):
                for k, U in enumerate(users):
                    b_star = Bj.is_star(f, k)
                    if containment is None and b_star and not g.P.cells[P_rows[A], P_cols[U]]:
                        containment = (f, k)
                    if availability is None and b_star != bool(set(A) & set(U) & online):
                        availability = (f, k)
            detail = None
            if containment or availability:
                f, k = containment or availability
                detail = f"first mismatch at block {blocks[f]} user {users[k]}"
            per_j.append(StarMatch(
                j=j,
                containment_ok=containment is None,
                availability_ok=availability is None,
                containment_mismatch=containment,
                availability_mismatch=availability,
                detail=detail,
            ))
        return HppdaMatchReport(online=I, per_j=per_j)

    @staticmethod
    def verify_all(g: GeneralizedHpPda, workers: Optional[int] = None) -> List[HppdaMatchReport]:
        """verify_hppda over every online set, in lexicographic order of I."""
        online_sets = list(k_subsets(points(g.design.v), g.design.t))
        workers = workers or settings.workers
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda I: HppdaService.verify_hppda(g, I), online_sets))
        failed = sum(1 for rep in reports if not rep.ok)
        logger.info(f"Star-match checked on {len(reports)} online sets, {failed} failed")
        return reports

    # -- rendering ---------------------------------------------------------

    @staticmethod
    def dump_star_array(arr: StarArray) -> str:
        return "\n".join("|".join(STAR if c else "." for c in row) for row in arr.cells)

    @staticmethod
    def dump_hppda(g: GeneralizedHpPda) -> str:
        parts = [f"# P_c ({g.Pc.cells.shape[0]}x{g.Pc.cells.shape[1]})", HppdaService.dump_star_array(g.Pc)]
        for j in range(1, g.r + 1):
            if j in g.B:
                parts.append(f"# B_{j} ({g.B[j].F}x{g.B[j].K})")
                parts.append(PdaService.dump_pda(g.B[j]))
            else:
                parts.append(f"# B_{j} empty")
        return "\n".join(parts) + "\n"
