"""
Baseline Service: closed-form rate-memory points of the comparison schemes.

MT and CRR-MT are the multi-access schemes parametrised by t ∈ [K′]; the CRR
t-scheme and the RR scheme are built on a t-design and a vector a_s. All
points are exact fractions; K_o for every baseline is the online cache count.
"""

import logging
import re
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional

from app.core.combinatorics import binom
from app.models.models import TDesign
from app.schemas.schemas import TradeoffPoint
from app.services.design_service import DesignService

logger = logging.getLogger(__name__)

_A_VECTOR_ENTRY = re.compile(r"(\d+)\s*=\s*(\d+)")


class BaselineError(ValueError):
    """Baseline parameters outside the range the scheme is defined for."""


def parse_a_vector(text: str) -> Dict[int, int]:
    """Parse `s=v` entries separated by `,` or `;`."""
    entries = _A_VECTOR_ENTRY.findall(text or "")
    if not entries and (text or "").strip():
        raise BaselineError(f"no `s=v` entries found in {text!r}")
    return {int(s): int(v) for s, v in entries}


def format_a_vector(a: Dict[int, int]) -> str:
    return ";".join(f"a_{s}={a[s]}" for s in sorted(a))


class BaselineService:

    @staticmethod
    def _check_mt(K: int, K_online: int, t: int) -> None:
        if not 1 <= K_online <= K:
            raise BaselineError(f"need 1 <= K′ <= K, got K={K} K′={K_online}")
        if not 1 <= t <= K_online:
            raise BaselineError(f"t={t} outside [1, K′={K_online}]")

    @staticmethod
    def mt_point(K: int, K_online: int, N: int, t: int) -> TradeoffPoint:
        BaselineService._check_mt(K, K_online, t)
        memory = Fraction(binom(K - 1, t - 1), binom(K, t))
        rate = Fraction(binom(K_online, t + 1), binom(K_online, t))
        return TradeoffPoint(scheme="mt", params=f"t={t}", memory_ratio=memory, rate=rate, k_o=K_online)

    @staticmethod
    def crr_mt_point(K: int, K_online: int, N: int, t: int) -> TradeoffPoint:
        BaselineService._check_mt(K, K_online, t)
        denom = binom(K_online, t) - binom(K_online - 1, t - 1) + binom(K - 1, t - 1)
        memory = Fraction(binom(K - 1, t - 1), denom)
        rate = Fraction(binom(K_online, t + 1), denom)
        return TradeoffPoint(scheme="crr_mt", params=f"t={t}", memory_ratio=memory, rate=rate, k_o=K_online)

    @staticmethod
    def _check_a(d: TDesign, a: Dict[int, int]) -> Dict[int, int]:
        for s, value in a.items():
            if not 1 <= s <= d.t - 1:
                raise BaselineError(f"a_{s} given but s must lie in [1, t-1={d.t - 1}]")
            bound = DesignService.lambda_s_t(d, s)
            if not 0 <= value <= bound:
                raise BaselineError(f"a_{s}={value} outside [0, λ_{s}^t={bound}]")
        a = {s: a.get(s, 0) for s in range(1, d.t)}
        if not any(a.values()):
            raise BaselineError("a_s = 0 for every s leaves the delivery array empty")
        return a

    @staticmethod
    def crr_t_parts(d: TDesign, a: Dict[int, int]) -> Dict[str, int]:
        """Z, F′, Z′ and S of the single-access design scheme."""
        a = BaselineService._check_a(d, a)
        return {
            "Z": DesignService.lambda_s(d, 1),
            "F": sum(v * binom(d.t, s) for s, v in a.items()),
            "Z_prime": sum(v * (binom(d.t, s) - binom(d.t - 1, s)) for s, v in a.items()),
            "S": sum(v * binom(d.t, s + 1) for s, v in a.items()),
        }

    @staticmethod
    def crr_t_point(d: TDesign, a: Dict[int, int]) -> TradeoffPoint:
        """(Z, S) / (Z + F′ − Z′) with Z = λ_1."""
        parts = BaselineService.crr_t_parts(d, a)
        denom = parts["Z"] + parts["F"] - parts["Z_prime"]
        return TradeoffPoint(
            scheme="crr_t",
            params=format_a_vector(BaselineService._check_a(d, a)),
            memory_ratio=Fraction(parts["Z"], denom),
            rate=Fraction(parts["S"], denom),
            k_o=d.t,
        )

    @staticmethod
    def rr_rows(d: TDesign, a: Dict[int, int]) -> int:
        """|ℛ| = Σ_s a_s C(t, s)."""
        a = BaselineService._check_a(d, a)
        return sum(v * binom(d.t, s) for s, v in a.items())

    @staticmethod
    def rr_point(d: TDesign, a: Dict[int, int], removed: int) -> TradeoffPoint:
        """(λ_1, Σ a_s C(t,s+1) − |T|) / |ℛ|; needs |ℛ| > λ_1 and 0 <= |T| <= S."""
        a = BaselineService._check_a(d, a)
        rows = BaselineService.rr_rows(d, a)
        lambda_1 = DesignService.lambda_s(d, 1)
        if rows <= lambda_1:
            raise BaselineError(f"|ℛ|={rows} must exceed λ_1={lambda_1}")
        S = sum(v * binom(d.t, s + 1) for s, v in a.items())
        if removed < 0:
            raise BaselineError(f"|T|={removed} must be nonnegative")
        if removed > S:
            raise BaselineError(f"|T|={removed} exceeds the {S} transmissions it is removed from")
        return TradeoffPoint(
            scheme="rr",
            params=f"{format_a_vector(a)};T={removed}",
            memory_ratio=Fraction(lambda_1, rows),
            rate=Fraction(S - removed, rows),
            k_o=d.t,
        )

    @staticmethod
    def all_a_vectors(d: TDesign, budget: Optional[int] = None) -> List[Dict[int, int]]:
        """In-bounds nonzero a vectors over s ∈ [t-1], product order, capped at `budget`."""
        keys = list(range(1, d.t))
        ranges = [range(0, DesignService.lambda_s_t(d, s) + 1) for s in keys]
        out: List[Dict[int, int]] = []
        for values in product(*ranges):
            if not any(values):
                continue
            out.append(dict(zip(keys, values)))
            if budget is not None and len(out) >= budget:
                break
        return out
