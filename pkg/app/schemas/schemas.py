from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.core.combinatorics import Subset
from app.core.config import settings
from app.models.models import PdaParams, TDesign


# Base schema enabling attribute access (replaces v1 `orm_mode`)
class BaseSchema(BaseModel):
    model_config = {"from_attributes": True}


# ---------------------------------------------------------------------------
# verification reports
# ---------------------------------------------------------------------------

class DesignReport(BaseSchema):
    valid: bool
    design: Optional[TDesign] = None
    violation: Optional[str] = None
    t_subset: Optional[Subset] = None
    replication: Optional[int] = None
    block: Optional[Tuple[int, ...]] = None


class PdaReport(BaseSchema):
    valid: bool
    params: Optional[PdaParams] = None
    condition: Optional[str] = None  # "ragged", "C1", "C2", "C3a", "C3b"
    violation: Optional[str] = None
    cells: List[Tuple[int, int]] = []


class StarMatch(BaseSchema):
    """Outcome of both star checks for one B_j at one online set."""
    j: int
    containment_ok: bool
    availability_ok: bool
    containment_mismatch: Optional[Tuple[int, int]] = None
    availability_mismatch: Optional[Tuple[int, int]] = None
    detail: Optional[str] = None


class HppdaMatchReport(BaseSchema):
    online: Subset
    per_j: List[StarMatch] = []

    @property
    def ok(self) -> bool:
        return all(m.containment_ok and m.availability_ok for m in self.per_j)

    def line(self) -> str:
        parts = [
            f"j={m.j}:{'ok' if m.containment_ok else 'FAIL'}/{'ok' if m.availability_ok else 'FAIL'}"
            for m in self.per_j
        ]
        return f"I={','.join(str(p) for p in self.online)} " + " ".join(parts)


class FeasibilityReport(BaseSchema):
    Y: Dict[int, int]
    Z: Dict[int, int]
    feasible: bool
    D: int
    violation: Optional[str] = None


class BjParamCheck(BaseSchema):
    """Measured parameters of a built B_j next to the closed forms."""
    j: int
    measured: Optional[PdaParams] = None
    predicted: PdaParams
    match: bool


class CertificationFailure(BaseSchema):
    online: Subset
    user: Optional[Subset] = None
    reason: str


class OnlineSetResult(BaseSchema):
    online: Subset
    transmissions: int
    users: int
    decoded: int
    rate: Fraction


class CertificationReport(BaseSchema):
    online_sets: int = 0
    users_checked: int = 0
    passed: int = 0
    failed: int = 0
    rate_formula: Fraction
    rate_matches: bool = True
    per_set: List[OnlineSetResult] = []
    failure: Optional[CertificationFailure] = None

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.rate_matches and self.failure is None


# ---------------------------------------------------------------------------
# trade-off points and sweep
# ---------------------------------------------------------------------------

class TradeoffPoint(BaseSchema):
    scheme: str
    params: str
    memory_ratio: Fraction
    rate: Fraction
    k_o: int


class SweepRow(BaseSchema):
    scheme: str
    params: str
    m_over_n: Fraction
    rate: Fraction
    k_o: int
    rate_per_user: Fraction
    m_over_n_dec: str
    rate_per_user_dec: str


class SweepConfig(BaseSchema):
    model_config = ConfigDict(from_attributes=True, frozen=True)

    design: str = "catalog:3-8-4-1"
    r: int = 2
    n: int = 18
    baseline_k: int = 8
    baseline_k_online: int = 3
    baseline_n: int = 3
    proposed_a: str = "all"
    crr_a: str = "all"
    rr_a: str = "all"
    rr_removed: int = 0
    budget: int = settings.sweep_budget
    seed: int = settings.seed
    band_low: Fraction = Fraction(1, 2)
    band_high: Fraction = Fraction(7, 10)


class DominanceReport(BaseSchema):
    holds: bool
    band: Tuple[Fraction, Fraction]
    witness: Optional[SweepRow] = None
    beaten: List[SweepRow] = []
    detail: Optional[str] = None


# ---------------------------------------------------------------------------
# API bodies
# ---------------------------------------------------------------------------

class DesignVerifyIn(BaseSchema):
    v: int
    k: Optional[int] = None
    t: int
    lam: int = Field(alias="lambda")
    blocks: List[List[int]]

    model_config = ConfigDict(from_attributes=True, populate_by_name=True)


class CatalogEntryOut(BaseSchema):
    name: str
    v: int
    k: int
    t: int
    lam: int = Field(serialization_alias="lambda")
    b: int


class DesignParamsOut(BaseSchema):
    name: str
    lambda_s: Dict[int, int]
    lambda_s_t: Dict[int, int]


class HppdaIn(BaseSchema):
    design: str = "catalog:3-8-4-1"
    r: int = 2
    a: str = Field(default="1.1=2,2.1=1,1.2=1", description="entries s.j=v")


class HppdaVerifyIn(HppdaIn):
    online: Optional[List[int]] = None


class HppdaBuildOut(BaseSchema):
    C: int
    C_online: int
    r: int
    F: int
    Z_c: int
    Z: int
    feasibility: FeasibilityReport
    checks: List[BjParamCheck]
    Pc: str
    B: Dict[int, str]


class RateOut(BaseSchema):
    memory_ratio: Fraction
    rate: Fraction
    D: int
    k_o: int
    rate_per_user: Fraction
    feasibility: FeasibilityReport


class SimulateIn(HppdaIn):
    online: List[int]
    n: int = 18
    demands: Optional[List[int]] = None
    seed: Optional[int] = None


class SimulateOut(BaseSchema):
    transmissions: int
    rate: Fraction
    all_decoded: bool
    stranded: List[Subset]
    seed: Optional[int] = None
    transmissions_csv: str
    users_csv: str


class SweepOut(BaseSchema):
    rows: int
    csv: str
    dominance: DominanceReport
