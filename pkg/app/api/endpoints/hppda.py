from typing import List

from fastapi import APIRouter, HTTPException

from app.models.models import GeneralizedHpPda
from app.schemas.schemas import HppdaBuildOut, HppdaIn, HppdaMatchReport, HppdaVerifyIn
from app.services.design_service import DesignError, DesignService
from app.services.hppda_service import HppdaError, HppdaService, parse_a_map
from app.services.pda_service import PdaService

router = APIRouter()


def build_from_request(payload: HppdaIn) -> GeneralizedHpPda:
    """Resolve the design and a-map of a request body, mapping domain errors to 400."""
    try:
        d = DesignService.resolve_design(payload.design)
        return HppdaService.build_hppda(d, payload.r, parse_a_map(payload.a))
    except (DesignError, HppdaError) as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/hppda/build", response_model=HppdaBuildOut)
def build_hppda(payload: HppdaIn):
    g = build_from_request(payload)
    p = g.params
    return HppdaBuildOut(
        C=p.C,
        C_online=p.C_online,
        r=p.r,
        F=p.F,
        Z_c=p.Z_c,
        Z=p.Z,
        feasibility=HppdaService.feasibility(g),
        checks=HppdaService.param_checks(g),
        Pc=HppdaService.dump_star_array(g.Pc),
        B={j: PdaService.dump_pda(b) for j, b in g.B.items()},
    )


@router.post("/hppda/verify", response_model=List[HppdaMatchReport])
def verify_hppda(payload: HppdaVerifyIn):
    """One report per online set; all C(v,t) sets when `online` is omitted."""
    g = build_from_request(payload)
    try:
        if payload.online is not None:
            return [HppdaService.verify_hppda(g, payload.online)]
        return HppdaService.verify_all(g)
    except HppdaError as e:
        raise HTTPException(status_code=400, detail=str(e))
