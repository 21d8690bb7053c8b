from fastapi import APIRouter, HTTPException

from app.schemas.schemas import SweepConfig, SweepOut
from app.services.baseline_service import BaselineError
from app.services.design_service import DesignError
from app.services.harness_service import ConfigError, HarnessService
from app.services.hppda_service import HppdaError
from app.services.scheme_service import SchemeError

router = APIRouter()


@router.post("/sweep", response_model=SweepOut)
def run_sweep(payload: SweepConfig, simulate: bool = False):
    try:
        rows = HarnessService.sweep(payload, simulate=simulate)
    except (ConfigError, DesignError, HppdaError, BaselineError, SchemeError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    return SweepOut(
        rows=len(rows),
        csv=HarnessService.to_csv(rows),
        dominance=HarnessService.dominance(rows, (payload.band_low, payload.band_high)),
    )
