from typing import List

from fastapi import APIRouter, HTTPException

from app.core.catalog import catalog_names
from app.schemas.schemas import CatalogEntryOut, DesignParamsOut, DesignReport, DesignVerifyIn
from app.services.design_service import DesignError, DesignService

router = APIRouter()


@router.get("/designs/catalog", response_model=List[CatalogEntryOut])
def list_catalog():
    out = []
    for name in catalog_names():
        d = DesignService.catalog_design(name)
        out.append(CatalogEntryOut(name=name, v=d.v, k=d.k, t=d.t, lam=d.lam, b=d.b))
    return out


@router.post("/designs/verify", response_model=DesignReport)
def verify_design(payload: DesignVerifyIn):
    """Validate a candidate block list; violations come back in the report, not as errors."""
    try:
        return DesignService.validate_design(payload.v, payload.blocks, payload.t, payload.lam, k=payload.k)
    except DesignError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.get("/designs/{name}/params", response_model=DesignParamsOut)
def design_params(name: str):
    if name not in catalog_names():
        raise HTTPException(status_code=404, detail=f"Unknown catalog design: {name}")
    d = DesignService.catalog_design(name)
    params = DesignService.design_params(d)
    return DesignParamsOut(name=name, lambda_s=params.lambda_s, lambda_s_t=params.lambda_s_t)
