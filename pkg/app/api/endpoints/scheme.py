from fractions import Fraction

from fastapi import APIRouter, HTTPException

from app.api.endpoints.hppda import build_from_request
from app.schemas.schemas import HppdaIn, RateOut, SimulateIn, SimulateOut
from app.services.hppda_service import HppdaError, HppdaService
from app.services.mds_service import MdsError
from app.services.scheme_service import SchemeError, SchemeService

router = APIRouter()


@router.post("/scheme/rate", response_model=RateOut)
def scheme_rate(payload: HppdaIn):
    g = build_from_request(payload)
    feasibility = HppdaService.feasibility(g)
    memory, rate = SchemeService.rate(g)
    d = g.design
    _, k_o = SchemeService.active_users(d.v, d.t, g.r, range(1, d.t + 1))
    return RateOut(
        memory_ratio=memory, rate=rate, D=feasibility.D, k_o=k_o, rate_per_user=rate / k_o, feasibility=feasibility,
    )


@router.post("/scheme/simulate", response_model=SimulateOut)
def scheme_simulate(payload: SimulateIn):
    """
    Place a generated library, deliver for one online set and decode every
    active user. Explicit demands are listed in lexicographic user order.
    """
    g = build_from_request(payload)
    try:
        instance, session = SchemeService.simulate(
            g, payload.online, payload.n, demands=payload.demands or "worst", seed=payload.seed,
        )
    except (SchemeError, HppdaError, MdsError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    tx_csv, users_csv = SchemeService.session_csv(session)
    return SimulateOut(
        transmissions=len(session.transmissions),
        rate=Fraction(len(session.transmissions), instance.code.d),
        all_decoded=all(tr.matches_library for tr in session.per_user.values()),
        stranded=list(session.stranded),
        seed=session.seed,
        transmissions_csv=tx_csv,
        users_csv=users_csv,
    )
