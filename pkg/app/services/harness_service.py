"""
Harness Service: exhaustive hotplug certification and rate-memory sweeps.

check_all runs every online set through placement, worst-case delivery and
per-user decoding. sweep evaluates the proposed scheme and the baselines over
parameter grids and emits one CSV row per trade-off point.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from io import StringIO
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from dotenv import dotenv_values
from pydantic import ValidationError
from tqdm import tqdm

from app.core.combinatorics import Subset, binom, k_subsets, points
from app.core.config import settings
from app.models.models import AMap, SchemeInstance, TDesign
from app.schemas.schemas import (
    CertificationFailure,
    CertificationReport,
    DominanceReport,
    OnlineSetResult,
    SweepConfig,
    SweepRow,
    TradeoffPoint,
)
from app.services.baseline_service import BaselineError, BaselineService, parse_a_vector
from app.services.design_service import DesignService
from app.services.hppda_service import HppdaError, HppdaService, format_a_map, parse_a_map
from app.services.scheme_service import SchemeError, SchemeService

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "scheme",
    "params",
    "m_over_n",
    "rate",
    "k_o",
    "rate_per_user",
    "m_over_n_dec",
    "rate_per_user_dec",
]
BASELINE_SCHEMES = ("mt", "crr_mt", "crr_t", "rr")


class ConfigError(ValueError):
    """Malformed sweep configuration."""


def render_fraction(x: Fraction) -> str:
    return str(Fraction(x))


def render_decimal(x: Fraction) -> str:
    """Six significant digits, diff-stable."""
    return f"{float(x):.6g}"


class HarnessService:

    # -- certification -----------------------------------------------------

    @staticmethod
    def certify_online_set(instance: SchemeInstance, I: Subset) -> Tuple[OnlineSetResult, Optional[CertificationFailure]]:
        """Worst-case delivery at one online set, decoding every active user."""
        dv = SchemeService.worst_case_demand(instance, I)
        session = SchemeService.deliver(instance, dv, decode=False)
        decoded = 0
        failure = None
        for U in dv.demands:
            try:
                transcript = SchemeService.decode_user(instance, session, U)
            except SchemeError as exc:
                failure = CertificationFailure(online=I, user=U, reason=str(exc))
                break
            if not transcript.matches_library:
                failure = CertificationFailure(online=I, user=U, reason="decoded payload differs from the demanded file")
                break
            decoded += 1
        result = OnlineSetResult(
            online=I,
            transmissions=len(session.transmissions),
            users=len(dv.demands),
            decoded=decoded,
            rate=Fraction(len(session.transmissions), instance.code.d),
        )
        return result, failure

    @staticmethod
    def check_all(instance: SchemeInstance, workers: Optional[int] = None, progress: bool = False) -> CertificationReport:
        """
        Certify every online set I ∈ C([v], t) with all-distinct demands.

        Online sets are spread over a thread pool; results are collected in
        lexicographic order of I and the first failure in that order is reported.
        """
        g = instance.hppda
        d = g.design
        _, k_o = SchemeService.active_users(d.v, d.t, g.r, points(d.t))
        if instance.library.N < k_o:
            raise SchemeError(f"worst-case certification needs N >= K_o={k_o}, library has N={instance.library.N}")
        _, rate_formula = SchemeService.rate(g)
        online_sets = list(k_subsets(points(d.v), d.t))
        workers = workers or settings.workers

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(tqdm(
                pool.map(lambda I: HarnessService.certify_online_set(instance, I), online_sets),
                total=len(online_sets),
                desc="online sets",
                disable=not progress,
            ))

        per_set: List[OnlineSetResult] = []
        failure = None
        users_checked = passed = failed = 0
        rate_matches = True
        for result, fail in outcomes:
            per_set.append(result)
            users_checked += result.users
            passed += result.decoded
            if result.rate != rate_formula:
                rate_matches = False
                logger.error(f"Measured rate {result.rate} at I={result.online} differs from {rate_formula}")
            if fail is not None:
                failed += result.users - result.decoded
                if failure is None:
                    failure = fail
                    logger.error(f"Decode failure at I={fail.online} user={fail.user}: {fail.reason}")
        report = CertificationReport(
            online_sets=len(per_set),
            users_checked=users_checked,
            passed=passed,
            failed=failed,
            rate_formula=rate_formula,
            rate_matches=rate_matches,
            per_set=per_set,
            failure=failure,
        )
        logger.info(
            f"Certified {report.online_sets} online sets: {report.passed}/{report.users_checked} users decoded, "
            f"rate {rate_formula} {'matches' if rate_matches else 'MISMATCH'}"
        )
        return report

    # -- sweep configuration -----------------------------------------------

    @staticmethod
    def parse_sweep_config(source: Union[str, Path]) -> SweepConfig:
        """`key = value` lines (dotenv syntax); unknown keys are logged and ignored."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
            values = dotenv_values(Path(source))
        else:
            values = dotenv_values(stream=StringIO(source))
        known = set(SweepConfig.model_fields)
        for key in values:
            if key not in known:
                logger.warning(f"Ignoring unknown sweep config key {key!r}")
        fields = {k: v for k, v in values.items() if k in known and v is not None}
        try:
            return SweepConfig(**fields)
        except ValidationError as exc:
            raise ConfigError(f"bad sweep config: {exc.errors()[0]['loc'][0]}: {exc.errors()[0]['msg']}") from exc

    @staticmethod
    def _proposed_maps(d: TDesign, cfg: SweepConfig) -> List[AMap]:
        if cfg.proposed_a.strip() == "all":
            return HppdaService.all_a_maps(d, cfg.r, cfg.budget)
        try:
            return [parse_a_map(chunk) for chunk in cfg.proposed_a.split(";") if chunk.strip()]
        except HppdaError as exc:
            raise ConfigError(f"proposed_a: {exc}") from exc

    @staticmethod
    def _baseline_vectors(d: TDesign, spec: str, budget: int, key: str) -> List[dict]:
        if spec.strip() == "all":
            return BaselineService.all_a_vectors(d, budget)
        try:
            return [parse_a_vector(chunk) for chunk in spec.split(";") if chunk.strip()]
        except BaselineError as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    # -- sweep -------------------------------------------------------------

    @staticmethod
    def to_row(point: TradeoffPoint) -> SweepRow:
        per_user = point.rate / point.k_o
        return SweepRow(
            scheme=point.scheme,
            params=point.params,
            m_over_n=point.memory_ratio,
            rate=point.rate,
            k_o=point.k_o,
            rate_per_user=per_user,
            m_over_n_dec=render_decimal(point.memory_ratio),
            rate_per_user_dec=render_decimal(per_user),
        )

    @staticmethod
    def proposed_point(d: TDesign, r: int, a: AMap) -> TradeoffPoint:
        memory, rate, _ = SchemeService.rate_for(d, r, a)
        k_o = sum(binom(d.t, j) * binom(d.v - d.t, r - j) for j in range(1, r + 1))
        return TradeoffPoint(
            scheme="proposed", params=format_a_map(HppdaService.check_a(d, r, a)), memory_ratio=memory, rate=rate, k_o=k_o,
        )

    @staticmethod
    def _cross_check(d: TDesign, cfg: SweepConfig, a: AMap, point: TradeoffPoint) -> None:
        g = HppdaService.build_hppda(d, cfg.r, a)
        _, k_o = SchemeService.active_users(d.v, d.t, cfg.r, points(d.t))
        demands = "worst" if cfg.n >= k_o else f"seed:{cfg.seed}"
        instance, session = SchemeService.simulate(g, points(d.t), cfg.n, demands=demands, seed=cfg.seed)
        measured = Fraction(len(session.transmissions), instance.code.d)
        if measured != point.rate:
            raise SchemeError(f"simulated rate {measured} differs from formula {point.rate} for {point.params}")
        if not all(tr.matches_library for tr in session.per_user.values()):
            raise SchemeError(f"simulated delivery failed to decode for {point.params}")
        logger.debug(f"Simulation confirms rate {measured} for {point.params}")

    @staticmethod
    def sweep(cfg: SweepConfig, simulate: bool = False) -> List[SweepRow]:
        """Proposed-scheme rows first, then MT, CRR-MT, CRR t-scheme and RR rows."""
        d = DesignService.resolve_design(cfg.design)
        points_out: List[TradeoffPoint] = []

        for a in HarnessService._proposed_maps(d, cfg):
            try:
                memory, rate, report = SchemeService.rate_for(d, cfg.r, a)
            except HppdaError as exc:
                logger.warning(f"Skipping a-map {a}: {exc}")
                continue
            if not report.feasible:
                logger.warning(f"Skipping infeasible a-map {format_a_map(HppdaService.check_a(d, cfg.r, a))}: {report.violation}")
                continue
            point = HarnessService.proposed_point(d, cfg.r, a)
            if simulate:
                HarnessService._cross_check(d, cfg, a, point)
            points_out.append(point)

        K, K_online, N = cfg.baseline_k, cfg.baseline_k_online, cfg.baseline_n
        for t in range(1, K_online + 1):
            points_out.append(BaselineService.mt_point(K, K_online, N, t))
        for t in range(1, K_online + 1):
            points_out.append(BaselineService.crr_mt_point(K, K_online, N, t))
        for a in HarnessService._baseline_vectors(d, cfg.crr_a, cfg.budget, "crr_a"):
            try:
                points_out.append(BaselineService.crr_t_point(d, a))
            except BaselineError as exc:
                logger.warning(f"Skipping CRR a={a}: {exc}")
        for a in HarnessService._baseline_vectors(d, cfg.rr_a, cfg.budget, "rr_a"):
            try:
                points_out.append(BaselineService.rr_point(d, a, cfg.rr_removed))
            except BaselineError as exc:
                logger.warning(f"Skipping RR a={a}: {exc}")

        rows = [HarnessService.to_row(p) for p in points_out]
        logger.info(f"Sweep produced {len(rows)} rows for {d.describe()} r={cfg.r}")
        return rows

    # -- output ------------------------------------------------------------

    @staticmethod
    def rows_frame(rows: Iterable[SweepRow]) -> pd.DataFrame:
        records = [
            {
                "scheme": row.scheme,
                "params": row.params,
                "m_over_n": render_fraction(row.m_over_n),
                "rate": render_fraction(row.rate),
                "k_o": row.k_o,
                "rate_per_user": render_fraction(row.rate_per_user),
                "m_over_n_dec": row.m_over_n_dec,
                "rate_per_user_dec": row.rate_per_user_dec,
            }
            for row in rows
        ]
        return pd.DataFrame(records, columns=CSV_COLUMNS)

    @staticmethod
    def to_csv(rows: Iterable[SweepRow], path: Optional[Path] = None) -> str:
        text = HarnessService.rows_frame(rows).to_csv(index=False, lineterminator="\n")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
            logger.info(f"Wrote sweep CSV to {path}")
        return text

    @staticmethod
    def dominance(rows: Sequence[SweepRow], band: Tuple[Fraction, Fraction]) -> DominanceReport:
        """
        Look for a proposed row with M/N in the band whose rate per user is
        strictly below every baseline row with M/N in [band_low, its own M/N].
        """
        low, high = band
        baselines = [row for row in rows if row.scheme in BASELINE_SCHEMES]
        candidates = sorted(
            (row for row in rows if row.scheme == "proposed" and low <= row.m_over_n <= high),
            key=lambda row: (row.rate_per_user, row.m_over_n),
        )
        for row in candidates:
            competing = [b for b in baselines if low <= b.m_over_n <= row.m_over_n]
            if all(row.rate_per_user < b.rate_per_user for b in competing):
                return DominanceReport(holds=True, band=(low, high), witness=row, beaten=competing)
        detail = "no proposed row in the band" if not candidates else "every proposed row in the band is matched or beaten"
        return DominanceReport(holds=False, band=(low, high), detail=detail)
