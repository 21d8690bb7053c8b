"""
Command-line harness.

    python -m app.cli design verify data/3-8-4-1.txt
    python -m app.cli hppda build --design catalog:3-8-4-1 --r 2 --a 1.1=2,2.1=1,1.2=1
    python -m app.cli hppda verify --all-online-sets
    python -m app.cli scheme simulate --online 2,4,6 --demands worst
    python -m app.cli scheme check-all --n 18
    python -m app.cli sweep --config data/sweep_comparison.env --simulate

Every command exits with status 1 when a check fails.
"""

import logging
from pathlib import Path
from typing import List, Optional

import typer

from app.core.config import settings
from app.core.logging_config import setup_logging
from app.models.models import GeneralizedHpPda
from app.services.baseline_service import BaselineError
from app.services.design_service import DesignError, DesignService
from app.services.harness_service import ConfigError, HarnessService
from app.services.hppda_service import HppdaError, HppdaService, parse_a_map
from app.services.mds_service import MdsError
from app.services.pda_service import PdaService
from app.services.scheme_service import SchemeError, SchemeService

logger = logging.getLogger(__name__)

DEFAULT_DESIGN = "catalog:3-8-4-1"
DEFAULT_A = "1.1=2,2.1=1,1.2=1"

app = typer.Typer(help="Combinatorial multi-access hotplug coded caching toolkit.", no_args_is_help=True)
design_app = typer.Typer(help="t-design validation and parameters.", no_args_is_help=True)
hppda_app = typer.Typer(help="Generalized HpPDA construction and star-match checks.", no_args_is_help=True)
scheme_app = typer.Typer(help="Placement, delivery and decoding.", no_args_is_help=True)
app.add_typer(design_app, name="design")
app.add_typer(hppda_app, name="hppda")
app.add_typer(scheme_app, name="scheme")

DOMAIN_ERRORS = (DesignError, HppdaError, SchemeError, MdsError, BaselineError, ConfigError)


@app.callback()
def main(log_level: str = typer.Option(settings.log_level, "--log-level", help="Console log level.")):
    setup_logging(log_level.upper())


def _fail(message: str) -> None:
    logger.error(message)
    typer.echo(f"error: {message}", err=True)
    raise typer.Exit(1)


def _parse_online(text: str) -> List[int]:
    try:
        return [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError:
        _fail(f"--online expects a comma-separated list of caches, got {text!r}")


def _build(design: str, r: int, a: str) -> GeneralizedHpPda:
    try:
        d = DesignService.resolve_design(design)
        return HppdaService.build_hppda(d, r, parse_a_map(a))
    except DOMAIN_ERRORS as e:
        _fail(str(e))


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------

@design_app.command("verify")
def design_verify(ref: str = typer.Argument(..., help="Design file, catalog:NAME or complete:v,k,t.")):
    """Validate a design and print its λ parameters."""
    try:
        d = DesignService.resolve_design(ref)
    except DesignError as e:
        _fail(f"invalid design {ref}: {e}")
    params = DesignService.design_params(d)
    typer.echo(f"valid {d.describe()} design, b={d.b}")
    typer.echo("lambda_s   " + " ".join(f"{s}:{v}" for s, v in params.lambda_s.items()))
    typer.echo("lambda_s^t " + " ".join(f"{s}:{v}" for s, v in params.lambda_s_t.items()))


# ---------------------------------------------------------------------------
# hppda
# ---------------------------------------------------------------------------

@hppda_app.command("build")
def hppda_build(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r", help="Caches per user."),
    a: str = typer.Option(DEFAULT_A, "--a", help="a_{s,j} entries as s.j=v, comma-separated."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the array dump here instead of stdout."),
):
    """Build (P_c, P, {B_j}) and compare each B_j with its closed-form parameters."""
    g = _build(design, r, a)
    p = g.params
    feasibility = HppdaService.feasibility(g)
    typer.echo(f"C={p.C} C'={p.C_online} r={p.r} F={p.F} Z_c={p.Z_c} Z={p.Z} D={feasibility.D}")
    typer.echo("Y: " + " ".join(f"Y_{j}={y}" for j, y in feasibility.Y.items()) + (" feasible" if feasibility.feasible else f" INFEASIBLE ({feasibility.violation})"))
    checks = HppdaService.param_checks(g)
    for check in checks:
        measured = check.measured.as_tuple() if check.measured else "-"
        typer.echo(f"B_{check.j}: measured {measured} predicted {check.predicted.as_tuple()} {'ok' if check.match else 'MISMATCH'}")
    dump = HppdaService.dump_hppda(g)
    if out is not None:
        out.write_text(dump, encoding="utf-8")
        typer.echo(f"arrays written to {out}")
    else:
        typer.echo(dump, nl=False)
    if not all(c.match for c in checks) or not feasibility.feasible:
        raise typer.Exit(1)


@hppda_app.command("verify")
def hppda_verify(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r"),
    a: str = typer.Option(DEFAULT_A, "--a"),
    online: Optional[str] = typer.Option(None, "--online", help="Online caches, e.g. 2,4,6."),
    all_online_sets: bool = typer.Option(False, "--all-online-sets", help="Check every online set."),
):
    """Star-containment against P and equality with online-restricted availability."""
    g = _build(design, r, a)
    try:
        if all_online_sets or online is None:
            reports = HppdaService.verify_all(g)
        else:
            reports = [HppdaService.verify_hppda(g, _parse_online(online))]
    except HppdaError as e:
        _fail(str(e))
    for report in reports:
        typer.echo(report.line())
    failed = [rep for rep in reports if not rep.ok]
    typer.echo(f"{len(reports) - len(failed)}/{len(reports)} online sets pass")
    if failed:
        raise typer.Exit(1)


@hppda_app.command("show")
def hppda_show(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r"),
    a: str = typer.Option(DEFAULT_A, "--a"),
    j: int = typer.Option(1, "--j"),
):
    """Print one B_j in the `|`-separated dump format."""
    g = _build(design, r, a)
    if j not in g.B:
        _fail(f"B_{j} is empty for this parameter map")
    typer.echo(PdaService.dump_pda(g.B[j]))


# ---------------------------------------------------------------------------
# scheme
# ---------------------------------------------------------------------------

@scheme_app.command("rate")
def scheme_rate(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r"),
    a: str = typer.Option(DEFAULT_A, "--a"),
):
    g = _build(design, r, a)
    memory, rate = SchemeService.rate(g)
    d = g.design
    _, k_o = SchemeService.active_users(d.v, d.t, r, range(1, d.t + 1))
    typer.echo(f"M/N={memory} R={rate} D={SchemeService.subpacketization(g)} K_o={k_o} R/K_o={rate / k_o}")


@scheme_app.command("simulate")
def scheme_simulate(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r"),
    a: str = typer.Option(DEFAULT_A, "--a"),
    online: str = typer.Option(..., "--online", help="Online caches, e.g. 2,4,6."),
    demands: str = typer.Option("worst", "--demands", help="worst, seed:N or a demand file."),
    n: int = typer.Option(18, "--n", help="Library size N for generated libraries."),
    seed: Optional[int] = typer.Option(None, "--seed"),
    library_dir: Optional[Path] = typer.Option(None, "--library-dir", help="Load library files from a directory."),
    csv_prefix: Optional[Path] = typer.Option(None, "--csv", help="Write <prefix>_transmissions.csv and <prefix>_users.csv."),
):
    """One delivery for one online set, with per-user decode status."""
    g = _build(design, r, a)
    try:
        library = SchemeService.load_library(library_dir) if library_dir else None
        _, session = SchemeService.simulate(g, _parse_online(online), n, demands=demands, seed=seed, library=library)
    except DOMAIN_ERRORS as e:
        _fail(str(e))
    typer.echo(SchemeService.session_text(session), nl=False)
    if csv_prefix is not None:
        tx_csv, users_csv = SchemeService.session_csv(session)
        Path(f"{csv_prefix}_transmissions.csv").write_text(tx_csv, encoding="utf-8")
        Path(f"{csv_prefix}_users.csv").write_text(users_csv, encoding="utf-8")
    if not all(tr.matches_library for tr in session.per_user.values()):
        raise typer.Exit(1)


@scheme_app.command("check-all")
def scheme_check_all(
    design: str = typer.Option(DEFAULT_DESIGN, "--design"),
    r: int = typer.Option(2, "--r"),
    a: str = typer.Option(DEFAULT_A, "--a"),
    n: int = typer.Option(18, "--n"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    progress: bool = typer.Option(True, "--progress/--no-progress"),
):
    """Every online set, worst-case distinct demands, every active user decoded."""
    g = _build(design, r, a)
    try:
        library = SchemeService.generate_library(n, settings.subfile_bytes * SchemeService.subpacketization(g), seed)
        instance = SchemeService.place(g, library)
        report = HarnessService.check_all(instance, workers=workers, progress=progress)
    except DOMAIN_ERRORS as e:
        _fail(str(e))
    typer.echo(
        f"{report.online_sets} online sets, {report.passed}/{report.users_checked} users decoded, "
        f"rate {report.rate_formula} {'matches' if report.rate_matches else 'MISMATCH'}"
    )
    if report.failure is not None:
        typer.echo(f"first failure: I={report.failure.online} user={report.failure.user}: {report.failure.reason}")
    if not report.ok:
        raise typer.Exit(1)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

@app.command("sweep")
def sweep(
    config: Path = typer.Option(..., "--config", exists=True, dir_okay=False, help="key = value sweep configuration."),
    simulate: bool = typer.Option(False, "--simulate", help="Cross-check proposed rows against a simulated delivery."),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV path; stdout when omitted."),
    check_dominance: bool = typer.Option(False, "--check-dominance", help="Fail unless a proposed row dominates the band."),
):
    """Rate-memory sweep of the proposed scheme and the baselines as CSV."""
    try:
        cfg = HarnessService.parse_sweep_config(config)
        rows = HarnessService.sweep(cfg, simulate=simulate)
    except DOMAIN_ERRORS as e:
        _fail(str(e))
    text = HarnessService.to_csv(rows, out)
    if out is None:
        typer.echo(text, nl=False)
    verdict = HarnessService.dominance(rows, (cfg.band_low, cfg.band_high))
    if verdict.holds:
        w = verdict.witness
        typer.echo(f"dominance holds: {w.scheme} {w.params} M/N={w.m_over_n} R/K_o={w.rate_per_user}", err=True)
    else:
        typer.echo(f"dominance fails: {verdict.detail}", err=True)
        if check_dominance:
            raise typer.Exit(1)


if __name__ == "__main__":
    app()
