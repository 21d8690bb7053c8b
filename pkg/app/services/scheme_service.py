"""
Scheme Service: coded placement, multicast delivery and per-user decoding for
combinatorial multi-access hotplug caching, driven by a generalized HpPDA.

Caches are the design's points, coded subfiles are indexed by its blocks, and a
user is an r-subset of caches. Only the t online caches can be read during
delivery; users whose caches are all offline are stranded.
"""

import logging
from fractions import Fraction
from io import StringIO
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.combinatorics import Subset, binom, k_subsets, parse_subset, points, render_subset
from app.core.config import settings
from app.models.models import (
    AMap,
    DeliverySession,
    DemandVector,
    GeneralizedHpPda,
    Library,
    MdsCode,
    Participant,
    SchemeInstance,
    SplitFile,
    TDesign,
    Transmission,
    UserTranscript,
)
from app.schemas.schemas import FeasibilityReport
from app.services.design_service import DesignService
from app.services.hppda_service import HppdaService
from app.services.mds_service import MdsError, MdsService
from app.services.pda_service import PdaService

logger = logging.getLogger(__name__)


class SchemeError(ValueError):
    """Placement, delivery or decoding could not be carried out."""


class InfeasibleParametersError(SchemeError):
    """The a_{s,j} map violates the Y_j chain, so some users cannot decode."""


class DemandError(SchemeError):
    """Malformed demand vector or not enough files for distinct demands."""


class SchemeService:
    """Placement, delivery, decoding and rate accounting."""

    # -- library -----------------------------------------------------------

    @staticmethod
    def generate_library(n_files: int, file_bytes: int, seed: Optional[int] = None) -> Library:
        if n_files < 1:
            raise SchemeError(f"library needs at least one file, got N={n_files}")
        seed = settings.seed if seed is None else seed
        rng = np.random.default_rng(seed)
        files = tuple(rng.bytes(file_bytes) for _ in range(n_files))
        return Library(files=files, seed=seed, source="generated")

    @staticmethod
    def load_library(directory: Path) -> Library:
        """Each regular file in `directory`, sorted by name, is one library file."""
        directory = Path(directory)
        paths = sorted(p for p in directory.iterdir() if p.is_file())
        if not paths:
            raise SchemeError(f"no files found in library directory {directory}")
        logger.info(f"Loaded {len(paths)} library files from {directory}")
        return Library(files=tuple(p.read_bytes() for p in paths), source=str(directory))

    # -- accounting --------------------------------------------------------

    @staticmethod
    def active_users(v: int, t: int, r: int, I: Sequence[int]) -> Tuple[List[Subset], int]:
        """Users with at least one online cache, and K_o = Σ_j C(t,j) C(v-t,r-j)."""
        online = set(I)
        if len(online) != t:
            raise SchemeError(f"online set {sorted(online)} must have t={t} caches")
        users = [U for U in k_subsets(points(v), r) if online & set(U)]
        k_o = sum(binom(t, j) * binom(v - t, r - j) for j in range(1, r + 1))
        return users, k_o

    @staticmethod
    def stranded_users(v: int, r: int, I: Sequence[int]) -> List[Subset]:
        online = set(I)
        return [U for U in k_subsets(points(v), r) if not online & set(U)]

    @staticmethod
    def rate(g: GeneralizedHpPda) -> Tuple[Fraction, Fraction]:
        """
        Closed-form rate/memory pair of the scheme.

        Returns:
            (M/N, R) = (λ_1 / D, Σ_j S_j / D) with D = Y_r.
        """
        report = HppdaService.feasibility(g)
        D = report.D
        transmissions = sum(p.S for p in g.params.per_j.values())
        return Fraction(g.params.Z_c, D), Fraction(transmissions, D)

    @staticmethod
    def rate_for(d: TDesign, r: int, a: AMap) -> Tuple[Fraction, Fraction, FeasibilityReport]:
        """rate() from the closed forms alone, without building the arrays."""
        report = HppdaService.feasibility_for(d, r, a)
        a = HppdaService.check_a(d, r, a)
        transmissions = 0
        for j in range(1, r + 1):
            a_j = {s: v for (s, jj), v in a.items() if jj == j}
            transmissions += HppdaService.predicted_Bj(d, r, j, a_j).S
        lambda_1 = DesignService.lambda_s(d, 1)
        return Fraction(lambda_1, report.D), Fraction(transmissions, report.D), report

    @staticmethod
    def subpacketization(g: GeneralizedHpPda) -> int:
        return HppdaService.feasibility(g).D

    # -- placement ---------------------------------------------------------

    @staticmethod
    def place(g: GeneralizedHpPda, library: Library, code: Optional[MdsCode] = None) -> SchemeInstance:
        """
        Split every file into D subfiles, encode them into b coded subfiles with
        an [b, D] MDS code and store W^c_{n,A} in each cache i ∈ A.
        """
        report = HppdaService.feasibility(g)
        if not report.feasible:
            raise InfeasibleParametersError(f"infeasible a-map: {report.violation}")
        d = g.design
        code = code or MdsService.build_code(d.b, report.D)
        if code.n != d.b or code.d != report.D:
            raise SchemeError(f"code [{code.n},{code.d}] does not match [b,D]=[{d.b},{report.D}]")

        width = max(len(f) for f in library.files)
        splits: List[SplitFile] = []
        coded = []
        for data in library.files:
            padded = MdsService.split_file(data + bytes(width - len(data)), code)
            split = SplitFile(
                symbols=padded.symbols, length=len(data), pad_bits=padded.pad_bits + 8 * (width - len(data)),
            )
            splits.append(split)
            coded.append(MdsService.mds_encode(code, split.symbols))

        contents: Dict[int, Dict[Tuple[int, Subset], object]] = {i: {} for i in points(d.v)}
        for f, A in enumerate(d.blocks):
            for i in A:
                for n in range(1, library.N + 1):
                    contents[i][(n, A)] = coded[n - 1][f]

        instance = SchemeInstance(
            hppda=g, code=code, library=library, split=tuple(splits), coded=tuple(coded), cache_contents=contents,
        )
        logger.info(
            f"Placement finished: N={library.N}, D={code.d}, {library.N * g.params.Z_c} coded subfiles per cache, "
            f"M/N={g.params.Z_c}/{code.d}"
        )
        return instance

    # -- demands -----------------------------------------------------------

    @staticmethod
    def make_demand(instance: SchemeInstance, I: Sequence[int], demands: Mapping[Subset, int]) -> DemandVector:
        d = instance.hppda.design
        users, _ = SchemeService.active_users(d.v, d.t, instance.hppda.r, I)
        missing = [U for U in users if U not in demands]
        if missing:
            raise DemandError(f"no demand for active users {[render_subset(U) for U in missing[:5]]}")
        extra = [U for U in demands if U not in set(users)]
        if extra:
            raise DemandError(f"demands given for inactive users {[render_subset(U) for U in extra[:5]]}")
        for U, n in demands.items():
            if not 1 <= n <= instance.library.N:
                raise DemandError(f"user {render_subset(U)} demands file {n} outside [1, N={instance.library.N}]")
        return DemandVector(online=tuple(sorted(I)), demands={U: demands[U] for U in users})

    @staticmethod
    def worst_case_demand(instance: SchemeInstance, I: Sequence[int]) -> DemandVector:
        """Distinct files 1..K_o to the active users in lexicographic order."""
        d = instance.hppda.design
        users, k_o = SchemeService.active_users(d.v, d.t, instance.hppda.r, I)
        if instance.library.N < k_o:
            raise DemandError(f"worst-case demands need N >= K_o={k_o}, library has N={instance.library.N}")
        return SchemeService.make_demand(instance, I, {U: n for n, U in enumerate(users, start=1)})

    @staticmethod
    def seeded_demand(instance: SchemeInstance, I: Sequence[int], seed: int) -> DemandVector:
        """Independent uniform demands (repeats allowed)."""
        d = instance.hppda.design
        users, _ = SchemeService.active_users(d.v, d.t, instance.hppda.r, I)
        rng = np.random.default_rng(seed)
        picks = rng.integers(1, instance.library.N + 1, size=len(users))
        return SchemeService.make_demand(instance, I, {U: int(n) for U, n in zip(users, picks)})

    @staticmethod
    def parse_demand_text(text: str) -> Dict[Subset, int]:
        """Lines `user = file`, e.g. `24 = 3`; `#` starts a comment."""
        demands: Dict[Subset, int] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DemandError(f"line {lineno}: expected `user = file`, got {raw!r}")
            user, _, value = line.partition("=")
            try:
                demands[parse_subset(user)] = int(value)
            except ValueError as exc:
                raise DemandError(f"line {lineno}: {exc}") from exc
        return demands

    @staticmethod
    def resolve_demand(instance: SchemeInstance, I: Sequence[int], spec: str) -> DemandVector:
        """`worst`, `seed:N`, or a path to a demand file."""
        spec = spec.strip()
        if spec == "worst":
            return SchemeService.worst_case_demand(instance, I)
        if spec.startswith("seed:"):
            try:
                seed = int(spec[len("seed:"):])
            except ValueError as exc:
                raise DemandError(f"bad demand seed in {spec!r}") from exc
            return SchemeService.seeded_demand(instance, I, seed)
        path = Path(spec)
        if not path.is_file():
            raise DemandError(f"demand spec {spec!r} is not `worst`, `seed:N` or a readable file")
        return SchemeService.make_demand(instance, I, SchemeService.parse_demand_text(path.read_text(encoding="utf-8")))

    # -- delivery ----------------------------------------------------------

    @staticmethod
    def deliver(instance: SchemeInstance, dv: DemandVector, decode: bool = True) -> DeliverySession:
        """
        One XOR transmission per label of every B_j, j ascending then label
        order. Rows map to zeta_j(I) blocks and columns to tau_j(I) users.
        """
        g = instance.hppda
        d = g.design
        I = tuple(sorted(dv.online))
        users, _ = SchemeService.active_users(d.v, d.t, g.r, I)
        if set(dv.demands) != set(users):
            raise DemandError("demand vector does not cover exactly the active users")
        block_row = {A: f for f, A in enumerate(d.blocks)}

        transmissions: List[Transmission] = []
        for j in range(1, g.r + 1):
            if j not in g.B:
                continue
            blocks = HppdaService.zeta(d, I, j, g.a_for(j))
            tau = HppdaService.tau(d, g.r, I, j)
            for label, cells in PdaService.pda_multicast_groups(g.B[j]).items():
                participants = tuple(Participant(user=tau[k], block=blocks[f]) for f, k in cells)
                payload = MdsService.xor_rows(
                    [instance.coded[dv.demands[p.user] - 1][block_row[p.block]] for p in participants]
                )
                transmissions.append(Transmission(
                    index=len(transmissions) + 1, j=j, label=label, participants=participants, payload=payload,
                ))
        stranded = tuple(SchemeService.stranded_users(d.v, g.r, I))
        session = DeliverySession(
            online=I, demand=dv, transmissions=tuple(transmissions), stranded=stranded, seed=instance.library.seed,
        )
        logger.debug(f"Delivery for I={I}: {len(transmissions)} transmissions, {len(stranded)} stranded users")
        if not decode:
            return session
        per_user = {U: SchemeService.decode_user(instance, session, U) for U in users}
        return session.model_copy(update={"per_user": per_user})

    @staticmethod
    def decode_user(instance: SchemeInstance, session: DeliverySession, U: Subset) -> UserTranscript:
        """
        Gather the demanded file's coded subfiles readable through U's online
        caches, peel every transmission U takes part in, then MDS-decode.
        """
        g = instance.hppda
        d = g.design
        U = tuple(sorted(U))
        J = tuple(c for c in U if c in set(session.online))
        if not J:
            raise SchemeError(f"user {render_subset(U)} has no online cache")
        demand = session.demand.demands[U]
        block_row = {A: f for f, A in enumerate(d.blocks)}

        readable: Dict[Tuple[int, Subset], object] = {}
        for c in J:
            readable.update(instance.cache_contents[c])

        shares: Dict[int, object] = {
            block_row[A]: payload for (n, A), payload in readable.items() if n == demand
        }
        cached = tuple(sorted(d.blocks[f] for f in shares))

        delivered: List[Subset] = []
        used: List[int] = []
        for tx in session.transmissions:
            mine = [p for p in tx.participants if p.user == U]
            if not mine:
                continue
            own = mine[0]
            known = []
            for p in tx.participants:
                if p.user == U:
                    continue
                key = (session.demand.demands[p.user], p.block)
                if key not in readable:
                    raise SchemeError(
                        f"user {render_subset(U)} cannot peel transmission {tx.index}: "
                        f"block {render_subset(p.block)} is not in its online caches"
                    )
                known.append(readable[key])
            recovered = MdsService.xor_rows([tx.payload] + known) if known else tx.payload.copy()
            row = block_row[own.block]
            if row in shares:
                raise SchemeError(f"user {render_subset(U)} received block {render_subset(own.block)} twice")
            shares[row] = recovered
            delivered.append(own.block)
            used.append(tx.index)

        code = instance.code
        if len(shares) < code.d:
            logger.error(f"User {render_subset(U)} at I={session.online} gathered {len(shares)} < D={code.d} subfiles")
            raise SchemeError(f"user {render_subset(U)} gathered {len(shares)} coded subfiles, needs {code.d}")
        try:
            message = MdsService.mds_decode(code, shares)
        except MdsError as exc:
            raise SchemeError(f"user {render_subset(U)}: {exc}") from exc
        split = instance.split[demand - 1]
        payload = MdsService.join_file(message, split.length, code)
        return UserTranscript(
            user=U,
            j=len(J),
            demand=demand,
            cached_blocks=cached,
            delivered_blocks=tuple(delivered),
            transmissions=tuple(used),
            decoded=True,
            matches_library=payload == instance.library.files[demand - 1],
            payload=payload,
        )

    # -- session export ----------------------------------------------------

    @staticmethod
    def session_frames(session: DeliverySession) -> Tuple[pd.DataFrame, pd.DataFrame]:
        tx_rows = [
            {
                "index": tx.index,
                "j": tx.j,
                "label": tx.label.render(),
                "users": " ".join(render_subset(u) for u in tx.users()),
                "blocks": " ".join(render_subset(p.block) for p in tx.participants),
            }
            for tx in session.transmissions
        ]
        user_rows = [
            {
                "user": render_subset(U),
                "j": tr.j,
                "demand": tr.demand,
                "cached": len(tr.cached_blocks),
                "delivered": len(tr.delivered_blocks),
                "decoded": tr.decoded and tr.matches_library,
                "seed": "" if session.seed is None else session.seed,
            }
            for U, tr in session.per_user.items()
        ]
        tx_frame = pd.DataFrame(tx_rows, columns=["index", "j", "label", "users", "blocks"])
        user_frame = pd.DataFrame(user_rows, columns=["user", "j", "demand", "cached", "delivered", "decoded", "seed"])
        return tx_frame, user_frame

    @staticmethod
    def session_csv(session: DeliverySession) -> Tuple[str, str]:
        tx_frame, user_frame = SchemeService.session_frames(session)
        tx_buf, user_buf = StringIO(), StringIO()
        tx_frame.to_csv(tx_buf, index=False, lineterminator="\n")
        user_frame.to_csv(user_buf, index=False, lineterminator="\n")
        return tx_buf.getvalue(), user_buf.getvalue()

    @staticmethod
    def session_text(session: DeliverySession) -> str:
        lines = [
            f"# online {','.join(str(c) for c in session.online)}; seed {session.seed}; "
            f"{len(session.transmissions)} transmissions; stranded {' '.join(render_subset(u) for u in session.stranded) or '-'}"
        ]
        for tx in session.transmissions:
            terms = " + ".join(
                f"W[d{render_subset(p.user)},{render_subset(p.block)}]" for p in tx.participants
            )
            lines.append(f"X{tx.index} (j={tx.j}, {tx.label.render()}): {terms}")
        for U, tr in session.per_user.items():
            status = "ok" if tr.decoded and tr.matches_library else "FAIL"
            lines.append(
                f"user {render_subset(U)}: file {tr.demand}, {len(tr.cached_blocks)} cached + "
                f"{len(tr.delivered_blocks)} delivered, {status}"
            )
        return "\n".join(lines) + "\n"

    # -- one-shot simulation -----------------------------------------------

    @staticmethod
    def simulate(
        g: GeneralizedHpPda,
        online: Sequence[int],
        n_files: int,
        demands: Union[str, Sequence[int]] = "worst",
        seed: Optional[int] = None,
        library: Optional[Library] = None,
    ) -> Tuple[SchemeInstance, DeliverySession]:
        """
        Place a library (generated unless given), build the demand and deliver.

        `demands` is a demand spec for resolve_demand or one file index per
        active user in lexicographic user order.
        """
        D = SchemeService.subpacketization(g)
        library = library or SchemeService.generate_library(n_files, settings.subfile_bytes * D, seed)
        instance = SchemeService.place(g, library)
        if isinstance(demands, str):
            dv = SchemeService.resolve_demand(instance, online, demands)
        else:
            d = g.design
            users, _ = SchemeService.active_users(d.v, d.t, g.r, online)
            if len(demands) != len(users):
                raise DemandError(f"{len(users)} active users but {len(demands)} demands given")
            dv = SchemeService.make_demand(instance, online, dict(zip(users, demands)))
        return instance, SchemeService.deliver(instance, dv)
