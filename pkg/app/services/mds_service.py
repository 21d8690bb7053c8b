"""
MDS Service: systematic Reed-Solomon erasure code over GF(2^m).

The generator is a d×n Vandermonde matrix on the distinct nodes 0..n-1,
brought to systematic form. Codewords are generatorᵀ · message, so coded
subfile f is column f of the generator applied to the d message rows.
"""

import logging
from functools import lru_cache
from itertools import combinations, islice
from typing import Mapping, Sequence, Tuple

import galois
import numpy as np

from app.models.models import FieldSpec, MdsCode, SplitFile

logger = logging.getLogger(__name__)


class MdsError(ValueError):
    """Bad code parameters or payload shapes."""


class InsufficientSharesError(MdsError):
    """Fewer than d coded subfiles were offered to the decoder."""


class SingularSubmatrixError(MdsError):
    """A d-column submatrix of the generator is singular (broken MDS property)."""


def field_for(n: int) -> FieldSpec:
    """Smallest extension field GF(2^m), m >= 2, with at least n elements."""
    if n < 1:
        raise MdsError(f"code length n={n} must be positive")
    m = max(2, (n - 1).bit_length())
    GF = galois.GF(2**m)
    return FieldSpec(m=m, poly=int(GF.irreducible_poly))


def gf(field: FieldSpec):
    """The galois field class for a FieldSpec."""
    return galois.GF(field.order, irreducible_poly=field.poly)


@lru_cache(maxsize=None)
def _generator(n: int, d: int, m: int, poly: int):
    GF = galois.GF(2**m, irreducible_poly=poly)
    nodes = GF(np.arange(n))
    vander = GF(np.ones((d, n), dtype=np.int64))
    for i in range(1, d):
        vander[i] = nodes**i
    systematic = np.linalg.inv(vander[:, :d]) @ vander
    systematic.flags.writeable = False
    return systematic


@lru_cache(maxsize=4096)
def _decoder(n: int, d: int, m: int, poly: int, chosen: Tuple[int, ...]):
    G = _generator(n, d, m, poly)
    try:
        inv = np.linalg.inv(G[:, list(chosen)].T)
    except np.linalg.LinAlgError as exc:
        raise SingularSubmatrixError(f"columns {chosen} of the [{n},{d}] generator are singular") from exc
    inv.flags.writeable = False
    return inv


def _batch_nonsingular(mats) -> np.ndarray:
    """Per-matrix nonsingularity of a (B, d, d) stack of field matrices."""
    M = mats.copy()
    batch, d, _ = M.shape
    rows = np.arange(batch)
    ok = np.ones(batch, dtype=bool)
    for c in range(d):
        candidates = M[:, c:, c] != 0
        has_pivot = candidates.any(axis=1)
        ok &= has_pivot
        pivot_row = c + np.argmax(candidates, axis=1)
        top = M[rows, c].copy()
        M[rows, c] = M[rows, pivot_row]
        M[rows, pivot_row] = top
        pivot = M[:, c, c].copy()
        pivot[~has_pivot] = 1
        M[:, c] = M[:, c] / pivot[:, None]
        factors = M[:, :, c].copy()
        factors[:, c] = 0
        M = M - factors[:, :, None] * M[:, c][:, None, :]
    return ok


class MdsService:
    """Encode, decode and file splitting for the coded placement."""

    @staticmethod
    def build_code(n: int, d: int) -> MdsCode:
        if not 1 <= d <= n:
            raise MdsError(f"need 1 <= d <= n, got [n,d]=[{n},{d}]")
        field = field_for(n)
        generator = _generator(n, d, field.m, field.poly)
        logger.debug(f"Built [{n},{d}] MDS code over GF(2^{field.m})")
        return MdsCode(n=n, d=d, field=field, generator=generator)

    @staticmethod
    def identity_code(d: int) -> MdsCode:
        """The degenerate [d,d] code: encode is the identity."""
        return MdsService.build_code(d, d)

    @staticmethod
    def _as_message(code: MdsCode, subfiles):
        GF = gf(code.field)
        if isinstance(subfiles, np.ndarray):
            rows = subfiles
        else:
            lengths = {len(row) for row in subfiles}
            if len(lengths) > 1:
                raise MdsError(f"subfile length mismatch: {sorted(lengths)}")
            rows = np.array([np.asarray(row, dtype=np.int64) for row in subfiles])
        if rows.ndim != 2 or rows.shape[0] != code.d:
            raise MdsError(f"expected {code.d} subfiles, got shape {rows.shape}")
        return rows if isinstance(rows, GF) else GF(np.asarray(rows, dtype=np.int64))

    @staticmethod
    def mds_encode(code: MdsCode, subfiles) -> "galois.FieldArray":
        """d equal-length symbol rows → n coded rows (generatorᵀ · message)."""
        message = MdsService._as_message(code, subfiles)
        return code.generator.T @ message

    @staticmethod
    def mds_decode(code: MdsCode, shares: Mapping[int, Sequence[int]]) -> "galois.FieldArray":
        """Recover the d message rows from any d of the coded rows (lowest indices used)."""
        if len(shares) < code.d:
            raise InsufficientSharesError(f"insufficient shares: {len(shares)} offered, {code.d} needed")
        chosen = tuple(sorted(shares)[: code.d])
        if chosen[0] < 0 or chosen[-1] >= code.n:
            raise MdsError(f"share index outside [0, {code.n})")
        GF = gf(code.field)
        received = GF(np.array([np.asarray(shares[i], dtype=np.int64) for i in chosen]))
        inv = _decoder(code.n, code.d, code.field.m, code.field.poly, chosen)
        return inv @ received

    @staticmethod
    def is_mds(code: MdsCode, chunk: int = 4096) -> bool:
        """
        Exhaustive: every d-column submatrix of the generator is invertible.

        Column sets are checked in batches by Gauss-Jordan elimination over the
        field, so [20,11]-sized codes finish in seconds.
        """
        G = code.generator
        subsets = combinations(range(code.n), code.d)
        while True:
            batch = list(islice(subsets, chunk))
            if not batch:
                return True
            cols = np.array(batch)
            nonsingular = _batch_nonsingular(G[:, cols].transpose(1, 0, 2))
            if not nonsingular.all():
                bad = batch[int(np.argmin(nonsingular))]
                logger.error(f"Singular column set {bad} in [{code.n},{code.d}] code")
                return False

    # -- files <-> symbol rows ---------------------------------------------

    @staticmethod
    def split_file(data: bytes, code: MdsCode) -> SplitFile:
        """
        Cut a file into d rows of m-bit symbols (MSB first), zero-padding the
        tail so the bit count is a positive multiple of d·m.
        """
        m, d = code.field.m, code.d
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        chunk = d * m
        total = max(chunk, -(-bits.size // chunk) * chunk)
        pad_bits = total - bits.size
        bits = np.concatenate([bits, np.zeros(pad_bits, dtype=np.uint8)])
        weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
        values = bits.reshape(-1, m).astype(np.int64) @ weights
        GF = gf(code.field)
        return SplitFile(symbols=GF(values.reshape(d, -1)), length=len(data), pad_bits=int(pad_bits))

    @staticmethod
    def join_file(symbols, length: int, code: MdsCode) -> bytes:
        m = code.field.m
        values = np.asarray(symbols, dtype=np.int64).reshape(-1)
        shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
        bits = ((values[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
        return np.packbits(bits[: length * 8]).tobytes()

    @staticmethod
    def xor_rows(rows: Sequence) -> "galois.FieldArray":
        """Field sum (bitwise XOR in characteristic 2) of equal-shape rows."""
        total = rows[0].copy()
        for row in rows[1:]:
            total = total + row
        return total
