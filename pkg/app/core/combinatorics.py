"""
Exact combinatorics shared by the design, array and rate code.

Subsets are always sorted tuples of 1-based points; every enumeration here is
lexicographic so that array row/column orders are reproducible.
"""

from itertools import combinations
from typing import Iterable, Iterator, List, Sequence, Tuple

Subset = Tuple[int, ...]


def binom(n: int, k: int) -> int:
    """C(n, k) computed multiplicatively; 0 outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    k = min(k, n - k)
    result = 1
    for i in range(1, k + 1):
        # exact at every step: result * (n - k + i) is divisible by i
        result = result * (n - k + i) // i
    return result


def exact_div(numerator: int, denominator: int) -> int:
    """Integer quotient, raising ValueError when the division leaves a remainder."""
    if denominator == 0:
        raise ValueError("division by zero in combinatorial quotient")
    q, rem = divmod(numerator, denominator)
    if rem:
        raise ValueError(f"{numerator}/{denominator} is not an integer")
    return q


def points(v: int) -> Subset:
    return tuple(range(1, v + 1))


def k_subsets(ground: Iterable[int], k: int) -> Iterator[Subset]:
    """All k-subsets of `ground` in lexicographic order."""
    return combinations(sorted(ground), k)


def lex_rank(subset: Sequence[int], ground: Sequence[int]) -> int:
    """
    0-based lexicographic rank of `subset` among the |subset|-subsets of `ground`.

    Direct combinadic count: for each position, add the number of subsets that
    share the prefix but take a smaller element there.
    """
    ground = sorted(ground)
    index = {p: i for i, p in enumerate(ground)}
    n, k = len(ground), len(subset)
    rank = 0
    prev = -1
    for pos, p in enumerate(sorted(subset)):
        cur = index[p]
        for skipped in range(prev + 1, cur):
            rank += binom(n - skipped - 1, k - pos - 1)
        prev = cur
    return rank


def render_subset(subset: Sequence[int]) -> str:
    """Compact subset label: `1256` for small points, `1.10.12` otherwise."""
    if not subset:
        return "{}"
    if all(p < 10 for p in subset):
        return "".join(str(p) for p in subset)
    return ".".join(str(p) for p in subset)


def parse_subset(text: str) -> Subset:
    """Inverse of render_subset; also accepts comma or space separated lists."""
    text = text.strip()
    if text in ("", "{}"):
        return ()
    for sep in (",", ".", " "):
        if sep in text:
            return tuple(sorted(int(p) for p in text.split(sep) if p.strip()))
    return tuple(sorted(int(ch) for ch in text))


def alternating_union_count(lambdas: List[int], r: int) -> int:
    """Σ_{i=1}^{r} (-1)^{i+1} C(r,i) λ_i: blocks meeting a fixed r-set (inclusion-exclusion)."""
    return sum((-1) ** (i + 1) * binom(r, i) * lambdas[i] for i in range(1, r + 1))
