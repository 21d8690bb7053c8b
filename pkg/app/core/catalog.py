"""
Catalog of shipped designs.

Names are what `catalog:NAME` resolves to on the CLI and in API bodies; the
block lists are kept exactly as published and are validated on every load.
"""

from enum import Enum
from typing import Dict, List, Tuple


class CatalogDesign(str, Enum):
    """Designs shipped with the toolkit."""
    STEINER_3_8_4_1 = "3-8-4-1"
    FANO = "fano"


# Parameters (v, k, t, lambda) per catalog design.
CATALOG_PARAMS: Dict[CatalogDesign, Tuple[int, int, int, int]] = {
    CatalogDesign.STEINER_3_8_4_1: (8, 4, 3, 1),
    CatalogDesign.FANO: (7, 3, 2, 1),
}

# Block lists in the order they are usually printed; the loader sorts them.
CATALOG_BLOCKS: Dict[CatalogDesign, List[str]] = {
    CatalogDesign.STEINER_3_8_4_1: [
        "1256", "3478", "2468", "1357", "1458", "2367", "1234",
        "5678", "1278", "3456", "1368", "2457", "1467", "2358",
    ],
    CatalogDesign.FANO: ["124", "235", "346", "457", "156", "267", "137"],
}

COMPLETE_PREFIX = "complete:"
CATALOG_PREFIX = "catalog:"

# Complete designs exercised alongside the catalog in property tests.
TEST_COMPLETE_FAMILY: List[Tuple[int, int, int]] = [(6, 3, 2), (7, 4, 3)]


def catalog_names() -> List[str]:
    return [d.value for d in CatalogDesign]
