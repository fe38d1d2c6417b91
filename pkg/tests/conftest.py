from __future__ import annotations

import pytest

from lamegap.families import build_family
from lamegap.neck import DIM2, DIM3


@pytest.fixture(scope="session")
def families_depth3():
    """Integral-route families to depth 3 for every alpha in scope, cached."""
    fams = {}
    for dim in (DIM2, DIM3):
        n = dim.d * (dim.d + 1) // 2
        for alpha in range(1, n + 1):
            fams[(dim.d, alpha)] = build_family(dim, alpha, 3, route="integral")
    return fams


@pytest.fixture(scope="session")
def families_depth5():
    """Integral-route families to depth 5 for the required check matrix."""
    fams = {}
    for dim in (DIM2, DIM3):
        for alpha in (1, 2, 3):
            fams[(dim.d, alpha)] = build_family(dim, alpha, 5, route="integral")
    return fams
