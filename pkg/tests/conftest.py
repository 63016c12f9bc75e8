import numpy as np
import pytest

from udrs.cutting import spanning_arcs_from_centers
from udrs.geometry import SIDE, Square, make_frame


@pytest.fixture
def adjacent_frame():
    """Point cell directly above the query cell."""
    return make_frame(Square(0.0, 0.0, SIDE), Square(0.0, SIDE, SIDE))


def random_upper_arcset(frame, n, seed, min_count=None):
    """Spanning upper arcs from random centers in the query cell."""
    rng = np.random.default_rng(seed)
    centers = np.column_stack([
        rng.uniform(frame.cell_C.x0, frame.cell_C.x1, 4 * n),
        rng.uniform(frame.cell_C.y0, frame.cell_C.y1, 4 * n),
    ])
    aset, active, _, _ = spanning_arcs_from_centers(frame, centers, "upper")
    want = n if min_count is None else min_count
    assert len(aset) >= want, "not enough active arcs; widen the generator"
    return aset.subset(np.arange(min(n, len(aset))))
