"""Exhaustive asdim-at-scale for small spaces.

A certificate with n+1 colors exists iff the points can be colored with
n+1 colors so that, inside every color class, each r-connected component
has diameter <= bound.  (Given any certificate, assign each point one of
its colors; components of a color class then sit inside single pieces.)
The property is hereditary, so a backtracking search that prunes partial
colorings is exact.
"""

from __future__ import annotations

import numpy as np

from ..spaces import FinSpace, r_components

__all__ = ["class_ok", "exact_asdim"]


def class_ok(space: FinSpace, members: list[int], r: int, bound: int) -> bool:
    if len(members) <= 1:
        return True
    return r_components(space, r, members).max_diameter <= bound


def exact_asdim(space: FinSpace, r: int, bound: int, n_max: int = 11) -> int | None:
    """Smallest n admitting a certificate, or None if n_max is not enough."""
    n = len(space)
    if n == 0:
        return 0
    d = space.dist
    if np.any(np.diag(d) > bound):
        return None
    for colors in range(1, n_max + 2):
        if _colorable(space, r, bound, colors):
            return colors - 1
    return None


def _colorable(space: FinSpace, r: int, bound: int, k: int) -> bool:
    n = len(space)
    classes: list[list[int]] = [[] for _ in range(k)]

    def place(i: int, used: int) -> bool:
        if i == n:
            return True
        # colors beyond the first unused one are symmetric
        for c in range(min(used + 1, k)):
            classes[c].append(i)
            if class_ok(space, classes[c], r, bound) and place(i + 1, max(used, c + 1)):
                return True
            classes[c].pop()
        return False

    return place(0, 0)
