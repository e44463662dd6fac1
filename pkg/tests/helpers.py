from __future__ import annotations

from functools import lru_cache

from sdnb.basis import build_tower


@lru_cache(maxsize=None)
def tower(p: int, d: int, n: tuple | None = None, precision: int = 24):
    n = n if n is not None else (1,) + (0,) * (d - 1)
    return build_tower(p, d, n, precision)
