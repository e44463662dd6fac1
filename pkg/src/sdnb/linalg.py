"""Linear algebra over K (and over F_p) for the verification pipeline.

Elimination always pivots on the entry of least valuation, which keeps the
precision loss equal to the valuations actually divided out.
"""

from __future__ import annotations

from .errors import SingularSystem
from .fields import Elem, Level, determinant, divide_inverse


def coordinates_over(z: Elem, S: Level) -> list[Elem]:
    """Coordinates of z over the monomial S-basis of its level."""
    blk = S.dim
    return [Elem.make(S, z.c[k * blk:(k + 1) * blk], z.s, z.prec) for k in range(z.F.dim // blk)]


def _negligible(z: Elem, slack: int) -> bool:
    return z.is_zero() or z.vmin >= z.prec - slack


def echelon_select(rows: list[list[Elem]], slack: int = 2) -> list[int]:
    """Indices of a maximal independent subset of ``rows``."""
    work = [list(r) for r in rows]
    alive = list(range(len(work)))
    chosen = []
    ncols = len(work[0]) if work else 0
    used_cols: set[int] = set()
    while True:
        best = None
        for r in alive:
            for c in range(ncols):
                if c in used_cols:
                    continue
                z = work[r][c]
                if _negligible(z, slack):
                    continue
                v = z.valuation_or_bound()
                if best is None or v < best[0]:
                    best = (v, r, c)
        if best is None:
            return chosen
        _, r, c = best
        chosen.append(r)
        used_cols.add(c)
        alive.remove(r)
        inv = divide_inverse(work[r][c])
        for r2 in alive:
            if work[r2][c].is_zero():
                continue
            f = work[r2][c] * inv
            work[r2] = [a - f * b for a, b in zip(work[r2], work[r])]


def solve_overdetermined(columns: list[list[Elem]], target: list[Elem], slack: int = 3) -> list[Elem]:
    """Solve ``sum_i c_i columns[i] = target`` (n equations, m <= n unknowns).

    Raises SingularSystem if the columns are dependent or the system is
    inconsistent beyond ``slack`` digits.
    """
    m = len(columns)
    n = len(target)
    A = [[columns[i][r] for i in range(m)] + [target[r]] for r in range(n)]
    pivots = []
    rows = list(range(n))
    for col in range(m):
        best = None
        for r in rows:
            z = A[r][col]
            if _negligible(z, slack):
                continue
            v = z.valuation_or_bound()
            if best is None or v < best[0]:
                best = (v, r)
        if best is None:
            raise SingularSystem(f"column {col} has no usable pivot")
        r = best[1]
        rows.remove(r)
        pivots.append(r)
        inv = divide_inverse(A[r][col])
        for r2 in rows:
            if A[r2][col].is_zero():
                continue
            f = A[r2][col] * inv
            A[r2] = [a - f * b for a, b in zip(A[r2], A[r])]
    for r in rows:
        if not _negligible(A[r][m], slack):
            raise SingularSystem(f"inconsistent equation (residual {A[r][m].vmin})")
    sol = [None] * m
    for col in range(m - 1, -1, -1):
        r = pivots[col]
        acc = A[r][m]
        for k in range(col + 1, m):
            acc = acc - A[r][k] * sol[k]
        sol[col] = acc * divide_inverse(A[r][col])
    return sol


def berkowitz(M: list[list[Elem]]) -> list[Elem]:
    """Coefficients of ``det(X I - M)``, leading first, without division."""
    n = len(M)
    S = M[0][0].F
    prec = min(z.prec for row in M for z in row)
    one = S.one(prec)
    vect = [one]
    for r in range(n):
        a = M[r][r]
        R = M[r][:r]
        C = [M[i][r] for i in range(r)]
        A = [row[:r] for row in M[:r]]
        t = [one, -a]
        v = C
        for _ in range(r):
            t.append(-sum((x * y for x, y in zip(R, v)), S.zero(prec)))
            v = [sum((A[i][k] * v[k] for k in range(r)), S.zero(prec)) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = S.zero(prec)
            for jj in range(min(i, r) + 1):
                if i - jj < len(t):
                    acc = acc + t[i - jj] * vect[jj]
            new.append(acc)
        vect = new
    return vect


def sylvester(f: list[Elem], g: list[Elem]) -> list[list[Elem]]:
    """Sylvester matrix of two polynomials given leading coefficient first."""
    n, m = len(f) - 1, len(g) - 1
    S = f[0].F
    prec = min(z.prec for z in f + g)
    size = n + m
    zero = S.zero(prec)
    rows = []
    for i in range(m):
        rows.append([zero] * i + list(f) + [zero] * (size - n - 1 - i))
    for i in range(n):
        rows.append([zero] * i + list(g) + [zero] * (size - m - 1 - i))
    return rows


def discriminant(f: list[Elem]) -> Elem:
    """Discriminant of a monic polynomial (leading coefficient first)."""
    n = len(f) - 1
    deriv = [f[i] * (n - i) for i in range(n)]
    res = determinant(sylvester(f, deriv))
    return res if (n * (n - 1) // 2) % 2 == 0 else -res


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    M = [[x % p for x in r] for r in rows]
    rank, ncols = 0, len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][c]:
                f = M[r][c]
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


__all__ = [
    "berkowitz",
    "coordinates_over",
    "determinant",
    "discriminant",
    "echelon_select",
    "rank_mod_p",
    "solve_overdetermined",
    "sylvester",
]
