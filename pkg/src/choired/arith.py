"""Elementary exact arithmetic: Kronecker symbols, squarefree sieves, totients.

Counts are exact integers; the only floating point quantities are the
squarefree asymptotics, evaluated with zeta(2) = pi^2/6 in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ZETA2 = math.pi ** 2 / 6

# (a|2) indexed by a mod 8
_KRONECKER_2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for n >= 0."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1 if a in (1, -1) else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    v = (n & -n).bit_length() - 1
    n >>= v
    k = _KRONECKER_2[a & 7] if v & 1 else 1
    # n is odd and positive: a plain Jacobi symbol, periodic in a mod n
    a %= n
    while a:
        while a & 1 == 0:
            a >>= 1
            if n & 7 in (3, 5):
                k = -k
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            k = -k
        a %= n
    return k if n == 1 else 0


@lru_cache(maxsize=None)
def kronecker_table(q: int) -> np.ndarray:
    """Lookup table for D -> (D|q) at a prime q, indexed by D mod len(table).

    The table has length 8 for q = 2 and length q otherwise.
    """
    if q == 2:
        table = np.array(_KRONECKER_2, dtype=np.int8)
    else:
        table = np.full(q, -1, dtype=np.int8)
        table[(np.arange(1, q, dtype=np.int64) ** 2) % q] = 1
        table[0] = 0
    table.setflags(write=False)
    return table


def kronecker_vec(D: np.ndarray, q: int) -> np.ndarray:
    """Vectorised (D|q) for a prime q."""
    table = kronecker_table(q)
    return table[np.asarray(D) % len(table)]


@lru_cache(maxsize=8)
def primes_upto(n: int) -> np.ndarray:
    """All primes p <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    out = np.flatnonzero(is_prime).astype(np.int64)
    out.setflags(write=False)
    return out


def primes_between(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    if hi < lo:
        return []
    ps = primes_upto(hi)
    return [int(p) for p in ps[np.searchsorted(ps, lo) :]]


def factor(n: int, bound: int | None = None) -> dict[int, int]:
    """Trial-division factorisation of |n| >= 1.

    With ``bound`` set, raises ValueError if a cofactor survives trial
    division up to ``bound``.
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    limit = math.isqrt(n) if bound is None else min(bound, math.isqrt(n))
    d = 2
    while d <= limit and n > 1:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out[d] = e
            limit = math.isqrt(n) if bound is None else min(bound, math.isqrt(n))
        d += 1 if d == 2 else 2
    if n > 1:
        if bound is not None and n > bound * bound:
            raise ValueError(f"cofactor {n} not fully factored below trial bound {bound}")
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factor(n).values())


def valuation(n: int, q: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


@dataclass(frozen=True)
class SquarefreeSieve:
    """Squarefree flags for the half-open range [lo, hi)."""

    lo: int
    hi: int
    flags: np.ndarray

    def __getitem__(self, n: int) -> bool:
        if not self.lo <= n < self.hi:
            raise IndexError(n)
        return bool(self.flags[n - self.lo])

    def __len__(self) -> int:
        return self.hi - self.lo

    def squarefree(self) -> np.ndarray:
        return np.flatnonzero(self.flags).astype(np.int64) + self.lo


def sieve_squarefree(lo: int, hi: int) -> SquarefreeSieve:
    if not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi})")
    flags = np.ones(hi - lo, dtype=bool)
    for q in primes_upto(math.isqrt(hi - 1)):
        q2 = int(q) * int(q)
        start = -lo % q2
        flags[start::q2] = False
    return SquarefreeSieve(lo, hi, flags)


def _chunks(lo: int, hi: int, size: int):
    while lo < hi:
        yield lo, min(hi, lo + size)
        lo += size


def count_squarefree_in_ap(x: int, a: int, b: int, chunk_size: int = 1 << 22) -> int:
    """Exact number of squarefree n with 0 < n < x and n = a (mod b)."""
    if b <= 0:
        raise ValueError("modulus must be positive")
    if math.gcd(a, b) != 1:
        raise ValueError(f"gcd({a}, {b}) != 1")
    total = 0
    for lo, hi in _chunks(1, x, chunk_size):
        sv = sieve_squarefree(lo, hi)
        total += int(sv.flags[(a - lo) % b :: b].sum())
    return total


def asymptotic_squarefree_in_ap(x: float, a: int, b: int) -> float:
    """Main term x/zeta(2) * 1/b * prod_{q|b} (1 - q^-2)^-1."""
    if b <= 0:
        raise ValueError("modulus must be positive")
    if math.gcd(a, b) != 1:
        raise ValueError(f"gcd({a}, {b}) != 1")
    val = x / ZETA2 / b
    for q in factor(b):
        val /= 1 - 1 / (q * q)
    return val


@dataclass(frozen=True)
class FundamentalDiscriminant:
    D: int
    d: int


def fundamental_discriminant(d: int) -> FundamentalDiscriminant:
    """Discriminant of Q(sqrt(d)) for negative squarefree d."""
    if d >= 0:
        raise ValueError(f"d must be negative, got {d}")
    if not is_squarefree(d):
        raise ValueError(f"d = {d} is not squarefree")
    return FundamentalDiscriminant(d if d % 4 == 1 else 4 * d, d)


def is_fundamental_discriminant(D: int) -> bool:
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        d = D // 4
        return d % 4 in (2, 3) and is_squarefree(d)
    return False


def euler_phi(n: int, factorization) -> int:
    """Totient of n from its factorisation, given as (prime, exponent) pairs or a dict."""
    items = list(factorization.items()) if isinstance(factorization, dict) else list(factorization)
    if n <= 0:
        raise ValueError("n must be positive")
    prod = 1
    phi = 1
    seen = set()
    for q, e in items:
        if q in seen or e < 1 or not is_prime(q):
            raise ValueError(f"bad factorization entry ({q}, {e})")
        seen.add(q)
        prod *= q ** e
        phi *= (q - 1) * q ** (e - 1)
    if prod != n:
        raise ValueError(f"factorization multiplies to {prod}, not {n}")
    return phi
