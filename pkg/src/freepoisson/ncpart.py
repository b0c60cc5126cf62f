"""Noncrossing partitions of {1..n}: enumeration, refinement order and the
Kreweras complement.

Partitions are kept in a canonical form (blocks sorted ascending, blocks
ordered by minimum) so equality is structural and enumeration order is
reproducible.
"""

from functools import lru_cache
from math import comb

from .errors import DomainError, ShapeError, SizeLimitError, ValidationError

MAX_N = 16


def catalan(n):
    """The n-th Catalan number."""
    return comb(2 * n, n) // (n + 1)


class NcPartition:
    """A noncrossing partition of {1..n} in canonical form."""

    __slots__ = ("n", "blocks")

    def __init__(self, n, blocks):
        blocks = _canonical(blocks)
        _check_partition(n, blocks)
        if not _noncrossing(blocks):
            raise ValidationError("blocks are crossing", witness=[list(b) for b in blocks])
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, *a):
        raise AttributeError("NcPartition is immutable")

    def __eq__(self, other):
        return isinstance(other, NcPartition) and self.n == other.n \
            and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        return "NcPartition(%d, %s)" % (self.n, [list(b) for b in self.blocks])

    def __len__(self):
        """Number of blocks."""
        return len(self.blocks)

    def block_of(self, i):
        for b in self.blocks:
            if i in b:
                return b
        raise DomainError("element %d not in 1..%d" % (i, self.n))

    def to_json(self):
        return {"n": self.n, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["n"]), obj["blocks"])

    @classmethod
    def singletons(cls, n):
        return cls(n, [[i] for i in range(1, n + 1)])

    @classmethod
    def one_block(cls, n):
        return cls(n, [list(range(1, n + 1))])


def _canonical(blocks):
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


def _check_partition(n, blocks):
    if n < 1:
        raise DomainError("n must be >= 1, got %d" % n)
    seen = set()
    for b in blocks:
        if not b:
            raise ShapeError("empty block")
        for x in b:
            if not isinstance(x, int) or not 1 <= x <= n:
                raise ShapeError("element %r outside 1..%d" % (x, n))
            if x in seen:
                raise ShapeError("element %d repeated" % x)
            seen.add(x)
    if len(seen) != n:
        raise ShapeError("blocks do not cover 1..%d" % n)


def _noncrossing(blocks):
    # Elements of a noncrossing partition close like balanced parentheses:
    # scan 1..n keeping a stack of open blocks.
    owner = {}
    last = {}
    for bi, b in enumerate(blocks):
        for x in b:
            owner[x] = bi
        last[bi] = b[-1]
    n = len(owner)
    stack = []
    opened = set()
    for i in range(1, n + 1):
        bi = owner[i]
        if bi in opened:
            if not stack or stack[-1] != bi:
                return False
        else:
            opened.add(bi)
            stack.append(bi)
        if i == last[bi]:
            stack.pop()
    return True


def is_noncrossing(blocks, n=None):
    """True iff ``blocks`` is a noncrossing set partition of {1..n}."""
    if n is None:
        n = sum(len(b) for b in blocks)
    blocks = _canonical(blocks)
    _check_partition(n, blocks)
    return _noncrossing(blocks)


@lru_cache(maxsize=None)
def _enumerate_canonical(n):
    """All noncrossing partitions of {1..n} as canonical block tuples."""
    if n == 0:
        return ((),)
    out = []
    rest = list(range(2, n + 1))
    # Choose the block containing 1; the gaps it leaves between consecutive
    # members are partitioned independently (joining across a gap would
    # cross the first block).
    for mask in range(1 << (n - 1)):
        first = [1] + [x for i, x in enumerate(rest) if mask >> i & 1]
        ends = first[1:] + [n + 1]
        gaps = [(first[j] + 1, ends[j] - 1) for j in range(len(first))]
        choices = [_enumerate_canonical(hi - lo + 1) for lo, hi in gaps]

        def rec(k, acc):
            if k == len(choices):
                out.append(_canonical([tuple(first)] + acc))
                return
            lo = gaps[k][0]
            for sub in choices[k]:
                rec(k + 1, acc + [tuple(x + lo - 1 for x in b) for b in sub])

        rec(0, [])
    return tuple(sorted(out))


def enumerate_nc(n):
    """All of NC(n), lexicographic on the canonical block lists."""
    if n < 1:
        raise DomainError("n must be >= 1, got %d" % n)
    if n > MAX_N:
        raise SizeLimitError("n = %d exceeds the hard cap %d" % (n, MAX_N))
    parts = [NcPartition(n, [list(b) for b in blocks])
             for blocks in _enumerate_canonical(n)]
    parts.sort(key=lambda p: p.blocks)
    return parts


def refinement_leq(sigma, pi):
    """True iff every block of sigma is contained in a block of pi."""
    if sigma.n != pi.n:
        raise ShapeError("mismatched ground sets: %d vs %d" % (sigma.n, pi.n))
    owner = {}
    for bi, b in enumerate(pi.blocks):
        for x in b:
            owner[x] = bi
    for b in sigma.blocks:
        if len({owner[x] for x in b}) != 1:
            return False
    return True


def kreweras(pi):
    """Kreweras complement, via cycles of (block permutation)^-1 o (1..n).

    Each block acts as the cycle sending every element to the next larger
    one (largest wraps to smallest); composing its inverse with the full
    cycle i -> i+1 yields the complement's blocks.
    """
    n = pi.n
    nxt = {}
    for b in pi.blocks:
        for k, x in enumerate(b):
            nxt[x] = b[(k + 1) % len(b)]
    inv = {v: k for k, v in nxt.items()}
    gamma = lambda i: i % n + 1
    perm = {i: inv[gamma(i)] for i in range(1, n + 1)}
    seen = set()
    blocks = []
    for i in range(1, n + 1):
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        blocks.append(cyc)
    return NcPartition(n, blocks)


def relabel(pi, perm):
    """Apply an index map {1..n}->{1..n} to every element."""
    return NcPartition(pi.n, [[perm[x] for x in b] for b in pi.blocks])


def kreweras_brute(pi):
    """Oracle: the largest sigma with pi u sigma noncrossing interleaved.

    Elements of sigma live on the barred copy placed at positions
    1 < 1' < 2 < 2' < ... < n < n'.  Quadratic in |NC(n)|; for tests only.
    """
    n = pi.n
    best = None
    for sigma in enumerate_nc(n):
        union = [[2 * x - 1 for x in b] for b in pi.blocks] + \
                [[2 * x for x in b] for b in sigma.blocks]
        if is_noncrossing(union, n=2 * n):
            if best is None or refinement_leq(best, sigma):
                best = sigma
    return best
