"""Finite-dimensional noncommutative probability spaces and the
moment/cumulant engine.

A space is a block-diagonal *-algebra M = (+) M_{n_b}(C) carrying the weight
phi(x) = trace(rho x) for a positive definite block-diagonal density rho.
The weight need not be a state: trace(rho) > 1 is allowed and is how finite
weights enter the rescaling identities.

Moments M_n and free cumulants R_n are linked by the lattice sum
M_n = sum over noncrossing partitions of the block products R_pi, and the
engine inverts that sum by recursion on word length.
"""

from fractions import Fraction

import numpy as np

from . import _scalars as sc
from .errors import (DomainError, NotClosingError, NotPsdError,
                     NotTracialError, ShapeError, ValidationError)
from .ncpart import NcPartition, enumerate_nc, kreweras

FLOAT_TOL = 1e-10


class NcProbSpace:
    """Block-diagonal matrix algebra with weight trace(rho . )."""

    def __init__(self, block_dims, density, mode=sc.FLOAT):
        if mode not in (sc.EXACT, sc.FLOAT):
            raise DomainError("unknown scalar mode %r" % mode)
        self.block_dims = tuple(int(d) for d in block_dims)
        if any(d < 1 for d in self.block_dims):
            raise DomainError("block dims must be positive")
        if mode == sc.EXACT and any(d != 1 for d in self.block_dims):
            raise DomainError("exact mode supports diagonal algebras only")
        self.mode = mode
        self.density = [sc.array(b, mode) for b in density]
        if len(self.density) != len(self.block_dims):
            raise ShapeError("density block count mismatch")
        for d, b in zip(self.block_dims, self.density):
            if b.shape != (d, d):
                raise ShapeError("density block shape %s != (%d, %d)"
                                 % (b.shape, d, d))
        self._check_positive()

    def _check_positive(self):
        for b in self.density:
            if self.mode == sc.EXACT:
                if b[0, 0] <= 0:
                    raise NotPsdError("density is not positive definite")
            else:
                h = 0.5 * (b + b.conj().T)
                if np.linalg.norm(b - h) > 1e-12 * max(1.0, np.linalg.norm(b)):
                    raise NotPsdError("density block is not Hermitian")
                if np.linalg.eigvalsh(h).min() <= 0:
                    raise NotPsdError("density is not positive definite")

    @property
    def dim(self):
        """Linear dimension of the algebra."""
        return sum(d * d for d in self.block_dims)

    def total_weight(self):
        """phi(1) = trace(rho)."""
        return sum(b.trace() for b in self.density)

    def is_state(self):
        w = self.total_weight()
        if self.mode == sc.EXACT:
            return w == 1
        return abs(w - 1) < FLOAT_TOL

    def element(self, blocks):
        """Wrap per-block matrix data as an element of the algebra."""
        mats = [sc.array(b, self.mode) for b in blocks]
        for d, b in zip(self.block_dims, mats):
            if b.shape != (d, d):
                raise ShapeError("element block shape mismatch")
        return mats

    def identity(self):
        return [sc.eye(d, self.mode) for d in self.block_dims]

    def adjoint(self, x):
        return [sc.conj(b).T.copy() for b in x]

    def multiply(self, x, y):
        return [bx @ by for bx, by in zip(x, y)]

    def phi(self, x):
        """The weight phi(x) = trace(rho x)."""
        total = sc.scalar_zero(self.mode)
        for rho, b in zip(self.density, x):
            total = total + (rho @ b).trace()
        return total

    def rescale(self, alpha):
        """The same algebra with weight alpha*phi."""
        if self.mode == sc.EXACT:
            alpha = sc.as_fraction(alpha)
        return NcProbSpace(self.block_dims,
                           [alpha * b for b in self.density], self.mode)

    def to_json(self):
        from .cli import encode_matrix
        return {"blocks": list(self.block_dims),
                "density": [encode_matrix(b, self.mode) for b in self.density],
                "mode": self.mode}


def diag_space(weights, mode=sc.EXACT):
    """Commutative space C^d with weight sum(w_i x_i)."""
    return NcProbSpace([1] * len(weights),
                       [[[w]] for w in weights], mode)


def moment(space, word):
    """M_n(x_1,...,x_n) = phi(x_1 ... x_n)."""
    if not word:
        raise DomainError("word must be nonempty")
    prod = word[0]
    for x in word[1:]:
        prod = space.multiply(prod, x)
    return space.phi(prod)


def partitioned_moment(space, pi, word):
    """M_pi: the product of block moments over the partition pi."""
    if len(word) != pi.n:
        raise ShapeError("|word| = %d but pi.n = %d" % (len(word), pi.n))
    total = sc.scalar_one(space.mode)
    for block in pi.blocks:
        total = total * moment(space, [word[v - 1] for v in block])
    return total


def _subword(word, block):
    return tuple(word[v - 1] for v in block)


def cumulants_from_moments(moments):
    """Invert M_n = sum_{pi in NC(n)} R_pi on word-indexed data.

    ``moments`` maps label words (tuples) to scalars and must contain every
    subword of every word it contains.  Returns the same-shaped mapping of
    free cumulants.
    """
    cums = {}
    for word in sorted(moments, key=lambda w: (len(w), w)):
        n = len(word)
        total = moments[word]
        for pi in enumerate_nc(n):
            if len(pi) == 1:
                continue
            term = 1
            for block in pi.blocks:
                sub = _subword(word, block)
                if sub not in cums:
                    raise ValidationError(
                        "moments missing subword %r of %r" % (sub, word))
                term = term * cums[sub]
            total = total - term
        cums[word] = total
    return cums


def moments_from_cumulants(cumulants, word):
    """M_n(word) = sum over NC(|word|) of block products of cumulants.

    ``cumulants`` is a word-indexed mapping (or a CumulantFunctional).
    """
    get = cumulants.value if isinstance(cumulants, CumulantFunctional) \
        else cumulants.__getitem__
    word = tuple(word)
    total = 0
    for pi in enumerate_nc(len(word)):
        term = 1
        for block in pi.blocks:
            term = term * get(_subword(word, block))
        total = total + term
    return total


class CumulantFunctional:
    """Word-indexed free cumulant data R_n(y_{i_1},...,y_{i_n}).

    ``values`` maps words over ``index_set`` (tuples of labels, lengths
    1..d_max) to scalars.  ``star`` names the adjoint label of each label
    (default: every generator self-adjoint).  A tracial tag asserts cyclic
    symmetry, which is what the Gram construction below requires.
    """

    def __init__(self, index_set, values, d_max, tracial=False, star=None):
        self.index_set = tuple(index_set)
        self.values = {tuple(w): v for w, v in values.items()}
        self.d_max = int(d_max)
        self.tracial = bool(tracial)
        self.star = dict(star) if star else {i: i for i in self.index_set}
        self._validate()

    def _validate(self):
        for w in self.values:
            if len(w) > self.d_max:
                raise ShapeError("word %r longer than d_max=%d" % (w, self.d_max))
            for lab in w:
                if lab not in self.index_set:
                    raise ShapeError("unknown label %r" % (lab,))
        for w, v in self.values.items():
            ws = self.star_word(w)
            if ws in self.values:
                other = self.values[ws]
                if isinstance(v, Fraction):
                    ok = other == v
                else:
                    ok = abs(np.conjugate(v) - other) < 1e-9 * (1 + abs(v))
                if not ok:
                    raise ValidationError(
                        "values(w*) != conj(values(w)) at %r" % (w,))
        if self.tracial:
            for w, v in self.values.items():
                rot = w[1:] + w[:1]
                if rot in self.values:
                    diff = self.values[rot] - v
                    bad = diff != 0 if isinstance(v, Fraction) \
                        else abs(diff) > 1e-9 * (1 + abs(v))
                    if bad:
                        raise NotTracialError(
                            "cyclic symmetry fails at %r" % (w,))

    def star_word(self, w):
        return tuple(self.star[c] for c in reversed(w))

    def value(self, word):
        word = tuple(word)
        if len(word) > self.d_max:
            raise ShapeError("word %r exceeds d_max=%d" % (word, self.d_max))
        return self.values.get(word, 0)

    def r_pi(self, pi, word):
        total = 1
        for block in pi.blocks:
            total = total * self.value(_subword(word, block))
        return total

    @classmethod
    def constant(cls, c, d_max, label="x", tracial=True):
        """Single self-adjoint variable with all cumulants equal to c."""
        vals = {(label,) * k: c for k in range(1, d_max + 1)}
        return cls([label], vals, d_max, tracial=tracial)

    @classmethod
    def from_sequence(cls, seq, label="x", tracial=True):
        """kappa_1..kappa_n given positionally (seq[0] = kappa_1)."""
        vals = {(label,) * (k + 1): v for k, v in enumerate(seq)}
        return cls([label], vals, len(seq), tracial=tracial)


# -- free multiplication (moments/cumulants of products of free elements) --

def slots_from_sequence(seq):
    """Slot functional for identical arguments: R(V) = seq[|V|-1]."""
    def f(positions):
        k = len(positions)
        if k > len(seq):
            raise ShapeError("need order %d, have %d" % (k, len(seq)))
        return seq[k - 1]
    return f


def slots_from_functional(cf, word):
    """Slot functional for arguments word[0], word[1], ... (0-based)."""
    def f(positions):
        return cf.value(tuple(word[p - 1] for p in positions))
    return f


def _moment_slots(r_slots, n):
    """Memoized block moments M(V) = sum_{sigma in NC(V)} R_sigma."""
    cache = {}

    def m(positions):
        positions = tuple(positions)
        if positions in cache:
            return cache[positions]
        total = 0
        for sigma in enumerate_nc(len(positions)):
            term = 1
            for block in sigma.blocks:
                term = term * r_slots(tuple(positions[v - 1] for v in block))
            total = total + term
        cache[positions] = total
        return total
    return m


def _cumulant_slots(m_slots):
    """Memoized block cumulants by the Moebius-style recursion."""
    cache = {}

    def r(positions):
        positions = tuple(positions)
        if positions in cache:
            return cache[positions]
        total = m_slots(positions)
        for pi in enumerate_nc(len(positions)):
            if len(pi) == 1:
                continue
            term = 1
            for block in pi.blocks:
                term = term * r(tuple(positions[v - 1] for v in block))
            total = total - term
        cache[positions] = total
        return total
    return r


def product_moments_free(r_x, y_slots, n, y_given="cumulants"):
    """Moments and cumulants of (x_1 y_1, ..., x_n y_n) for free families.

    r_x and y_slots are slot functionals: callables on tuples of positions
    in 1..n returning the cumulant (resp. cumulant or moment) of the
    arguments at those slots.  Returns (R_n, M_n) of the product word via

        R_n = sum_pi R_pi(x) R_{K(pi)}(y),
        M_n = sum_pi R_pi(x) M_{K(pi)}(y).
    """
    if y_given == "cumulants":
        r_y = y_slots
        m_y = _moment_slots(y_slots, n)
    elif y_given == "moments":
        m_y = y_slots
        r_y = _cumulant_slots(y_slots)
    else:
        raise DomainError("y_given must be 'cumulants' or 'moments'")

    def pi_product(slots, pi):
        total = 1
        for block in pi.blocks:
            total = total * slots(tuple(block))
        return total

    r_total = 0
    m_total = 0
    for pi in enumerate_nc(n):
        rx = pi_product(r_x, pi)
        k = kreweras(pi)
        m_total = m_total + rx * pi_product(m_y, k)
        r_total = r_total + rx * pi_product(r_y, k)
    return r_total, m_total


def check_freeness(space, family_a, family_b, n_max, tol=None):
    """Mixed-cumulant freeness test up to order n_max.

    Returns (True, None) or (False, witness_word) where the witness names
    positions 'a<i>'/'b<j>' of a word with a nonvanishing mixed cumulant.
    """
    if n_max > 8:
        raise DomainError("n_max capped at 8")
    labels = [("a%d" % i, x) for i, x in enumerate(family_a)] + \
             [("b%d" % i, x) for i, x in enumerate(family_b)]
    elements = dict(labels)
    if tol is None:
        tol = 0 if space.mode == sc.EXACT else FLOAT_TOL

    moments = {}

    def mom(word):
        if word not in moments:
            moments[word] = moment(space, [elements[c] for c in word])
        return moments[word]

    cums = {}

    def cum(word):
        if word in cums:
            return cums[word]
        total = mom(word)
        for pi in enumerate_nc(len(word)):
            if len(pi) == 1:
                continue
            term = 1
            for block in pi.blocks:
                term = term * cum(_subword(word, block))
            total = total - term
        cums[word] = total
        return total

    names = [name for name, _ in labels]
    from itertools import product as iproduct
    for n in range(2, n_max + 1):
        for word in iproduct(names, repeat=n):
            kinds = {c[0] for c in word}
            if kinds != {"a", "b"}:
                continue
            v = cum(word)
            bad = v != 0 if tol == 0 else abs(v) > tol
            if bad:
                return False, list(word)
    return True, None


def mixed_cumulants_vanish(moment_fn, labels_a, labels_b, n_max, tol=0):
    """Freeness test against an external moment oracle (e.g. vacuum state)."""
    cums = {}

    def cum(word):
        if word in cums:
            return cums[word]
        total = moment_fn(word)
        for pi in enumerate_nc(len(word)):
            if len(pi) == 1:
                continue
            term = 1
            for block in pi.blocks:
                term = term * cum(_subword(word, block))
            total = total - term
        cums[word] = total
        return total

    from itertools import product as iproduct
    for n in range(2, n_max + 1):
        for word in iproduct(list(labels_a) + list(labels_b), repeat=n):
            if not (set(word) & set(labels_a)) or not (set(word) & set(labels_b)):
                continue
            v = cum(word)
            bad = v != 0 if tol == 0 else abs(v) > tol
            if bad:
                return False, list(word)
    return True, None


# -- Gram construction of the pseudo Hilbert algebra from cumulants --

def build_pseudo_algebra(cf, degree):
    """Quotient the word algebra by the null space of <w1,w2> = R(w1* w2).

    Requires a tracial functional (the null space is then a *-ideal) with
    data up to order 2*(degree+1); multiplication must close at ``degree``,
    detected by rank stabilization rank(Gram_d) == rank(Gram_{d+1}).
    """
    from .algebra import PseudoHilbertAlgebra

    if not cf.tracial:
        raise NotTracialError(
            "pseudo-algebra construction requires a tracial cumulant "
            "functional; the null space need not be a *-ideal otherwise")
    if degree < 1 or degree > 6:
        raise DomainError("degree must be in 1..6")
    if cf.d_max < 2 * (degree + 1):
        raise ShapeError("need cumulant data up to order %d" % (2 * (degree + 1)))

    exact = all(isinstance(v, (Fraction, int)) for v in cf.values.values())
    mode = sc.EXACT if exact else sc.FLOAT

    words = []
    for length in range(1, degree + 2):
        from itertools import product as iproduct
        words.extend(tuple(w) for w in iproduct(cf.index_set, repeat=length))

    def inner(w1, w2):
        return cf.value(cf.star_word(w1) + w2)

    m = len(words)
    gram_all = sc.zeros((m, m), mode)
    for i in range(m):
        for j in range(m):
            gram_all[i, j] = inner(words[i], words[j])

    idx_d = [i for i, w in enumerate(words) if len(w) <= degree]
    gd = gram_all[np.ix_(idx_d, idx_d)]
    rank_d = sc.rank(gd, mode)
    rank_d1 = sc.rank(gram_all, mode)
    if rank_d1 != rank_d:
        raise NotClosingError(
            "multiplication does not close at degree %d "
            "(rank %d -> %d)" % (degree, rank_d, rank_d1))
    _check_psd(gram_all, mode)

    # Greedy pivot words (restricted to length <= degree) spanning mod null.
    pivots = []
    for i in idx_d:
        trial = pivots + [i]
        sub = gram_all[np.ix_(trial, trial)]
        if sc.rank(sub, mode) == len(trial):
            pivots.append(i)
        if len(pivots) == rank_d:
            break
    if len(pivots) != rank_d:
        raise NotPsdError("failed to find a spanning set of pivot words")

    basis_words = [words[i] for i in pivots]
    gram_q = gram_all[np.ix_(pivots, pivots)]

    def coords(word):
        rhs = [inner(basis_words[j], word) for j in range(rank_d)]
        return sc.solve_gram(gram_q, rhs, mode)

    lmul = []
    coord_cache = {w: coords(w) for w in basis_words}
    gen_mats = {}
    for g in cf.index_set:
        mat = sc.zeros((rank_d, rank_d), mode)
        for j, w in enumerate(basis_words):
            col = coords((g,) + w)
            for i in range(rank_d):
                mat[i, j] = col[i]
        gen_mats[g] = mat

    # pi_l for each basis vector: compose generator actions along its word.
    for w in basis_words:
        mat = sc.eye(rank_d, mode)
        for g in reversed(w):
            mat = gen_mats[g] @ mat
        lmul.append(mat)

    smat = sc.zeros((rank_d, rank_d), mode)
    for j, w in enumerate(basis_words):
        col = coords(cf.star_word(w))
        for i in range(rank_d):
            smat[i, j] = col[i]

    alg = PseudoHilbertAlgebra(gram=gram_q, smat=smat, lmul=lmul, mode=mode)
    alg.basis_words = basis_words
    return alg


def _check_psd(gram, mode):
    if mode == sc.EXACT:
        # Schur-complement elimination: a rational symmetric matrix is PSD
        # iff every pivot is >= 0 and zero-diagonal rows vanish entirely.
        m = [list(r) for r in gram]
        n = len(m)
        for k in range(n):
            if m[k][k] < 0:
                raise NotPsdError("Gram matrix is not PSD (exact)")
            if m[k][k] == 0:
                if any(m[k][j] != 0 for j in range(k, n)):
                    raise NotPsdError("Gram matrix is not PSD (exact)")
                continue
            pv = m[k][k]
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    f = m[i][k] / pv
                    for j in range(k, n):
                        m[i][j] -= f * m[k][j]
    else:
        h = sc.to_float_array(gram)
        h = 0.5 * (h + h.conj().T)
        ev = np.linalg.eigvalsh(h)
        if ev.min() < -1e-9 * max(1.0, ev.max()):
            raise NotPsdError("Gram matrix is not PSD (min eig %.3e)" % ev.min())
