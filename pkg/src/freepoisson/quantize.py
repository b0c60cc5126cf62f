"""Completely positive maps between weighted matrix algebras and their
second quantization on truncated Fock spaces.

A map is stored in Kraus form acting on the ambient full-matrix embedding;
its value is compressed back onto the block-diagonal target, which keeps
complete positivity and covers plain Kraus maps unchanged.  The weight
pairing used throughout is the symmetric finite-dimensional biweight

    [x, y] = trace(rho^{1/2} y rho^{1/2} x),

under which the dual of T is the Petz (KMS) adjoint

    T*(n) = rho_M^{-1/2} Tt(rho_N^{1/2} n rho_N^{1/2}) rho_M^{-1/2},

with Tt the trace adjoint.  On L^2 the dual acts as J_M T2^* J_N, which the
tests check against this closed form.

The second quantization dilates through the three-summand space
L^2(M) + H_T + L^2(N): an isometry k_M feeds the source fields into the
Stinespring correspondence H_T, the coisometry p_N compresses onto the
target, and Wick words map to Wick words of the L^2-compression T2.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _scalars as sc
from .algebra import PseudoHilbertAlgebra
from .errors import (DomainError, NotPsdError, ShapeError, TruncationError,
                     ValidationError)
from .ncps import NcProbSpace

GRAM_NULL_RTOL = 1e-9


def _embed(space, x):
    """Block element -> ambient full matrix."""
    n = sum(space.block_dims)
    out = np.zeros((n, n), dtype=complex)
    o = 0
    for d, b in zip(space.block_dims, x):
        out[o:o + d, o:o + d] = sc.to_float_array(b)
        o += d
    return out


def _compress(space, mat):
    """Ambient matrix -> block element (conditional expectation)."""
    out = []
    o = 0
    for d in space.block_dims:
        out.append(np.array(mat[o:o + d, o:o + d], dtype=complex))
        o += d
    return out


class L2Space:
    """Orthonormal coordinates on L^2(M, phi) = (M, <x,y> = tr(rho x* y)).

    Matrix units are the raw basis; ``chol`` is the Cholesky factor of the
    raw Gram matrix, so raw coefficients u and orthonormal coordinates c
    are related by c = chol^H u.
    """

    def __init__(self, space):
        self.space = space
        self.units = []
        for b, d in enumerate(space.block_dims):
            for i in range(d):
                for j in range(d):
                    self.units.append((b, i, j))
        self.dim = len(self.units)
        gram = np.zeros((self.dim, self.dim), dtype=complex)
        rho = [sc.to_float_array(r) for r in space.density]
        for a, (b1, i, j) in enumerate(self.units):
            for c, (b2, k, l) in enumerate(self.units):
                if b1 == b2 and i == k:
                    gram[a, c] = rho[b1][l, j]
        self.gram = gram
        self.chol = np.linalg.cholesky(0.5 * (gram + gram.conj().T))
        self._chol_hinv = np.linalg.inv(self.chol.conj().T)

    def unit_coeffs(self, x):
        v = np.zeros(self.dim, dtype=complex)
        for a, (b, i, j) in enumerate(self.units):
            v[a] = complex(sc.to_float_array(x[b])[i, j])
        return v

    def from_unit_coeffs(self, v):
        out = [np.zeros((d, d), dtype=complex) for d in self.space.block_dims]
        for a, (b, i, j) in enumerate(self.units):
            out[b][i, j] = v[a]
        return out

    def to_onb(self, x):
        """eta(x) in orthonormal coordinates."""
        return self.chol.conj().T @ self.unit_coeffs(x)

    def from_onb(self, c):
        return self.from_unit_coeffs(self._chol_hinv @ c)

    def linear_map_onb(self, unit_matrix):
        """Transport a linear map given on unit coefficients to the onb."""
        return self.chol.conj().T @ unit_matrix @ self._chol_hinv

    def antilinear_map_onb(self, unit_matrix):
        """Same for antilinear maps v -> M conj(v)."""
        return self.chol.conj().T @ unit_matrix @ np.conj(self._chol_hinv)

    def lmult_onb(self, x):
        """Left multiplication by the element x, on onb coordinates."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        pos = {u: k for k, u in enumerate(self.units)}
        xf = [sc.to_float_array(b) for b in x]
        for a, (b, i, j) in enumerate(self.units):
            d = self.space.block_dims[b]
            for k in range(d):
                if xf[b][k, i] != 0:
                    m[pos[(b, k, j)], a] += xf[b][k, i]
        return self.linear_map_onb(m)

    def smat_onb(self):
        pos = {u: k for k, u in enumerate(self.units)}
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for a, (b, i, j) in enumerate(self.units):
            m[pos[(b, j, i)], a] = 1.0
        return self.antilinear_map_onb(m)

    def jmat_onb(self):
        """J = S Delta^{-1/2}: antilinear matrix on onb coordinates."""
        m = np.zeros((self.dim, self.dim), dtype=complex)
        pos = {u: k for k, u in enumerate(self.units)}
        for b, d in enumerate(self.space.block_dims):
            rho = sc.to_float_array(self.space.density[b])
            ev, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
            rh = (vec * np.sqrt(ev)) @ vec.conj().T
            rhi = (vec / np.sqrt(ev)) @ vec.conj().T
            for i in range(d):
                for j in range(d):
                    u = np.zeros((d, d), dtype=complex)
                    u[i, j] = 1.0
                    jm = rh @ u.conj().T @ rhi
                    col = pos[(b, i, j)]
                    for k in range(d):
                        for l in range(d):
                            m[pos[(b, k, l)], col] = jm[k, l]
        return self.antilinear_map_onb(m)

    def onb_algebra(self):
        """PseudoHilbertAlgebra view (gram = identity) for Fock builders."""
        lmul = []
        for k in range(self.dim):
            e = np.zeros(self.dim, dtype=complex)
            e[k] = 1.0
            lmul.append(self.lmult_onb(self.from_onb(e)))
        alg = PseudoHilbertAlgebra(
            gram=np.eye(self.dim), smat=self.smat_onb(), lmul=lmul,
            unit=self.to_onb(self.space.identity()), mode=sc.FLOAT)
        alg.jmat = self.jmat_onb()
        return alg


@dataclass
class CpMap:
    """T(x) = E_N( sum_i K_i x K_i^H ) between block-diagonal spaces."""

    source: NcProbSpace
    target: NcProbSpace
    kraus: list = field(default_factory=list)

    def __post_init__(self):
        dm = sum(self.source.block_dims)
        dn = sum(self.target.block_dims)
        self.kraus = [np.asarray(k, dtype=complex) for k in self.kraus]
        for k in self.kraus:
            if k.shape != (dn, dm):
                raise ShapeError("Kraus operator shape %s != (%d, %d)"
                                 % (k.shape, dn, dm))

    def apply(self, x):
        xm = _embed(self.source, x)
        out = np.zeros((sum(self.target.block_dims),) * 2, dtype=complex)
        for k in self.kraus:
            out += k @ xm @ k.conj().T
        return _compress(self.target, out)

    def trace_adjoint(self, z):
        zm = _embed(self.target, z)
        out = np.zeros((sum(self.source.block_dims),) * 2, dtype=complex)
        for k in self.kraus:
            out += k.conj().T @ zm @ k
        return _compress(self.source, out)

    def choi(self):
        """Choi matrix of T o E_M on the ambient source algebra."""
        dm = sum(self.source.block_dims)
        dn = sum(self.target.block_dims)
        c = np.zeros((dm * dn, dm * dn), dtype=complex)
        for i in range(dm):
            for j in range(dm):
                u = np.zeros((dm, dm), dtype=complex)
                u[i, j] = 1.0
                tu = _embed(self.target, self.apply(_compress(self.source, u)))
                for k in range(dn):
                    for l in range(dn):
                        c[i * dn + k, j * dn + l] = tu[k, l]
        return c

    def t2_matrix(self, l2m=None, l2n=None):
        """L^2 compression eta(m) -> eta(T(m)) in onb coordinates."""
        l2m = l2m or L2Space(self.source)
        l2n = l2n or L2Space(self.target)
        cols = []
        for k in range(l2m.dim):
            e = np.zeros(l2m.dim, dtype=complex)
            e[k] = 1.0
            cols.append(l2n.to_onb(self.apply(l2m.from_onb(e))))
        return np.array(cols).T

    @classmethod
    def from_choi(cls, source, target, choi, tol=1e-12):
        dm = sum(source.block_dims)
        dn = sum(target.block_dims)
        if choi.shape != (dm * dn, dm * dn):
            raise ShapeError("Choi matrix has wrong shape")
        h = 0.5 * (choi + choi.conj().T)
        ev, vec = np.linalg.eigh(h)
        if ev.min() < -1e-9 * max(1.0, ev.max()):
            raise NotPsdError("Choi matrix is not PSD",
                              witness={"min_eig": float(ev.min())})
        kraus = []
        for lam, w in zip(ev, vec.T):
            if lam > tol:
                kraus.append(math.sqrt(lam) *
                             w.reshape(dm, dn).T)
        return cls(source, target, kraus)

    @classmethod
    def scalar(cls, space, lam):
        """lam * identity on one space (0 <= lam <= 1 is admissible)."""
        d = sum(space.block_dims)
        return cls(space, space, [math.sqrt(lam) * np.eye(d)])


@dataclass
class AdmissibilityReport:
    cp: bool
    subunital: bool
    weight_decreasing: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def admissible(self):
        return self.cp and self.subunital and self.weight_decreasing

    def to_json(self):
        out = {"cp": self.cp, "subunital": self.subunital,
               "weight_decreasing": self.weight_decreasing,
               "admissible": self.admissible}
        if self.witnesses:
            out["witnesses"] = {k: [float(x.real) for x in v]
                                for k, v in self.witnesses.items()}
        return out


def check_admissible(t, tol=1e-10):
    """CP / subunital / weight-decreasing booleans with witnesses."""
    witnesses = {}
    choi = t.choi()
    ev, vec = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    cp = bool(ev.min() >= -1e-9 * max(1.0, abs(ev).max()))
    if not cp:
        witnesses["cp"] = vec[:, 0]

    one = _embed(t.target, t.apply(t.source.identity()))
    gap = np.eye(one.shape[0]) - one
    ev, vec = np.linalg.eigh(0.5 * (gap + gap.conj().T))
    subunital = bool(ev.min() >= -tol)
    if not subunital:
        witnesses["subunital"] = vec[:, 0]

    dual_density = _embed(t.source, t.trace_adjoint(
        [b for b in t.target.density]))
    rho = _embed(t.source, t.source.density)
    diff = rho - dual_density
    ev, vec = np.linalg.eigh(0.5 * (diff + diff.conj().T))
    weight_dec = bool(ev.min() >= -tol)
    if not weight_dec:
        witnesses["weight_decreasing"] = vec[:, 0]
    return AdmissibilityReport(cp, subunital, weight_dec, witnesses)


def biweight(space, x, y):
    """[x, y] = trace(rho^{1/2} y rho^{1/2} x); symmetric, [1, y] = phi(y)."""
    total = 0j
    for d, rho, xb, yb in zip(space.block_dims,
                              space.density, x, y):
        r = sc.to_float_array(rho)
        ev, vec = np.linalg.eigh(0.5 * (r + r.conj().T))
        rh = (vec * np.sqrt(ev)) @ vec.conj().T
        total += np.trace(rh @ sc.to_float_array(yb) @ rh @
                          sc.to_float_array(xb))
    return total


def petz_dual(t):
    """The weight dual T*: N -> M as a CpMap (via its Choi matrix).

    Characterized by [T*(n), m]_phi = [n, T(m)]_psi; at finite dimension
    T*(n) = rho_M^{-1/2} Tt(rho_N^{1/2} n rho_N^{1/2}) rho_M^{-1/2}.
    """
    src, tgt = t.source, t.target
    rho_m = _embed(src, src.density)
    rho_n = _embed(tgt, tgt.density)

    def half_powers(r):
        ev, vec = np.linalg.eigh(0.5 * (r + r.conj().T))
        if ev.min() <= 0:
            raise ValidationError("density not faithful")
        return ((vec * np.sqrt(ev)) @ vec.conj().T,
                (vec / np.sqrt(ev)) @ vec.conj().T)

    rmh, rmhi = half_powers(rho_m)
    rnh, _ = half_powers(rho_n)

    def dual_apply(n_elem):
        z = rnh @ _embed(tgt, n_elem) @ rnh
        td = _embed(src, t.trace_adjoint(_compress(tgt, z)))
        return _compress(src, rmhi @ td @ rmhi)

    dn = sum(tgt.block_dims)
    dm = sum(src.block_dims)
    choi = np.zeros((dn * dm, dn * dm), dtype=complex)
    for i in range(dn):
        for j in range(dn):
            u = np.zeros((dn, dn), dtype=complex)
            u[i, j] = 1.0
            du = _embed(src, dual_apply(_compress(tgt, u)))
            for k in range(dm):
                for l in range(dm):
                    choi[i * dm + k, j * dm + l] = du[k, l]
    return CpMap.from_choi(tgt, src, choi)


# -- Stinespring correspondence ----------------------------------------------

@dataclass
class GramSpace:
    """Orthonormalized quotient of M (x) L^2(N) under the T-inner product.

    ``project`` maps raw coefficients (unit_M (x) unit_N basis) to
    orthonormal quotient coordinates; ``left_action(m)`` and
    ``right_action(n)`` act on those coordinates; ``i_n`` embeds L^2(N)
    (onb coordinates) as 1 (x) eta.
    """

    dim: int
    project: np.ndarray
    unproject: np.ndarray
    left_actions: dict
    right_actions: dict
    i_n: np.ndarray
    raw_dim: int

    def left_action(self, key):
        return self.left_actions[key]


def stinespring_bimodule(t, l2m=None, l2n=None):
    l2m = l2m or L2Space(t.source)
    l2n = l2n or L2Space(t.target)
    units_m = l2m.units
    units_n = l2n.units
    dm, dn = len(units_m), len(units_n)
    raw = dm * dn
    rho_n = [sc.to_float_array(r) for r in t.target.density]

    def unit_elem(space, u):
        out = [np.zeros((d, d), dtype=complex) for d in space.block_dims]
        out[u[0]][u[1], u[2]] = 1.0
        return out

    # Gram of m_a (x) eta(n_c): <.,.> = tr(rho_N n1* T(m1* m2) n2)
    t_vals = {}
    for a1, u1 in enumerate(units_m):
        for a2, u2 in enumerate(units_m):
            m1 = unit_elem(t.source, u1)
            m2 = unit_elem(t.source, u2)
            prod = t.source.multiply(t.source.adjoint(m1), m2)
            t_vals[(a1, a2)] = _embed(t.target, t.apply(prod))

    gram = np.zeros((raw, raw), dtype=complex)
    for a1, u1 in enumerate(units_m):
        for c1, f1 in enumerate(units_n):
            for a2, u2 in enumerate(units_m):
                for c2, f2 in enumerate(units_n):
                    n1 = _embed(t.target, unit_elem(t.target, f1))
                    n2 = _embed(t.target, unit_elem(t.target, f2))
                    val = np.trace(_embed(t.target, t.target.density) @
                                   n1.conj().T @ t_vals[(a1, a2)] @ n2)
                    gram[a1 * dn + c1, a2 * dn + c2] = val

    ev, vec = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    if ev.min() < -GRAM_NULL_RTOL * max(1.0, abs(ev).max()):
        raise NotPsdError("Stinespring Gram matrix is not PSD",
                          witness={"min_eig": float(ev.min())})
    keep = ev > GRAM_NULL_RTOL * max(1.0, abs(ev).max())
    lam = ev[keep]
    v = vec[:, keep]
    project = (np.sqrt(lam)[:, None] * v.conj().T)
    unproject = v / np.sqrt(lam)[None, :]
    r = int(keep.sum())

    # left action of matrix units of M; right action of units of N (via op)
    left_actions = {}
    for am, um in enumerate(units_m):
        raw_map = np.zeros((raw, raw), dtype=complex)
        me = unit_elem(t.source, um)
        lm = np.zeros((dm, dm), dtype=complex)
        pos = {u: k for k, u in enumerate(units_m)}
        for a, (b, i, j) in enumerate(units_m):
            prod = t.source.multiply(me, unit_elem(t.source, (b, i, j)))
            coeffs = l2m.unit_coeffs(prod)
            lm[:, a] = coeffs
        raw_map = np.kron(lm, np.eye(dn))
        left_actions[um] = project @ raw_map @ unproject

    right_actions = {}
    jn = l2n.jmat_onb()
    for cn, un in enumerate(units_n):
        ne = unit_elem(t.target, un)
        # y^op = J y* J on L^2(N): v -> jn conj(A) conj(jn) v with A the
        # onb matrix of left multiplication by y*
        rm_onb = jn @ np.conj(l2n.lmult_onb(t.target.adjoint(ne))) @ np.conj(jn)
        rm_units = np.linalg.solve(l2n.chol.conj().T,
                                   rm_onb @ l2n.chol.conj().T)
        raw_map = np.kron(np.eye(dm), rm_units)
        right_actions[un] = project @ raw_map @ unproject

    # i_N: eta_psi (onb) -> 1 (x) eta
    one_m = l2m.unit_coeffs(t.source.identity())
    i_n = np.zeros((r, l2n.dim), dtype=complex)
    for k in range(l2n.dim):
        e = np.zeros(l2n.dim, dtype=complex)
        e[k] = 1.0
        raw_vec = np.kron(one_m, np.linalg.solve(l2n.chol.conj().T, e))
        i_n[:, k] = project @ raw_vec
    return GramSpace(dim=r, project=project, unproject=unproject,
                     left_actions=left_actions, right_actions=right_actions,
                     i_n=i_n, raw_dim=raw)


def conjugate_embedding(t, hs_dual=None, hs=None, l2m=None, l2n=None):
    """The N-M isometry H_{T*} -> conj(H_T) of the duality.

    Maps n (x)_{T*} J eta(m) to the conjugate of m (x)_T J eta(n).
    Vectors of the conjugate space are represented by conjugated H_T
    coordinates, which makes the embedding a plain linear isometry:
    returns (C, gram space of T*, gram space of T) with C^H C = 1.
    """
    l2m = l2m or L2Space(t.source)
    l2n = l2n or L2Space(t.target)
    tstar = petz_dual(t)
    hs = hs or stinespring_bimodule(t, l2m, l2n)
    hs_dual = hs_dual or stinespring_bimodule(tstar, l2n, l2m)

    jm_units = _antilinear_j_units(l2m)
    jn_units = _antilinear_j_units(l2n)
    dm, dn = l2m.dim, l2n.dim
    cols = np.zeros((hs.dim, dn * dm), dtype=complex)
    for c in range(dn):
        for a in range(dm):
            # source raw basis vector: unit_n_c (x) unit_m_a; write
            # unit_m_a = J eta(m') with m' coefficients jm_units^{-1} e_a
            e_a = np.zeros(dm, dtype=complex)
            e_a[a] = 1.0
            mprime = np.linalg.solve(jm_units, e_a).conj()
            e_c = np.zeros(dn, dtype=complex)
            e_c[c] = 1.0
            target_raw = np.kron(mprime, jn_units @ np.conj(e_c))
            cols[:, c * dm + a] = np.conj(hs.project @ target_raw)
    return cols @ hs_dual.unproject, hs_dual, hs


def _antilinear_j_units(l2):
    """J on unit coefficients: v -> M conj(v)."""
    m = np.zeros((l2.dim, l2.dim), dtype=complex)
    pos = {u: k for k, u in enumerate(l2.units)}
    for b, d in enumerate(l2.space.block_dims):
        rho = sc.to_float_array(l2.space.density[b])
        ev, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        rh = (vec * np.sqrt(ev)) @ vec.conj().T
        rhi = (vec / np.sqrt(ev)) @ vec.conj().T
        for i in range(d):
            for j in range(d):
                u = np.zeros((d, d), dtype=complex)
                u[i, j] = 1.0
                jm = rh @ u.conj().T @ rhi
                for k in range(d):
                    for l in range(d):
                        m[pos[(b, k, l)], pos[(b, i, j)]] = jm[k, l]
    return m


# -- second quantization -------------------------------------------------------

def _psd_sqrt(mat, tol=1e-12):
    h = 0.5 * (mat + mat.conj().T)
    ev, vec = np.linalg.eigh(h)
    ev = np.clip(ev, 0.0, None)
    return (vec * np.sqrt(ev)) @ vec.conj().T


@dataclass
class Dilation:
    """All the moving parts of one second quantization."""

    t: CpMap
    l2m: L2Space
    l2n: L2Space
    hs: GramSpace
    j_m: np.ndarray
    k_m: np.ndarray
    p_n: np.ndarray
    t2: np.ndarray

    @property
    def tilde_dim(self):
        return self.l2m.dim + self.hs.dim + self.l2n.dim

    def pi_tilde(self, x_elem):
        """Action of x in M on L^2(M) + H_T + L^2(N) (zero on the last)."""
        dm, r, dn = self.l2m.dim, self.hs.dim, self.l2n.dim
        out = np.zeros((dm + r + dn, dm + r + dn), dtype=complex)
        out[:dm, :dm] = self.l2m.lmult_onb(x_elem)
        act = np.zeros((r, r), dtype=complex)
        xf = [sc.to_float_array(b) for b in x_elem]
        for a, u in enumerate(self.l2m.units):
            if xf[u[0]][u[1], u[2]] != 0:
                act += xf[u[0]][u[1], u[2]] * self.hs.left_actions[u]
        out[dm:dm + r, dm:dm + r] = act
        return out


def build_dilation(t):
    l2m = L2Space(t.source)
    l2n = L2Space(t.target)
    hs = stinespring_bimodule(t, l2m, l2n)
    dm, r, dn = l2m.dim, hs.dim, l2n.dim

    # j_M: eta(m) -> m (x)_T eta(1_N)
    one_n_units = l2n.unit_coeffs(t.target.identity())
    j_m = np.zeros((r, dm), dtype=complex)
    for k in range(dm):
        e = np.zeros(dm, dtype=complex)
        e[k] = 1.0
        raw_vec = np.kron(np.linalg.solve(l2m.chol.conj().T, e), one_n_units)
        j_m[:, k] = hs.project @ raw_vec

    k_m = np.zeros((dm + r + dn, dm), dtype=complex)
    k_m[:dm, :] = _psd_sqrt(np.eye(dm) - j_m.conj().T @ j_m)
    k_m[dm:dm + r, :] = j_m

    p_n = np.zeros((dn, dm + r + dn), dtype=complex)
    p_n[:, dm:dm + r] = hs.i_n.conj().T
    p_n[:, dm + r:] = _psd_sqrt(np.eye(dn) - hs.i_n.conj().T @ hs.i_n)

    return Dilation(t=t, l2m=l2m, l2n=l2n, hs=hs, j_m=j_m, k_m=k_m, p_n=p_n,
                    t2=t.t2_matrix(l2m, l2n))


def _fock_offsets(dim, L):
    dims = [dim ** k for k in range(L + 1)]
    offs = [0]
    for d in dims[:-1]:
        offs.append(offs[-1] + d)
    return dims, offs


def _sparse_creation(vec, dim, L):
    dims, offs = _fock_offsets(dim, L)
    total = offs[-1] + dims[-1]
    col = sp.csr_matrix(np.asarray(vec, dtype=complex).reshape(-1, 1))
    out = sp.csr_matrix((total, total), dtype=complex)
    for k in range(L):
        blk = sp.kron(col, sp.identity(dims[k], dtype=complex,
                                       format="csr")).tocoo()
        out = out + sp.coo_matrix((blk.data, (blk.row + offs[k + 1],
                                              blk.col + offs[k])),
                                  shape=(total, total)).tocsr()
    return out


def _sparse_annihilation(vec, dim, L):
    return _sparse_creation(vec, dim, L).conj().T.tocsr()


def _sparse_gauge(mat, dim, L):
    dims, offs = _fock_offsets(dim, L)
    total = offs[-1] + dims[-1]
    out = sp.csr_matrix((total, total), dtype=complex)
    msp = sp.csr_matrix(np.asarray(mat, dtype=complex))
    for k in range(1, L + 1):
        blk = sp.kron(msp, sp.identity(dims[k - 1], dtype=complex,
                                       format="csr")).tocoo()
        out = out + sp.coo_matrix((blk.data, (blk.row + offs[k],
                                              blk.col + offs[k])),
                                  shape=(total, total)).tocsr()
    return out


def _sparse_fock_map(leg, dim_in, dim_out, L):
    """F(leg): degree-wise kron powers of a rectangular contraction."""
    dims_in, offs_in = _fock_offsets(dim_in, L)
    dims_out, offs_out = _fock_offsets(dim_out, L)
    total_in = offs_in[-1] + dims_in[-1]
    total_out = offs_out[-1] + dims_out[-1]
    lsp = sp.csr_matrix(np.asarray(leg, dtype=complex))
    out = sp.lil_matrix((total_out, total_in), dtype=complex)
    out[0, 0] = 1.0
    blk = sp.identity(1, dtype=complex, format="csr")
    acc = sp.identity(1, dtype=complex, format="csr")
    for k in range(1, L + 1):
        acc = sp.kron(acc, lsp, format="csr")
        coo = acc.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            out[offs_out[k] + r, offs_in[k] + c] = v
    return out.tocsr()


def second_quantize(t, wick_terms, L, dilation=None):
    """Gamma(T) applied to a Wick polynomial, via the explicit dilation.

    ``wick_terms`` is a list of (coefficient, legs) with legs given as
    onb coordinate vectors over L^2(M); the polynomial is
    sum_c c * Psi(legs).  Returns the compressed operator as a dense
    matrix on the truncated Fock space over L^2(N) (onb coordinates),
    which tests compare against Psi(T2 legs).
    """
    if not wick_terms:
        raise DomainError("empty Wick polynomial")
    rep = check_admissible(t)
    if not rep.admissible:
        raise ValidationError("map is not admissible: %s" % rep.to_json())
    deg = max(len(legs) for _, legs in wick_terms)
    if L < deg + 2:
        raise TruncationError("need L >= degree + 2")
    dil = dilation or build_dilation(t)
    dm, r, dn = dil.l2m.dim, dil.hs.dim, dil.l2n.dim
    md = dm + r + dn
    s_m = dil.l2m.smat_onb()

    total = None
    for coeff, legs in wick_terms:
        legs = [np.asarray(x, dtype=complex) for x in legs]
        n = len(legs)
        ups = [_sparse_creation(dil.k_m @ x, md, L) for x in legs]
        downs = [_sparse_annihilation(dil.k_m @ (s_m @ np.conj(x)), md, L)
                 for x in legs]
        gauges = [_sparse_gauge(dil.pi_tilde(dil.l2m.from_onb(x)), md, L)
                  for x in legs]
        op = None
        for s in range(1, n + 2):
            word = None
            for i in range(s - 1):
                word = ups[i] if word is None else word @ ups[i]
            for j in range(s - 1, n):
                word = downs[j] if word is None else word @ downs[j]
            if word is None:
                word = sp.identity(_fock_total(md, L), dtype=complex,
                                   format="csr")
            op = word if op is None else op + word
        for s in range(1, n + 1):
            word = None
            for i in range(s - 1):
                word = ups[i] if word is None else word @ ups[i]
            word = gauges[s - 1] if word is None else word @ gauges[s - 1]
            for j in range(s, n):
                word = word @ downs[j]
            op = op + word
        op = op * coeff
        total = op if total is None else total + op

    p_fock = _sparse_fock_map(dil.p_n, md, dn, L)
    compressed = p_fock @ total @ p_fock.conj().T
    return np.asarray(compressed.todense())


def _fock_total(dim, L):
    dims, offs = _fock_offsets(dim, L)
    return offs[-1] + dims[-1]


def wick_matrix_on_target(t, legs_n, L, l2n=None):
    """Psi(legs) on the truncated Fock space over L^2(N), dense matrix."""
    from .fock import FockSpace, wick
    l2n = l2n or L2Space(t.target)
    alg = l2n.onb_algebra()
    fk = FockSpace(alg, L)
    op = wick(fk, [np.asarray(x, dtype=complex) for x in legs_n],
              mode="projective")
    return sc.to_float_array(op.matrix())
