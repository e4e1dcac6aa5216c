"""The affine building of SL3 over F_p((t)) at desk scale.

Vertices are homothety classes of F_p[[t]]-lattices in F_p((t))^3.  A class
is stored by the upper-triangular Hermite basis of its unique member that
lies in F_p[[t]]^3 but not in t F_p[[t]]^3: column ``i`` has ``t^e_i`` on
the diagonal, zeros below, and entries of degree ``< e_i`` above (row ``i``
of later columns).  Such a lattice contains ``t^D F_p[[t]]^3`` for
``D = sum(e_i)``, so all series arithmetic can be done exactly modulo
``t^(D+1)`` and every basis entry is a polynomial.

Distances come from elementary divisors: with valuations ``m1 >= m2 >= 0``
(normalized so the smallest is 0), ``d^2 = m1^2 + m2^2 - m1*m2``, which is
``3/2`` times the squared norm of the centred triple.  Adjacent vertices
are at distance 1.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (
    BoundaryVertex,
    ContradictionDetected,
    EmptyOnBall,
    PrecisionExhausted,
    SingularBasis,
    TypePreservationViolation,
    UnsupportedOrder,
)
from .exact import Surd
from .fields import field, prime_power
from .polygon import IncidenceGeometry

DEFAULT_PRECISION = 24


# -- polynomials over F_p: coefficient lists, lowest degree first ----------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _val(a):
    for i, c in enumerate(a):
        if c:
            return i
    return None


def _add(a, b, p):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)]


def _sub(a, b, p):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]


def _mul(a, b, p, k=None):
    """Product, truncated to ``k`` coefficients when given."""
    if not a or not b:
        return []
    n = len(a) + len(b) - 1
    if k is not None:
        n = min(n, k)
    out = [0] * n
    for i, x in enumerate(a):
        if x and i < n:
            for j in range(min(len(b), n - i)):
                out[i + j] += x * b[j]
    return [c % p for c in out]


def _pad(a, k):
    """``a`` truncated or zero-padded to exactly ``k`` coefficients."""
    a = list(a[:k])
    return a + [0] * (k - len(a))


def _series_inverse(u, k, p):
    """Inverse of a unit power series modulo ``t^k``."""
    inv0 = pow(u[0], p - 2, p)
    out = [0] * k
    out[0] = inv0
    for n in range(1, k):
        s = sum(u[i] * out[n - i] for i in range(1, min(n, len(u) - 1) + 1))
        out[n] = (-s * inv0) % p
    return out


def _det3(m, p):
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    t1 = _mul(a, _sub(_mul(e, i, p), _mul(f, h, p), p), p)
    t2 = _mul(b, _sub(_mul(d, i, p), _mul(f, g, p), p), p)
    t3 = _mul(c, _sub(_mul(d, h, p), _mul(e, g, p), p), p)
    return _trim(_add(_sub(t1, t2, p), t3, p))


def _adj3(m, p):
    """Adjugate: ``adj(m) @ m = det(m) * I``."""
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != i]
            c = [x for x in range(3) if x != j]
            minor = _sub(_mul(m[r[0]][c[0]], m[r[1]][c[1]], p),
                         _mul(m[r[0]][c[1]], m[r[1]][c[0]], p), p)
            if (i + j) % 2:
                minor = _sub([], minor, p)
            out[j][i] = _trim(minor)
    return out


def _matmul(a, b, p):
    return [[_trim(_add(_add(_mul(a[i][0], b[0][j], p), _mul(a[i][1], b[1][j], p), p),
                        _mul(a[i][2], b[2][j], p), p)) for j in range(3)] for i in range(3)]


def _check_prime(q):
    p, k = prime_power(q)
    if k != 1:
        raise UnsupportedOrder(f"lattice buildings need a prime q, got {q}")
    return p


# -- matrices over F_p[t, 1/t] ---------------------------------------------

class MatrixIsometry:
    """An element of GL3(F_p((t))) with Laurent polynomial entries.

    Stored as ``t^low * M`` with ``M`` a polynomial matrix; acts on vertices
    by left multiplication of lattice bases.
    """

    __slots__ = ("p", "low", "entries")

    def __init__(self, p, entries, low=0):
        self.p = p
        rows = [[_trim(c % p for c in e) for e in row] for row in entries]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("matrices must be 3x3")
        # normalize so that some entry has a nonzero constant term
        shift = min((v for r in rows for e in r if (v := _val(e)) is not None), default=0)
        self.entries = tuple(tuple(tuple(e[shift:]) for e in r) for r in rows)
        self.low = low + shift

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_laurent(cls, p, entries):
        """From entries given as ``{exponent: coefficient}`` maps or ints."""
        maps = [[_as_map(e) for e in row] for row in entries]
        low = min((k for r in maps for e in r for k in e), default=0)
        rows = []
        for r in maps:
            row = []
            for e in r:
                coeffs = [0] * (max(e, default=low) - low + 1)
                for k, c in e.items():
                    coeffs[k - low] = c % p
                row.append(coeffs)
            rows.append(row)
        return cls(p, rows, low)

    @classmethod
    def identity(cls, p):
        return cls.diag(p, (0, 0, 0))

    @classmethod
    def diag(cls, p, exponents, coeffs=(1, 1, 1)):
        return cls.from_laurent(p, [[{exponents[i]: coeffs[i]} if i == j else {}
                                     for j in range(3)] for i in range(3)])

    @classmethod
    def constant(cls, p, matrix):
        return cls(p, [[[int(x) % p] for x in row] for row in matrix])

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        p = _check_prime(int(data["q"]))
        return cls.from_laurent(p, data["entries"])

    def to_json(self):
        return {"q": self.p, "entries": [[{str(k): c for k, c in sorted(_as_map_entry(e, self.low).items())}
                                          for e in row] for row in self.entries]}

    # -- algebra ----------------------------------------------------------
    def laurent(self, i, j):
        return _as_map_entry(self.entries[i][j], self.low)

    def __matmul__(self, other):
        if self.p != other.p:
            raise ValueError("matrices over different fields")
        prod = _matmul(self.entries, other.entries, self.p)
        return MatrixIsometry(self.p, prod, self.low + other.low)

    def __eq__(self, other):
        return (isinstance(other, MatrixIsometry) and self.p == other.p
                and self.low == other.low and self.entries == other.entries)

    def __hash__(self):
        return hash((self.p, self.low, self.entries))

    def __repr__(self):
        return f"MatrixIsometry({self.to_json()['entries']})"

    def det(self):
        """Determinant as ``(low, coefficients)``."""
        return 3 * self.low, _det3(self.entries, self.p)

    @property
    def det_valuation(self):
        low, c = self.det()
        v = _val(c)
        if v is None:
            raise SingularBasis("singular matrix")
        return low + v

    @property
    def is_type_preserving(self):
        return self.det_valuation % 3 == 0

    def inverse(self):
        low, c = self.det()
        nz = [i for i, x in enumerate(c) if x]
        if len(nz) != 1:
            raise ValueError("determinant is not a monomial; inverse is not Laurent")
        k = nz[0]
        inv_c = pow(c[k], self.p - 2, self.p)
        adj = _adj3(self.entries, self.p)
        adj = [[[(x * inv_c) % self.p for x in e] for e in row] for row in adj]
        return MatrixIsometry(self.p, adj, 2 * self.low - low - k)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = MatrixIsometry.identity(self.p)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def conjugate_by(self, h):
        """``h self h^-1``."""
        return h @ self @ h.inverse()

    def is_identity(self):
        return self == MatrixIsometry.identity(self.p)

    def charpoly(self):
        """Coefficients ``(a0, a1, a2, a3)`` of ``det(x I - g)`` as ``{exp: coeff}`` maps."""
        p = self.p
        m = self.entries
        tr = _add(_add(m[0][0], m[1][1], p), m[2][2], p)
        c2 = []
        for i, j in ((0, 1), (0, 2), (1, 2)):
            c2 = _add(c2, _sub(_mul(m[i][i], m[j][j], p), _mul(m[i][j], m[j][i], p), p), p)
        det = _det3(m, p)
        neg = lambda a: [(-x) % p for x in a]
        return (_as_map_entry(neg(det), 3 * self.low), _as_map_entry(c2, 2 * self.low),
                _as_map_entry(neg(tr), self.low), {0: 1})


def _as_map(e):
    if isinstance(e, dict):
        return {int(k): int(c) for k, c in e.items() if int(c) != 0}
    e = int(e)
    return {0: e} if e else {}


def _as_map_entry(coeffs, low):
    return {low + i: c for i, c in enumerate(coeffs) if c}


# -- vertices ---------------------------------------------------------------

@dataclass(frozen=True)
class LatticeVertex:
    """Canonical Hermite basis of a homothety class of lattices."""

    p: int
    basis: tuple  # 3x3 of coefficient tuples

    @property
    def det_valuation(self):
        return sum(len(self.basis[i][i]) - 1 for i in range(3))

    @property
    def type(self):
        return self.det_valuation % 3

    @property
    def exponents(self):
        return tuple(len(self.basis[i][i]) - 1 for i in range(3))

    def rows(self):
        return [[list(e) for e in row] for row in self.basis]

    def matrix(self):
        return MatrixIsometry(self.p, self.rows())

    def to_json(self):
        return {"q": self.p, "basis": [[list(e) for e in row] for row in self.basis],
                "type": self.type}

    @classmethod
    def from_json(cls, data, precision=DEFAULT_PRECISION):
        v = canonicalize(MatrixIsometry(int(data["q"]), data["basis"]), precision)
        if [[list(e) for e in row] for row in v.basis] != data["basis"]:
            raise ValueError("basis is not in canonical form")
        return v

    def __repr__(self):
        return f"LatticeVertex(e={self.exponents}, type={self.type})"

    def __lt__(self, other):
        return (self.det_valuation, self.basis) < (other.det_valuation, other.basis)


def canonicalize(basis, precision=DEFAULT_PRECISION):
    """Canonical vertex of the lattice spanned by the columns of ``basis``.

    ``basis`` is a :class:`MatrixIsometry` (any Laurent matrix).  Raises
    :class:`SingularBasis` for a degenerate basis and
    :class:`PrecisionExhausted` when the normalized lattice has index
    beyond ``t^(2 * precision)`` in the standard lattice.
    """
    p = basis.p
    m = [[list(e) for e in row] for row in basis.entries]  # min valuation 0
    det = _det3(m, p)
    D = _val(det)
    if D is None:
        raise SingularBasis("basis is singular")
    if D > 2 * precision:
        raise PrecisionExhausted(f"lattice index t^{D} exceeds the precision window {precision}")
    K = D + 1
    gens = [[_pad(m[i][j], K) for i in range(3)] for j in range(3)]
    gens += [[[0] * D + [1] if i == j else [0] * K for i in range(3)] for j in range(3)]
    pivots = [None] * 3
    for row in (2, 1, 0):
        best, bv = None, None
        for idx, g in enumerate(gens):
            v = _val(g[row])
            if v is not None and (bv is None or v < bv):
                best, bv = idx, v
        if best is None:
            raise PrecisionExhausted("lost rank while reducing; precision bug")
        piv = gens.pop(best)
        unit = piv[row][bv:]
        inv = _series_inverse(unit, K, p)
        piv = [_pad(_mul(e, inv, p, K), K) for e in piv]
        for g in gens:
            a = g[row]
            if _val(a) is not None:
                f = a[bv:]
                for i in range(3):
                    g[i] = _pad(_sub(g[i], _mul(f, piv[i], p, K), p), K)
        pivots[row] = piv
    if any(_val(e) is not None for g in gens for e in g):
        raise PrecisionExhausted("generators survived elimination; precision bug")
    exps = [_val(pivots[i][i]) for i in range(3)]
    if sum(exps) != D:
        raise PrecisionExhausted("index mismatch after reduction")
    # reduce entries above the diagonal: row i of column j modulo t^e_i
    for j in (1, 2):
        for i in range(j - 1, -1, -1):
            e = exps[i]
            a = pivots[j][i]
            if any(a[e:]):
                f = a[e:]
                for r in range(3):
                    pivots[j][r] = _pad(_sub(pivots[j][r], _mul(f, pivots[i][r], p, K), p), K)
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            e = _trim(pivots[j][i])
            row.append(tuple(e))
        rows.append(tuple(row))
    return LatticeVertex(p, tuple(rows))


def base_vertex(q):
    return canonicalize(MatrixIsometry.identity(_check_prime(q)))


def act(g, v, precision=DEFAULT_PRECISION, require_type_preserving=False):
    """The vertex ``g . v``."""
    if require_type_preserving and not g.is_type_preserving:
        raise TypePreservationViolation(f"det valuation {g.det_valuation} is not 0 mod 3")
    return canonicalize(g @ v.matrix(), precision)


# -- elementary divisors and distances -------------------------------------

def _min_val(entries):
    vals = [v for e in entries if (v := _val(e)) is not None]
    return min(vals) if vals else None


def snf_valuations(a, b):
    """Elementary divisor valuations ``(m1, m2, 0)`` of ``b`` relative to ``a``."""
    p = a.p
    A, B = a.rows(), b.rows()
    N = _matmul(_adj3(A, p), B, p)
    aD = a.det_valuation
    d1 = _min_val(e for row in N for e in row)
    minors = []
    for r in combinations(range(3), 2):
        for c in combinations(range(3), 2):
            minors.append(_sub(_mul(N[r[0]][c[0]], N[r[1]][c[1]], p),
                               _mul(N[r[0]][c[1]], N[r[1]][c[0]], p), p))
    d2 = _min_val(minors)
    s1 = d1 - aD
    s2 = d2 - 2 * aD - s1
    s3 = b.det_valuation - a.det_valuation - (d2 - 2 * aD)
    s = sorted((s1, s2, s3), reverse=True)
    return (s[0] - s[2], s[1] - s[2], 0)


def distance_squared_from_snf(m):
    m1, m2 = m[0] - m[2], m[1] - m[2]
    return m1 * m1 + m2 * m2 - m1 * m2


def distance_squared(a, b):
    return distance_squared_from_snf(snf_valuations(a, b))


def cat0_distance(a, b):
    return Surd.sqrt(distance_squared(a, b))


def _poly_array(vertices):
    K = max(v.det_valuation for v in vertices) + 1
    arr = np.zeros((len(vertices), 3, 3, K), dtype=np.int64)
    for n, v in enumerate(vertices):
        for i in range(3):
            for j in range(3):
                e = v.basis[i][j]
                arr[n, i, j, :len(e)] = e
    return arr


def _np_mul(x, y, p):
    K1, K2 = x.shape[-1], y.shape[-1]
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (K1 + K2 - 1,)
    out = np.zeros(shape, dtype=np.int64)
    for a in range(K1):
        out[..., a:a + K2] += x[..., a:a + 1] * y
    return out % p


def _np_val(x):
    nz = x != 0
    return np.where(nz.any(-1), nz.argmax(-1), np.iinfo(np.int64).max // 4)


def snf_matrix(vertices):
    """All-pairs elementary divisor valuations, shape ``(n, n, 2)``."""
    if not vertices:
        return np.zeros((0, 0, 2), dtype=np.int64)
    p = vertices[0].p
    arr = _poly_array(vertices)
    dets = np.array([v.det_valuation for v in vertices])
    rows = list(combinations(range(3), 2))
    out = np.zeros((len(vertices), len(vertices), 2), dtype=np.int64)
    for k, a in enumerate(vertices):
        adj = _adj3(a.rows(), p)
        K = max(len(e) for row in adj for e in row) or 1
        A = np.zeros((3, 3, K), dtype=np.int64)
        for i in range(3):
            for j in range(3):
                A[i, j, :len(adj[i][j])] = adj[i][j]
        # N[n, i, j] = sum_k A[i, k] * B[n, k, j]
        N = _np_mul(A[None, :, :, None, :], arr[:, None, :, :, :], p).sum(axis=2) % p
        d1 = _np_val(N.reshape(len(vertices), 9, -1)).min(axis=1)
        left = np.stack([N[:, r[0], c[0]] for r in rows for c in rows], axis=1)
        right = np.stack([N[:, r[1], c[1]] for r in rows for c in rows], axis=1)
        left2 = np.stack([N[:, r[0], c[1]] for r in rows for c in rows], axis=1)
        right2 = np.stack([N[:, r[1], c[0]] for r in rows for c in rows], axis=1)
        minors = (_np_mul(left, right, p) - _np_mul(left2, right2, p)) % p
        d2 = _np_val(minors).min(axis=1)
        aD = a.det_valuation
        s1 = d1 - aD
        s2 = d2 - 2 * aD - s1
        s3 = dets - aD - (d2 - 2 * aD)
        s = np.sort(np.stack([s1, s2, s3], axis=1), axis=1)
        out[k, :, 0] = s[:, 2] - s[:, 0]
        out[k, :, 1] = s[:, 1] - s[:, 0]
    return out


# -- neighbours and links -------------------------------------------------

@dataclass(frozen=True)
class Neighbor:
    """A vertex adjacent to ``center``: the lattice ``B P diag(1..1, t..t)``.

    The first ``dim`` columns of the constant matrix ``frame`` span the
    subspace of ``L / tL`` cut out by the neighbour.
    """

    vertex: LatticeVertex
    dim: int
    subspace: tuple
    frame: tuple


def _full_rank(F, vecs):
    if len(vecs) == 2:
        return any(_cross(F, *vecs))
    return F.det3([list(r) for r in zip(*vecs)]) != 0


def _complete_frame(F, vecs):
    """Rows of an invertible matrix whose first columns are ``vecs``."""
    cols = list(vecs)
    for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        if len(cols) < 3 and _full_rank(F, cols + [e]):
            cols.append(e)
    return tuple(tuple(r) for r in zip(*cols))


def _subspaces(p):
    F = field(p)
    pts = F.projective_points(3)
    out = [(1, (v,)) for v in pts]
    for f in pts:
        inside = [v for v in pts if F.dot(f, v) == 0]
        out.append((2, (inside[0], inside[1])))
    return F, out


def vertex_neighbors(v, precision=DEFAULT_PRECISION):
    """All ``2(q^2+q+1)`` neighbours, points (dim 1) first."""
    p = v.p
    F, subs = _subspaces(p)
    B = v.matrix()
    out = []
    for dim, vecs in subs:
        P = _complete_frame(F, vecs)
        exps = [0] * dim + [1] * (3 - dim)
        L = B @ MatrixIsometry.constant(p, P) @ MatrixIsometry.diag(p, exps)
        out.append(Neighbor(canonicalize(L, precision), dim, vecs, P))
    return out


class LinkGeometry(IncidenceGeometry):
    """Link of a building vertex: the projective plane on its neighbours."""

    def __init__(self, center, vertices, incidence, frames=None):
        num_points = sum(1 for x in vertices if (x.type - center.type) % 3 == 2)
        super().__init__("A2", num_points, len(vertices) - num_points, incidence,
                         q=center.p, name=f"link{center.exponents}")
        self.center = center
        self.vertices = tuple(vertices)
        self.index = {x: i for i, x in enumerate(vertices)}
        self.frames = frames

    def panel_of(self, vertex):
        return self.index[vertex]


def vertex_link(v, precision=DEFAULT_PRECISION):
    """Link of ``v`` computed from subspaces of ``L / tL``."""
    F = field(v.p)
    nbrs = vertex_neighbors(v, precision)
    vertices = [n.vertex for n in nbrs]
    P = sum(1 for n in nbrs if n.dim == 1)
    incidence = []
    for i, a in enumerate(nbrs[:P]):
        for j, b in enumerate(nbrs[P:]):
            # a point lies on a line when its vector is in the plane
            plane = b.subspace
            normal = _cross(F, plane[0], plane[1])
            if F.dot(normal, a.subspace[0]) == 0:
                incidence.append((i, P + j))
    frames = [(n.frame, n.dim) for n in nbrs]
    return LinkGeometry(v, vertices, incidence, frames)


def _cross(F, u, v):
    return (F.sub(F.mul(u[1], v[2]), F.mul(u[2], v[1])),
            F.sub(F.mul(u[2], v[0]), F.mul(u[0], v[2])),
            F.sub(F.mul(u[0], v[1]), F.mul(u[1], v[0])))


def induced_action(g, link, precision=DEFAULT_PRECISION):
    """The permutation of link panels induced by ``g`` (which must fix the centre)."""
    from .action import Automorphism
    from .errors import NotElliptic

    if act(g, link.center, precision) != link.center:
        raise NotElliptic("element does not fix the link's centre")
    perm = []
    for x in link.vertices:
        y = act(g, x, precision)
        if y not in link.index:
            raise ContradictionDetected("image of a neighbour is not a neighbour")
        perm.append(link.index[y])
    return Automorphism(link, perm)


# -- balls ---------------------------------------------------------------

@dataclass
class BuildingBall:
    p: int
    radius: int
    center: LatticeVertex
    vertices: list
    layer: list
    snf: np.ndarray
    edges: list
    triangles: list
    precision: int
    index: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.adjacency = [[] for _ in self.vertices]
        for i, j in self.edges:
            self.adjacency[i].append(j)
            self.adjacency[j].append(i)

    @property
    def types(self):
        return [v.type for v in self.vertices]

    @property
    def dist2(self):
        m1, m2 = self.snf[..., 0], self.snf[..., 1]
        return m1 * m1 + m2 * m2 - m1 * m2

    def distance(self, i, j):
        return Surd.sqrt(int(self.dist2[i, j]))

    def is_interior(self, i):
        return len(self.adjacency[i]) == 2 * (self.p ** 2 + self.p + 1)

    def __len__(self):
        return len(self.vertices)

    def to_json(self):
        return {
            "q": self.p,
            "radius": self.radius,
            "vertices": [v.to_json() for v in self.vertices],
            "layers": list(self.layer),
            "edges": [list(e) for e in self.edges],
            "triangles": [list(t) for t in self.triangles],
        }


def build_ball(q, radius, precision=None, center=None):
    """All vertices within ``radius`` edges of ``center`` (default ``v0``)."""
    p = _check_prime(q)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if precision is None:
        precision = 2 * radius + 4
    center = center or base_vertex(p)
    vertices, layer = [center], [0]
    seen = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if seen[v] >= radius:
            continue
        for n in vertex_neighbors(v, precision + center.det_valuation):
            if n.vertex not in seen:
                seen[n.vertex] = seen[v] + 1
                vertices.append(n.vertex)
                layer.append(seen[v] + 1)
                queue.append(n.vertex)
    snf = snf_matrix(vertices)
    n = len(vertices)
    adj = snf[..., 0] == 1
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if adj[i, j]]
    nbr = [set(np.nonzero(adj[i])[0].tolist()) for i in range(n)]
    triangles = sorted({tuple(sorted((i, j, k))) for i, j in edges for k in nbr[i] & nbr[j]})
    return BuildingBall(p, radius, center, vertices, layer, snf, edges, triangles, precision)


def link_of(v, ball):
    """Link of ``v`` read off the ball's edges; ``v`` must be interior."""
    i = ball.index.get(v)
    if i is None or not ball.is_interior(i):
        raise BoundaryVertex(f"{v!r} is not an interior vertex of the ball")
    nbrs = sorted(ball.adjacency[i], key=lambda j: ((ball.vertices[j].type - v.type) % 3 != 2, j))
    vertices = [ball.vertices[j] for j in nbrs]
    P = sum(1 for x in vertices if (x.type - v.type) % 3 == 2)
    pos = {j: k for k, j in enumerate(nbrs)}
    incidence = [(pos[a], pos[b]) for a in nbrs[:P] for b in ball.adjacency[a]
                 if b in pos and pos[b] >= P]
    return LinkGeometry(v, vertices, incidence)


# -- Busemann functions along wall rays ------------------------------------

def busemann_wall_ray(base, frame, dim, x):
    """Exact Busemann value at ``x`` of the ray from ``base`` through a neighbour.

    The ray is ``F diag(1, t^s, t^s)`` (``dim == 1``) or ``F diag(1, 1, t^s)``
    (``dim == 2``) for ``F = B P``; it runs along a wall, consecutive vertices
    at distance 1.  With ``Y = adj(F) X``, the distance to the ray vertex at
    parameter ``s`` is eventually ``sqrt(s^2 + s*L + c)``, so the value is
    ``L / 2`` where ``L`` depends only on valuations of minors of ``Y``.
    """
    p = base.p
    F = _matmul(base.rows(), [[[c] if c else [] for c in row] for row in frame], p)
    Y = _matmul(_adj3(F, p), x.rows(), p)
    D = _val(_det3(Y, p))
    if dim == 1:
        minors = [_sub(_mul(Y[1][a], Y[2][b], p), _mul(Y[1][b], Y[2][a], p), p)
                  for a, b in combinations(range(3), 2)]
        return Fraction(2 * D - 3 * _min_val(minors), 2)
    if dim == 2:
        return Fraction(D - 3 * _min_val(Y[2]), 2)
    raise ValueError("dim must be 1 or 2")


def wall_ray_vertex(base, frame, dim, s, precision=DEFAULT_PRECISION):
    """The vertex at parameter ``s`` along the wall ray."""
    p = base.p
    exps = [0] * dim + [s] * (3 - dim)
    L = base.matrix() @ MatrixIsometry.constant(p, frame) @ MatrixIsometry.diag(p, exps)
    return canonicalize(L, precision)


# -- classification -----------------------------------------------------------

def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def eigenvalue_valuations(g):
    """Valuations of the eigenvalues of ``g`` from the Newton polygon."""
    coeffs = g.charpoly()
    pts = [(i, Fraction(min(c))) for i, c in enumerate(coeffs) if c]
    hull = _lower_hull(pts)
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = (y2 - y1) / (x2 - x1)
        out += [-slope] * (x2 - x1)
    return sorted(out, reverse=True)


def translation_length_squared(g):
    nu = eigenvalue_valuations(g)
    s = sum(nu)
    return (3 * sum(x * x for x in nu) - s * s) / 2


def translation_length(g):
    return Surd.sqrt(translation_length_squared(g))


@dataclass
class IsometryVerdict:
    kind: str  # "Elliptic", "Hyperbolic" or "Inconclusive"
    translation_length_squared: Fraction
    fixed_vertices: list = dc_field(default_factory=list)
    fixed_simplices: list = dc_field(default_factory=list)
    displacements: list = dc_field(default_factory=list)

    @property
    def translation_length(self):
        return Surd.sqrt(self.translation_length_squared)

    def to_json(self):
        return {
            "verdict": self.kind,
            "translation_length": str(self.translation_length),
            "translation_length_squared": str(self.translation_length_squared),
            "fixed_vertices": [v.to_json() for v in self.fixed_vertices],
            "fixed_simplices": [[v.to_json() for v in s] for s in self.fixed_simplices],
            "displacement_squared": [int(d) for d in self.displacements],
        }


def classify_isometry(g, radius=2, powers=4, ball=None, precision=DEFAULT_PRECISION):
    """Elliptic / Hyperbolic / Inconclusive verdict for a type-preserving ``g``."""
    if not g.is_type_preserving:
        raise TypePreservationViolation(f"det valuation {g.det_valuation} is not 0 mod 3")
    v0 = base_vertex(g.p)
    ell2 = translation_length_squared(g)
    disp = []
    gk = MatrixIsometry.identity(g.p)
    for k in range(1, powers + 1):
        gk = gk @ g
        disp.append(distance_squared(v0, act(gk, v0, precision)))
    if ell2 > 0:
        for k, d2 in enumerate(disp, start=1):
            # d(x, g^k x) >= l(g^k) = k l(g)
            if d2 < k * k * ell2:
                raise ContradictionDetected(f"displacement below k*l at k={k}")
        return IsometryVerdict("Hyperbolic", ell2, displacements=disp)
    if ball is None:
        ball = build_ball(g.p, radius)
    image = _ball_images(g, ball, precision)
    fixed = [ball.vertices[i] for i, j in enumerate(image) if j == i]
    simplices = []
    if not fixed:
        for s in list(ball.edges) + list(ball.triangles):
            if all(image[i] is not None for i in s) and {image[i] for i in s} == set(s):
                simplices.append([ball.vertices[i] for i in s])
    kind = "Elliptic" if fixed or simplices else "Inconclusive"
    return IsometryVerdict(kind, ell2, fixed, simplices, disp)


def _ball_images(g, ball, precision):
    out = []
    for v in ball.vertices:
        w = act(g, v, precision + ball.center.det_valuation + 3 * abs(g.low) + 6)
        out.append(ball.index.get(w))
    return out


@dataclass
class FixedSet:
    vertices: list
    edges: list
    triangles: list

    def __len__(self):
        return len(self.vertices) + len(self.edges) + len(self.triangles)

    def to_json(self):
        return {"vertices": [v.to_json() for v in self.vertices],
                "edges": len(self.edges), "triangles": len(self.triangles)}


def fixed_set(gens, ball, precision=None):
    """Simplices of ``ball`` fixed (setwise) by every generator."""
    precision = ball.precision if precision is None else precision
    images = [_ball_images(g, ball, precision) for g in gens]

    def fixed(s):
        return all(all(im[i] is not None for i in s) and {im[i] for i in s} == set(s)
                   for im in images)

    verts = [i for i in range(len(ball)) if fixed((i,))]
    edges = [e for e in ball.edges if fixed(e)]
    tris = [t for t in ball.triangles if fixed(t)]
    if not (verts or edges or tris):
        raise EmptyOnBall("no simplex of the ball is fixed")
    # convexity spot-check: a vertex midpoint of two fixed vertices is fixed
    d2 = ball.dist2
    fixed_ids = set(verts)
    for a, b in combinations(verts, 2):
        mids = np.nonzero((4 * d2[a] == d2[a, b]) & (4 * d2[b] == d2[a, b]))[0]
        for m in mids.tolist():
            if m not in fixed_ids:
                raise ContradictionDetected("fixed set is not convex")
    return FixedSet([ball.vertices[i] for i in verts],
                    [tuple(ball.vertices[i] for i in e) for e in edges],
                    [tuple(ball.vertices[i] for i in t) for t in tris])


SINGER_F2 = ((0, 0, 1), (1, 0, 1), (0, 1, 0))


def singer_matrix(q=2):
    """Companion matrix in SL3(F_q) of an irreducible cubic ``x^3 + a x - 1``.

    Its image in PGL3(F_q) permutes the points of the plane regularly.
    """
    p = _check_prime(q)
    if p == 2:
        return MatrixIsometry.constant(2, SINGER_F2)
    for a in range(p):
        if all((x ** 3 + a * x - 1) % p for x in range(p)):
            return MatrixIsometry.constant(p, ((0, 0, 1), (1, 0, (-a) % p), (0, 1, 0)))
    raise UnsupportedOrder(f"no irreducible cubic found over F_{q}")


def law_of_cosines(x2, y2, z2):
    """Exact angle opposite ``z`` in a flat triangle with squared sides ``x2, y2, z2``."""
    from .exact import Angle

    num = Fraction(x2 + y2 - z2)
    return Angle(num * num / (4 * Fraction(x2) * Fraction(y2)), (num > 0) - (num < 0))


def vertex_angle_at(a, u, b):
    """Alexandrov angle at vertex ``a`` between a neighbour ``u`` and any vertex ``b``.

    A chamber at ``a`` containing ``u`` and the vertex ``b`` always lie in a
    common apartment, so the triangle is flat and the law of cosines gives
    the angle exactly.
    """
    return law_of_cosines(distance_squared(a, u), distance_squared(a, b), distance_squared(u, b))


def link_direction(link, b):
    """The point of the link at ``link.center`` in the direction of vertex ``b``.

    Raises :class:`UnsupportedDirection` when the direction is not at a
    rational multiple of pi from the panels of its chamber.
    """
    from .errors import DegenerateDirection, UnsupportedDirection

    a = link.center
    if a == b:
        raise DegenerateDirection("direction from a vertex to itself")
    angles = [vertex_angle_at(a, u, b).pi_fraction() for u in link.vertices]
    for i, x in enumerate(angles):
        if x == 0:
            return link.panel_point(i)
    third = Fraction(1, 3)
    for pt, ln in link.flags():
        if angles[pt] is not None and angles[ln] is not None and angles[pt] + angles[ln] == third:
            return link.realized(pt, ln, angles[pt])
    raise UnsupportedDirection("direction is not at a tabulated angle from its chamber")
