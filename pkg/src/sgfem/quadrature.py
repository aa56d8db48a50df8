"""Quadrature rules on reference simplices.

Rules are stored in barycentric coordinates with weights summing to the
reference simplex measure 1/d!.  Triangle rules are the classical symmetric
(Dunavant) tables restricted to the degrees with all-positive weights;
tetrahedron rules beyond degree 2 are conical-product Gauss-Jacobi rules,
which are positive for any degree (at the price of symmetry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

MAX_DEGREE = 10


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature rule on the reference d-simplex.

    points holds barycentric tuples of shape (n, d+1); weights sum to the
    reference measure 1/d! and are all positive.
    """

    dim: int
    degree: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def npoints(self) -> int:
        return self.points.shape[0]

    def physical_points(self, vertices: np.ndarray) -> np.ndarray:
        """Map barycentric points onto simplices given by `vertices`.

        vertices: (..., d+1, d) -> points of shape (..., n, d).
        """
        return np.einsum("qv,...vk->...qk", self.points, vertices)

    def physical_weights(self, volumes) -> np.ndarray:
        """Weights scaled so their sum equals each simplex volume."""
        scale = np.asarray(volumes) * math.factorial(self.dim)
        return np.multiply.outer(scale, self.weights)


# Symmetric triangle rules: degree -> list of (orbit multiplicity,
# barycentric seed, weight).  Weights are normalized to sum to 1 over the
# full orbit expansion.  Degrees whose published rules contain negative
# weights (3, 7) are omitted; lookups fall through to the next degree up.
_TRIANGLE_ORBITS = {
    1: [(1, (1 / 3, 1 / 3, 1 / 3), 1.0)],
    2: [(3, (2 / 3, 1 / 6, 1 / 6), 1 / 3)],
    4: [
        (3, (0.108103018168070, 0.445948490915965, 0.445948490915965), 0.223381589678011),
        (3, (0.816847572980459, 0.091576213509771, 0.091576213509771), 0.109951743655322),
    ],
    5: [
        (1, (1 / 3, 1 / 3, 1 / 3), 0.225),
        (3, (0.059715871789770, 0.470142064105115, 0.470142064105115), 0.132394152788506),
        (3, (0.797426985353087, 0.101286507323456, 0.101286507323456), 0.125939180544827),
    ],
    6: [
        (3, (0.501426509658179, 0.249286745170910, 0.249286745170910), 0.116786275726379),
        (3, (0.873821971016996, 0.063089014491502, 0.063089014491502), 0.050844906370207),
        (6, (0.053145049844817, 0.310352451033784, 0.636502499121399), 0.082851075618374),
    ],
    8: [
        (1, (1 / 3, 1 / 3, 1 / 3), 0.144315607677787),
        (3, (0.081414823414554, 0.459292588292723, 0.459292588292723), 0.095091634267285),
        (3, (0.658861384496480, 0.170569307751760, 0.170569307751760), 0.103217370534718),
        (3, (0.898905543365938, 0.050547228317031, 0.050547228317031), 0.032458497623198),
        (6, (0.008394777409958, 0.263112829634638, 0.728492392955404), 0.027230314174435),
    ],
    9: [
        (1, (1 / 3, 1 / 3, 1 / 3), 0.097135796282799),
        (3, (0.020634961602525, 0.489682519198738, 0.489682519198738), 0.031334700227139),
        (3, (0.125820817014127, 0.437089591492937, 0.437089591492937), 0.077827541004774),
        (3, (0.623592928761935, 0.188203535619033, 0.188203535619033), 0.079647738927210),
        (3, (0.910540973211095, 0.044729513394453, 0.044729513394453), 0.025577675658698),
        (6, (0.036838412054736, 0.221962989160766, 0.741198598784498), 0.043283539377289),
    ],
    10: [
        (1, (1 / 3, 1 / 3, 1 / 3), 0.090817990382754),
        (3, (0.028844733232685, 0.485577633383657, 0.485577633383657), 0.036725957756467),
        (3, (0.781036849029926, 0.109481575485037, 0.109481575485037), 0.045321059435528),
        (6, (0.141707219414880, 0.307939838764121, 0.550352941820999), 0.072757916845420),
        (6, (0.025003534762686, 0.246672560639903, 0.728323904597411), 0.028327242531057),
        (6, (0.009540815400299, 0.066803251012200, 0.923655933587500), 0.009421666963733),
    ],
}


def _expand_orbit(mult: int, seed, weight: float):
    a, b, c = seed
    if mult == 1:
        pts = [(a, b, c)]
    elif mult == 3:
        # seed (a, b, b): place the distinct coordinate in each slot
        pts = [(a, b, b), (b, a, b), (b, b, a)]
    else:
        pts = [
            (a, b, c), (a, c, b), (b, a, c),
            (b, c, a), (c, a, b), (c, b, a),
        ]
    return pts, [weight] * len(pts)


@lru_cache(maxsize=None)
def _triangle_rule(table_degree: int) -> QuadratureRule:
    pts, wts = [], []
    for mult, seed, w in _TRIANGLE_ORBITS[table_degree]:
        p, ws = _expand_orbit(mult, seed, w)
        pts.extend(p)
        wts.extend(ws)
    points = np.array(pts, dtype=float)
    weights = 0.5 * np.array(wts, dtype=float)  # reference triangle area 1/2
    return QuadratureRule(2, table_degree, points, weights)


def _jacobi_01(n: int, alpha: int):
    """Gauss-Jacobi nodes/weights on [0,1] for the weight (1-u)**alpha."""
    if alpha == 0:
        t, w = leggauss(n)
    else:
        t, w = roots_jacobi(n, float(alpha), 0.0)
    return 0.5 * (t + 1.0), w * 0.5 ** (alpha + 1)


@lru_cache(maxsize=None)
def _interval_rule(degree: int) -> QuadratureRule:
    n = degree // 2 + 1
    u, w = _jacobi_01(n, 0)
    points = np.column_stack([1.0 - u, u])
    return QuadratureRule(1, 2 * n - 1, points, w)


@lru_cache(maxsize=None)
def _tet_rule(degree: int) -> QuadratureRule:
    if degree <= 1:
        points = np.full((1, 4), 0.25)
        return QuadratureRule(3, 1, points, np.array([1 / 6]))
    if degree == 2:
        a, b = 0.585410196624969, 0.138196601125011
        points = np.full((4, 4), b)
        np.fill_diagonal(points, a)
        return QuadratureRule(3, 2, points, np.full(4, 1 / 24))
    # Conical product (Duffy) rule: positive weights for any degree.
    n = degree // 2 + 1
    xi, wxi = _jacobi_01(n, 2)
    eta, weta = _jacobi_01(n, 1)
    zeta, wzeta = _jacobi_01(n, 0)
    X, Y, Z = np.meshgrid(xi, eta, zeta, indexing="ij")
    x = X
    y = Y * (1.0 - X)
    z = Z * (1.0 - X) * (1.0 - Y)
    w = np.einsum("i,j,k->ijk", wxi, weta, wzeta)
    points = np.column_stack(
        [(1.0 - x - y - z).ravel(), x.ravel(), y.ravel(), z.ravel()]
    )
    return QuadratureRule(3, 2 * n - 1, points, w.ravel())


_TRIANGLE_DEGREES = sorted(_TRIANGLE_ORBITS)


def rule(dim: int, degree: int) -> QuadratureRule:
    """Smallest stored rule on the reference `dim`-simplex exact to `degree`."""
    if dim not in (1, 2, 3):
        raise ValueError(f"unsupported simplex dimension {dim}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if degree > MAX_DEGREE:
        raise ValueError(f"degree {degree} exceeds supported maximum {MAX_DEGREE}")
    if dim == 1:
        return _interval_rule(degree)
    if dim == 2:
        table_degree = next(d for d in _TRIANGLE_DEGREES if d >= degree)
        return _triangle_rule(table_degree)
    return _tet_rule(degree)
