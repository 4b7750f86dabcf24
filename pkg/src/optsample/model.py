"""Domains, measures, bases and designs.

Points are always stored as float arrays of shape ``(n, d)``. Basis values
are complex. Nothing in this module touches global random state; every
sampler takes a ``numpy.random.Generator`` (or a seed, via :func:`as_rng`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import eval_legendre

from ._kernels import trig_poly_eval


class BasisIndexError(IndexError):
    """A basis index outside ``[0, basis.dim)`` was requested."""


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Domains and measures


@dataclass(frozen=True)
class Domain:
    """A sampling domain.

    ``kind`` is one of ``"interval"`` ([0, 1]), ``"cube"`` ([0, 1]^d),
    ``"circle"`` ([0, 1) with wrap-around) or ``"finite"`` (the rows of
    ``nodes``).
    """

    kind: str
    dim: int = 1
    nodes: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("interval", "cube", "circle", "finite"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind in ("interval", "circle") and self.dim != 1:
            raise ValueError(f"{self.kind} is one-dimensional")
        if self.kind == "finite":
            if self.nodes is None:
                raise ValueError("finite domain needs nodes")
            nodes = np.asarray(self.nodes, dtype=float).reshape(len(self.nodes), -1)
            object.__setattr__(self, "nodes", nodes)
            object.__setattr__(self, "dim", nodes.shape[1])

    @classmethod
    def interval(cls):
        return cls("interval")

    @classmethod
    def circle(cls):
        return cls("circle")

    @classmethod
    def cube(cls, d):
        return cls("cube", d)

    @classmethod
    def finite(cls, nodes):
        return cls("finite", nodes=np.asarray(nodes, dtype=float))

    @property
    def size(self):
        return None if self.nodes is None else self.nodes.shape[0]

    def as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x.reshape(-1, 1) if self.dim == 1 else x.reshape(1, -1)
        if x.shape[1] != self.dim:
            raise ValueError(f"points of dimension {x.shape[1]} on a {self.dim}-dim domain")
        return x

    def dist(self, x, y) -> np.ndarray:
        """Pairwise (row-aligned) distance; the circle uses the torus metric."""
        x = self.as_points(x)
        y = self.as_points(y)
        diff = np.abs(x - y)
        if self.kind == "circle":
            diff = diff % 1.0
            diff = np.minimum(diff, 1.0 - diff)
        return np.sqrt((diff * diff).sum(axis=1))


@dataclass(frozen=True)
class Measure:
    """A probability measure on a domain.

    The reference measure is Lebesgue on interval/cube/circle and the
    normalized counting measure on a finite domain. ``density`` (relative to
    that reference) is optional; when given, ``density_bound`` must bound it
    so the sampler can use rejection.
    """

    domain: Domain
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    density_bound: Optional[float] = None
    total_mass: float = 1.0

    @classmethod
    def uniform(cls, domain: Domain):
        return cls(domain)

    def _reference_draw(self, n, rng):
        d = self.domain
        if d.kind == "finite":
            return d.nodes[rng.integers(0, d.size, size=n)]
        return rng.random((n, d.dim))

    def sample(self, n, seed=None) -> np.ndarray:
        rng = as_rng(seed)
        if self.density is None:
            return self._reference_draw(n, rng)
        if self.density_bound is None:
            raise ValueError("density without bound cannot be sampled")
        out = []
        need = n
        while need > 0:
            batch = self._reference_draw(max(64, 2 * need), rng)
            u = rng.random(batch.shape[0]) * self.density_bound
            keep = batch[u < self.density(batch)]
            out.append(keep[:need])
            need -= out[-1].shape[0]
        return np.concatenate(out, axis=0)


# ---------------------------------------------------------------------------
# Bases


class Basis:
    """An indexed family ``b_0, b_1, ...`` of complex functions.

    Subclasses implement :meth:`matrix`. ``dim`` is ``None`` for an
    unbounded family. ``theta`` is a uniform bound on ``|b_k|`` when one is
    known. ``singular_values`` optionally attaches a sequence ``sigma_k``
    (a callable ``k -> sigma_k`` on integer arrays).
    """

    name = "basis"
    dim: Optional[int] = None
    theta: Optional[float] = None

    def __init__(self, domain: Domain, singular_values=None):
        self.domain = domain
        self.singular_values = singular_values

    def _check(self, indices):
        indices = np.asarray(indices, dtype=np.int64).ravel()
        if indices.size and (indices.min() < 0 or (self.dim is not None and indices.max() >= self.dim)):
            raise BasisIndexError(f"basis index out of range [0, {self.dim})")
        return indices

    def matrix(self, x, indices) -> np.ndarray:
        """Return ``B[i, j] = b_{indices[j]}(x_i)`` as a complex array."""
        raise NotImplementedError

    def prefix(self, x, m) -> np.ndarray:
        return self.matrix(x, np.arange(m))

    def eval(self, k, x) -> np.ndarray:
        return self.matrix(x, [k])[:, 0]

    def sigma(self, k) -> np.ndarray:
        if self.singular_values is None:
            raise ValueError(f"{self.name} basis has no singular values attached")
        return np.asarray(self.singular_values(np.asarray(k)), dtype=float)

    def christoffel_sup(self, m) -> Optional[float]:
        """Upper bound on ``(1/m) sum_{k<m} |b_k(x)|^2`` over the domain."""
        if self.theta is None:
            return None
        return self.theta ** 2

    def christoffel(self, x, m) -> np.ndarray:
        b = self.prefix(x, m)
        return (np.abs(b) ** 2).sum(axis=1) / m

    def exact_gram_diagonal(self) -> bool:
        """True when ``int b_j conj(b_k) dmu = delta_jk`` holds in closed form."""
        return False


def trig_frequency(k):
    """Frequency of trig index ``k``: 0, 1, -1, 2, -2, ..."""
    k = np.asarray(k, dtype=np.int64)
    return np.where(k % 2 == 1, (k + 1) // 2, -(k // 2))


def trig_index(freq):
    """Inverse of :func:`trig_frequency`."""
    freq = np.asarray(freq, dtype=np.int64)
    return np.where(freq > 0, 2 * freq - 1, -2 * freq)


class TrigBasis(Basis):
    """``exp(2 pi i f x)`` on the circle, frequencies ordered 0, 1, -1, 2, -2, ..."""

    name = "trig"
    theta = 1.0

    def __init__(self, singular_values=None):
        super().__init__(Domain.circle(), singular_values)

    def matrix(self, x, indices):
        indices = self._check(indices)
        x = self.domain.as_points(x)[:, 0]
        phase = np.outer(x, trig_frequency(indices).astype(float))
        phase -= np.floor(phase)
        return np.exp(2j * np.pi * phase)

    def christoffel_sup(self, m):
        return 1.0

    def christoffel(self, x, m):
        return np.ones(self.domain.as_points(x).shape[0])

    def exact_gram_diagonal(self):
        return True


class LegendreBasis(Basis):
    """``sqrt(2k+1) P_k(2x-1)``, orthonormal for Lebesgue measure on [0, 1]."""

    name = "legendre"

    def __init__(self, singular_values=None):
        super().__init__(Domain.interval(), singular_values)

    def matrix(self, x, indices):
        indices = self._check(indices)
        t = 2.0 * self.domain.as_points(x)[:, 0] - 1.0
        vals = eval_legendre(indices[None, :], t[:, None]) * np.sqrt(2 * indices + 1.0)
        return vals.astype(np.complex128)

    def christoffel_sup(self, m):
        # attained at the end points: (1/m) sum (2k+1) = m
        return float(m)

    def exact_gram_diagonal(self):
        return True


class HaarBasis(Basis):
    """Haar system on [0, 1]: index 0 is the constant, ``2^j + i`` is psi_{j,i}."""

    name = "haar"

    def __init__(self, singular_values=None):
        super().__init__(Domain.interval(), singular_values)

    def matrix(self, x, indices):
        indices = self._check(indices)
        x = self.domain.as_points(x)[:, 0]
        out = np.zeros((x.size, indices.size), dtype=np.complex128)
        for col, k in enumerate(indices):
            if k == 0:
                out[:, col] = 1.0
                continue
            j = int(k).bit_length() - 1
            i = int(k) - (1 << j)
            scale = 2.0 ** j
            t = x * scale - i
            amp = 2.0 ** (j / 2)
            out[:, col] = np.where((t >= 0) & (t < 0.5), amp, np.where((t >= 0.5) & (t < 1), -amp, 0.0))
        return out

    def christoffel_sup(self, m):
        levels = max(1, int(m - 1).bit_length() + 1)
        grid = (np.arange(2 ** levels) + 0.5) / 2 ** levels
        return float(self.christoffel(grid, m).max())

    def exact_gram_diagonal(self):
        return True


class TabulatedBasis(Basis):
    """Basis given by its values on the nodes of a finite domain.

    Evaluation at an arbitrary point uses the nearest node. The reference
    measure is the normalized counting measure on the nodes, so the table is
    orthonormal iff ``values^* values / n_nodes`` is the identity.
    """

    name = "custom-tabulated"

    def __init__(self, nodes, values, singular_values=None):
        super().__init__(Domain.finite(nodes), singular_values)
        self.values = np.asarray(values, dtype=np.complex128)
        if self.values.shape[0] != self.domain.size:
            raise ValueError("one row of values per node expected")
        self.dim = self.values.shape[1]
        self.theta = float(np.abs(self.values).max())

    @classmethod
    def from_csv(cls, path_or_text):
        """Read ``x_1..x_d, b_0, b_1, ...`` rows; the header names columns.

        Header columns starting with ``x`` are coordinates, the rest are basis
        functions. Complex entries use Python syntax (``1+2j``).
        """
        if "\n" in str(path_or_text):
            fh = io.StringIO(path_or_text)
        else:
            fh = open(path_or_text, newline="")
        with fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], [r for r in rows[1:] if r]
        xcols = [i for i, h in enumerate(header) if h.strip().lower().startswith("x")]
        bcols = [i for i in range(len(header)) if i not in xcols]
        nodes = np.array([[float(r[i]) for i in xcols] for r in body])
        values = np.array([[complex(r[i].strip().replace(" ", "")) for i in bcols] for r in body])
        return cls(nodes, values)

    def matrix(self, x, indices):
        indices = self._check(indices)
        x = self.domain.as_points(x)
        nodes = self.domain.nodes
        d2 = ((x[:, None, :] - nodes[None, :, :]) ** 2).sum(axis=2)
        return self.values[np.argmin(d2, axis=1)][:, indices]

    def christoffel_sup(self, m):
        return float((np.abs(self.values[:, :m]) ** 2).sum(axis=1).max() / m)


class FunctionBasis(Basis):
    """Basis from a list of vectorized callables (no orthonormality promised)."""

    name = "functions"

    def __init__(self, domain, functions: Sequence[Callable], theta=None):
        super().__init__(domain)
        self.functions = list(functions)
        self.dim = len(self.functions)
        self.theta = theta

    def matrix(self, x, indices):
        indices = self._check(indices)
        x = self.domain.as_points(x)
        cols = [np.broadcast_to(np.asarray(self.functions[k](x), dtype=np.complex128), (x.shape[0],))
                for k in indices]
        return np.stack(cols, axis=1) if cols else np.zeros((x.shape[0], 0), dtype=np.complex128)


BASIS_FAMILIES = {
    "trig": TrigBasis,
    "legendre": LegendreBasis,
    "haar": HaarBasis,
}


def make_basis(name, sigma_decay=None, table=None):
    """Build a basis by CLI name.

    ``sigma_decay`` attaches ``sigma_k = max(k, 1)^(-sigma_decay)``.
    """
    sv = None
    if sigma_decay is not None:
        sv = lambda k, t=sigma_decay: np.maximum(np.asarray(k, dtype=float), 1.0) ** (-t)
    if name == "custom-tabulated":
        if table is None:
            raise ValueError("custom-tabulated basis needs a CSV table")
        basis = TabulatedBasis.from_csv(table)
        basis.singular_values = sv
        return basis
    try:
        return BASIS_FAMILIES[name](singular_values=sv)
    except KeyError:
        raise ValueError(f"unknown basis family {name!r}") from None


# ---------------------------------------------------------------------------
# Designs and targets


@dataclass(frozen=True)
class SampledDesign:
    """Points (rows) with positive weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape[0] < 1:
            raise ValueError("a design needs at least one point")
        if w.shape[0] != pts.shape[0]:
            raise ValueError("one weight per point expected")
        if not np.all(w > 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def equal_weights(cls, points, total=1.0):
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        return cls(points, np.full(n, total / n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        d = self.points.shape[1]
        writer.writerow([f"x_{i + 1}" for i in range(d)] + ["w"])
        for p, w in zip(self.points, self.weights):
            writer.writerow([repr(float(v)) for v in p] + [repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(data[:, :-1], data[:, -1])


class TargetFunction:
    """A deterministic function, optionally with known expansion coefficients.

    ``coefficients`` maps basis indices (array) to coefficient values (array)
    for the attached ``basis``.
    """

    def __init__(self, func, basis=None, indices=None, coefficients=None, name="target"):
        self.func = func
        self.basis = basis
        self.indices = None if indices is None else np.asarray(indices, dtype=np.int64)
        self.coefficients = None if coefficients is None else np.asarray(coefficients, dtype=np.complex128)
        self.name = name

    def __call__(self, x):
        return self.func(x)

    def coefficient_vector(self, m):
        """Coefficients on ``b_0..b_{m-1}`` (zero-padded)."""
        out = np.zeros(m, dtype=np.complex128)
        sel = self.indices < m
        out[self.indices[sel]] = self.coefficients[sel]
        return out

    def tail_norm_sq(self, m):
        """``||f - P_m f||_2^2`` from the exact coefficients."""
        sel = self.indices >= m
        return float(np.sum(np.abs(self.coefficients[sel]) ** 2))


class TrigSeries(TargetFunction):
    """Finite trig sum ``sum_k c_k b_k`` with trig indices, evaluated by a kernel."""

    def __init__(self, indices, coefficients, name="trig-series"):
        indices = np.asarray(indices, dtype=np.int64)
        coefficients = np.asarray(coefficients, dtype=np.complex128)
        freqs = trig_frequency(indices)
        self._fmin = int(freqs.min())
        band = np.zeros(int(freqs.max()) - self._fmin + 1, dtype=np.complex128)
        np.add.at(band, freqs - self._fmin, coefficients)
        self._band = band
        super().__init__(self._eval, TrigBasis(), indices, coefficients, name)

    def _eval(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return trig_poly_eval(x, self._fmin, self._band)


# ---------------------------------------------------------------------------
# Operations


def eval_basis_block(basis: Basis, indices, x) -> np.ndarray:
    """Values ``(b_{indices[j]}(x))_j`` at a single point ``x``."""
    return basis.matrix(basis.domain.as_points(x)[:1], indices)[0]


def orthonormality_defect(basis: Basis, measure: Measure, m: int, mc_budget: int = 100_000, seed=0) -> float:
    """Max over ``j, k < m`` of ``|MC<b_j, b_k> - delta_jk|`` from ``mc_budget`` draws."""
    if basis.dim is not None and m > basis.dim:
        raise BasisIndexError(f"m={m} exceeds basis dimension {basis.dim}")
    x = measure.sample(mc_budget, as_rng(seed))
    B = basis.prefix(x, m)
    G = B.conj().T @ B / mc_budget
    return float(np.abs(G - np.eye(m)).max())


def harmonic(n: int) -> float:
    return math.fsum(1.0 / i for i in range(1, n + 1))
