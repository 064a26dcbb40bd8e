"""Floating-point evaluation and finite-difference residual verification.

Grid data lives on uniform rectangular grids; jets are estimated with
4th-order central stencils (one 1-D stencil per axis, so mixed partials are
composition-order independent), and only interior points ever enter a
residual: stencil application poisons the boundary band with NaN, evaluation
trims the accumulated margin and checks that nothing non-finite survives.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .multiindex import multiindices_up_to
from .symcore import JET, CoordinateId, Expr, JetContext, VarjetError
from .jetcalc import EquationSystem
from .variational import LegendreForm

MAX_FD_ORDER = 4


class MissingFieldError(VarjetError):
    pass


class GridTooSmallError(VarjetError):
    pass


def evaluate(e: Expr, sample: Mapping[CoordinateId, object]):
    """Evaluate a polynomial at a sample; values may be floats or numpy arrays."""
    total = None
    for mono, coeff in e.terms:
        term = float(coeff)
        for c, p in mono:
            if c not in sample:
                raise MissingFieldError(f"sample is missing coordinate {c}")
            term = term * sample[c] ** p
        total = term if total is None else total + term
    if total is None:
        return 0.0
    return total


@dataclass
class GridFunction:
    """Uniform rectangular grid with one float64 array per dependent field."""

    axes: Tuple[str, ...]
    origin: Tuple[float, ...]
    spacing: Tuple[float, ...]
    fields: Dict[str, np.ndarray]

    def __post_init__(self):
        self.axes = tuple(self.axes)
        self.origin = tuple(float(v) for v in self.origin)
        self.spacing = tuple(float(v) for v in self.spacing)
        if any(h <= 0 for h in self.spacing):
            raise VarjetError("grid spacings must be positive")
        shapes = {f.shape for f in self.fields.values()}
        if len(shapes) > 1:
            raise VarjetError("all field arrays must share one shape")
        for name, arr in self.fields.items():
            if arr.ndim != len(self.axes):
                raise VarjetError(f"field {name!r} rank does not match the axes")
            self.fields[name] = np.asarray(arr, dtype=np.float64)

    @property
    def shape(self) -> Tuple[int, ...]:
        return next(iter(self.fields.values())).shape

    def axis_values(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing[a] * np.arange(self.shape[a])

    def meshes(self) -> List[np.ndarray]:
        return list(np.meshgrid(*(self.axis_values(a) for a in range(len(self.axes))),
                                indexing="ij"))


@lru_cache(maxsize=None)
def fd_weights(order: int, radius: int) -> Tuple[float, ...]:
    """Exact central finite-difference weights for one derivative order.

    Solves the Vandermonde moment system over the rationals on the symmetric
    stencil [-radius .. radius]; with radius = (order + 3) // 2 the truncation
    error is O(h^4).
    """
    offsets = list(range(-radius, radius + 1))
    npts = len(offsets)
    if order >= npts:
        raise GridTooSmallError("stencil too narrow for the requested derivative")
    rows = [[Fraction(o) ** k for o in offsets] for k in range(npts)]
    rhs = [Fraction(0)] * npts
    import math
    rhs[order] = Fraction(math.factorial(order))
    # Gaussian elimination with exact arithmetic
    aug = [row + [rhs[k]] for k, row in enumerate(rows)]
    for col in range(npts):
        pivot = next(r for r in range(col, npts) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(npts):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(float(aug[k][npts]) for k in range(npts))


def stencil_radius(order: int) -> int:
    return 0 if order == 0 else (order + 3) // 2


def _apply_stencil(arr: np.ndarray, axis: int, order: int, h: float) -> np.ndarray:
    """1-D central stencil along one axis; the boundary band becomes NaN."""
    if order == 0:
        return arr
    r = stencil_radius(order)
    n = arr.shape[axis]
    if n < 2 * r + 1:
        raise GridTooSmallError(
            f"axis of {n} points cannot host a radius-{r} stencil")
    weights = fd_weights(order, r)
    out = np.full_like(arr, np.nan)
    core = [slice(None)] * arr.ndim
    core[axis] = slice(r, n - r)
    center = arr[tuple(core)]
    # weights sum to zero exactly, so accumulate weighted differences from the
    # center tap: constants are annihilated bit-exactly
    acc = np.zeros(center.shape)
    for k, w in enumerate(weights):
        o = k - r
        if o == 0:
            continue
        src = [slice(None)] * arr.ndim
        src[axis] = slice(r + o, n - r + o if n - r + o != 0 else None)
        acc = acc + w * (arr[tuple(src)] - center)
    out[tuple(core)] = acc / h ** order
    return out


@dataclass
class ProlongedGrid:
    """Finite-difference jet estimates; arrays are full-shape with NaN margins."""

    context: JetContext
    grid: GridFunction
    order: int
    samples: Dict[CoordinateId, np.ndarray]
    margin: Tuple[int, ...]

    def interior(self) -> Tuple[slice, ...]:
        return tuple(slice(m, s - m) for m, s in zip(self.margin, self.grid.shape))


def fd_prolong(grid: GridFunction, order: int, ctx: JetContext) -> ProlongedGrid:
    """Central 4th-order estimates of all jets u_I^a with |I| <= order."""
    if order > MAX_FD_ORDER:
        raise VarjetError(f"finite-difference prolongation supports order <= {MAX_FD_ORDER}")
    if tuple(grid.axes) != ctx.independents:
        raise VarjetError("grid axes do not match the context independents")
    samples: Dict[CoordinateId, np.ndarray] = {}
    for i, mesh in enumerate(grid.meshes()):
        samples[CoordinateId.independent(i)] = mesh
    margin = [0] * ctx.n
    for alpha, dep in enumerate(ctx.dependents):
        if dep not in grid.fields:
            raise MissingFieldError(f"grid is missing the dependent field {dep!r}")
        base = grid.fields[dep]
        for I in multiindices_up_to(ctx.n, order):
            arr = base
            for axis in range(ctx.n):
                m = I.count(axis)
                if m:
                    arr = _apply_stencil(arr, axis, m, grid.spacing[axis])
                    margin[axis] = max(margin[axis], stencil_radius(m))
            samples[CoordinateId.jet(alpha, I)] = arr
    return ProlongedGrid(ctx, grid, order, samples, tuple(margin))


def _max_jet_order(exprs) -> int:
    return max((e.max_jet_order() for e in exprs), default=0)


def residual(system: EquationSystem, grid: GridFunction,
             momentum_fields: Optional[GridFunction] = None,
             legendre: Optional[LegendreForm] = None) -> Dict[str, float]:
    """Max-abs interior residual of every equation against sampled field data.

    Jet unknowns come from finite-difference prolongation of the grid.  For
    mixed first-order systems the momentum unknowns are either read from
    ``momentum_fields`` (matching plain names) or generated by evaluating the
    Legendre-form coefficients along the prolonged field; comma-derivatives of
    all unknowns are differenced with the same stencils.
    """
    dc = system.derived
    if dc is None:
        ctx = system.context
        order = _max_jet_order([res for _, res in system.equations])
        pr = fd_prolong(grid, order, ctx)
        return _collect(system, pr.samples, grid.shape, pr.margin)

    base = dc.base
    need = max([len(c.index) for c in dc.fiber if c.kind == JET], default=0)
    if legendre is not None:
        need = max(need, _max_jet_order(legendre.coeffs.values()))
    pr = fd_prolong(grid, need, base)

    dep_arrays: Dict[int, np.ndarray] = {}
    for k, c in enumerate(dc.fiber):
        if c.kind == JET:
            dep_arrays[k] = pr.samples[c]
        else:
            name = base.name(c)
            if momentum_fields is not None and name in momentum_fields.fields:
                dep_arrays[k] = momentum_fields.fields[name]
            elif legendre is not None:
                coeff = legendre.coefficient(c.alpha, c.index, c.i)
                dep_arrays[k] = evaluate(coeff, pr.samples) \
                    if not coeff.is_zero() else np.zeros(grid.shape)
            else:
                raise MissingFieldError(
                    f"no field or Legendre form supplies the momentum {name}")

    sample: Dict[CoordinateId, np.ndarray] = {
        CoordinateId.independent(i): pr.samples[CoordinateId.independent(i)]
        for i in range(base.n)}
    margin = list(pr.margin)
    needed = {c for _, res in system.equations for c in res.coordinates()}
    for c in needed:
        if c.kind != JET:
            continue
        arr = dep_arrays[c.alpha]
        if len(c.index) == 0:
            sample[c] = arr
        else:
            # comma-derivatives of unknowns use the same first-order stencil
            axis = c.index.entries[0]
            sample[c] = _apply_stencil(arr, axis, 1, grid.spacing[axis])
            margin[axis] = max(margin[axis], pr.margin[axis] + stencil_radius(1))
    return _collect(system, sample, grid.shape, tuple(margin))


def _collect(system: EquationSystem, sample, shape, margin) -> Dict[str, float]:
    if any(s - 2 * m <= 0 for s, m in zip(shape, margin)):
        raise GridTooSmallError("grid too small for the stencil margins")
    interior = tuple(slice(m, s - m) for m, s in zip(margin, shape))
    out: Dict[str, float] = {}
    for label, res in system.equations:
        vals = evaluate(res, sample)
        if np.isscalar(vals) or np.ndim(vals) == 0:
            out[label] = abs(float(vals))
            continue
        core = np.asarray(vals)[interior]
        if not np.all(np.isfinite(core)):
            raise VarjetError(f"non-finite interior residual for equation {label!r}")
        out[label] = float(np.max(np.abs(core)))
    return out


# -- grid file format --------------------------------------------------------

_MAGIC = b"VJGRID1\n"


def save_grid(grid: GridFunction, path: str) -> None:
    """Write the documented binary layout: magic, u32 header length, JSON
    header, then each field as little-endian float64 in C order."""
    names = sorted(grid.fields)
    header = json.dumps({
        "axes": list(grid.axes),
        "shape": list(grid.shape),
        "origin": list(grid.origin),
        "spacing": list(grid.spacing),
        "fields": names,
    }, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for name in names:
            fh.write(np.ascontiguousarray(grid.fields[name], dtype="<f8").tobytes())


def load_grid(path: str) -> GridFunction:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise VarjetError(f"{path}: not a varjet grid file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        shape = tuple(header["shape"])
        count = int(np.prod(shape))
        fields = {}
        for name in header["fields"]:
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise VarjetError(f"{path}: truncated field {name!r}")
            fields[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return GridFunction(tuple(header["axes"]), tuple(header["origin"]),
                        tuple(header["spacing"]), fields)
