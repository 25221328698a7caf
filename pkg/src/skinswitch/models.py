"""Tight-binding models as displacement-indexed hopping blocks.

A model is a list of (displacement, block) terms. The Bloch matrix uses the
convention H(k) = sum_d M_d exp(+i k.d) with d = target - source, so a term
with displacement d = (+1, 0) moves amplitude toward larger x. Real-space
matrices place each block at (target = source + d, source), with hops that
wrap around a lattice edge scaled by the boundary factor of that direction
(beta = 1 periodic, beta = 0 open).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "HoppingTerm",
    "HoppingModel",
    "Geometry",
    "BoundarySpec",
    "one_band_model",
    "size_model",
    "benchmark_model",
    "three_band_model",
    "kagome_model",
    "bloch_matrix",
    "real_space_matrix",
    "supercell_matrix",
    "MODEL_BUILDERS",
]


@dataclass(frozen=True)
class HoppingTerm:
    """One hopping block: `block[b_target, b_source]` at cell displacement `displacement`."""

    displacement: tuple[int, ...]
    block: np.ndarray

    def __post_init__(self):
        blk = np.asarray(self.block, dtype=complex)
        if blk.ndim != 2 or blk.shape[0] != blk.shape[1]:
            raise ValueError(f"hopping block must be square, got shape {blk.shape}")
        object.__setattr__(self, "block", blk)
        object.__setattr__(self, "displacement", tuple(int(d) for d in self.displacement))


@dataclass(frozen=True)
class HoppingModel:
    """A lattice model: band count, spatial dimension, hopping terms, parameters."""

    name: str
    bands: int
    dim: int
    terms: tuple[HoppingTerm, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[tuple[int, ...], np.ndarray] = {}
        for t in self.terms:
            if len(t.displacement) != self.dim:
                raise ValueError(
                    f"term displacement {t.displacement} has length "
                    f"{len(t.displacement)}, model dim is {self.dim}"
                )
            if t.block.shape != (self.bands, self.bands):
                raise ValueError(
                    f"block shape {t.block.shape} does not match bands={self.bands}"
                )
            if t.displacement in merged:
                merged[t.displacement] = merged[t.displacement] + t.block
            else:
                merged[t.displacement] = t.block.copy()
        object.__setattr__(
            self,
            "terms",
            tuple(HoppingTerm(d, b) for d, b in sorted(merged.items())),
        )
        object.__setattr__(self, "params", dict(self.params))

    def term_map(self) -> dict[tuple[int, ...], np.ndarray]:
        return {t.displacement: t.block for t in self.terms}


@dataclass(frozen=True)
class Geometry:
    """Lattice extents and the fixed site-index convention.

    index(x, y, b) = ((y-1)*L_x + (x-1))*B + b with x in [1, L_x],
    y in [1, L_y] and b in [0, B).
    """

    L_x: int
    L_y: int
    bands: int

    def __post_init__(self):
        for nm in ("L_x", "L_y", "bands"):
            v = getattr(self, nm)
            if int(v) != v or v < 1:
                raise ValueError(f"{nm} must be a positive integer, got {v!r}")
            object.__setattr__(self, nm, int(v))

    @property
    def n_cells(self) -> int:
        return self.L_x * self.L_y

    @property
    def n_sites(self) -> int:
        return self.L_x * self.L_y * self.bands

    def index(self, x: int, y: int, b: int) -> int:
        if not (1 <= x <= self.L_x and 1 <= y <= self.L_y and 0 <= b < self.bands):
            raise ValueError(f"site ({x}, {y}, {b}) outside the lattice")
        return ((y - 1) * self.L_x + (x - 1)) * self.bands + b

    def x_coords(self) -> np.ndarray:
        """x cell coordinate of every site index (orbitals share their cell's x)."""
        xs = np.tile(np.arange(1, self.L_x + 1), self.L_y)
        return np.repeat(xs, self.bands).astype(float)

    def y_coords(self) -> np.ndarray:
        ys = np.repeat(np.arange(1, self.L_y + 1), self.L_x)
        return np.repeat(ys, self.bands).astype(float)


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary interpolation factors: 1 = periodic, 0 = open."""

    beta_x: float = 0.0
    beta_y: float = 0.0

    def __post_init__(self):
        for nm in ("beta_x", "beta_y"):
            v = float(getattr(self, nm))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{nm} must lie in [0, 1], got {v}")
            object.__setattr__(self, nm, v)


# --------------------------------------------------------------------------
# model factories
# --------------------------------------------------------------------------

def one_band_model(r: float = 0.5, N: int = 2) -> HoppingModel:
    """Symmetric nearest-neighbor chain plus one extra hop of strength r across N cells.

    N = 0 adds r on site; N = 1 tilts the nearest-neighbor pair to (1 + r, 1).
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if N < 0 or int(N) != N:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    one = np.ones((1, 1))
    terms = [HoppingTerm((1,), one), HoppingTerm((-1,), one),
             HoppingTerm((int(N),), r * one)]
    return HoppingModel("one_band", 1, 1, tuple(terms), {"r": r, "N": int(N)})


def size_model(t_0: float = 0.1, r: float = 0.5, N: int = 3) -> HoppingModel:
    """2D extension: transverse hops t_0 and one (N, 1) diagonal hop of strength r."""
    if N < 2 or int(N) != N:
        raise ValueError(f"size model requires integer N >= 2, got {N}")
    one = np.ones((1, 1))
    terms = [
        HoppingTerm((1, 0), one), HoppingTerm((-1, 0), one),
        HoppingTerm((0, 1), t_0 * one), HoppingTerm((0, -1), t_0 * one),
        HoppingTerm((int(N), 1), r * one),
    ]
    return HoppingModel("size", 1, 2, tuple(terms), {"t_0": t_0, "r": r, "N": int(N)})


def benchmark_model(t_0: float = 0.1, kappa_x: float = 0.013) -> HoppingModel:
    """Reciprocal-free comparison lattice with built-in x skin depth 1/kappa_x."""
    if kappa_x < 0:
        raise ValueError(f"kappa_x must be >= 0, got {kappa_x}")
    one = np.ones((1, 1))
    terms = [
        HoppingTerm((1, 0), np.exp(kappa_x) * one),
        HoppingTerm((-1, 0), np.exp(-kappa_x) * one),
        HoppingTerm((0, 1), t_0 * one), HoppingTerm((0, -1), t_0 * one),
    ]
    return HoppingModel("benchmark", 1, 2, tuple(terms),
                        {"t_0": t_0, "kappa_x": kappa_x})


def three_band_model(u_x: float = 1.1, v_x: float = 1 / 1.1,
                     u_y: float = 0.5, v_y: float = 0.5,
                     gamma: float = 0.0, t_c: float = 0.5) -> HoppingModel:
    """Three-orbital chain with asymmetric intra/inter-cell hops between orbitals 1, 2.

    Orbital 3 couples on site: entries [1,3] = [2,3] = t_c*u_y and
    [3,1] = [3,2] = t_c*v_y. A uniform loss -i*gamma sits on the diagonal.
    """
    V0 = np.array([
        [-1j * gamma, v_x, t_c * u_y],
        [u_x, -1j * gamma, t_c * u_y],
        [t_c * v_y, t_c * v_y, -1j * gamma],
    ], dtype=complex)
    Vm = np.zeros((3, 3), complex)
    Vm[0, 1] = u_x
    Vp = np.zeros((3, 3), complex)
    Vp[1, 0] = v_x
    terms = (HoppingTerm((0,), V0), HoppingTerm((-1,), Vm), HoppingTerm((1,), Vp))
    return HoppingModel("three_band", 3, 1, terms,
                        {"u_x": u_x, "v_x": v_x, "u_y": u_y, "v_y": v_y,
                         "gamma": gamma, "t_c": t_c})


def kagome_model(u_x: float = 1.1, v_x: float = 1 / 1.1,
                 u_y: float = 3.0, v_y: float = 1 / 3.0,
                 t_c: float = 0.5) -> HoppingModel:
    """Three-band 2D lattice with directed x hops and directed y hops through orbital 3.

    The inter-row blocks carry the directed couplings (t_c*u_y upward into
    orbital 3, t_c*v_y downward out of it); the on-site coupling to orbital 3
    is the symmetric t_c*sqrt(u_y*v_y). This keeps the net amplification per
    row at u_y/v_y, which is what makes the transverse boundary factor an
    effective switch at beta_y ~ (v_y/u_y)^(L_y/2).
    """
    s = t_c * np.sqrt(u_y * v_y)
    V = np.array([
        [0, v_x, s],
        [u_x, 0, s],
        [s, s, 0],
    ], dtype=complex)
    Vxp = np.zeros((3, 3), complex)
    Vxp[1, 0] = v_x
    Vxm = np.zeros((3, 3), complex)
    Vxm[0, 1] = u_x
    Vyp = np.zeros((3, 3), complex)   # pairs with exp(-i k_y): d = (0, -1)
    Vyp[0, 2] = t_c * v_y
    Vyp[1, 2] = t_c * v_y
    Vym = np.zeros((3, 3), complex)   # pairs with exp(+i k_y): d = (0, +1)
    Vym[2, 0] = t_c * u_y
    Vym[2, 1] = t_c * u_y
    terms = (
        HoppingTerm((0, 0), V),
        HoppingTerm((1, 0), Vxp), HoppingTerm((-1, 0), Vxm),
        HoppingTerm((0, -1), Vyp), HoppingTerm((0, 1), Vym),
    )
    return HoppingModel("kagome", 3, 2, terms,
                        {"u_x": u_x, "v_x": v_x, "u_y": u_y, "v_y": v_y,
                         "t_c": t_c})


MODEL_BUILDERS = {
    "one_band": one_band_model,
    "size": size_model,
    "benchmark": benchmark_model,
    "three_band": three_band_model,
    "kagome": kagome_model,
}


# --------------------------------------------------------------------------
# matrix builders
# --------------------------------------------------------------------------

def bloch_matrix(model: HoppingModel, k) -> np.ndarray:
    """H(k) = sum over terms of block * exp(+i k.d)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.dim,):
        raise ValueError(f"k has shape {k.shape}, model dim is {model.dim}")
    H = np.zeros((model.bands, model.bands), dtype=complex)
    for t in model.terms:
        H += t.block * np.exp(1j * float(np.dot(k, t.displacement)))
    return H


def _check_geometry(model: HoppingModel, geom: Geometry) -> None:
    if geom.bands != model.bands:
        raise ValueError(
            f"geometry bands {geom.bands} != model bands {model.bands}")
    if model.dim == 1 and geom.L_y != 1:
        raise ValueError("1D models require L_y = 1")


def _wrap(idx: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Wrap 1-based cell indices once around length L; flag wrapped entries."""
    wrapped = (idx < 1) | (idx > L)
    return (idx - 1) % L + 1, wrapped


def real_space_matrix(model: HoppingModel, geom: Geometry,
                      bc: BoundarySpec) -> np.ndarray:
    """Dense real-space matrix with wraparound blocks scaled by beta_x / beta_y.

    Hops longer than the lattice extent in a direction (which would wrap more
    than once) are rejected.
    """
    _check_geometry(model, geom)
    B = geom.bands
    n = geom.n_sites
    H = np.zeros((n, n), dtype=complex)
    xs = np.tile(np.arange(1, geom.L_x + 1), geom.L_y)
    ys = np.repeat(np.arange(1, geom.L_y + 1), geom.L_x)
    borb = np.arange(B)
    for t in model.terms:
        dx = t.displacement[0]
        dy = t.displacement[1] if model.dim == 2 else 0
        if abs(dx) >= geom.L_x and dx != 0:
            raise ValueError(
                f"hop displacement {t.displacement} reaches across the whole "
                f"lattice (L_x = {geom.L_x}); refusing to wrap more than once")
        if abs(dy) >= geom.L_y and dy != 0:
            raise ValueError(
                f"hop displacement {t.displacement} reaches across the whole "
                f"lattice (L_y = {geom.L_y}); refusing to wrap more than once")
        tx, wx = _wrap(xs + dx, geom.L_x)
        ty, wy = _wrap(ys + dy, geom.L_y)
        scale = np.ones(geom.n_cells)
        scale[wx] *= bc.beta_x
        scale[wy] *= bc.beta_y
        keep = scale != 0.0
        if not keep.any():
            continue
        src = np.nonzero(keep)[0]
        tgt = (ty[keep] - 1) * geom.L_x + (tx[keep] - 1)
        rows = (tgt[:, None, None] * B + borb[:, None]).astype(int)
        cols = (src[:, None, None] * B + borb[None, :]).astype(int)
        H[rows, cols] += scale[keep][:, None, None] * t.block[None, :, :]
    return H


def supercell_matrix(model: HoppingModel, geom: Geometry, beta_y: float,
                     k_x: float) -> np.ndarray:
    """Fourier transform x only: the (L_y*B)-dimensional transverse supercell
    matrix at momentum k_x, with real-space y kept at boundary factor beta_y.

    For 1D models this is just the Bloch matrix at k_x.
    """
    _check_geometry(model, geom)
    if model.dim == 1:
        return bloch_matrix(model, [k_x])
    B = geom.bands
    n = geom.L_y * B
    S = np.zeros((n, n), dtype=complex)
    ys = np.arange(1, geom.L_y + 1)
    borb = np.arange(B)
    for t in model.terms:
        dx, dy = t.displacement
        if abs(dy) >= geom.L_y and dy != 0:
            raise ValueError(
                f"hop displacement {t.displacement} reaches across the whole "
                f"lattice (L_y = {geom.L_y}); refusing to wrap more than once")
        phase = np.exp(1j * k_x * dx)
        ty, wy = _wrap(ys + dy, geom.L_y)
        scale = np.where(wy, beta_y, 1.0)
        keep = scale != 0.0
        if not keep.any():
            continue
        src = np.nonzero(keep)[0]
        tgt = ty[keep] - 1
        rows = (tgt[:, None, None] * B + borb[:, None]).astype(int)
        cols = (src[:, None, None] * B + borb[None, :]).astype(int)
        S[rows, cols] += (phase * scale[keep])[:, None, None] * t.block[None, :, :]
    return S
