"""Spectra, directional skin metrics, and point-gap winding numbers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import BoundarySpec, Geometry, HoppingModel, supercell_matrix

__all__ = [
    "EigenSystem",
    "SkinReport",
    "SpectralLoop",
    "RESIDUAL_TOL",
    "eigendecompose",
    "x_ipr",
    "x_ipr_spectrum",
    "mean_x_ipr",
    "classify_modes",
    "dominant_mode",
    "y_marginal_density",
    "spectral_diameter",
    "pbc_loop",
    "winding_number",
    "winding_skin_correspondence",
    "hausdorff_distance",
]

RESIDUAL_TOL = 1e-8
DEGENERATE_DEN_FACTOR = 1e-9   # guard for x_c -> L_x in the IPR weight


@dataclass
class EigenSystem:
    """Full spectrum of a real-space matrix: eigenvalues sorted by (Re, Im),
    unit-norm right eigenvectors as columns, and relative residuals."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    residuals: np.ndarray
    geometry: Geometry

    @property
    def reliable(self) -> bool:
        return bool(self.residuals.max() <= RESIDUAL_TOL)

    def __len__(self) -> int:
        return len(self.eigenvalues)


@dataclass
class SkinReport:
    """Per-eigenstate directional IPR, centers of mass, and labels."""

    x_ipr: np.ndarray
    x_center: np.ndarray
    labels: np.ndarray          # +1 right, -1 left, 0 bulk
    mean_x_ipr: float
    tau: float

    @property
    def n_right(self) -> int:
        return int((self.labels == 1).sum())

    @property
    def n_left(self) -> int:
        return int((self.labels == -1).sum())

    @property
    def n_bulk(self) -> int:
        return int((self.labels == 0).sum())


@dataclass
class SpectralLoop:
    """Branch energies of the transverse supercell along k_x in [0, 2pi)."""

    k_samples: np.ndarray
    branch_energies: np.ndarray   # shape (n_samples, n_branches)
    closed: bool = True

    def points(self) -> np.ndarray:
        return self.branch_energies.ravel()


def eigendecompose(M: np.ndarray, geom: Geometry) -> EigenSystem:
    """Dense non-symmetric eigendecomposition with residual bookkeeping."""
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    n = M.shape[0]
    if M.shape != (n, n) or n != geom.n_sites:
        raise ValueError(f"matrix shape {M.shape} does not match geometry "
                         f"dimension {geom.n_sites}")
    E, V = np.linalg.eig(M)
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    order = np.lexsort((E.imag, E.real))
    E, V = E[order], V[:, order]
    hnorm = np.linalg.norm(M)
    if hnorm == 0.0:
        hnorm = 1.0
    res = np.linalg.norm(M @ V - V * E[None, :], axis=0) / hnorm
    return EigenSystem(E, V, res, geom)


def _ipr_terms(W: np.ndarray, xs: np.ndarray, L_x: int):
    """Shared IPR kernel on |psi|^2 columns W; returns (values, centers)."""
    tot = W.sum(axis=0)
    xc = (xs @ W) / tot
    Q = W * W
    num = (xs @ Q) - xc * Q.sum(axis=0)
    den = L_x - xc
    eps = DEGENERATE_DEN_FACTOR * L_x
    bad = den < eps
    if np.any(bad):
        # near-perfect right-edge localization: replace only the x = L_x
        # terms' weight by its exact limit value 1
        num = np.array(num, copy=True)
        den = np.array(den, copy=True)
        edge = xs == L_x
        for j in np.nonzero(bad)[0]:
            q = Q[:, j]
            inner_num = ((xs - xc[j]) * q)[~edge].sum()
            if den[j] != 0.0:
                inner = inner_num / den[j]
            else:
                inner = 0.0 if inner_num == 0.0 else np.sign(inner_num) * np.inf
            num[j] = inner + q[edge].sum()
            den[j] = 1.0
    vals = num / den / tot**2
    return vals, xc


def x_ipr(psi: np.ndarray, geom: Geometry) -> tuple[float, float]:
    """Signed, size-normalized participation measure of x localization.

    Positive means localization toward x = L_x, negative toward x = 1, and
    it vanishes identically for states with x-mirror-symmetric modulus.
    """
    psi = np.asarray(psi, dtype=complex)
    W = (np.abs(psi) ** 2)[:, None]
    if W.sum() == 0:
        raise ValueError("zero vector has no localization measure")
    vals, xc = _ipr_terms(W, geom.x_coords(), geom.L_x)
    return float(vals[0]), float(xc[0])


def x_ipr_spectrum(es: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """x_ipr of every eigenstate, vectorized over columns."""
    W = np.abs(es.right_vectors) ** 2
    vals, xc = _ipr_terms(W, es.geometry.x_coords(), es.geometry.L_x)
    return vals, xc


def mean_x_ipr(es: EigenSystem) -> float:
    vals, _ = x_ipr_spectrum(es)
    return float(vals.mean())


def classify_modes(es: EigenSystem, tau: float = 1e-3) -> SkinReport:
    """Label each eigenstate Right / Left / Bulk by the sign of its x-IPR."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    vals, xc = x_ipr_spectrum(es)
    labels = np.where(vals > tau, 1, np.where(vals < -tau, -1, 0))
    return SkinReport(vals, xc, labels, float(vals.mean()), tau)


def dominant_mode(es: EigenSystem) -> tuple[int, np.ndarray]:
    """Eigenstate with the largest Im E; ties broken by larger Re E, then index."""
    if len(es) == 0:
        raise ValueError("empty spectrum")
    E = es.eigenvalues
    order = np.lexsort((np.arange(len(E)), -E.real, -E.imag))
    idx = int(order[0])
    return idx, es.right_vectors[:, idx]


def y_marginal_density(psi: np.ndarray, geom: Geometry) -> np.ndarray:
    """p(x) = sum over y and orbitals of |psi|^2, for a normalized state."""
    w = np.abs(np.asarray(psi)) ** 2
    w = w.reshape(geom.L_y, geom.L_x, geom.bands)
    return w.sum(axis=(0, 2))


def spectral_diameter(points: np.ndarray) -> float:
    """Bounding-box diagonal of a complex point set (diameter surrogate)."""
    pts = np.asarray(points).ravel()
    if len(pts) == 0:
        return 0.0
    return float(np.hypot(np.ptp(pts.real), np.ptp(pts.imag)))


# --------------------------------------------------------------------------
# spectral loops and winding numbers
# --------------------------------------------------------------------------

class XMomentumEvaluator:
    """Transverse supercell as a function of k_x (x at full periodicity)."""

    def __init__(self, model: HoppingModel, geom: Geometry, beta_y: float = 0.0):
        self.model = model
        self.geom = geom
        self.beta_y = float(beta_y)
        self.dim = geom.L_y * geom.bands if model.dim == 2 else geom.bands

    def matrix(self, k_x: float) -> np.ndarray:
        return supercell_matrix(self.model, self.geom, self.beta_y, k_x)

    def branches(self, k_x: float) -> np.ndarray:
        return np.linalg.eigvals(self.matrix(k_x))

    def det_shifted(self, k_x: float, E0: complex) -> complex:
        M = self.matrix(k_x)
        return complex(np.linalg.det(M - E0 * np.eye(M.shape[0])))


def _match_to_previous(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Order `cur` to continue the branches in `prev` (greedy nearest match)."""
    cur = list(cur)
    out = np.empty(len(prev), dtype=complex)
    for i, p in enumerate(prev):
        j = int(np.argmin(np.abs(np.asarray(cur) - p)))
        out[i] = cur.pop(j)
    return out


def pbc_loop(model: HoppingModel, geom: Geometry, bc: BoundarySpec,
             resolution: int = 256, max_refine: int = 6) -> SpectralLoop:
    """Branch energies along k_x with adaptive sample doubling wherever a
    branch moves by more than 5% of the spectral diameter between samples.

    x is always treated at full periodicity (complex phase); beta_y enters
    through the real-space transverse slice.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    ev = XMomentumEvaluator(model, geom, bc.beta_y)
    ks = list(np.linspace(0.0, 2 * np.pi, resolution, endpoint=False))
    branches = [np.sort_complex(ev.branches(k)) for k in ks]
    for i in range(1, len(branches)):
        branches[i] = _match_to_previous(branches[i - 1], branches[i])
    for _ in range(max_refine):
        diam = spectral_diameter(np.concatenate(branches))
        tol = 0.05 * diam if diam > 0 else np.inf
        inserts = []
        for i in range(len(ks)):
            nxt = (i + 1) % len(ks)
            k_next = ks[nxt] if nxt else 2 * np.pi
            jump = np.abs(branches[nxt] - branches[i]).max()
            if jump > tol:
                inserts.append((i, 0.5 * (ks[i] + k_next)))
        if not inserts:
            break
        for i, kmid in reversed(inserts):
            mid = _match_to_previous(branches[i], ev.branches(kmid))
            ks.insert(i + 1, kmid)
            branches.insert(i + 1, mid)
    closing = np.abs(_match_to_previous(branches[-1], ev.branches(0.0))
                     - branches[-1]).max()
    diam = spectral_diameter(np.concatenate(branches))
    closed = bool(diam == 0 or closing <= 0.05 * diam + 1e-12)
    return SpectralLoop(np.asarray(ks), np.vstack(branches), closed)


def winding_number(ev: XMomentumEvaluator, E0: complex, resolution: int = 256,
                   max_refine: int = 12, loop_points: np.ndarray | None = None,
                   ) -> int:
    """Winding of det(H_supercell(k_x) - E0) around zero as k_x runs [0, 2pi).

    Positive = counter-clockwise. E0 must stay away from the loop; the raw
    accumulated phase must land within 0.01 of an integer.
    """
    if loop_points is None:
        ks0 = np.linspace(0, 2 * np.pi, max(64, resolution // 4), endpoint=False)
        loop_points = np.concatenate([ev.branches(k) for k in ks0])
    diam = spectral_diameter(loop_points)
    dist = np.abs(np.asarray(loop_points).ravel() - E0).min()
    if diam > 0 and dist <= 1e-6 * diam:
        raise ValueError(
            f"E0 = {E0} is within {dist:.3e} of the spectral loop "
            f"(guard 1e-6 * diameter = {1e-6 * diam:.3e})")

    ks = list(np.linspace(0.0, 2 * np.pi, resolution, endpoint=True))
    fs = [ev.det_shifted(k, E0) for k in ks]
    for depth in range(max_refine + 1):
        jumps = []
        for i in range(len(ks) - 1):
            dphi = np.angle(fs[i + 1] / fs[i])
            if abs(dphi) > np.pi / 2:
                jumps.append(i)
        if not jumps:
            break
        if depth == max_refine:
            raise ValueError("phase unwrapping failed at maximum refinement depth")
        for i in reversed(jumps):
            kmid = 0.5 * (ks[i] + ks[i + 1])
            ks.insert(i + 1, kmid)
            fs.insert(i + 1, ev.det_shifted(kmid, E0))
    fs_arr = np.asarray(fs)
    total = float(np.angle(fs_arr[1:] / fs_arr[:-1]).sum()) / (2 * np.pi)
    w = int(round(total))
    if abs(total - w) >= 0.01:
        raise ValueError(f"winding did not converge to an integer: {total}")
    return w


def winding_skin_correspondence(model: HoppingModel, geom: Geometry,
                                resolution: int = 256, tau: float = 1e-3,
                                calibration_sign: int = 1) -> int:
    """Count OBC eigenstates whose accumulation side disagrees with the sign
    of the PBC winding number about their energy.

    `calibration_sign` fixes the winding-sign to side mapping; +1 means
    positive winding pairs with right accumulation (set once on the
    nearest-neighbor one-band model).
    """
    from .models import real_space_matrix

    H = real_space_matrix(model, geom, BoundarySpec(0.0, 0.0))
    es = eigendecompose(H, geom)
    vals, _ = x_ipr_spectrum(es)
    ev = XMomentumEvaluator(model, geom, beta_y=1.0)
    ks0 = np.linspace(0, 2 * np.pi, max(256, resolution), endpoint=False)
    loop_points = np.concatenate([ev.branches(k) for k in ks0])
    diam = spectral_diameter(loop_points)
    violations = 0
    for i, E in enumerate(es.eigenvalues):
        if abs(vals[i]) <= tau:
            continue
        if np.abs(loop_points - E).min() <= 1e-6 * diam:
            continue
        w = winding_number(ev, complex(E), resolution, loop_points=loop_points)
        if np.sign(vals[i]) != calibration_sign * np.sign(w):
            violations += 1
    return violations


def hausdorff_distance(a: np.ndarray, b: np.ndarray,
                       normalized: bool = True) -> float:
    """Symmetric Hausdorff distance between two complex eigenvalue sets,
    optionally normalized by the spectral diameter of their union."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    d = np.abs(a[:, None] - b[None, :])
    h = max(d.min(axis=1).max(), d.min(axis=0).max())
    if not normalized:
        return float(h)
    diam = spectral_diameter(np.concatenate([a, b]))
    return float(h / diam) if diam > 0 else 0.0
