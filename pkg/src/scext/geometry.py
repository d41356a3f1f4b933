"""Analytic domains, ball regions, and point queries.

Domains are intersections of closed-form constraints (disk, axis-aligned
box, half-space, and a half-space-capped disk).  Membership is decided
exactly from the defining inequalities, with a thin band tolerance only
for telling boundary from interior.  Boundary points are generated
parametrically on the defining surfaces, never by band filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError, SamplingError

# Band half-width used to split closure into interior and boundary.
BOUNDARY_TOL = 1e-12

_KINDS = ("disk", "box", "half-space", "capped-disk")


def _vec(x, dim: int | None = None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise InputError(f"expected a point, got array of shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.size}")
    return v


@dataclass(frozen=True, eq=False)
class BallRegion:
    """Closed ball used to localize every construction."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0.0:
            raise InputError(f"ball radius must be positive, got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.center.size

    def contains_many(self, points: np.ndarray, tol: float = BOUNDARY_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.linalg.norm(pts - self.center, axis=1)
        return d <= self.radius * (1.0 + 1e-12) + tol

    def contains(self, x, tol: float = BOUNDARY_TOL) -> bool:
        return bool(self.contains_many(_vec(x, self.dimension)[None, :], tol)[0])


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """One of the named analytic domain kinds.

    ``normal`` is the inward unit normal of the half-space constraint
    (the kept side is ``normal . x > offset``).
    """

    kind: str
    dimension: int
    center: np.ndarray | None = None
    radius: float | None = None
    half_widths: np.ndarray | None = None
    normal: np.ndarray | None = None
    offset: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"unknown domain kind {self.kind!r}; expected one of {_KINDS}")
        if self.dimension not in (1, 2, 3):
            raise DimensionError(f"domain dimension must be 1, 2 or 3, got {self.dimension}")
        if self.kind in ("disk", "box", "capped-disk"):
            object.__setattr__(self, "center", _vec(self.center, self.dimension))
        if self.kind in ("disk", "capped-disk"):
            r = float(self.radius)
            if not r > 0.0:
                raise InputError("disk radius must be positive")
            object.__setattr__(self, "radius", r)
        if self.kind == "box":
            w = _vec(self.half_widths, self.dimension)
            if not np.all(w > 0.0):
                raise InputError("box half-widths must be positive")
            object.__setattr__(self, "half_widths", w)
        if self.kind in ("half-space", "capped-disk"):
            n = _vec(self.normal, self.dimension)
            nn = np.linalg.norm(n)
            if nn == 0.0:
                raise InputError("half-space normal must be nonzero")
            object.__setattr__(self, "normal", n / nn)
            object.__setattr__(self, "offset", float(self.offset))

    # -- membership -------------------------------------------------------

    def _constraints(self, pts: np.ndarray) -> np.ndarray:
        """Per-point constraint values g_i; the open domain is {all g_i < 0}."""
        cols = []
        if self.kind in ("disk", "capped-disk"):
            cols.append(np.linalg.norm(pts - self.center, axis=1) - self.radius)
        if self.kind == "box":
            g = np.abs(pts - self.center) - self.half_widths
            cols.extend(g[:, j] for j in range(self.dimension))
        if self.kind in ("half-space", "capped-disk"):
            cols.append(self.offset - pts @ self.normal)
        return np.column_stack(cols)

    def contains_many(self, points, where: str = "closure") -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise DimensionError(
                f"points have dimension {pts.shape[1]}, domain has {self.dimension}"
            )
        g = self._constraints(pts)
        worst = g.max(axis=1)
        if where == "open":
            return worst < 0.0
        if where == "closure":
            return worst <= BOUNDARY_TOL
        if where == "boundary":
            return (worst <= BOUNDARY_TOL) & (worst >= -BOUNDARY_TOL)
        raise InputError(f"where must be 'open', 'closure' or 'boundary', got {where!r}")

    def contains(self, x, where: str = "closure") -> bool:
        return bool(self.contains_many(_vec(x, self.dimension)[None, :], where)[0])

    def interior_distance(self, points) -> np.ndarray:
        """Distance to the boundary for interior points, clipped to 0 outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.clip(-self._constraints(pts).max(axis=1), 0.0, None)

    # -- boundary parametrizations ----------------------------------------

    def boundary_points(self, region: BallRegion, spacing: float) -> np.ndarray:
        if not spacing > 0.0:
            raise InputError("spacing must be positive")
        if region.dimension != self.dimension:
            raise DimensionError("region and domain dimensions differ")
        if self.dimension == 1:
            pts = self._boundary_1d()
        elif self.dimension == 2:
            pts = self._boundary_2d(region, spacing)
        else:
            pts = self._boundary_3d(region, spacing)
        if pts.shape[0]:
            pts = pts[region.contains_many(pts)]
        return pts

    def _boundary_1d(self) -> np.ndarray:
        if self.kind == "disk":
            c, r = self.center[0], self.radius
            pts = [[c - r], [c + r]]
        elif self.kind == "box":
            c, w = self.center[0], self.half_widths[0]
            pts = [[c - w], [c + w]]
        elif self.kind == "half-space":
            pts = [[self.offset * self.normal[0]]]
        else:  # capped-disk: interval cut by a ray
            c, r = self.center[0], self.radius
            n, b = self.normal[0], self.offset
            pts = [[x] for x in (c - r, c + r) if n * x >= b - BOUNDARY_TOL]
            cut = b * n
            if abs(cut - c) <= r + BOUNDARY_TOL:
                pts.append([cut])
        return np.array(pts, dtype=float)

    def _circle_arc(self, lo: float, hi: float, spacing: float, closed: bool) -> np.ndarray:
        arc_len = (hi - lo) * self.radius
        m = max(4, int(math.ceil(arc_len / spacing)))
        if closed:
            phi = lo + (hi - lo) * np.arange(m) / m
        else:
            phi = np.linspace(lo, hi, m + 1)
        ring = np.column_stack([np.cos(phi), np.sin(phi)])
        return self.center + self.radius * ring

    def _boundary_2d(self, region: BallRegion, spacing: float) -> np.ndarray:
        if self.kind == "disk":
            return self._circle_arc(0.0, 2.0 * math.pi, spacing, closed=True)
        if self.kind == "box":
            c, w = self.center, self.half_widths
            corners = np.array(
                [c + [-w[0], -w[1]], c + [w[0], -w[1]], c + [w[0], w[1]], c + [-w[0], w[1]]]
            )
            chunks = []
            for i in range(4):
                a, b = corners[i], corners[(i + 1) % 4]
                m = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
                t = np.arange(m) / m
                chunks.append(a + t[:, None] * (b - a))
            return np.vstack(chunks)
        if self.kind == "half-space":
            return self._plane_patch(region, spacing)
        # capped-disk: circular arc where the cap keeps it, plus the flat face.
        n, b = self.normal, self.offset
        d = b - float(n @ self.center)  # signed distance plane-to-center, along n
        chunks = []
        if abs(d) <= self.radius:
            phi_n = math.atan2(n[1], n[0])
            half = math.acos(max(-1.0, min(1.0, d / self.radius)))
            chunks.append(self._circle_arc(phi_n - half, phi_n + half, spacing, closed=False))
            mid = self.center + d * n
            half_len = math.sqrt(max(0.0, self.radius**2 - d**2))
            tang = np.array([-n[1], n[0]])
            m = max(1, int(math.ceil(2.0 * half_len / spacing)))
            t = np.linspace(-half_len, half_len, m + 1)
            chunks.append(mid + t[:, None] * tang)
        else:
            chunks.append(self._circle_arc(0.0, 2.0 * math.pi, spacing, closed=True))
        return np.vstack(chunks)

    def _plane_patch(self, region: BallRegion, spacing: float) -> np.ndarray:
        """Grid on {normal . x = offset} around the region center projection."""
        n = self.normal
        base = region.center + (self.offset - float(n @ region.center)) * n
        ext = region.radius + spacing
        m = max(1, int(math.ceil(2.0 * ext / spacing)))
        t = np.linspace(-ext, ext, m + 1)
        if self.dimension == 2:
            tang = np.array([-n[1], n[0]])
            return base + t[:, None] * tang
        u = _any_orthonormal(n)
        v = np.cross(n, u)
        tt, ss = np.meshgrid(t, t, indexing="ij")
        return base + tt.reshape(-1, 1) * u + ss.reshape(-1, 1) * v

    def _boundary_3d(self, region: BallRegion, spacing: float) -> np.ndarray:
        if self.kind == "disk":
            return self.center + self.radius * _fibonacci_sphere(self.radius, spacing)
        if self.kind == "half-space":
            return self._plane_patch(region, spacing)
        if self.kind == "box":
            c, w = self.center, self.half_widths
            faces = []
            for axis in range(3):
                others = [a for a in range(3) if a != axis]
                g1 = _axis_ticks(w[others[0]], spacing)
                g2 = _axis_ticks(w[others[1]], spacing)
                tt, ss = np.meshgrid(g1, g2, indexing="ij")
                for side in (-1.0, 1.0):
                    pts = np.empty((tt.size, 3))
                    pts[:, axis] = c[axis] + side * w[axis]
                    pts[:, others[0]] = c[others[0]] + tt.ravel()
                    pts[:, others[1]] = c[others[1]] + ss.ravel()
                    faces.append(pts)
            return np.vstack(faces)
        # capped ball: spherical cap plus flat disk face.
        n, b = self.normal, self.offset
        d = b - float(n @ self.center)
        sphere = self.center + self.radius * _fibonacci_sphere(self.radius, spacing)
        keep = sphere @ n >= b - BOUNDARY_TOL
        chunks = [sphere[keep]]
        if abs(d) <= self.radius:
            mid = self.center + d * n
            face_r = math.sqrt(max(0.0, self.radius**2 - d**2))
            u = _any_orthonormal(n)
            v = np.cross(n, u)
            chunks.append(mid[None, :])
            for rho in _axis_ticks(face_r, spacing)[_axis_ticks(face_r, spacing) > 0]:
                m = max(4, int(math.ceil(2.0 * math.pi * rho / spacing)))
                phi = 2.0 * math.pi * np.arange(m) / m
                ring = mid + rho * (np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v)
                chunks.append(ring)
            # rim of the cap
            m = max(4, int(math.ceil(2.0 * math.pi * face_r / spacing)))
            phi = 2.0 * math.pi * np.arange(m) / m
            chunks.append(mid + face_r * (np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v))
        return np.vstack(chunks)


def _axis_ticks(half_width: float, spacing: float) -> np.ndarray:
    m = max(1, int(math.ceil(2.0 * half_width / spacing)))
    return np.linspace(-half_width, half_width, m + 1)


def _any_orthonormal(n: np.ndarray) -> np.ndarray:
    k = int(np.argmin(np.abs(n)))
    e = np.zeros_like(n)
    e[k] = 1.0
    u = e - (e @ n) * n
    return u / np.linalg.norm(u)


def _fibonacci_sphere(radius: float, spacing: float) -> np.ndarray:
    count = max(8, int(math.ceil(4.0 * math.pi * radius**2 / spacing**2)))
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * i
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


# -- constructors -----------------------------------------------------------


def disk(center, radius: float) -> DomainSpec:
    c = _vec(center)
    return DomainSpec(kind="disk", dimension=c.size, center=c, radius=radius)


def box(center, half_widths) -> DomainSpec:
    c = _vec(center)
    return DomainSpec(kind="box", dimension=c.size, center=c, half_widths=half_widths)


def half_space(normal, offset: float) -> DomainSpec:
    """Open side {normal . x > offset}; the normal points into the domain."""
    n = _vec(normal)
    return DomainSpec(kind="half-space", dimension=n.size, normal=n, offset=offset)


def capped_disk(center, radius: float, normal, offset: float) -> DomainSpec:
    """Disk cut by a half-space, e.g. {x1 > 0, |x| < 1} for normal e1, offset 0."""
    c = _vec(center)
    return DomainSpec(
        kind="capped-disk",
        dimension=c.size,
        center=c,
        radius=radius,
        normal=normal,
        offset=offset,
    )


# -- operations -----------------------------------------------------------


def contains(domain: DomainSpec, x, where: str = "closure") -> bool:
    """Exact membership test against the domain's defining inequalities."""
    return domain.contains(x, where)


def segment_in_closure(domain: DomainSpec, a, b, n_probe: int = 256) -> bool:
    """Probe the segment [a, b] at n_probe equally spaced points (ends included)."""
    if n_probe < 2:
        raise InputError(f"n_probe must be at least 2, got {n_probe}")
    a = _vec(a, domain.dimension)
    b = _vec(b, domain.dimension)
    t = np.linspace(0.0, 1.0, n_probe)[:, None]
    pts = a + t * (b - a)
    return bool(np.all(domain.contains_many(pts, "closure")))


def closure_grid(domain: DomainSpec, region: BallRegion, spacing: float) -> np.ndarray:
    """Lattice of pitch ``spacing`` anchored at the region center, restricted
    to closure(domain) intersected with the closed ball."""
    if not spacing > 0.0:
        raise InputError("spacing must be positive")
    if region.dimension != domain.dimension:
        raise DimensionError("region and domain dimensions differ")
    k = int(math.floor(region.radius / spacing + 1e-9))
    ticks = np.arange(-k, k + 1) * spacing
    axes = [region.center[j] + ticks for j in range(domain.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    keep = domain.contains_many(pts, "closure") & region.contains_many(pts)
    return pts[keep]


def boundary_sample(domain: DomainSpec, region: BallRegion, spacing: float) -> np.ndarray:
    """Parametric sample of (boundary of domain) intersected with the region ball."""
    pts = domain.boundary_points(region, spacing)
    if pts.shape[0] == 0:
        return pts.reshape(0, domain.dimension)
    # Generated parametrically; every point must sit in the boundary band.
    ok = domain.contains_many(pts, "boundary")
    return pts[ok]


def sample_closure_points(
    domain: DomainSpec,
    region: BallRegion,
    count: int,
    rng: np.random.Generator,
    max_tries: int | None = None,
) -> np.ndarray:
    """Rejection-sample ``count`` points of closure(domain) & ball, streaming.

    The draw sequence is a prefix: the first k points for a given generator
    state are independent of ``count``.
    """
    dim = domain.dimension
    lo = region.center - region.radius
    hi = region.center + region.radius
    out = np.empty((count, dim))
    got = 0
    tries = 0
    budget = max_tries if max_tries is not None else max(10_000, 1000 * count)
    while got < count:
        if tries >= budget:
            raise SamplingError(
                f"drew {got}/{count} admissible points in the retry budget; "
                f"the region ball may barely intersect the domain"
            )
        cand = rng.uniform(lo, hi)
        tries += 1
        if domain.contains(cand, "closure") and region.contains(cand):
            out[got] = cand
            got += 1
    return out
