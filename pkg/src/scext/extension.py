"""Extension envelopes, glued covers, and mollified approximants.

The local extension of u from A-bar = closure(domain) & ball is the lower
envelope over support pairs (y, p)

    E(x) = min_y [ u(y) + <p, x - y> + coefficient * |x - y|**(1+alpha) ],

which agrees with u on A-bar and stays fractionally semiconcave on the whole
ball with constant coefficient*(1+alpha)*(1+2**(2-alpha)).  Local fields can
be glued over a finite ball cover with a smooth partition of unity, and
mollified into smooth approximants with the same constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EvaluationError,
    InputError,
    PartitionError,
    StencilError,
)
from .funcspace import evaluate_many
from .geometry import BallRegion, DomainSpec, boundary_sample, closure_grid, disk
from .gradients import reachable_gradients
from .semiconcavity import ModulusParams

DEFAULT_SPACING_SCALE = 0.01  # support spacing as a fraction of the ball radius
DEFAULT_M_Q = 21  # quadrature points per axis for the mollifier
_PAIR_CHUNK = 1024
_QUERY_CHUNK = 8192
_PRUNE_TOL = 5e-13


def constant_bound(params: ModulusParams, coefficient: float | None = None) -> float:
    """Semiconcavity constant of the envelope: coeff*(1+alpha)*(1+2^(2-alpha))."""
    coeff = params.C + 1.0 if coefficient is None else float(coefficient)
    return coeff * (1.0 + params.alpha) * (1.0 + 2.0 ** (2.0 - params.alpha))


def holder_ratio(y, x, z, params: ModulusParams, coefficient: float) -> float:
    """|Dv_y(x) - Dv_y(z)| / |x-z|^alpha for the kernel v_y = coeff*|w-y|^(1+a).

    Dv_y(w) = coeff*(1+a)*|w-y|^(a-1)*(w-y), with Dv_y(y) = 0.  The ratio is
    bounded by coeff*(1+a)*(1+2^(2-a)) for every admissible triple.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    gap = float(np.linalg.norm(x - z))
    if gap == 0.0:
        raise InputError("holder_ratio requires x != z")
    a = params.alpha
    return float(np.linalg.norm(_kernel_grad(x, y, a) - _kernel_grad(z, y, a))
                 * coefficient / gap**a)


def _kernel_grad(w: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """(1+alpha)|w-y|^(alpha-1)(w-y) with the removable singularity at w=y."""
    r = w - y
    n = float(np.linalg.norm(r))
    if n == 0.0:
        return np.zeros_like(r)
    if alpha == 1.0:
        return 2.0 * r
    return (1.0 + alpha) * n ** (alpha - 1.0) * r


# -- support sets ------------------------------------------------------------


@dataclass(eq=False)
class SupportSet:
    """Pairs (y, p) anchoring the envelope, with u(y) cached per pair."""

    points: np.ndarray  # (K, d)
    gradients: np.ndarray  # (K, d)
    values: np.ndarray  # (K,)
    sources: list  # per pair: "smooth" | "reachable"
    ball: BallRegion
    spacing: float

    def __post_init__(self):
        if self.points.shape[0] == 0:
            raise InputError("support set must be nonempty")

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def node_points(self) -> np.ndarray:
        """Distinct anchor points (pairs at one y share the node)."""
        keys = np.round(self.points / 1e-9) * 1e-9
        _, idx = np.unique(keys, axis=0, return_index=True)
        return self.points[np.sort(idx)]

    def to_dict(self, limit: int | None = None) -> dict:
        k = self.size if limit is None else min(limit, self.size)
        return {
            "n_pairs": self.size,
            "ball": {"center": self.ball.center.tolist(), "radius": self.ball.radius},
            "spacing": self.spacing,
            "pairs": [
                {
                    "y": self.points[i].tolist(),
                    "p": self.gradients[i].tolist(),
                    "u": float(self.values[i]),
                    "source": self.sources[i],
                }
                for i in range(k)
            ],
        }


def _dedupe_points(pts: np.ndarray) -> np.ndarray:
    keys = np.round(pts / 1e-9).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(idx)]


def _smooth_split_analytic(func, pts: np.ndarray):
    """Split points into (smooth with gradients, singular) for closed forms;
    a point is smooth exactly when the declared gradient evaluates."""
    try:
        return pts, func.gradient_many(pts), pts[:0]
    except EvaluationError:
        pass
    smooth, grads, singular = [], [], []
    for p in pts:
        try:
            grads.append(func.gradient_many(p[None, :])[0])
            smooth.append(p)
        except EvaluationError:
            singular.append(p)
    d = pts.shape[1]
    return (
        np.array(smooth).reshape(-1, d),
        np.array(grads).reshape(-1, d),
        np.array(singular).reshape(-1, d),
    )


def _smooth_split_fd(func, domain, pts: np.ndarray, h_fd: float, eps_c: float):
    from .gradients import _fd_samples  # shared one-sided-quotient filter

    kept, grads = _fd_samples(func, pts, domain, h_fd, eps_c)
    if kept.shape[0] == 0:
        return kept, grads, pts
    keys = {tuple(np.round(p / 1e-9).astype(np.int64)) for p in kept}
    singular = np.array(
        [p for p in pts if tuple(np.round(p / 1e-9).astype(np.int64)) not in keys]
    ).reshape(-1, pts.shape[1])
    return kept, grads, singular


def build_support_set(
    func,
    domain: DomainSpec,
    ball: BallRegion,
    spacing: float | None = None,
    r0: float | None = None,
    ratio: float = 0.5,
    k_max: int = 6,
    m_a: int = 64,
    eps_c: float = 0.01,
    h_fd: float | None = None,
) -> SupportSet:
    """Anchor pairs on the lattice of A-bar plus parametric boundary points.

    Interior lattice points that look differentiable contribute one pair
    (y, Du(y)); every other anchor (boundary points and singular interior
    points) contributes one pair per reachable-gradient representative, so
    every node of A-bar is present.
    """
    if spacing is None:
        spacing = DEFAULT_SPACING_SCALE * ball.radius
    nodes = closure_grid(domain, ball, spacing)
    if nodes.shape[0] == 0:
        raise InputError("closure(domain) does not meet the ball")
    bnd = boundary_sample(domain, ball, spacing)
    anchors = _dedupe_points(np.vstack([nodes, bnd]) if bnd.shape[0] else nodes)
    interior = domain.contains_many(anchors, "open")
    if r0 is None:
        r0 = max(spacing, 1e-3 * ball.radius)
    if h_fd is None:
        h_fd = 1e-5 * spacing

    if getattr(func, "has_gradient", False):
        smooth, grads, singular = _smooth_split_analytic(func, anchors[interior])
    else:
        smooth, grads, singular = _smooth_split_fd(
            func, domain, anchors[interior], h_fd, eps_c
        )
    multi = np.vstack([anchors[~interior], singular])

    pts, gvecs, srcs = [smooth], [grads], ["smooth"] * smooth.shape[0]
    for y in multi:
        rset = reachable_gradients(
            func, domain, y, r0=r0, ratio=ratio, k_max=k_max,
            m_a=m_a, eps_c=eps_c, h_fd=h_fd,
        )
        reps = rset.representatives
        pts.append(np.broadcast_to(y, reps.shape).copy())
        gvecs.append(reps)
        srcs.extend(["reachable"] * reps.shape[0])
    points = np.vstack(pts)
    gradients_arr = np.vstack(gvecs)
    values = evaluate_many(func, points)
    return SupportSet(points, gradients_arr, values, srcs, ball, float(spacing))


# -- the envelope ------------------------------------------------------------


@dataclass(eq=False)
class ExtensionField:
    """Lower envelope over support pairs; equals u on A-bar by construction."""

    support: SupportSet
    params: ModulusParams
    coefficient: float
    func: object
    domain: DomainSpec
    constant: float = None  # envelope semiconcavity constant
    identifier: str = ""
    n_pruned: int = 0

    def __post_init__(self):
        if not self.coefficient > self.params.C:
            raise InputError(
                f"coefficient {self.coefficient} must exceed the constant {self.params.C}"
            )
        if self.constant is None:
            self.constant = constant_bound(self.params, self.coefficient)
        if not self.identifier:
            base = getattr(self.func, "identifier", type(self.func).__name__)
            self.identifier = f"extension({base})"
        # cached affine parts: value_j(x) = offs_j + <p_j, x> + coeff*|x-y_j|^(1+a)
        self._offs = self.support.values - np.einsum(
            "ij,ij->i", self.support.gradients, self.support.points
        )
        if self.params.alpha == 1.0:
            # quadratic kernel: value_j(x) = coeff*|x|^2 + <q_j, x> + b_j, so the
            # minimum reduces to one matrix product over the pairs
            y_sq = np.einsum("ij,ij->i", self.support.points, self.support.points)
            self._lin_q = (
                self.support.gradients - 2.0 * self.coefficient * self.support.points
            )
            self._lin_b = self._offs + self.coefficient * y_sq
            self._lin_qn = np.linalg.norm(self._lin_q, axis=1)

    @property
    def ball(self) -> BallRegion:
        return self.support.ball

    @property
    def evaluation_domain(self) -> DomainSpec:
        return disk(self.ball.center, self.ball.radius)

    def in_data_region(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.domain.contains_many(pts, "closure") & self.ball.contains_many(pts)

    def envelope_values(self, points) -> np.ndarray:
        """Raw minimum over pairs, no identity shortcut (diagnostics)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self._min_over_pairs(pts)

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside_ball = self.ball.contains_many(pts)
        if not np.all(inside_ball):
            raise InputError(
                f"{int((~inside_ball).sum())} query point(s) outside the source ball"
            )
        out = np.empty(pts.shape[0])
        on_data = self.in_data_region(pts)
        if np.any(on_data):
            # the envelope reproduces u there; return u itself so the
            # identity is exact rather than spacing-limited
            out[on_data] = evaluate_many(self.func, pts[on_data])
        if np.any(~on_data):
            out[~on_data] = self._min_over_pairs(pts[~on_data])
        return out

    def __call__(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self.evaluate_many(x[None, :])[0])

    def _min_over_pairs(self, pts: np.ndarray) -> np.ndarray:
        if self.params.alpha == 1.0:
            return self._min_quadratic(pts)
        Y, P = self.support.points, self.support.gradients
        a = self.params.alpha
        c = self.coefficient
        best = np.full(pts.shape[0], np.inf)
        x_sq = np.einsum("ij,ij->i", pts, pts)
        for qlo in range(0, pts.shape[0], _QUERY_CHUNK):
            xb = pts[qlo : qlo + _QUERY_CHUNK]
            xb_sq = x_sq[qlo : qlo + _QUERY_CHUNK]
            for lo in range(0, Y.shape[0], _PAIR_CHUNK):
                yb = Y[lo : lo + _PAIR_CHUNK]
                pb = P[lo : lo + _PAIR_CHUNK]
                ob = self._offs[lo : lo + _PAIR_CHUNK]
                y_sq = np.einsum("ij,ij->i", yb, yb)
                d_sq = np.clip(
                    xb_sq[:, None] + y_sq[None, :] - 2.0 * xb @ yb.T, 0.0, None
                )
                vals = xb @ pb.T + ob[None, :] + c * d_sq ** (0.5 * (1.0 + a))
                np.minimum(
                    best[qlo : qlo + _QUERY_CHUNK],
                    vals.min(axis=1),
                    out=best[qlo : qlo + _QUERY_CHUNK],
                )
        return best

    def _affine_min(self, pts: np.ndarray, q: np.ndarray, b: np.ndarray) -> np.ndarray:
        best = np.full(pts.shape[0], np.inf)
        for qlo in range(0, pts.shape[0], _QUERY_CHUNK):
            xb = pts[qlo : qlo + _QUERY_CHUNK]
            for lo in range(0, q.shape[0], _PAIR_CHUNK):
                vals = xb @ q[lo : lo + _PAIR_CHUNK].T
                vals += b[None, lo : lo + _PAIR_CHUNK]
                np.minimum(
                    best[qlo : qlo + _QUERY_CHUNK],
                    vals.min(axis=1),
                    out=best[qlo : qlo + _QUERY_CHUNK],
                )
        return best

    def _min_quadratic(self, pts: np.ndarray) -> np.ndarray:
        """alpha = 1 scan: min of affine pieces plus the shared c|x|^2 term.

        Large batches are grouped into spatial tiles and each tile drops the
        pairs whose Lipschitz lower bound over the tile exceeds the best
        upper bound; the surviving set provably contains every minimizer, so
        the result is identical to the full scan.
        """
        c = self.coefficient
        x_sq = np.einsum("ij,ij->i", pts, pts)
        n, n_pairs = pts.shape[0], self.support.size
        if n <= 2048 or n_pairs <= 512:
            return self._affine_min(pts, self._lin_q, self._lin_b) + c * x_sq
        tile = 0.02 * self.ball.radius
        keys = np.floor(pts / tile).astype(np.int64)
        order = np.lexsort(keys.T[::-1])
        sorted_keys = keys[order]
        breaks = np.flatnonzero(np.any(np.diff(sorted_keys, axis=0) != 0, axis=1)) + 1
        starts = np.concatenate([[0], breaks, [n]])
        out = np.empty(n)
        for a0, a1 in zip(starts[:-1], starts[1:]):
            idx = order[a0:a1]
            blk = pts[idx]
            z = 0.5 * (blk.min(axis=0) + blk.max(axis=0))
            rho = math.sqrt(float(np.max(((blk - z) ** 2).sum(axis=1))))
            vz = self._lin_q @ z + self._lin_b
            # |grad value_j| <= |q_j| + 2c(|z| + rho) on the tile
            slack = (self._lin_qn + 2.0 * c * (np.linalg.norm(z) + rho)) * rho
            keep = vz - slack <= np.min(vz + slack)
            out[idx] = self._affine_min(blk, self._lin_q[keep], self._lin_b[keep])
        return out + c * x_sq

    def to_dict(self, limit: int | None = None) -> dict:
        return {
            "identifier": self.identifier,
            "alpha": self.params.alpha,
            "C": self.params.C,
            "coefficient": self.coefficient,
            "constant_bound": self.constant,
            "n_pruned": self.n_pruned,
            "support": self.support.to_dict(limit=limit),
        }


def _prune_support(support: SupportSet, params: ModulusParams, coefficient: float):
    """Drop pairs that undercut u somewhere on the anchor set.

    Exact reachable gradients never violate the one-sided inequality
    u(z) <= u(y) + <p, z-y> + coeff*|z-y|^(1+a); sampled representatives can,
    by just enough to dent the envelope below u near their anchor.  Violating
    pairs are sampling artifacts and are removed; an anchor that would lose
    all its pairs keeps its least-violating one.
    """
    Y, P, U = support.points, support.gradients, support.values
    a, c = params.alpha, coefficient
    scale = max(1.0, float(np.max(np.abs(U))))
    tol = _PRUNE_TOL * scale
    z = support.points
    u_z = support.values
    z_sq = np.einsum("ij,ij->i", z, z)
    worst = np.empty(Y.shape[0])
    for lo in range(0, Y.shape[0], _PAIR_CHUNK):
        yb, pb, ub = Y[lo : lo + _PAIR_CHUNK], P[lo : lo + _PAIR_CHUNK], U[lo : lo + _PAIR_CHUNK]
        y_sq = np.einsum("ij,ij->i", yb, yb)
        d_sq = np.clip(z_sq[:, None] + y_sq[None, :] - 2.0 * z @ yb.T, 0.0, None)
        kernel = d_sq if a == 1.0 else d_sq ** (0.5 * (1.0 + a))
        vals = z @ pb.T + (ub - np.einsum("ij,ij->i", yb, pb))[None, :] + c * kernel
        worst[lo : lo + _PAIR_CHUNK] = (u_z[:, None] - vals).max(axis=0)
    keep = worst <= tol
    if not np.all(keep):
        # an anchor must not vanish from the support entirely
        keys = np.round(Y / 1e-9).astype(np.int64)
        _, anchor_ids = np.unique(keys, axis=0, return_inverse=True)
        for aid in np.unique(anchor_ids):
            members = np.flatnonzero(anchor_ids == aid)
            if not keep[members].any():
                keep[members[np.argmin(worst[members])]] = True
    pruned = int((~keep).sum())
    if pruned == 0:
        return support, 0
    return (
        SupportSet(
            Y[keep],
            P[keep],
            U[keep],
            [s for s, k in zip(support.sources, keep) if k],
            support.ball,
            support.spacing,
        ),
        pruned,
    )


def build_extension(
    func,
    domain: DomainSpec,
    support: SupportSet,
    params: ModulusParams,
    coefficient: float | None = None,
    prune: bool = True,
) -> ExtensionField:
    if coefficient is None:
        coefficient = params.C + 1.0
    n_pruned = 0
    if prune:
        support, n_pruned = _prune_support(support, params, coefficient)
    return ExtensionField(
        support=support,
        params=params,
        coefficient=float(coefficient),
        func=func,
        domain=domain,
        n_pruned=n_pruned,
    )


def extend(field: ExtensionField, x) -> float:
    """Envelope value at one point of the source ball."""
    return field(x)


# -- glued covers ------------------------------------------------------------


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    f = np.zeros_like(t)
    pos = t > 0.0
    f[pos] = np.exp(-1.0 / t[pos])
    g = np.zeros_like(t)
    pos1 = (1.0 - t) > 0.0
    g[pos1] = np.exp(-1.0 / (1.0 - t[pos1]))
    return f / (f + g)


def _ball_bump(center: np.ndarray, radius: float):
    def bump(pts: np.ndarray) -> np.ndarray:
        s2 = np.einsum("ij,ij->i", pts - center, pts - center) / radius**2
        out = np.zeros(pts.shape[0])
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 / (s2[inside] - 1.0))
        return out

    return bump


def partition_weights(
    domain: DomainSpec,
    cover: list[BallRegion],
    width: float | None = None,
) -> list:
    """Normalized bump weights for the cover balls plus one for the domain.

    The domain element ramps from 0 at the boundary to 1 at inner depth
    ``width``, so its weight vanishes outside the open domain (the cover
    balls must carry the boundary zone).
    """
    if not cover:
        raise InputError("cover must contain at least one ball")
    if width is None:
        width = 0.25 * min(b.radius for b in cover)
    bumps = [_ball_bump(b.center, b.radius) for b in cover]

    def domain_bump(pts: np.ndarray) -> np.ndarray:
        return _smooth_step(domain.interior_distance(pts) / width)

    raw = bumps + [domain_bump]

    def make_weight(j):
        def weight(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            total = np.zeros(pts.shape[0])
            mine = None
            for i, b in enumerate(raw):
                v = b(pts)
                total += v
                if i == j:
                    mine = v
            out = np.zeros(pts.shape[0])
            ok = total > 0.0
            out[ok] = mine[ok] / total[ok]
            return out

        return weight

    return [make_weight(j) for j in range(len(raw))]


@dataclass(eq=False)
class GlobalExtension:
    """Weighted sum of local envelopes plus the domain term, on the union."""

    domain: DomainSpec
    cover: list
    fields: list
    weights: list  # len(cover) + 1, last one for the domain element
    func: object
    identifier: str = ""

    def __post_init__(self):
        if len(self.fields) != len(self.cover):
            raise InputError("one local field per cover ball is required")
        if len(self.weights) != len(self.cover) + 1:
            raise InputError("need one weight per ball plus the domain weight")
        if not self.identifier:
            base = getattr(self.func, "identifier", type(self.func).__name__)
            self.identifier = f"glued-extension({base})"

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.column_stack([wf(pts) for wf in self.weights])
        total = w.sum(axis=1)
        if np.any(np.abs(total - 1.0) > 1e-9):
            raise EvaluationError(
                "query point outside the covered set (weights do not sum to 1)"
            )
        out = np.zeros(pts.shape[0])
        for j, fld in enumerate(self.fields):
            mask = w[:, j] > 0.0
            if np.any(mask):
                out[mask] += w[mask, j] * fld.evaluate_many(pts[mask])
        mask = w[:, -1] > 0.0
        if np.any(mask):
            out[mask] += w[mask, -1] * evaluate_many(self.func, pts[mask])
        return out

    def __call__(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self.evaluate_many(x[None, :])[0])


def glue_global(
    domain: DomainSpec,
    cover: list[BallRegion],
    fields: list[ExtensionField],
    weights: list,
    func=None,
    probe_spacing: float | None = None,
) -> GlobalExtension:
    """Glue local envelopes; the partition is checked on a probe grid first."""
    if func is None:
        func = fields[0].func
    glued = GlobalExtension(domain, list(cover), list(fields), list(weights), func)
    probes = _partition_probes(domain, cover, probe_spacing)
    w = np.column_stack([wf(probes) for wf in glued.weights])
    err = np.abs(w.sum(axis=1) - 1.0)
    if float(err.max()) > 1e-9:
        raise PartitionError(
            f"partition weights sum off by {float(err.max()):g} on the probe grid"
        )
    if float(w.min()) < 0.0 or float(w.max()) > 1.0 + 1e-12:
        raise PartitionError("partition weights leave [0, 1]")
    return glued


def _partition_probes(domain, cover, spacing: float | None) -> np.ndarray:
    """Lattice over the open cover region with a 3% inset per element.

    The inset keeps every probe where at least one generating bump is
    representable (the bumps underflow to zero within ~0.1% of an element's
    edge), so a zero weight sum on a probe flags a genuine cover gap.
    """
    if spacing is None:
        spacing = min(b.radius for b in cover) / 8.0
    min_radius = min(b.radius for b in cover)
    chunks = []
    for b in cover:
        k = int(math.floor(b.radius / spacing + 1e-9))
        ticks = np.arange(-k, k + 1) * spacing
        axes = [b.center[j] + ticks for j in range(b.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        d = np.linalg.norm(pts - b.center, axis=1)
        chunks.append(pts[d <= 0.97 * b.radius])
    centers = np.array([b.center for b in cover])
    centroid = centers.mean(axis=0)
    reach = max(
        float(np.linalg.norm(b.center - centroid)) + b.radius for b in cover
    )
    hub = BallRegion(centroid, 1.5 * reach)
    interior = closure_grid(domain, hub, spacing)
    depth = domain.interior_distance(interior)
    chunks.append(interior[depth >= 0.005 * min_radius])
    return np.vstack(chunks)


# -- mollification -----------------------------------------------------------


def _mollifier_grid(dimension: int, m_q: int):
    """Tensor grid on [-1,1]^d with the even bump exp(1/(|y|^2-1)) weights,
    renormalized so they sum to exactly 1 (the correction lands on the center
    node to keep evenness bit-exact)."""
    if m_q < 3 or m_q % 2 == 0:
        raise InputError("m_q must be an odd integer >= 3")
    half = (m_q - 1) // 2
    # i/half negates exactly, so the node set is even bit for bit
    ticks = np.arange(-half, half + 1) / half
    mesh = np.meshgrid(*([ticks] * dimension), indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    s2 = np.einsum("ij,ij->i", nodes, nodes)
    # nodes outside the open unit ball carry weight zero; dropping them keeps
    # every evaluation stencil inside x + B_{1/h}
    inside = s2 < 1.0
    nodes, s2 = nodes[inside], s2[inside]
    w = np.exp(1.0 / (s2 - 1.0))
    w /= w.sum()
    center = int(np.flatnonzero((nodes == 0.0).all(axis=1))[0])
    w[center] += 1.0 - w.sum()
    return nodes, w


@dataclass(eq=False)
class MollifiedApproximant:
    """u_h(x) = sum_i w_i E(x + y_i/h): smoothing at scale 1/h."""

    field: object
    h: int
    m_q: int = DEFAULT_M_Q
    identifier: str = ""

    def __post_init__(self):
        ball = self.field.ball
        if int(self.h) != self.h or self.h <= 0:
            raise InputError("h must be a positive integer")
        self.h = int(self.h)
        if self.h <= 2.0 / ball.radius:
            raise InputError(
                f"h must exceed 2/delta = {2.0 / ball.radius:g} so the quadrature "
                f"stencil stays inside the source ball"
            )
        self.nodes, self.weights = _mollifier_grid(ball.dimension, self.m_q)
        if not self.identifier:
            base = getattr(self.field, "identifier", type(self.field).__name__)
            self.identifier = f"mollified({base}, h={self.h})"

    @property
    def ball(self) -> BallRegion:
        b = self.field.ball
        return BallRegion(b.center, 0.5 * b.radius)

    @property
    def evaluation_domain(self) -> DomainSpec:
        b = self.ball
        return disk(b.center, b.radius)

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        b = self.field.ball
        dist = np.linalg.norm(pts - b.center, axis=1)
        if np.any(dist > 0.5 * b.radius * (1.0 + 1e-12) + 1e-12):
            raise InputError("mollified field is defined on the half-radius ball only")
        out = np.empty(pts.shape[0])
        L = self.nodes.shape[0]
        # keep roughly 8k stencil rows per inner evaluation
        step = max(1, 8192 // L)
        for lo in range(0, pts.shape[0], step):
            block = pts[lo : lo + step]
            stencil = (block[:, None, :] + self.nodes[None, :, :] / self.h).reshape(-1, block.shape[1])
            vals = self.field.evaluate_many(stencil).reshape(block.shape[0], L)
            out[lo : lo + step] = vals @ self.weights
        return out

    def __call__(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self.evaluate_many(x[None, :])[0])


def mollify(m: MollifiedApproximant, x) -> float:
    return m(x)


# -- diagnostics -------------------------------------------------------------


def summand_differentiability_probe(fields: list, x, h_fd: float, eps_c: float) -> bool:
    """If the sum of the fields passes the one-sided-quotient filter at x,
    check that every summand passes too (false flags a numerical violation
    of the expected behavior, not a usage error).  Vacuously true when the
    sum itself fails the filter."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not h_fd > 0.0:
        raise StencilError("h_fd must be positive")
    d = x.size
    eye = h_fd * np.eye(d)
    stencil = np.vstack([x[None, :], x[None, :] + eye, x[None, :] - eye])

    def wobble(f) -> float:
        vals = evaluate_many(f, stencil)
        fwd = (vals[1 : d + 1] - vals[0]) / h_fd
        bwd = (vals[0] - vals[d + 1 :]) / h_fd
        return float(np.abs(fwd - bwd).max())

    total = np.zeros(stencil.shape[0])
    for f in fields:
        total += evaluate_many(f, stencil)
    fwd = (total[1 : d + 1] - total[0]) / h_fd
    bwd = (total[0] - total[d + 1 :]) / h_fd
    if float(np.abs(fwd - bwd).max()) > eps_c:
        return True
    return all(wobble(f) <= eps_c for f in fields)
