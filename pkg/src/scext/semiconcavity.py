"""Fractional semiconcavity checks: defects, constants, certificates.

For parameters (alpha, C) the inequality under test is

    lam*u(x) + (1-lam)*u(y) - u(lam*x + (1-lam)*y)
        <= C * lam * (1-lam) * |x-y|**(1+alpha)

over segments [x, y] in the closure of the domain and lam in [0, 1].  The
defect is the left side minus the right side; a function satisfies the
inequality on a region exactly when every defect is nonpositive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, InputError, SamplingError
from .funcspace import declared_domain, evaluate_many
from .geometry import BallRegion, DomainSpec, sample_closure_points, segment_in_closure

# Chunk size of the triple sampler; part of the deterministic draw order.
_CHUNK = 4096
SAMPLER_VERSION = "triples/pcg64/chunk4096/probe256/v1"

_MIN_GAP = 1e-9  # pairs closer than this are skipped in ratio estimates


@dataclass(frozen=True)
class ModulusParams:
    """Exponent alpha in (0, 1] and constant C (any sign)."""

    alpha: float
    C: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InputError(f"alpha must lie in (0, 1], got {self.alpha}")

    def modulus(self, gap: np.ndarray, lam: np.ndarray) -> np.ndarray:
        return self.C * lam * (1.0 - lam) * gap ** (1.0 + self.alpha)


@dataclass(frozen=True, eq=False)
class SemiconcavityTriple:
    x: np.ndarray
    y: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)))
        object.__setattr__(self, "lam", float(self.lam))
        if not 0.0 <= self.lam <= 1.0:
            raise InputError(f"lambda must lie in [0, 1], got {self.lam}")

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "lambda": self.lam}


@dataclass(eq=False)
class SemiconcavityCertificate:
    function_id: str
    region: BallRegion
    params: ModulusParams
    n_triples: int
    max_defect: float
    witnesses: list[tuple[SemiconcavityTriple, float]]
    seed: int
    sampler: str = SAMPLER_VERSION

    @property
    def passed(self) -> bool:
        return self.max_defect <= 0.0

    def to_dict(self) -> dict:
        return {
            "function": self.function_id,
            "region": {"center": self.region.center.tolist(), "radius": self.region.radius},
            "alpha": self.params.alpha,
            "C": self.params.C,
            "n_triples": self.n_triples,
            "max_defect": self.max_defect,
            "passed": self.passed,
            "n_witnesses": len(self.witnesses),
            "witnesses": [
                {**t.to_dict(), "defect": d} for t, d in self.witnesses
            ],
            "seed": self.seed,
            "sampler": self.sampler,
        }


def defect(
    func,
    triple: SemiconcavityTriple,
    params: ModulusParams,
    domain: DomainSpec | None = None,
) -> float:
    """Inequality defect for one triple; nonpositive iff the triple passes.

    When a domain is given (or the function declares one) the segment [x, y]
    must lie in its closure.
    """
    dom = domain if domain is not None else declared_domain(func)
    if dom is not None and not segment_in_closure(dom, triple.x, triple.y):
        raise HypothesisError("segment [x, y] leaves the closure of the domain")
    vals = _defect_batch(
        func,
        triple.x[None, :],
        triple.y[None, :],
        np.array([triple.lam]),
        params,
    )
    return float(vals[0])


def _defect_batch(func, X, Y, lam, params: ModulusParams) -> np.ndarray:
    mid = lam[:, None] * X + (1.0 - lam[:, None]) * Y
    ux = evaluate_many(func, X)
    uy = evaluate_many(func, Y)
    um = evaluate_many(func, mid)
    gap = np.linalg.norm(X - Y, axis=1)
    return lam * ux + (1.0 - lam) * uy - um - params.modulus(gap, lam)


def _sample_triples(domain: DomainSpec, region: BallRegion, n: int, rng, retry_cap: int):
    """Draw n triples with segments inside closure(domain); fixed chunking
    keeps the draw order, and hence every certificate, seed-deterministic."""
    xs, ys, ls = [], [], []
    got = 0
    drawn = 0
    while got < n:
        k = min(_CHUNK, n - got)
        if drawn >= retry_cap:
            raise SamplingError(
                f"made {drawn} draws but found only {got}/{n} admissible triples"
            )
        pts = sample_closure_points(domain, region, 2 * k, rng)
        lam = rng.uniform(0.0, 1.0, k)
        drawn += k
        X, Y = pts[0::2], pts[1::2]
        ok = _segments_ok(domain, X, Y)
        xs.append(X[ok])
        ys.append(Y[ok])
        ls.append(lam[ok])
        got += int(ok.sum())
    X = np.vstack(xs)[:n]
    Y = np.vstack(ys)[:n]
    lam = np.concatenate(ls)[:n]
    return X, Y, lam


def _segments_ok(domain: DomainSpec, X: np.ndarray, Y: np.ndarray, n_probe: int = 256):
    t = np.linspace(0.0, 1.0, n_probe)
    # (k, n_probe, d) probe cloud, flattened for one membership call
    probes = X[:, None, :] + t[None, :, None] * (Y - X)[:, None, :]
    flat_ok = domain.contains_many(probes.reshape(-1, X.shape[1]), "closure")
    return flat_ok.reshape(X.shape[0], n_probe).all(axis=1)


def estimate_constant(
    func,
    domain: DomainSpec,
    region: BallRegion,
    alpha: float,
    n_triples: int,
    seed: int,
) -> float:
    """Largest sampled ratio defect-numerator / (lam(1-lam)|x-y|^(1+alpha)).

    A lower bound on the minimal constant for this alpha on the region.
    Degenerate triples (lam in {0,1} or |x-y| < 1e-9) are skipped.
    """
    if n_triples < 1:
        raise InputError("n_triples must be at least 1")
    params = ModulusParams(alpha=alpha, C=0.0)
    rng = np.random.default_rng(seed)
    X, Y, lam = _sample_triples(domain, region, n_triples, rng, 100 * n_triples)
    gap = np.linalg.norm(X - Y, axis=1)
    keep = (gap >= _MIN_GAP) & (lam > 0.0) & (lam < 1.0)
    if not np.any(keep):
        raise SamplingError("no nondegenerate triple to estimate the constant from")
    num = _defect_batch(func, X[keep], Y[keep], lam[keep], params)
    den = lam[keep] * (1.0 - lam[keep]) * gap[keep] ** (1.0 + alpha)
    return float(np.max(num / den))


def certify(
    func,
    domain: DomainSpec,
    region: BallRegion,
    params: ModulusParams,
    n_triples: int,
    seed: int,
) -> SemiconcavityCertificate:
    """Test the inequality on sampled triples; positive defects become witnesses."""
    if n_triples < 1:
        raise InputError("n_triples must be at least 1")
    rng = np.random.default_rng(seed)
    X, Y, lam = _sample_triples(domain, region, n_triples, rng, 100 * n_triples)
    defects = _defect_batch(func, X, Y, lam, params)
    bad = np.flatnonzero(defects > 0.0)
    witnesses = [
        (SemiconcavityTriple(X[i], Y[i], lam[i]), float(defects[i])) for i in bad
    ]
    return SemiconcavityCertificate(
        function_id=getattr(func, "identifier", type(func).__name__),
        region=region,
        params=params,
        n_triples=n_triples,
        max_defect=float(np.max(defects)),
        witnesses=witnesses,
        seed=seed,
    )
