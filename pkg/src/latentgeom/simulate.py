"""Simulate latent positions and graphs from the distance-decay formation model.

Nodes are spread around group centers (mimicking community structure) on a
chosen manifold and edges are drawn independently with probability
exp(nu_i + nu_j - d(z_i, z_j)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Geometry, GeometryError, ManifoldSpec, pairwise_distances
from .graph import Graph

#: Default dispersion of nodes around their group center.  The flat case
#: derives its spread from center_scale (sigma^2 / n_centers variance); the
#: curved recipes use a +/- window of this half-width in angle/coordinate.
DEFAULT_WINDOW = 0.1

#: Default center dispersions: sigma for the flat case, box half-width for
#: the hyperbolic case (spherical centers are drawn uniformly in angle).
DEFAULT_CENTER_SCALE = {
    Geometry.EUCLIDEAN: 0.5,
    Geometry.HYPERBOLIC: 2.5,
}


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one simulated latent configuration + graph.

    ``spread`` is the per-geometry dispersion of nodes around their center
    (sigma for flat space, the +/- window half-width for the curved
    recipes).  ``nu_law`` picks the gregariousness distribution on
    (-inf, 0]: "zero" (degenerate at 0), "uniform" (Unif[-nu_param, 0]),
    or "exponential" (-Exp with mean nu_param).
    """

    manifold: ManifoldSpec
    n: int = 1200
    n_centers: int = 15
    spread: float | None = None
    center_scale: float | None = None
    nu_law: str = "zero"
    nu_param: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.n_centers < 1:
            raise ValueError("n and n_centers must be positive")
        if self.spread is not None and self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.nu_law not in ("zero", "uniform", "exponential"):
            raise ValueError(f"unknown nu_law {self.nu_law!r}")
        kind = self.manifold.kind
        if kind is not Geometry.EUCLIDEAN and self.manifold.dim != 2:
            raise GeometryError(
                f"curved simulation recipes are 2-dimensional; got dim={self.manifold.dim}"
            )

    @property
    def spread_value(self) -> float:
        if self.spread is not None:
            return self.spread
        if self.manifold.kind is Geometry.EUCLIDEAN:
            return DEFAULT_CENTER_SCALE[Geometry.EUCLIDEAN]
        return DEFAULT_WINDOW

    @property
    def center_scale_value(self) -> float:
        if self.center_scale is not None:
            return self.center_scale
        return DEFAULT_CENTER_SCALE.get(self.manifold.kind, 1.0)


@dataclass(frozen=True)
class LatentConfiguration:
    """Sampled node positions and gregariousness terms on one manifold."""

    positions: np.ndarray
    nu: np.ndarray
    manifold: ManifoldSpec
    center_assignments: np.ndarray = field(repr=False, default=None)
    centers: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        if pos.shape[0] != nu.shape[0]:
            raise ValueError("positions and nu must have equal length")
        if (nu > 0).any():
            raise ValueError("gregariousness terms must be <= 0")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "nu", nu)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


def _assign_centers(n: int, n_centers: int) -> np.ndarray:
    """Group labels 0..n_centers-1 with sizes differing by at most one."""
    sizes = [len(chunk) for chunk in np.array_split(np.arange(n), n_centers)]
    return np.repeat(np.arange(n_centers), sizes)


def _sample_nu(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.nu_law == "zero":
        return np.zeros(cfg.n)
    if cfg.nu_law == "uniform":
        return -rng.uniform(0.0, cfg.nu_param, size=cfg.n)
    return -rng.exponential(cfg.nu_param, size=cfg.n)


def _sphere_points(kappa: float, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    r = 1.0 / math.sqrt(kappa)
    return r * np.column_stack(
        (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    )


def _reflect_into(theta: np.ndarray, high: float) -> np.ndarray:
    """Reflect values into [0, high] (polar angles cannot wrap)."""
    t = np.abs(theta)
    over = t > high
    t[over] = 2 * high - t[over]
    return np.clip(t, 0.0, high)


def _hyperboloid_points(kappa: float, xy: np.ndarray) -> np.ndarray:
    # locus Q(x,x)=1/kappa with kappa<0 forces x0^2 = 1/|kappa| + x^2 + y^2
    x0 = np.sqrt(1.0 / abs(kappa) + np.sum(xy**2, axis=1))
    return np.column_stack((x0, xy))


def sample_latent(cfg: SimConfig) -> LatentConfiguration:
    """Draw group centers, node positions around them, and nu terms."""
    rng = np.random.default_rng(cfg.seed)
    assign = _assign_centers(cfg.n, cfg.n_centers)
    kind = cfg.manifold.kind
    kappa = cfg.manifold.curvature

    if kind is Geometry.EUCLIDEAN:
        p = cfg.manifold.dim
        sigma = cfg.spread_value
        centers = rng.normal(0.0, cfg.center_scale_value, size=(cfg.n_centers, p))
        node_sd = sigma / math.sqrt(cfg.n_centers)
        positions = centers[assign] + rng.normal(0.0, node_sd, size=(cfg.n, p))
    elif kind is Geometry.SPHERICAL:
        delta = cfg.spread_value
        theta_c = rng.uniform(0.0, math.pi, size=cfg.n_centers)
        phi_c = rng.uniform(0.0, 2 * math.pi, size=cfg.n_centers)
        centers = _sphere_points(kappa, theta_c, phi_c)
        theta = rng.uniform(theta_c[assign] - delta, theta_c[assign] + delta)
        phi = rng.uniform(phi_c[assign] - delta, phi_c[assign] + delta)
        theta = _reflect_into(theta, math.pi)
        phi = np.mod(phi, 2 * math.pi)
        positions = _sphere_points(kappa, theta, phi)
    else:
        delta = cfg.spread_value
        s = cfg.center_scale_value
        xy_c = rng.uniform(-s, s, size=(cfg.n_centers, 2))
        centers = _hyperboloid_points(kappa, xy_c)
        low = xy_c[assign] - delta
        xy = rng.uniform(low, low + 2 * delta)
        positions = _hyperboloid_points(kappa, xy)

    nu = _sample_nu(cfg, rng)
    return LatentConfiguration(positions, nu, cfg.manifold, assign, centers)


def edge_probabilities(lat: LatentConfiguration) -> np.ndarray:
    """Matrix of pairwise connection probabilities min(1, exp(nu_i+nu_j-d)).

    The probability cannot exceed 1 when nu <= 0 and d >= 0, but the clamp
    guards user-supplied configurations.
    """
    d = pairwise_distances(lat.manifold, lat.positions)
    logp = lat.nu[:, None] + lat.nu[None, :] - d
    p = np.exp(np.minimum(logp, 0.0))
    np.fill_diagonal(p, 0.0)
    return p


def sample_graph(lat: LatentConfiguration, seed: int = 0) -> Graph:
    """Draw one graph: independent Bernoulli edges from edge_probabilities."""
    p = edge_probabilities(lat)
    rng = np.random.default_rng(seed)
    u = rng.random((lat.n, lat.n))
    upper = np.triu(u < p, k=1)
    adj = (upper | upper.T).astype(np.uint8)
    return Graph(adj)


def simulate(cfg: SimConfig, graph_seed: int | None = None) -> tuple[LatentConfiguration, Graph]:
    """Convenience wrapper: sample a latent configuration and one graph.

    The graph seed defaults to a value derived from cfg.seed so distinct
    configs give independent streams.
    """
    lat = sample_latent(cfg)
    if graph_seed is None:
        graph_seed = cfg.seed + 1_000_003
    return lat, sample_graph(lat, graph_seed)
