"""Bootstrap hypothesis tests for the latent geometry class.

The smallest eigenvalue of the Gram form (flat and spherical nulls) or the
second-largest eigenvalue of the cosh form (negatively curved null) is
zero exactly when the estimated distances embed in that class.  Because
the null puts the eigenvalue on a boundary with repeated zeros, a
classical bootstrap fails; the test resamples clique members at a smaller
subsample size and rescales, in the subsampling tradition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cliques import CliqueSet
from .curvature import DegenerateDistanceError, estimate_curvature
from .dimension import dimension_from_rank, ladle_rank
from .distance import DistanceMatrix, distances_from_graph
from .geometry import Geometry, cosine_form, gram_matrix
from .graph import Graph

GEOMETRIES = (Geometry.EUCLIDEAN, Geometry.SPHERICAL, Geometry.HYPERBOLIC)


def default_subsample(ell: int) -> int:
    """Default per-clique subsample size: grows with ell but slower (ell^(2/3))."""
    return max(2, math.ceil(ell ** (2.0 / 3.0)))


@dataclass(frozen=True)
class BootstrapConfig:
    """Knobs of the subsampling bootstrap.

    ``subsample`` (m) is the number of member indices drawn per clique,
    at most the clique size; ``rate`` is the exponent rho in the m^(2*rho)
    statistic rescaling.  The significance level and the rate are distinct
    knobs even though both are conventionally written alpha.
    """

    n_boot: int = 200
    subsample: int | None = None
    rate: float = 1.0 / 3.0
    alpha: float = 0.05
    seed: int = 0
    with_replacement: bool = True

    def __post_init__(self):
        if self.n_boot < 1:
            raise ValueError("n_boot must be >= 1")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")

    def resolve_m(self, ell: int) -> int:
        m = self.subsample if self.subsample is not None else default_subsample(ell)
        if not 1 <= m <= ell:
            raise ValueError(f"subsample size must satisfy 1 <= m <= {ell}, got {m}")
        return m


@dataclass(frozen=True)
class GeometryTestResult:
    """Outcome of one null-geometry test.

    ``stat_observed`` is the scaled eigenvalue ell^(2*rho) * lambda_k*;
    ``p_value`` is the bootstrap tail fraction at the observed statistic
    (lower tail for the flat/spherical nulls, upper for hyperbolic), and
    the test rejects when p_value <= alpha.
    """

    geometry: Geometry
    k_star: int
    stat_observed: float
    critical_value: float
    p_value: float
    reject: bool
    kappa_used: float
    eigenvalue_observed: float
    degenerate: bool = False


@dataclass(frozen=True)
class GeometryReport:
    """All three tests plus the derived classification.

    ``classification`` is None (not classifiable) when every geometry is
    rejected; otherwise the non-rejected geometry with the largest
    p-value.  ``r_hat``/``p_hat`` come from the rank estimator run under
    the classified geometry; ``p_hat`` uses the max(2, p) reporting floor.
    """

    results: dict[Geometry, GeometryTestResult]
    classification: Geometry | None
    alpha: float
    kappa_hat: float | None = None
    r_hat: int | None = None
    p_hat: int | None = None


def bootstrap_distance(
    g: Graph, cs: CliqueSet, e_nu: float, cfg: BootstrapConfig
) -> np.ndarray:
    """Resampled distance matrices, shape (B, K, K).

    Per replicate and clique pair, m member indices are drawn from each
    clique (with replacement by default), the tie frequency over the m x m
    sampled ordered pairs is floored at 1/ell^2, and the distance formula
    is applied with the supplied gregariousness factor held fixed.
    Identical-node pairs are excluded from the count when cliques share
    nodes.
    """
    k, ell = cs.k, cs.ell
    m = cfg.resolve_m(ell)
    b = cfg.n_boot
    rng = np.random.default_rng(cfg.seed)
    floor = 1.0 / (ell * ell)
    log_shift = 2.0 * math.log(e_nu)
    d_star = np.zeros((b, k, k))
    members = [np.asarray(c) for c in cs.cliques]
    for a in range(k):
        for c in range(a + 1, k):
            block = g.adjacency[np.ix_(cs.cliques[a], cs.cliques[c])].astype(float)
            if cfg.with_replacement:
                i_idx = rng.integers(0, ell, size=(b, m))
                j_idx = rng.integers(0, ell, size=(b, m))
            else:
                i_idx = np.argsort(rng.random((b, ell)), axis=1)[:, :m]
                j_idx = np.argsort(rng.random((b, ell)), axis=1)[:, :m]
            sampled = block[i_idx[:, :, None], j_idx[:, None, :]]
            same = (
                members[a][i_idx][:, :, None] == members[c][j_idx][:, None, :]
            )
            counts = sampled.sum(axis=(1, 2)) - (sampled * same).sum(axis=(1, 2))
            p_star = np.maximum(counts / (m * m), floor)
            d_vals = np.maximum(-np.log(p_star) + log_shift, 0.0)
            d_star[:, a, c] = d_vals
            d_star[:, c, a] = d_vals
    return d_star


def _k_star(kind: Geometry, k: int) -> int:
    """1-based ascending index of the tested eigenvalue."""
    return k - 1 if kind is Geometry.HYPERBOLIC else 1


def _working_matrix(d_values: np.ndarray, kind: Geometry, kappa: float) -> np.ndarray:
    if kind is Geometry.EUCLIDEAN:
        return gram_matrix(d_values, 0.0)
    return cosine_form(d_values, kappa)


def _stat(d_values: np.ndarray, kind: Geometry, kappa: float, k_star: int) -> float:
    w = _working_matrix(d_values, kind, kappa)
    vals = np.linalg.eigvalsh(w)
    return float(vals[k_star - 1])


def _estimate_kappa_or_fallback(
    d_values: np.ndarray, kind: Geometry, fallback: float
) -> float:
    try:
        return estimate_curvature(d_values, kind).kappa_hat
    except DegenerateDistanceError:
        # a fully-floored replicate can collapse to zero distances; reuse
        # the curvature estimated from the observed matrix
        return fallback


def _lower_quantile(sorted_vals: np.ndarray, q: float) -> float:
    """inf{x : empirical CDF(x) >= q} on pre-sorted values."""
    n = len(sorted_vals)
    idx = min(max(math.ceil(q * n) - 1, 0), n - 1)
    return float(sorted_vals[idx])


def test_geometry(
    g: Graph,
    cs: CliqueSet,
    null_kind: Geometry,
    cfg: BootstrapConfig,
    d_hat: DistanceMatrix | None = None,
    e_nu: float | None = None,
    boot_d: np.ndarray | None = None,
) -> GeometryTestResult:
    """Test whether the estimated distances embed in ``null_kind``.

    The observed statistic is the critical eigenvalue of the working
    matrix built at the estimated curvature; bootstrap replicates rerun
    the same construction (curvature re-estimated per replicate for the
    curved nulls) and their centered, m^(2*rho)-scaled eigenvalues form
    the reference distribution.  ``d_hat``, ``e_nu`` and ``boot_d`` may be
    injected so several tests share one set of replicates.
    """
    null_kind = Geometry(null_kind)
    if d_hat is None:
        _, _, d_hat = distances_from_graph(g, cs)
    if e_nu is None:
        e_nu = d_hat.e_nu_hat
    if boot_d is None:
        boot_d = bootstrap_distance(g, cs, e_nu, cfg)
    k, ell = cs.k, cs.ell
    m = cfg.resolve_m(ell)
    k_star = _k_star(null_kind, k)

    if null_kind is Geometry.EUCLIDEAN:
        kappa_hat = 0.0
    else:
        kappa_hat = estimate_curvature(d_hat.values, null_kind).kappa_hat
    lam_obs = _stat(d_hat.values, null_kind, kappa_hat, k_star)

    lam_boot = np.empty(len(boot_d))
    for i, d_star in enumerate(boot_d):
        if null_kind is Geometry.EUCLIDEAN:
            kappa_b = 0.0
        else:
            kappa_b = _estimate_kappa_or_fallback(d_star, null_kind, kappa_hat)
        lam_boot[i] = _stat(d_star, null_kind, kappa_b, k_star)

    scale_boot = m ** (2.0 * cfg.rate)
    scale_obs = ell ** (2.0 * cfg.rate)
    t = np.sort(scale_boot * (lam_boot - lam_obs))
    stat_observed = scale_obs * lam_obs
    degenerate = bool(t[-1] - t[0] == 0.0)

    if null_kind is Geometry.HYPERBOLIC:
        p_value = float(np.mean(t >= stat_observed))
        critical = _lower_quantile(t, 1.0 - cfg.alpha)
    else:
        p_value = float(np.mean(t <= stat_observed))
        critical = _lower_quantile(t, cfg.alpha)
    reject = p_value <= cfg.alpha
    return GeometryTestResult(
        geometry=null_kind,
        k_star=k_star,
        stat_observed=stat_observed,
        critical_value=critical,
        p_value=p_value,
        reject=reject,
        kappa_used=kappa_hat,
        eigenvalue_observed=lam_obs,
        degenerate=degenerate,
    )


def weyl_threshold(boot_ws, w_hat: np.ndarray, alpha: float) -> float:
    """Conservative rejection threshold from eigenvalue perturbation bounds.

    An eigenvalue of the estimated matrix can deviate from its population
    counterpart by at most the Frobenius norm of the estimation error, so
    the alpha-quantile of the bootstrap Frobenius deviations bounds the
    false-rejection rate.  Diagnostic companion to the main test.
    """
    ws = list(boot_ws)
    if len(ws) < 20:
        raise ValueError("need at least 20 bootstrap matrices")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    w0 = np.asarray(w_hat, dtype=float)
    norms = np.sort([float(np.linalg.norm(np.asarray(w) - w0)) for w in ws])
    return _lower_quantile(norms, alpha)


def classify_from_pvalues(
    pvalues: dict[Geometry, float], alpha: float
) -> Geometry | None:
    """Largest p-value among non-rejected geometries; None if all reject.

    A p-value exactly at alpha counts as rejected.  Exact p-value ties
    break in the fixed order flat, spherical, hyperbolic.
    """
    best = None
    for kind in GEOMETRIES:
        p = pvalues[kind]
        if p <= alpha:
            continue
        if best is None or p > pvalues[best]:
            best = kind
    return best


def classify(
    g: Graph,
    cs: CliqueSet,
    cfg: BootstrapConfig,
    t: int | None = None,
) -> GeometryReport:
    """Run all three geometry tests and classify the latent space.

    The three tests share one distance estimate and one set of bootstrap
    replicates, so the outcome does not depend on the order they run.
    For a classified geometry the rank estimator is run on the same
    replicates and mapped to a dimension (with the max(2, p) reporting
    floor); curvature is attached for the curved classes.
    """
    _, _, d_hat = distances_from_graph(g, cs, t)
    boot_d = bootstrap_distance(g, cs, d_hat.e_nu_hat, cfg)
    results = {
        kind: test_geometry(g, cs, kind, cfg, d_hat=d_hat, e_nu=d_hat.e_nu_hat, boot_d=boot_d)
        for kind in GEOMETRIES
    }
    classification = classify_from_pvalues(
        {kind: res.p_value for kind, res in results.items()}, cfg.alpha
    )
    kappa_hat = None
    r_hat = None
    p_hat = None
    if classification is not None:
        kappa_cls = results[classification].kappa_used
        if classification is not Geometry.EUCLIDEAN:
            kappa_hat = kappa_cls

        def builder(dist: np.ndarray) -> np.ndarray:
            return _working_matrix(dist, classification, kappa_cls)

        ladle = ladle_rank(
            builder,
            d_hat.values,
            list(boot_d),
            n_boot=len(boot_d),
            psd_mode=classification is Geometry.HYPERBOLIC,
        )
        r_hat = ladle.r_hat
        p_hat = dimension_from_rank(classification, r_hat, floor=True)
    return GeometryReport(
        results=results,
        classification=classification,
        alpha=cfg.alpha,
        kappa_hat=kappa_hat,
        r_hat=r_hat,
        p_hat=p_hat,
    )
