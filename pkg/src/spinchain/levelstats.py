"""Level-spacing statistics and the delta-to-Poisson crossover parameter.

The clean modulated chain has an equally spaced spectrum, so normalized
spacings form a delta peak at s = 1; strong coupling disorder pushes the
spacing distribution to the Poisson law exp(-s).  The crossover is
summarized by eta, the integrated distance of P(s) from the Poisson law
over s in [0, 1], normalized by the same distance for the delta peak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .chain import ChainSpec, build_hamiltonian, sample_disorder, substream
from .fitting import ThresholdScaling, threshold_scaling

__all__ = [
    "SpacingSample",
    "SpacingHistogram",
    "collect_spacings",
    "spacing_histogram",
    "eta",
    "eta_curve",
    "eta_threshold",
]


@dataclass(frozen=True)
class SpacingSample:
    """Pooled nearest-neighbor spacings, each normalized per realization."""

    spacings: np.ndarray
    n_realizations: int

    def __post_init__(self):
        s = np.asarray(self.spacings, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "spacings", s)


@dataclass(frozen=True)
class SpacingHistogram:
    """Probability density of spacings on bins centered at multiples of w.

    Centering the grid on s = 1 (instead of putting an edge there) keeps
    the clean chain's delta peak inside a single bin even with floating
    point noise on the eigenvalues.  The first bin is the half bin
    [0, w/2); total mass is 1 by construction.
    """

    edges: np.ndarray
    density: np.ndarray
    bin_width: float

    def __post_init__(self):
        for name in ("edges", "density"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def mass(self) -> float:
        return float(np.sum(self.density * self.widths))


def collect_spacings(spec: ChainSpec, n_real: int, master_seed: int,
                     key_prefix: tuple = ()) -> SpacingSample:
    """Diagonalize n_real disordered chains and pool normalized spacings.

    Per realization the N-1 consecutive gaps of the ascending spectrum
    are divided by their own mean, which removes realization-to-
    realization bandwidth fluctuations before pooling.  Degenerate
    eigenvalues contribute zero spacings and are kept.
    """
    if n_real < 1:
        raise ValueError("n_real must be >= 1")
    pooled = np.empty((n_real, spec.n_sites - 1))
    for r in range(n_real):
        stream = substream(master_seed, *key_prefix, r)
        h = build_hamiltonian(spec, sample_disorder(spec, stream))
        # root-free QL: robust for near-severed chains, eigenvalues only
        levels = eigvalsh_tridiagonal(h.diag, h.offdiag, lapack_driver="sterf")
        gaps = np.diff(np.sort(levels))
        pooled[r] = gaps / gaps.mean()
    return SpacingSample(spacings=pooled.ravel(), n_realizations=n_real)


def spacing_histogram(values, bin_width: float = 0.05,
                      s_max: float = 5.0) -> SpacingHistogram:
    """Histogram density with bins of width w centered at s = 0, w, 2w, ...

    The edge grid is extended past s_max when samples demand it, so the
    histogram always carries total mass 1.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be > 0")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty spacing sample")
    top = max(float(s_max), float(values.max()) + bin_width)
    n_centers = int(np.ceil(top / bin_width)) + 1
    edges = np.concatenate(([0.0], (np.arange(n_centers) + 0.5) * bin_width))
    counts, _ = np.histogram(values, bins=edges)
    density = counts / (values.size * np.diff(edges))
    return SpacingHistogram(edges=edges, density=density, bin_width=bin_width)


def _eta_from_histogram(hist: SpacingHistogram) -> float:
    """Riemann-sum eta on the histogram's own bins.

    Both integrals run over the bins whose center lies in [0, 1], share
    the binning and share the Poisson reference evaluated at the bin
    centers, so a sample that concentrates in the bin containing s = 1
    (the clean chain) gives eta = 1 identically.
    """
    centers = hist.centers
    widths = hist.widths
    inside = centers <= 1.0 + 1e-12
    poisson = np.exp(-centers[inside])

    delta_density = np.zeros_like(hist.density)
    delta_bin = np.searchsorted(hist.edges, 1.0, side="right") - 1
    delta_density[delta_bin] = 1.0 / widths[delta_bin]

    num = np.sum(widths[inside] * np.abs(hist.density[inside] - poisson))
    den = np.sum(widths[inside] * np.abs(delta_density[inside] - poisson))
    return float(num / den)


def eta(sample: SpacingSample, bin_width: float = 0.05) -> float:
    """Crossover parameter: 1 for the clean delta peak, ~0 for Poisson."""
    if sample.spacings.size == 0:
        raise ValueError("empty spacing sample")
    return _eta_from_histogram(spacing_histogram(sample.spacings, bin_width))


def eta_curve(n_sites: int, eps_j_grid, n_real: int, master_seed: int,
              base_coupling: float = 1.0, corr_p: float = 0.5,
              bin_width: float = 0.05, key_prefix: tuple = ()) -> np.ndarray:
    """eta as a function of coupling-disorder strength for one chain length."""
    out = np.empty(len(eps_j_grid))
    for i, eps_j in enumerate(eps_j_grid):
        spec = ChainSpec(n_sites=n_sites, base_coupling=base_coupling,
                         eps_j=float(eps_j), corr_p=corr_p)
        sample = collect_spacings(spec, n_real, master_seed,
                                  key_prefix=key_prefix + (i,))
        out[i] = eta(sample, bin_width)
    return out


def eta_threshold(curves: dict, eta_target: float) -> ThresholdScaling:
    """Disorder strength at which eta crosses the target, fitted vs N.

    curves maps N -> (eps_grid, eta_values).  The crossing is found by
    log-linear interpolation and the exponent by least squares on
    log eps_c vs log N.
    """
    return threshold_scaling(curves, eta_target, model="eta-threshold")
