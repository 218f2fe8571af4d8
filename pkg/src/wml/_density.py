"""Log-space cumulative and tail integrals of the weighted area density.

Integrability tests repeatedly need A(t) = int_0^t a and T(r) = int_r^inf a
for densities a(r) = g^{m-1} e^{-f} whose magnitude leaves the floating
range long before a verdict is reached (g = e^{r^3} overflows at r ~ 9).
All accumulation here happens on log-values with logsumexp over a cached
geometric panel decomposition, so ratios like A(t)/a(t) stay computable at
any radius.  The panel touching the query point is integrated on a grid
geometrically refined toward that point, which is where steep densities
concentrate their mass.
"""

import math

import numpy as np
from scipy.special import roots_legendre


def _logsumexp(vals):
    """Scalar log-sum-exp without the scipy array-API overhead; this sits
    on the hot path of every integrability quadrature point."""
    a = np.asarray(vals, dtype=float)
    a = a[~np.isneginf(a)]
    if a.size == 0:
        return _NEG_INF
    hi = a.max()
    if not np.isfinite(hi):
        return float(hi)
    return float(hi + math.log(np.exp(a - hi).sum()))

R_MIN = 1e-8
R_HARD_MAX = 1e18
PANELS_PER_DECADE = 16
_GL_NODES, _GL_WEIGHTS = roots_legendre(12)
_LOG_GL_WEIGHTS = np.log(_GL_WEIGHTS)
_NEG_INF = -math.inf


def _piecewise_log_integral(log_a, edges):
    """log int over [edges[0], edges[-1]] from log-density samples at edges.

    Each cell uses an exponential fit through its endpoint log-values when
    they differ appreciably, a trapezoid in the density otherwise.  Exact
    for log-linear densities, which is the regime where magnitudes are wild.
    """
    x = np.asarray(edges, dtype=float)
    la = np.asarray(log_a, dtype=float)
    dx = np.diff(x)
    dla = np.diff(la)
    hi = np.maximum(la[1:], la[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        # int_cell a = dx * (e^{la1} - e^{la0}) / (la1 - la0)  (exp fit)
        steep = np.abs(dla) > 1e-6
        cell = np.where(
            steep,
            hi + np.log1p(-np.exp(-np.abs(dla))) - np.log(np.abs(dla))
            + np.log(dx),
            hi + np.log(dx) + np.log1p(0.5 * (np.exp(-np.abs(dla)) - 1.0)),
        )
    cell = cell[np.isfinite(cell)]
    if cell.size == 0:
        return _NEG_INF
    return _logsumexp(cell)


class DensityIntegrals:
    """Cached panel integrals of one manifold's area density."""

    def __init__(self, manifold, cells_per_panel=24):
        self.M = manifold
        self.cells = cells_per_panel
        self._edges = [R_MIN]          # panel breakpoints, increasing
        self._log_pieces = []          # log int over [edges[i], edges[i+1]]
        self._prefix = []              # log int over [0, edges[i+1]]
        self._suffix = {}              # start index -> log tail from edge
        self._tail_diverges = False

    # -- panel plumbing ---------------------------------------------------

    def _panel_integral(self, x0, x1, anchor=None, n=None):
        """log int_{x0}^{x1} a, geometrically refined toward ``anchor``.

        ``anchor`` is 'left', 'right' or None (plain geometric grid).
        """
        n = n or self.cells
        w = x1 - x0
        if w <= 0.0:
            return _NEG_INF
        if anchor == "right":
            u = np.exp(np.linspace(math.log(w) - 27.6, math.log(w), n))
            grid = np.concatenate(([x0], (x1 - u)[::-1], [x1]))
        elif anchor == "left":
            u = np.exp(np.linspace(math.log(w) - 27.6, math.log(w), n))
            grid = np.concatenate(([x0], x0 + u, [x1]))
        else:
            grid = np.exp(np.linspace(math.log(x0), math.log(x1), n + 1))
        grid = np.clip(grid, x0, x1)
        keep = np.empty(grid.size, dtype=bool)
        keep[0] = True
        np.greater(grid[1:], grid[:-1], out=keep[1:])
        grid = grid[keep]
        if grid.size < 2:
            return _NEG_INF
        la = self.M.log_area_density(grid)
        return _piecewise_log_integral(la, grid)

    def _extend_to(self, r):
        r = min(r, R_HARD_MAX)
        ratio = 10.0 ** (1.0 / PANELS_PER_DECADE)
        while self._edges[-1] < r:
            x0 = self._edges[-1]
            x1 = min(x0 * ratio, R_HARD_MAX)
            piece = self._panel_integral(x0, x1)
            base = self._prefix[-1] if self._prefix \
                else self._log_origin_piece()
            self._log_pieces.append(piece)
            self._prefix.append(float(np.logaddexp(base, piece)))
            self._edges.append(x1)

    def _log_origin_piece(self):
        # a ~ c r^{m-1} near 0
        return self.M.log_area_density(R_MIN) + math.log(R_MIN / self.M.m)

    # -- queries ----------------------------------------------------------

    def log_density(self, r):
        return self.M.log_area_density(r)

    def log_cum(self, t):
        """log int_0^t a(s) ds."""
        if t <= R_MIN:
            if t <= 0:
                return _NEG_INF
            return self.M.log_area_density(t) + math.log(t / self.M.m)
        self._extend_to(t)
        edges = self._edges
        k = min(int(np.searchsorted(edges, t, side="right")) - 1,
                len(self._log_pieces))
        if edges[k] < t:
            # cached [0, edges[k]] plus the final panel re-resolved toward t
            k_full = k
            partial = self._panel_integral(edges[k], t, anchor="right")
        else:
            # t landed on a breakpoint
            k_full = k - 1
            partial = self._panel_integral(edges[k - 1], t, anchor="right")
        base = self._prefix[k_full - 1] if k_full >= 1 \
            else self._log_origin_piece()
        return float(np.logaddexp(base, partial))

    def log_tail(self, r):
        """log int_r^inf a(s) ds, or None when the tail diverges.

        Convergence is declared once panel contributions drop 45 nats below
        the running maximum; divergence once panels fail to decay over many
        consecutive panels (or the hard radius cap is reached).
        """
        if self._tail_diverges:
            return None
        r = max(r, R_MIN)
        self._extend_to(max(4.0 * r, 10.0))
        edges = self._edges
        k = max(0, min(int(np.searchsorted(edges, r, side="right")) - 1,
                       len(self._log_pieces) - 1))
        suffix = self._suffix_from(k + 1)
        if suffix is None:
            return None
        if edges[k + 1] > r:
            # sub-panel fragments are a vanishing share of the tail; a
            # coarser grid here keeps per-quadrature-point cost down
            partial = self._panel_integral(r, edges[k + 1], anchor="left",
                                           n=12)
            return float(np.logaddexp(partial, suffix))
        return suffix

    def _suffix_from(self, j0):
        """log int over [edges[j0], inf) from cached panels, or None when
        the tail diverges; memoized per start index."""
        if j0 in self._suffix:
            return self._suffix[j0]
        parts = []
        best = _NEG_INF
        rising = 0
        prev = _NEG_INF
        j = j0
        while True:
            if j >= len(self._log_pieces):
                if self._edges[-1] >= R_HARD_MAX:
                    return None
                self._extend_to(self._edges[-1] * 10.0)
            piece = self._log_pieces[j]
            parts.append(piece)
            best = max(best, piece)
            if piece < best - 45.0:
                break
            rising = rising + 1 if piece >= prev - 1e-12 else 0
            if rising >= 4 * PANELS_PER_DECADE and piece > parts[0]:
                self._tail_diverges = True
                return None
            prev = piece
            j += 1
        self._suffix[j0] = _logsumexp(parts)
        return self._suffix[j0]

    def tail_converges(self, r=1.0):
        return self.log_tail(r) is not None
