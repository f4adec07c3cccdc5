"""Ordering transforms: map operators to phase-space symbols with a real
ordering index α ∈ [-1/2, 1/2] and quantify how little the symbol of
V(X + θK) depends on that index.

The α-symbol of a kernel A is the lattice form of

    h_α(k, x) = Σ_y Δx^N e^{(i/ħ) k·y} A(x - (1/2+α) y, x + (1/2-α) y).

The two arguments always differ by the on-lattice separation -y, so the
kernel enters through its wrapped diagonals: writing β = 1/2 + α and
f_d(anchor) = A(anchor - βd, anchor + (1-β)d), the matrix supplies the
samples f_d(y_i + βd) = A[y_i, y_i ⊕ d] and the off-lattice evaluation at
anchor = x is trigonometric interpolation along each diagonal.  In
frequency space this closes into

    h_α(k, x) = Σ_w e^{(i/ħ) w·x} P_w(k - βw),
    P_w(κ)    = Δx^N Σ_d ŝ_d[w] e^{(i/ħ) κ·d},

with ŝ_d[w] the anchor spectrum of diagonal d — three lattice transforms
and one fractional phase twist.  α = ±1/2 read the diagonals at lattice
anchors and are exact; for kernels of V(X + θK) the evaluation point
κ = k - βw meets the antisymmetry of θ (w·θw = 0), which washes the
α-dependence out up to the interpolation residue of the diagonal profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PhaseSpaceGrid, PhysicsParams, Potential, ThetaMatrix, _dft_phase
from .star import OperatorKernel, potential_operator_kernel


@dataclass(frozen=True)
class AlphaIndex:
    """Dimensionless ordering parameter, constrained to [-1/2, +1/2]."""

    value: float

    def __post_init__(self):
        if not -0.5 <= self.value <= 0.5:
            raise ValueError("alpha: ordering index must lie in [-1/2, 1/2]")


def _alpha_value(alpha) -> float:
    if isinstance(alpha, AlphaIndex):
        return alpha.value
    return AlphaIndex(float(alpha)).value


@dataclass
class PhaseSpaceSymbol:
    """Symbol values indexed [k_node, x_node] (each flattened row-major)."""

    values: np.ndarray
    grid: PhaseSpaceGrid

    def __post_init__(self):
        n = self.grid.size
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (n, n):
            raise ValueError("symbol must be sized (k nodes, x nodes)")


def _group_transform(grid: PhaseSpaceGrid, tensor, first_axis: int, sign: int):
    """Centered DFT over grid.dim consecutive axes starting at first_axis."""
    mat = _dft_phase(grid.points_per_axis, sign)
    for axis in range(first_axis, first_axis + grid.dim):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def _diagonal_layout(K: OperatorKernel):
    """D[i, d] = A[y_i, y_i ⊕ d]: anchor index i, wrapped diagonal offset d."""
    grid = K.grid
    G = grid.points_per_axis
    pos = np.arange(G)
    ket_pos = (pos[:, None] + pos[None, :] - G // 2) % G  # [i_pos, d_pos]
    row = 0
    col = 0
    for axis in range(grid.dim):
        shape = [1] * (2 * grid.dim)
        shape[axis] = G
        shape[grid.dim + axis] = G
        row = row * G + pos[:, None].repeat(G, 1).reshape(shape)
        col = col * G + ket_pos.reshape(shape)
    row = np.broadcast_to(row, (G,) * (2 * grid.dim)).reshape(grid.size, grid.size)
    col = np.broadcast_to(col, (G,) * (2 * grid.dim)).reshape(grid.size, grid.size)
    return K.entries[row, col]


def _balanced_twist(G: int, beta: float, n) -> np.ndarray:
    """Fractional anchor twist e^{-2πi β n_w n_d / G} with split endpoints.

    On even windows the unpaired frequency -G/2 is shared half-and-half
    with +G/2 (in both the w and d directions), which keeps the
    interpolation real for real data and symmetric under reflection.  For
    integer β the two representatives carry identical phases, so the
    endpoint treatment changes nothing at α = ±1/2.
    """
    twist = np.exp(-2j * np.pi * beta * np.outer(n, n) / G).astype(complex)
    if G % 2 == 0:
        twist[0, :] = np.cos(np.pi * beta * n)
        twist[:, 0] = np.cos(np.pi * beta * n)
        twist[0, 0] = np.cos(np.pi * beta * G / 2)
    return twist


def symbol_of_operator(K: OperatorKernel, alpha) -> PhaseSpaceSymbol:
    """Phase-space symbol of a lattice operator at ordering index α.

    The w = 0 profile never acquires an α-phase, so symbols of
    translation-invariant kernels (constant diagonals, e.g. purely kinetic
    operators) are α-independent down to rounding, and α = ±1/2 evaluate
    the diagonals at exact lattice anchors.
    """
    a = _alpha_value(alpha)
    beta = 0.5 + a
    grid = K.grid
    G, N = grid.points_per_axis, grid.dim
    diag = _diagonal_layout(K).reshape(grid.shape * 2)  # (i axes..., d axes...)
    spectrum = _group_transform(grid, diag, 0, -1) / grid.size  # (w axes..., d axes...)
    twist = _balanced_twist(G, beta, grid.index_axis)  # [w, d]
    for axis in range(N):
        shape = [1] * (2 * N)
        shape[axis] = G
        shape[N + axis] = G
        spectrum = spectrum * twist.reshape(shape)
    pvals = _group_transform(grid, spectrum, N, +1) * grid.cell_volume  # (w..., k...)
    out = _group_transform(grid, pvals, 0, +1)  # (x axes..., k axes...)
    flat = out.reshape(grid.size, grid.size).T  # -> [k, x]
    return PhaseSpaceSymbol(flat, grid)


def shifted_potential_symbol(V: Potential, theta: ThetaMatrix, grid: PhaseSpaceGrid,
                             alpha) -> PhaseSpaceSymbol:
    """α-symbol of V(X+θK) along the closed-form route.

    Exchanging the order of integration collapses the intermediate momentum
    quadrature into a delta (done analytically), which leaves

        v_α(k, x) = V(x + θk) · exp( -(i/ħ) k·θk / (α + 1/2) ).

    The exponent is evaluated numerically from the actual θ entries: for an
    antisymmetric matrix the contraction k·θk cancels term against term, so
    the would-be α-dependence is erased at rounding level.  The route
    divides by (α + 1/2) and is therefore unavailable at α = -1/2, where
    the defining integral (symbol_of_operator) remains regular.
    """
    a = _alpha_value(alpha)
    if a == -0.5:
        raise ValueError("alpha: the closed-form route divides by (alpha + 1/2); "
                         "use symbol_of_operator at alpha = -1/2")
    shifts = theta.shift(grid.k_points)  # (k, N)
    twist = np.einsum("kj,kj->k", grid.k_points, shifts)  # k·θk: cancels exactly
    factor = np.exp(-1j * twist / (grid.hbar * (a + 0.5)))
    values = V(grid.x_points[None, :, :] + shifts[:, None, :]) * factor[:, None]
    return PhaseSpaceSymbol(values.astype(complex), grid)


@dataclass
class WashoutReport:
    """Result of comparing symbols of V(X+θK) across ordering indices."""

    alphas: list
    max_dev_from_shifted: list          # per α: max |h_α(k,x) - V(x+θk)|
    pairwise_abs: dict                  # (i, j) -> max |h_i - h_j|
    scale: float                        # max |V(x+θk)| over the lattice
    method: str = "closed_form"
    symbols: list = field(repr=False, default_factory=list)

    @property
    def max_pairwise_abs(self) -> float:
        return max(self.pairwise_abs.values()) if self.pairwise_abs else 0.0

    @property
    def max_pairwise_relative(self) -> float:
        return self.max_pairwise_abs / self.scale if self.scale > 0 else self.max_pairwise_abs


def verify_alpha_washout(V: Potential, theta: ThetaMatrix, grid: PhaseSpaceGrid,
                         alphas, method: str = "closed_form") -> WashoutReport:
    """Compare α-symbols of V(X+θK) across a list of ordering indices.

    method="closed_form" uses shifted_potential_symbol (requires every
    α ≠ -1/2); the residual spread then measures the numerically-cancelled
    k·θk contraction.  method="direct" builds the kernel once and runs
    symbol_of_operator per α; its spread sits at the lattice quadrature
    scale (comparable to the grid-refinement self-convergence error).
    The report carries per-α deviation from the shifted potential V(x+θk)
    and the pairwise spread, absolute and relative to max |V(x+θk)|.
    """
    alphas = [(_alpha_value(a)) for a in alphas]
    if len(alphas) < 2:
        raise ValueError("alphas: need at least two ordering indices to compare")
    if method not in ("closed_form", "direct"):
        raise ValueError(f"method: unknown washout method {method!r}")
    target = V(grid.x_points[None, :, :] + theta.shift(grid.k_points)[:, None, :])
    scale = float(np.max(np.abs(target))) if target.size else 0.0
    if method == "closed_form":
        symbols = [shifted_potential_symbol(V, theta, grid, a) for a in alphas]
    else:
        kernel = potential_operator_kernel(V, theta, grid)
        symbols = [symbol_of_operator(kernel, a) for a in alphas]
    devs = [float(np.max(np.abs(s.values - target))) for s in symbols]
    pairwise = {}
    for i in range(len(alphas)):
        for j in range(i + 1, len(alphas)):
            pairwise[(i, j)] = float(np.max(np.abs(symbols[i].values - symbols[j].values)))
    return WashoutReport(alphas=alphas, max_dev_from_shifted=devs, pairwise_abs=pairwise,
                         scale=scale, method=method, symbols=symbols)


def _minimal_offsets(grid: PhaseSpaceGrid):
    """Per-axis minimal wrapped offset n_v - n_u mapped into [-G/2, G/2)."""
    G = grid.points_per_axis
    n = grid.index_axis
    return ((n[None, :] - n[:, None]) + G // 2) % G - G // 2  # [u, v]


def _periodic_sinc(t, points: int):
    """Real balanced interpolation kernel: (1/G)[Σ_{|n|<G/2} e^{2πint/G} + cos(πt)].

    Even in t, equal to 1 at t = 0 and to 0 at other lattice offsets; the
    split endpoint matches the twist convention of symbol_of_operator.
    """
    t = np.asarray(t, dtype=float)
    total = np.cos(np.pi * t) if points % 2 == 0 else np.zeros_like(t)
    top = points // 2 - 1 if points % 2 == 0 else (points - 1) // 2
    acc = np.ones_like(t) + total
    for n in range(1, top + 1):
        acc = acc + 2.0 * np.cos(2.0 * np.pi * n * t / points)
    return acc / points


def delta_alpha_matrix_element(alpha, k, x, grid: PhaseSpaceGrid) -> OperatorKernel:
    """Quantizer Δ_α(K-k, X-x) as a lattice kernel.

    Discretizes (2πħ)^{-N} Σ_τ Δx^N e^{-(i/ħ)τ·k} |x-(1/2+α)τ⟩⟨x+(1/2-α)τ|
    with the pair of position states sharing one fractional translation,
    the same convention the symbol's diagonal interpolation uses, so that
    tr[A Δ_{-α}]·(2πħ)^N recomputes symbol_of_operator along an independent
    path.  Dense; intended for small grids.
    """
    a = _alpha_value(alpha)
    if grid.size > 1024:
        raise ValueError("quantizer matrices are dense; grid too large (size > 1024)")
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    G = grid.points_per_axis
    beta = 0.5 - a  # the -α convention of the trace pairing
    offs = _minimal_offsets(grid)  # [u, v] per axis in lattice units
    n = grid.index_axis
    pref = (2.0 * np.pi * grid.hbar) ** (-grid.dim) / grid.cell_volume
    entries = np.full((grid.size, grid.size), pref, dtype=complex)
    # entries[v, u] = pref · Π_axis e^{(i/ħ) k_a d_a} S((x_a - u_a)/Δx - β d_a),
    # with the ±G/2 diagonal class averaged over its two representatives.
    for axis in range(grid.dim):
        d = offs  # lattice units, shape [u, v]
        phase = np.exp(1j * k[axis] * d * grid.dx / grid.hbar)
        t = x[axis] / grid.dx - n[:, None]  # [u, v] anchor offsets
        sinc = _periodic_sinc(t - beta * d, G)
        if G % 2 == 0:
            mirrored = _periodic_sinc(t - beta * (d + G), G)
            sinc = np.where(d == -(G // 2), 0.5 * (sinc + mirrored), sinc)
        factor = (phase * sinc).T  # -> [v, u]
        shape = [1] * (2 * grid.dim)
        shape[axis] = G
        shape[grid.dim + axis] = G
        full = np.broadcast_to(factor.reshape(shape),
                               (G,) * (2 * grid.dim)).reshape(grid.size, grid.size)
        entries = entries * full
    return OperatorKernel(entries, grid)


def symbol_via_quantizer_trace(K: OperatorKernel, alpha, k, x) -> complex:
    """α-symbol at one phase-space point from the trace form tr[K Δ_{-α}]·(2πħ)^N."""
    grid = K.grid
    a = _alpha_value(alpha)
    quantizer = delta_alpha_matrix_element(-a, k, x, grid)
    prod = K.matmul(quantizer)
    trace = np.trace(prod.entries) * grid.cell_volume
    return complex(trace * (2.0 * np.pi * grid.hbar) ** grid.dim)


def symmetrized_position_momentum_kernel(grid: PhaseSpaceGrid,
                                         params: PhysicsParams) -> OperatorKernel:
    """(X¹K¹ + K¹X¹)/2 as a lattice kernel (one dimension).

    A control operator whose symbol genuinely depends on the ordering index
    (symbol ≈ x·k + iħα), used to demonstrate that the washout measurement
    detects α-dependence when it is really there.
    """
    if grid.dim != 1:
        raise ValueError("control operator is defined for one-dimensional grids")
    hbar = grid.hbar
    norm = grid.momentum_cell_volume * (2.0 * np.pi * hbar) ** (-1)
    diffs = grid.x_points[:, None, 0] - grid.x_points[None, :, 0]
    kvals = grid.k_points[:, 0]
    momentum = norm * np.einsum("k,uvk->uv",
                                kvals, np.exp(1j * diffs[:, :, None] * kvals / hbar))
    mid = 0.5 * (grid.x_points[:, None, 0] + grid.x_points[None, :, 0])
    return OperatorKernel(momentum * mid, grid)
