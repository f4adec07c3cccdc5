"""Core phase-space types: physical parameters, the antisymmetric coordinate
coupling θ, dual position/momentum lattices, and analytic potentials.

The coordinate algebra  [Q^l, Q^j] = -2iħ θ^{lj},  [Q^l, P^j] = iħ δ^{lj},
[P^l, P^j] = 0  is realized on ordinary wavefunctions by Q^l = X^l + θ^{lj} K^j
with X, K canonical.  Every operator built downstream (star products, ordering
transforms, sliced propagators) ends up evaluating the potential at the shifted
argument x + θk, so the types here expose exactly that operation.

Lattice convention: a box [-L, L)^N with G points per axis pairs with the
momentum lattice of spacing Δk = 2πħ/(G Δx).  Then k·x/ħ on lattice pairs is an
exact multiple of 2π/G, forward/inverse transforms are exact inverses of each
other, and every ∫dx or ∫dk becomes a Δx^N- or Δk^N-weighted lattice sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ConfigError(ValueError):
    """Raised when parameters or configuration files are inconsistent."""


class GridMismatchError(ValueError):
    """Raised when fields or kernels living on different grids are combined."""


@dataclass(frozen=True)
class PhysicsParams:
    """Run-level constants: ħ, the mass M, and the spatial dimension N."""

    hbar: float = 1.0
    mass: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if self.hbar <= 0:
            raise ConfigError("hbar: must be positive")
        if self.mass <= 0:
            raise ConfigError("mass: must be positive")
        if self.dim < 1:
            raise ConfigError("dim: must be a positive integer")


class ThetaMatrix:
    """Real antisymmetric N×N matrix θ setting [Q^l, Q^j] = -2iħ θ^{lj}.

    Antisymmetry is required exactly (bitwise θ^{lj} == -θ^{jl}, zero
    diagonal); it is what kills the ordering dependence, so it is never
    allowed to hold only approximately.
    """

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ConfigError("theta: must be a square matrix")
        if not np.array_equal(arr, -arr.T) or np.any(arr.diagonal() != 0.0):
            raise ConfigError("theta: must be exactly antisymmetric")
        arr.setflags(write=False)
        self.entries = arr

    @classmethod
    def zero(cls, dim: int) -> "ThetaMatrix":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def single_block(cls, dim: int, value: float) -> "ThetaMatrix":
        """θ with a single independent entry θ^{12} = value (needs dim ≥ 2)."""
        if dim < 2 and value != 0.0:
            raise ConfigError("theta: a nonzero theta requires dim >= 2")
        arr = np.zeros((dim, dim))
        if dim >= 2:
            arr[0, 1] = value
            arr[1, 0] = -value
        return cls(arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_zero(self) -> bool:
        return not self.entries.any()

    def shift(self, k):
        """Map momentum vectors k (shape (..., N)) to (θk)^j = θ^{jl} k^l."""
        return np.einsum("jl,...l->...j", self.entries, np.asarray(k, dtype=float))

    def __eq__(self, other):
        return isinstance(other, ThetaMatrix) and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"ThetaMatrix({self.entries.tolist()})"


@lru_cache(maxsize=32)
def _dft_phase(points: int, sign: int):
    """Centered DFT phase matrix exp(sign·2πi n m / G) from exact integer products."""
    n = np.arange(points) - points // 2
    prod = np.outer(n, n) % points
    return np.exp(sign * 2j * np.pi * prod / points)


class PhaseSpaceGrid:
    """Paired position/momentum lattices with Fourier-dual spacing.

    x nodes: n Δx for centered integers n, covering [-L, L) with Δx = 2L/G.
    k nodes: n Δk with Δk = 2πħ/(G Δx), so Δx·Δk·G = 2πħ exactly per axis.
    Flattened node arrays are row-major over the per-axis index grids.
    """

    def __init__(self, points_per_axis: int, box_half_width: float, dim: int, hbar: float = 1.0):
        if points_per_axis < 2:
            raise ConfigError("grid.points_per_axis: must be at least 2")
        if box_half_width <= 0:
            raise ConfigError("grid.box_half_width: must be positive")
        if dim < 1:
            raise ConfigError("dim: must be a positive integer")
        self.points_per_axis = points_per_axis
        self.box_half_width = float(box_half_width)
        self.dim = dim
        self.hbar = float(hbar)
        G = points_per_axis
        self.dx = 2.0 * self.box_half_width / G
        self.dk = 2.0 * np.pi * self.hbar / (G * self.dx)
        self.index_axis = np.arange(G) - G // 2
        self.x_axis = self.index_axis * self.dx
        self.k_axis = self.index_axis * self.dk
        self.shape = (G,) * dim
        self.size = G**dim
        mesh = np.meshgrid(*(self.index_axis,) * dim, indexing="ij")
        self._index_points = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        self.x_points = self._index_points * self.dx
        self.k_points = self._index_points * self.dk

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def momentum_cell_volume(self) -> float:
        return self.dk**self.dim

    def same_as(self, other: "PhaseSpaceGrid") -> bool:
        return (
            self.points_per_axis == other.points_per_axis
            and self.box_half_width == other.box_half_width
            and self.dim == other.dim
            and self.hbar == other.hbar
        )

    def require_same(self, other: "PhaseSpaceGrid"):
        if not self.same_as(other):
            raise GridMismatchError("fields/kernels live on different grids")

    def _apply_axis_transform(self, values, matrix):
        tensor = np.asarray(values, dtype=complex).reshape(self.shape)
        for axis in range(self.dim):
            tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)
        return tensor.reshape(-1)

    def wave_to_momentum(self, values):
        """ψ̂(k) = (2πħ)^{-N/2} Δx^N Σ_x e^{-(i/ħ) k·x} ψ(x)."""
        scale = self.cell_volume * (2.0 * np.pi * self.hbar) ** (-self.dim / 2.0)
        return self._apply_axis_transform(values, _dft_phase(self.points_per_axis, -1)) * scale

    def momentum_to_wave(self, values):
        """ψ(x) = (2πħ)^{-N/2} Δk^N Σ_k e^{+(i/ħ) k·x} ψ̂(k)."""
        scale = self.momentum_cell_volume * (2.0 * np.pi * self.hbar) ** (-self.dim / 2.0)
        return self._apply_axis_transform(values, _dft_phase(self.points_per_axis, +1)) * scale


_POTENTIAL_FORMS = ("zero", "linear", "harmonic", "quartic", "polynomial", "gaussian_well")
_MAX_POLY_DEGREE = 12


class Potential:
    """Analytic potential V, evaluable at arbitrary real (shifted) arguments.

    Supported forms are entire functions, so V(x + θk) is well defined for
    every real shift and the derivative expansion of the star product
    converges without caveats.
    """

    def __init__(self, form: str, dim: int, **coeffs):
        if form not in _POTENTIAL_FORMS:
            raise ConfigError(f"potential.form: unknown form {form!r}")
        self.form = form
        self.dim = dim
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Potential":
        return cls("zero", dim)

    @classmethod
    def linear(cls, c) -> "Potential":
        c = np.asarray(c, dtype=float)
        return cls("linear", c.shape[0], c=c)

    @classmethod
    def harmonic(cls, omega: float, mass: float = 1.0, dim: int = 2) -> "Potential":
        """V(u) = ½ M ω² u·u."""
        return cls("harmonic", dim, omega=float(omega), mass=float(mass))

    @classmethod
    def quartic(cls, lam: float, dim: int = 2) -> "Potential":
        """V(u) = λ (u·u)²."""
        return cls("quartic", dim, lam=float(lam))

    @classmethod
    def polynomial(cls, terms, dim: int) -> "Potential":
        """V(u) = Σ c·Π u_i^{p_i} from (powers, coefficient) pairs."""
        frozen = []
        for powers, c in terms:
            powers = tuple(int(p) for p in powers)
            if len(powers) != dim or any(p < 0 for p in powers):
                raise ConfigError("potential.terms: powers must be nonnegative, one per axis")
            if sum(powers) > _MAX_POLY_DEGREE:
                raise ConfigError(f"potential.terms: total degree capped at {_MAX_POLY_DEGREE}")
            frozen.append((powers, float(c)))
        return cls("polynomial", dim, terms=tuple(frozen))

    @classmethod
    def gaussian_well(cls, depth: float, width: float, dim: int = 2) -> "Potential":
        """V(u) = -depth · exp(-u·u / (2 width²))."""
        if width <= 0:
            raise ConfigError("potential.width: must be positive")
        return cls("gaussian_well", dim, depth=float(depth), width=float(width))

    # -- evaluation ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.form == "zero"

    def __call__(self, u):
        """Evaluate V at points of shape (..., N)."""
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.dim:
            raise ConfigError("potential: argument dimension mismatch")
        if self.form == "zero":
            return np.zeros(u.shape[:-1])
        if self.form == "linear":
            return u @ self.coeffs["c"]
        if self.form == "harmonic":
            r2 = np.sum(u * u, axis=-1)
            return 0.5 * self.coeffs["mass"] * self.coeffs["omega"] ** 2 * r2
        if self.form == "quartic":
            r2 = np.sum(u * u, axis=-1)
            return self.coeffs["lam"] * r2 * r2
        if self.form == "polynomial":
            out = np.zeros(u.shape[:-1])
            for powers, c in self.coeffs["terms"]:
                term = np.full(u.shape[:-1], c)
                for axis, p in enumerate(powers):
                    if p:
                        term = term * u[..., axis] ** p
                out += term
            return out
        # gaussian_well
        r2 = np.sum(u * u, axis=-1)
        w = self.coeffs["width"]
        return -self.coeffs["depth"] * np.exp(-r2 / (2.0 * w * w))

    def __repr__(self):
        return f"Potential({self.form}, dim={self.dim})"


def evaluate_potential_shifted(V: Potential, theta: ThetaMatrix, x, k):
    """V(x + θk): the potential at the θ-shifted phase-space argument.

    Broadcasts over leading axes of x and k; this is the single evaluation
    every star product, ordering symbol, and sliced propagator reduces to.
    """
    if theta.dim != V.dim:
        raise ConfigError("theta: dimension does not match potential")
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    return V(x + theta.shift(k))


def realize_hamiltonian_symbol(V: Potential, theta: ThetaMatrix, p: PhysicsParams):
    """Classical phase-space function h(k, x) = k·k/(2M) + V(x + θk).

    This is the ordering-independent symbol of the Hamiltonian in the
    canonical realization; the returned callable is pure and broadcasts
    over (..., N)-shaped k and x.
    """
    if theta.dim != p.dim or V.dim != p.dim:
        raise ConfigError("dim: potential/theta/params dimensions disagree")

    def symbol(k, x):
        k = np.asarray(k, dtype=float)
        kinetic = np.sum(k * k, axis=-1) / (2.0 * p.mass)
        return kinetic + evaluate_potential_shifted(V, theta, x, k)

    return symbol


# -- configuration files ----------------------------------------------------


@dataclass(frozen=True)
class ProbeSpec:
    """Gaussian probe packet parameters; width defaults to L/6 at build time."""

    center: tuple = ()
    width: float | None = None
    momentum: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    params: PhysicsParams
    theta: ThetaMatrix
    grid: PhaseSpaceGrid
    potential: Potential
    probe: ProbeSpec
    raw: dict


def _require(mapping: dict, key: str, context: str = ""):
    if key not in mapping:
        name = f"{context}.{key}" if context else key
        raise ConfigError(f"{name}: missing required key")
    return mapping[key]


def _potential_from_config(pot: dict, dim: int, mass: float) -> Potential:
    form = _require(pot, "form", "potential")
    coeffs = pot.get("coefficients", {})
    if form == "zero":
        return Potential.zero(dim)
    if form == "linear":
        c = np.asarray(_require(coeffs, "c", "potential.coefficients"), dtype=float)
        if c.shape != (dim,):
            raise ConfigError("potential.coefficients.c: needs one entry per axis")
        return Potential.linear(c)
    if form == "harmonic":
        omega = _require(coeffs, "omega", "potential.coefficients")
        return Potential.harmonic(float(omega), mass=mass, dim=dim)
    if form == "quartic":
        lam = _require(coeffs, "lambda", "potential.coefficients")
        return Potential.quartic(float(lam), dim=dim)
    if form == "polynomial":
        terms = _require(coeffs, "terms", "potential.coefficients")
        return Potential.polynomial(
            [( _require(t, "powers", "potential.coefficients.terms"),
               _require(t, "c", "potential.coefficients.terms")) for t in terms],
            dim,
        )
    if form == "gaussian_well":
        depth = _require(coeffs, "depth", "potential.coefficients")
        width = _require(coeffs, "width", "potential.coefficients")
        return Potential.gaussian_well(float(depth), float(width), dim=dim)
    raise ConfigError(f"potential.form: unknown form {form!r}")


def load_config(source) -> RunConfig:
    """Build a RunConfig from a JSON file path, JSON text, or a dict.

    Validation failures always name the offending key.
    """
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        stripped = text.lstrip()
        if not stripped.startswith("{"):
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"config: cannot read {source!r} ({exc})") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")

    dim = int(_require(data, "dim"))
    hbar = float(data.get("hbar", 1.0))
    mass = float(data.get("mass", 1.0))
    params = PhysicsParams(hbar=hbar, mass=mass, dim=dim)

    theta_entries = np.asarray(_require(data, "theta"), dtype=float)
    if theta_entries.shape != (dim, dim):
        raise ConfigError("theta: must be an NxN array matching dim")
    theta = ThetaMatrix(theta_entries)

    grid_cfg = _require(data, "grid")
    grid = PhaseSpaceGrid(
        int(_require(grid_cfg, "points_per_axis", "grid")),
        float(_require(grid_cfg, "box_half_width", "grid")),
        dim,
        hbar=hbar,
    )

    potential = _potential_from_config(_require(data, "potential"), dim, mass)

    probe_cfg = data.get("probe", {})
    center = tuple(float(v) for v in probe_cfg.get("center", (0.0,) * dim))
    momentum = tuple(float(v) for v in probe_cfg.get("momentum", (0.0,) * dim))
    if len(center) != dim:
        raise ConfigError("probe.center: needs one entry per axis")
    if len(momentum) != dim:
        raise ConfigError("probe.momentum: needs one entry per axis")
    width = probe_cfg.get("width")
    probe = ProbeSpec(center=center, width=None if width is None else float(width),
                      momentum=momentum)

    return RunConfig(params=params, theta=theta, grid=grid, potential=potential,
                     probe=probe, raw=data)
