"""Cavity-polariton closed forms: photon dispersion, Hopfield weights, branches.

Natural units by default (``hbar = c = 1``, energies in units of the
coupling ``g``); every constant can be overridden.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError

PARAXIAL_LIMIT = 0.3


class ParaxialWarning(UserWarning):
    """Paraxial photon energy requested outside ``k_par <= 0.3 k_perp``."""


@dataclass(frozen=True)
class CavityParams:
    E_at: float = 10.0
    g: float = 1.0
    L_cav: float = math.pi / 10.0
    m: int = 1
    hbar_c: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise InvalidArgumentError(f"g must be > 0, got {self.g}")
        if not self.L_cav > 0:
            raise InvalidArgumentError(f"L_cav must be > 0, got {self.L_cav}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError(f"m must be a positive integer, got {self.m}")
        if not self.hbar_c > 0:
            raise InvalidArgumentError(f"hbar_c must be > 0, got {self.hbar_c}")

    @classmethod
    def resonant(cls, E_at, g=1.0, m=1, hbar_c=1.0):
        """Cavity whose ``k_par = 0`` photon is resonant with the transition."""
        return cls(E_at=E_at, g=g, L_cav=resonant_length(E_at, m, hbar_c), m=m, hbar_c=hbar_c)


@dataclass(frozen=True)
class HopfieldPair:
    """Photon/matter weights of the polariton modes.

    ``nu`` is stored with positive sign. The closed form carries a leading
    minus sign on ``nu``; :attr:`nu_signed` returns that value.
    """

    mu: float
    nu: float
    delta: float

    def __post_init__(self):
        if self.mu < 0:
            raise InvalidArgumentError("mu must be non-negative")
        if abs(self.mu ** 2 + self.nu ** 2 - 1.0) > 1e-12:
            raise InvalidArgumentError("mu^2 + nu^2 must equal 1")

    @property
    def nu_signed(self):
        return -self.nu

    @property
    def nu_sign(self):
        return -1

    def coefficients(self, signed=False):
        return self.mu, (self.nu_signed if signed else self.nu)


class DispersionPoint(NamedTuple):
    k_par: float
    E_ph: float
    E_upper: float
    E_lower: float
    delta: float
    mu2: float


def resonant_length(E_at, m=1, hbar_c=1.0):
    """Cavity length with ``k_perp = E_at / hbar_c`` for mode number ``m``."""
    if not E_at > 0:
        raise InvalidArgumentError("E_at must be > 0 for a resonant cavity")
    return math.pi * m * hbar_c / E_at


def k_perp(params):
    return math.pi * params.m / params.L_cav


def photon_energy(k_par, params, mode="exact"):
    """Cavity photon energy at in-plane wave number ``k_par``.

    ``mode="paraxial"`` uses the quadratic expansion and warns with
    :class:`ParaxialWarning` above ``k_par = 0.3 k_perp``.
    """
    if k_par < 0:
        raise InvalidArgumentError("k_par must be >= 0")
    kp = k_perp(params)
    if mode == "exact":
        return params.hbar_c * math.hypot(kp, k_par)
    if mode == "paraxial":
        if k_par > PARAXIAL_LIMIT * kp:
            warnings.warn(
                f"k_par = {k_par:.4g} exceeds {PARAXIAL_LIMIT} k_perp; paraxial form inaccurate",
                ParaxialWarning,
                stacklevel=2,
            )
        return params.hbar_c * (kp + k_par * k_par / (2.0 * kp))
    raise InvalidArgumentError(f"mode must be 'exact' or 'paraxial', got {mode!r}")


def hopfield(delta, g):
    """Hopfield weights for detuning ``delta = E_at - E_ph`` and coupling ``g``.

    ``mu^2 = (R - delta) / 2R`` and ``nu^2 = (R + delta) / 2R`` with
    ``R = sqrt(delta^2 + 4 g^2)``; each is evaluated in the branch that
    avoids cancellation.
    """
    if not g > 0:
        raise InvalidArgumentError(f"g must be > 0, got {g}")
    delta = float(delta)
    R = math.hypot(delta, 2.0 * g)
    four_g2 = 4.0 * g * g
    if delta >= 0:
        mu2 = four_g2 / (2.0 * R * (R + delta))
        nu2 = (R + delta) / (2.0 * R)
    else:
        mu2 = (R - delta) / (2.0 * R)
        nu2 = four_g2 / (2.0 * R * (R - delta))
    return HopfieldPair(math.sqrt(mu2), math.sqrt(nu2), delta)


def branch_energies(k_par, params, mode="exact"):
    """Upper and lower polariton energies ``(E_psi, E_phi)``."""
    return _branches(params.E_at, photon_energy(k_par, params, mode), params.g)


def _branches(E_at, E_ph, g):
    s = E_at + E_ph
    root = math.hypot(E_at - E_ph, 2.0 * g)
    return 0.5 * (s + root), 0.5 * (s - root)


def dispersion_curve(k_par_max, n_points, params, mode="exact"):
    if n_points < 2:
        raise InvalidArgumentError(f"n_points must be >= 2, got {n_points}")
    if k_par_max < 0:
        raise InvalidArgumentError("k_par_max must be >= 0")
    points = []
    for k in np.linspace(0.0, k_par_max, int(n_points)):
        k = float(k)
        E_ph = photon_energy(k, params, mode)
        E_up, E_lo = _branches(params.E_at, E_ph, params.g)
        delta = params.E_at - E_ph
        points.append(DispersionPoint(k, E_ph, E_up, E_lo, delta, hopfield(delta, params.g).mu ** 2))
    return points


def coupling_matrix(E_ph, E_at, g):
    """Single-mode quadratic form of the photon/excitation Hamiltonian."""
    return np.array([[E_ph, g], [g, E_at]], dtype=float)


def cooperative_frequency(d, omega0, n_density, hbar=1.0):
    """Collective coupling rate ``sqrt(2 pi d^2 omega0 n / hbar)``; units are the caller's."""
    for name, val in (("d", d), ("omega0", omega0), ("n_density", n_density), ("hbar", hbar)):
        if not val > 0:
            raise InvalidArgumentError(f"{name} must be > 0, got {val}")
    return math.sqrt(2.0 * math.pi * d * d * omega0 * n_density / hbar)


class StrongCoupling(NamedTuple):
    strong: bool
    ratio: float


def strong_coupling_check(omega_c, tau_coh, factor=10.0):
    """Strong coupling holds when ``omega_c * tau_coh >= factor`` (inclusive)."""
    if not tau_coh > 0:
        raise InvalidArgumentError(f"tau_coh must be > 0, got {tau_coh}")
    ratio = omega_c * tau_coh
    return StrongCoupling(ratio >= factor, ratio)
