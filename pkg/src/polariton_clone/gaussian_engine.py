"""Moment-level representation of multimode bosonic states.

Quadratures are ``Q = a + a^dag`` and ``P = i(a^dag - a)``, so the vacuum has
unit variance in both and ``[Q, P] = 2i``. Vectors are ordered
``(Q_1, P_1, ..., Q_M, P_M)`` and ``cov`` holds the symmetrised second
moments ``<{dR_i, dR_j}>/2``.

Besides ``means`` and ``cov`` a state carries ``form``, the matrix ``K`` of
commutator expectations ``<[R_i, R_j]> = 2i K_ij``. For genuine bosonic
modes ``K`` is the standard symplectic form; a collective spin excitation
injected with :func:`set_mode_moments` has a reduced commutator, and linear
maps carry it along as ``S K S^T``. The uncertainty bound is then
``cov + iK >= 0``.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9
MAP_TOL = 1e-12


def symplectic_form(n_modes):
    """Standard antisymmetric form in interleaved ``(Q, P)`` ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianState:
    means: np.ndarray
    cov: np.ndarray
    form: np.ndarray = field(default=None)

    def __post_init__(self):
        means = _frozen(self.means, np.float64)
        cov = _frozen(self.cov, np.float64)
        if means.ndim != 1 or means.size == 0 or means.size % 2:
            raise InvalidArgumentError("means must be a non-empty vector of length 2*n_modes")
        n2 = means.size
        if cov.shape != (n2, n2):
            raise InvalidArgumentError(f"cov must be {n2}x{n2}, got {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise InvalidArgumentError("cov is not symmetric")
        form = symplectic_form(n2 // 2) if self.form is None else self.form
        form = _frozen(form, np.float64)
        if form.shape != (n2, n2):
            raise InvalidArgumentError("form has the wrong shape")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "form", form)

    @property
    def n_modes(self):
        return self.means.size // 2

    def uncertainty_min_eigenvalue(self):
        """Smallest eigenvalue of ``cov + i*form`` (non-negative when physical)."""
        return float(np.linalg.eigvalsh(self.cov + 1j * self.form).min())

    def satisfies_uncertainty(self, tol=UNCERTAINTY_TOL):
        scale = max(1.0, float(np.abs(self.cov).max()))
        return self.uncertainty_min_eigenvalue() >= -tol * scale

    def has_standard_form(self):
        return bool(np.array_equal(self.form, symplectic_form(self.n_modes)))

    def to_dict(self):
        out = {
            "n_modes": self.n_modes,
            "means": self.means.tolist(),
            "cov": self.cov.tolist(),
        }
        if not self.has_standard_form():
            out["form"] = self.form.tolist()
        return out


@dataclass(frozen=True)
class BogoliubovMap:
    """Linear mode map ``a_out_i = sum_j A_ij a_j + B_ij a_j^dag``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = _frozen(self.A, np.complex128)
        B = _frozen(self.B, np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise InvalidArgumentError("A and B must be square matrices of equal size")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        comm, sym = self.invariant_residuals()
        scale = max(1.0, float(np.abs(A).max()) ** 2, float(np.abs(B).max()) ** 2)
        if comm > MAP_TOL * scale or sym > MAP_TOL * scale:
            raise InvalidArgumentError(
                f"map does not preserve commutators (residuals {comm:.3g}, {sym:.3g})"
            )

    @property
    def n_modes(self):
        return self.A.shape[0]

    def invariant_residuals(self):
        """Max-abs residuals of ``AA^dag - BB^dag = I`` and ``AB^T`` symmetric."""
        A, B = self.A, self.B
        comm = A @ A.conj().T - B @ B.conj().T - np.eye(A.shape[0])
        abt = A @ B.T
        return float(np.abs(comm).max()), float(np.abs(abt - abt.T).max())

    def quadrature_matrix(self):
        return quadrature_matrix(self.A, self.B)

    def is_passive(self):
        return not np.any(self.B)


def quadrature_matrix(A, B):
    """Real ``2M x 2M`` matrix acting on ``(Q_1, P_1, ...)`` for the map ``(A, B)``.

    Leading batch dimensions are supported.
    """
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    plus, minus = A + B, A - B
    m = A.shape[-1]
    S = np.empty(A.shape[:-2] + (2 * m, 2 * m))
    S[..., 0::2, 0::2] = plus.real
    S[..., 0::2, 1::2] = -minus.imag
    S[..., 1::2, 0::2] = plus.imag
    S[..., 1::2, 1::2] = minus.real
    return S


def compose(first, second):
    """Map equivalent to applying ``first`` and then ``second``."""
    if first.n_modes != second.n_modes:
        raise InvalidArgumentError("maps act on different numbers of modes")
    A1, B1, A2, B2 = first.A, first.B, second.A, second.B
    return BogoliubovMap(A2 @ A1 + B2 @ B1.conj(), A2 @ B1 + B2 @ A1.conj())


def _check_mode(n_modes, mode, name="mode"):
    if not 0 <= mode < n_modes:
        raise InvalidArgumentError(f"{name} {mode} out of range for {n_modes} modes")


def vacuum_state(n_modes):
    if n_modes < 1:
        raise InvalidArgumentError("n_modes must be >= 1")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def displace(state, mode, gamma):
    """Coherent displacement ``a -> a + gamma`` of one mode."""
    _check_mode(state.n_modes, mode)
    gamma = complex(gamma)
    means = state.means.copy()
    means[2 * mode] += 2.0 * gamma.real
    means[2 * mode + 1] += 2.0 * gamma.imag
    return GaussianState(means, state.cov, state.form)


def identity_map(n_modes):
    return BogoliubovMap(np.eye(n_modes), np.zeros((n_modes, n_modes)))


def amplifier_map(gain, signal, ancilla, n_modes):
    """Phase-insensitive amplifier of intensity gain ``gain`` on ``signal``.

    ``a_s -> sqrt(G) a_s + sqrt(G-1) a_c^dag`` and symmetrically for the
    ancilla ``c``; other modes pass unchanged.
    """
    if gain < 1:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    if signal == ancilla:
        raise InvalidArgumentError("signal and ancilla must be different modes")
    _check_mode(n_modes, signal, "signal")
    _check_mode(n_modes, ancilla, "ancilla")
    A = np.eye(n_modes)
    B = np.zeros((n_modes, n_modes))
    s, t = np.sqrt(gain), np.sqrt(gain - 1.0)
    A[signal, signal] = A[ancilla, ancilla] = s
    B[signal, ancilla] = B[ancilla, signal] = t
    return BogoliubovMap(A, B)


def mixer_map(mu, nu, mode_a, mode_b, n_modes):
    """Passive two-mode rotation ``a -> mu a - nu b``, ``b -> mu b + nu a``."""
    if abs(mu * mu + nu * nu - 1.0) > 1e-9:
        raise InvalidArgumentError(f"mu^2 + nu^2 must equal 1, got {mu * mu + nu * nu!r}")
    if mode_a == mode_b:
        raise InvalidArgumentError("mixer needs two different modes")
    _check_mode(n_modes, mode_a, "mode_a")
    _check_mode(n_modes, mode_b, "mode_b")
    A = np.eye(n_modes)
    A[mode_a, mode_a] = A[mode_b, mode_b] = mu
    A[mode_a, mode_b] = -nu
    A[mode_b, mode_a] = nu
    return BogoliubovMap(A, np.zeros((n_modes, n_modes)))


def apply_map(state, bmap):
    if state.n_modes != bmap.n_modes:
        raise InvalidArgumentError(
            f"map acts on {bmap.n_modes} modes but the state has {state.n_modes}"
        )
    S = bmap.quadrature_matrix()
    cov = S @ state.cov @ S.T
    cov = 0.5 * (cov + cov.T)
    form = S @ state.form @ S.T
    form = 0.5 * (form - form.T)
    return GaussianState(S @ state.means, cov, form)


def set_mode_moments(state, mode, meanQ, meanP, varQ, varP, covQP, commutator=1.0):
    """Replace one mode's moments and decorrelate it from the rest.

    ``commutator`` is ``<[a, a^dag]>`` for the injected mode (1 for a boson).
    The mode must satisfy ``varQ*varP - covQP^2 >= commutator^2``.
    """
    _check_mode(state.n_modes, mode)
    det = varQ * varP - covQP * covQP
    if varQ < 0 or varP < 0 or det < commutator * commutator - 1e-6:
        raise InvalidArgumentError(
            f"moments violate the uncertainty bound: varQ*varP - covQP^2 = {det:.6g} "
            f"< {commutator * commutator:.6g}"
        )
    i = 2 * mode
    means = state.means.copy()
    cov = state.cov.copy()
    form = state.form.copy()
    means[i : i + 2] = (meanQ, meanP)
    cov[i : i + 2, :] = 0.0
    cov[:, i : i + 2] = 0.0
    cov[i : i + 2, i : i + 2] = [[varQ, covQP], [covQP, varP]]
    form[i : i + 2, :] = 0.0
    form[:, i : i + 2] = 0.0
    form[i, i + 1] = commutator
    form[i + 1, i] = -commutator
    return GaussianState(means, cov, form)


class QuadratureStats(NamedTuple):
    meanQ: float
    meanP: float
    varQ: float
    varP: float


def quadrature_stats(state, mode):
    _check_mode(state.n_modes, mode)
    i = 2 * mode
    m, c = state.means, state.cov
    return QuadratureStats(float(m[i]), float(m[i + 1]), float(c[i, i]), float(c[i + 1, i + 1]))


def quadrature_covariance(state, mode):
    """Symmetrised ``Q-P`` covariance of one mode."""
    _check_mode(state.n_modes, mode)
    return float(state.cov[2 * mode, 2 * mode + 1])
