"""Cloning of a coherent signal onto the bright and dark polariton modes.

The register is ``(psi, c, phi)``: optical signal, amplifier ancilla and the
collective matter excitation. The signal passes a phase-insensitive
amplifier with the ancilla and is then mixed with the matter mode by the
Hopfield rotation; the bright clone leaves in slot ``psi`` and the dark clone
in slot ``phi``.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import gaussian_engine as ge
from . import kernels
from .errors import InvalidArgumentError, UnsupportedConfigurationError
from .polariton_model import HopfieldPair, hopfield

PSI, ANCILLA, MATTER = 0, 1, 2
N_REGISTER = 3

GAIN_TOL = 1e-9
CLAMP_TOL = 1e-12
SWEEP_AXES = ("delta", "alpha2", "phi", "N", "gain", "V_in")
DEFAULT_SWEEP_CAP = 1_000_000

FLAG_GAIN = "gain_uncorrected_fidelity"
FLAG_CLAMP = "covqp_clamped"
FLAG_CLIPPED = "fidelity_clipped"
FLAG_QUOTED = "quoted_F0.8_not_reproduced"

SYMMETRIC = HopfieldPair(math.sqrt(0.5), math.sqrt(0.5), 0.0)


@dataclass(frozen=True)
class SpinEnsemble:
    """``N`` two-level atoms in the product state ``alpha|a> + beta|b>``."""

    N: int
    alpha: complex = 1.0
    beta: complex = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InvalidArgumentError(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > 1e-12:
            raise InvalidArgumentError("|alpha|^2 + |beta|^2 must equal 1")

    @classmethod
    def from_populations(cls, N, alpha2, phi_rel=0.0):
        """Ensemble with ``|alpha|^2 = alpha2`` and relative phase ``phi_rel``."""
        if not 0.0 <= alpha2 <= 1.0:
            raise InvalidArgumentError(f"alpha2 must lie in [0, 1], got {alpha2}")
        return cls(N, math.sqrt(alpha2) * complex(math.cos(phi_rel), math.sin(phi_rel)),
                   math.sqrt(1.0 - alpha2))

    @property
    def phi_rel(self):
        """``arg(alpha) - arg(beta)``."""
        return math.atan2(self.alpha.imag, self.alpha.real) - math.atan2(self.beta.imag, self.beta.real)

    @property
    def alpha2(self):
        return abs(self.alpha) ** 2

    @property
    def beta2(self):
        return abs(self.beta) ** 2

    @property
    def commutator(self):
        """``<[phi, phi^dag]> = |alpha|^2 - |beta|^2`` for the collective excitation (1 if empty)."""
        return 1.0 if self.N == 0 else self.alpha2 - self.beta2


VACUUM_ENSEMBLE = SpinEnsemble(0, 1.0, 0.0)


class SpinModeMoments(NamedTuple):
    meanQ: float
    meanP: float
    varQ: float
    varP: float
    covQP: float


def _spin_moment_arrays(N, abs_a, abs_b, phi, convention):
    """Vectorised collective-excitation moments; returns the five moments and the clamp mask."""
    # no atoms: the matter mode is the vacuum whatever the level weights
    empty = np.asarray(N) == 0
    # |a|^2 |b|^2 <= 1/4; rounding at equal populations can overshoot it
    x = np.where(empty, 0.0, np.minimum((abs_a * abs_b) ** 2, 0.25))
    c, s = np.cos(phi), np.sin(phi)
    amp = 2.0 * np.sqrt(N) * abs_a * abs_b
    meanQ = amp * c
    meanP = amp * s
    varQ = 1.0 - 4.0 * x * c * c
    varP = 1.0 - 4.0 * x * s * s
    cov = -4.0 * x * s * c
    if convention == "operator":
        meanP, cov = -meanP, -cov
    elif convention != "formula":
        raise InvalidArgumentError(f"convention must be 'formula' or 'operator', got {convention!r}")
    comm = np.where(empty, 1.0, abs_a ** 2 - abs_b ** 2)
    allowed = np.maximum(varQ * varP - comm * comm, 0.0)
    clamp = cov * cov > allowed + CLAMP_TOL
    cov = np.where(cov * cov > allowed, np.copysign(np.sqrt(allowed), cov), cov)
    return meanQ, meanP, varQ, varP, cov, clamp


def _spin_moments(ensemble, convention):
    out = _spin_moment_arrays(
        float(ensemble.N), abs(ensemble.alpha), abs(ensemble.beta), ensemble.phi_rel, convention
    )
    return SpinModeMoments(*(float(v) for v in out[:5])), bool(out[5])


def spin_mode_moments(ensemble, convention="formula"):
    """Quadrature moments of the collective matter excitation.

    ``meanQ = 2 sqrt(N)|a||b| cos(phi)``, ``varQ = 1 - 4|a|^2|b|^2 cos^2(phi)``
    and the ``P`` analogues with ``sin``; ``covQP`` is the coherent-spin-state
    value, clamped onto the uncertainty boundary if rounding pushes it past.

    With ``convention="formula"`` the phase enters as in the mean-shift law
    ``<Q_out> = <Q_in> -/+ sqrt(2N)|a||b| cos(phi)`` (same sign for ``P``).
    The operator ``phi = a^dag b / sqrt(N)`` evaluated on the state gives
    ``meanP`` and ``covQP`` with the opposite sign; ``convention="operator"``
    returns those values.
    """
    return _spin_moments(ensemble, convention)[0]


@dataclass(frozen=True)
class CloneStats:
    name: str
    meanQ: float
    meanP: float
    varQ: float
    varP: float
    covQP: float
    signal_gain: float
    fidelity: float
    flags: tuple = ()

    def to_dict(self):
        return {
            "meanQ": self.meanQ,
            "meanP": self.meanP,
            "varQ": self.varQ,
            "varP": self.varP,
            "covQP": self.covQP,
            "gain_signal": self.signal_gain,
            "fidelity": self.fidelity,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class CloneReport:
    bright: CloneStats
    dark: CloneStats
    gain: float
    mu: float
    nu: float
    ensemble: SpinEnsemble
    gamma: complex
    V_in: float
    state: ge.GaussianState
    delta: float = 0.0
    flags: tuple = ()
    notes: tuple = ()

    @property
    def clones(self):
        return (self.bright, self.dark)

    @property
    def fidelity(self):
        """Worst-clone fidelity."""
        return min(self.bright.fidelity, self.dark.fidelity)

    def to_dict(self):
        return {
            "parameters": {
                "gamma_re": self.gamma.real,
                "gamma_im": self.gamma.imag,
                "V_in": self.V_in,
                "gain": self.gain,
                "delta": self.delta,
                "mu": self.mu,
                "nu": self.nu,
                "N": self.ensemble.N,
                "alpha2": self.ensemble.alpha2,
                "phi_rel": self.ensemble.phi_rel,
            },
            "clones": {"bright": self.bright.to_dict(), "dark": self.dark.to_dict()},
            "fidelity": self.fidelity,
            "flags": list(self.flags),
            "notes": list(self.notes),
            "state": self.state.to_dict(),
        }


def fidelity(varQ_out, varP_out):
    """Coherent-state cloning fidelity ``2 / sqrt((1 + V_Q)(1 + V_P))``.

    Valid for unit signal gain; callers flag other gains.
    """
    if varQ_out < 0 or varP_out < 0:
        raise InvalidArgumentError("variances must be non-negative")
    return 2.0 / math.sqrt((1.0 + varQ_out) * (1.0 + varP_out))


def _clone_fidelity(varQ, varP, signal_gain):
    flags = []
    F = fidelity(varQ, varP)
    if F > 1.0:
        F = 1.0
        flags.append(FLAG_CLIPPED)
    if abs(signal_gain - 1.0) > GAIN_TOL:
        flags.append(FLAG_GAIN)
    return F, tuple(flags)


def _quoted_value_note(ensemble, V_in, gain, mu, nu, F):
    if (
        abs(ensemble.alpha2 - 0.5) < 1e-9
        and abs(math.sin(ensemble.phi_rel) ** 2 - 0.5) < 1e-9
        and abs(V_in - 1.0) < 1e-12
        and abs(gain - 2.0) < 1e-12
        and abs(mu - nu) < 1e-12
    ):
        return (
            f"{FLAG_QUOTED}: |alpha|^2=|beta|^2=1/2, phi=pi/4 gives V_Q=V_P=1.75 and "
            f"F={F:.12f} (8/11), not the previously reported F=0.8"
        )
    return None


def build_register(gamma, V_in, ensemble, convention="formula"):
    """Input state of the register and whether the matter covariance was clamped."""
    if V_in < 1:
        raise InvalidArgumentError(f"V_in must be >= 1, got {V_in}")
    gamma = complex(gamma)
    state = ge.vacuum_state(N_REGISTER)
    state = ge.set_mode_moments(state, PSI, 2 * gamma.real, 2 * gamma.imag, V_in, V_in, 0.0)
    moments, clamped = _spin_moments(ensemble, convention)
    state = ge.set_mode_moments(state, MATTER, *moments, commutator=ensemble.commutator)
    return state, clamped


def cloning_map(gain, mu, nu):
    """Amplifier on ``(psi, c)`` followed by the Hopfield rotation on ``(psi, phi)``."""
    return ge.compose(
        ge.amplifier_map(gain, PSI, ANCILLA, N_REGISTER),
        ge.mixer_map(mu, nu, PSI, MATTER, N_REGISTER),
    )


def run_cloning(gamma=1.0, V_in=1.0, ensemble=VACUUM_ENSEMBLE, gain=2.0,
                hopfield_pair=SYMMETRIC, literal_sign=False, convention="formula"):
    """Full cloning pipeline on the Gaussian engine.

    ``literal_sign`` mixes with the negative-sign ``nu`` of the Hopfield
    closed form instead of the positive one.
    """
    if gain < 1:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    mu, nu = hopfield_pair.coefficients(signed=literal_sign)
    state, clamped = build_register(gamma, V_in, ensemble, convention)
    bmap = cloning_map(gain, mu, nu)
    out = ge.apply_map(state, bmap)
    S = bmap.quadrature_matrix()
    clones = []
    for name, mode in (("bright", PSI), ("dark", MATTER)):
        st = ge.quadrature_stats(out, mode)
        g_sig = float(S[2 * mode, 2 * PSI])
        F, flags = _clone_fidelity(st.varQ, st.varP, g_sig)
        clones.append(CloneStats(name, *st, ge.quadrature_covariance(out, mode), g_sig, F, flags))
    flags = [FLAG_CLAMP] if clamped else []
    notes = []
    note = _quoted_value_note(ensemble, V_in, gain, mu, nu, min(c.fidelity for c in clones))
    if note:
        flags.append(FLAG_QUOTED)
        notes.append(note)
    return CloneReport(
        clones[0], clones[1], float(gain), mu, nu, ensemble, complex(gamma), float(V_in), out,
        delta=float(hopfield_pair.delta), flags=tuple(flags), notes=tuple(notes),
    )


def asymmetric_clone(delta, g, gamma=1.0, ensemble=VACUUM_ENSEMBLE, gain=2.0, V_in=1.0):
    """Cloning with Hopfield weights set by the detuning ``delta``."""
    return run_cloning(gamma, V_in, ensemble, gain, hopfield(delta, g))


class ReadoutSchedule(NamedTuple):
    t: float
    mu_t: float
    nu_t: float


class ReadoutResult(NamedTuple):
    schedule: ReadoutSchedule
    optical: ge.QuadratureStats
    matter: ge.QuadratureStats
    optical_covQP: float


def readout_schedule(t, g, hbar=1.0):
    """Resonant exchange weights ``(cos(g t / hbar), sin(g t / hbar))``."""
    if not g > 0:
        raise InvalidArgumentError(f"g must be > 0, got {g}")
    theta = g * t / hbar
    return ReadoutSchedule(float(t), math.cos(theta), math.sin(theta))


def tensor(first, second):
    """Uncorrelated joint state of two Gaussian registers."""
    n1, n2 = first.means.size, second.means.size
    cov = np.zeros((n1 + n2, n1 + n2))
    form = np.zeros_like(cov)
    cov[:n1, :n1], cov[n1:, n1:] = first.cov, second.cov
    form[:n1, :n1], form[n1:, n1:] = first.form, second.form
    return ge.GaussianState(np.concatenate([first.means, second.means]), cov, form)


def readout(t, report, delta=0.0, g=1.0, hbar=1.0, optical_input=None):
    """Retrieve the stored dark clone into a fresh optical mode.

    The optical mode evolves as ``psi(t) = mu(t) psi + nu(t) Phi_phi`` with
    ``mu = cos(g t/hbar)``, ``nu = sin(g t/hbar)``; at ``g t/hbar = pi/2`` it
    carries the dark clone's statistics.
    """
    if delta != 0:
        raise UnsupportedConfigurationError("closed-form readout requires delta = 0")
    sched = readout_schedule(t, g, hbar)
    optical_input = ge.vacuum_state(1) if optical_input is None else optical_input
    state = tensor(report.state, optical_input)
    optical = report.state.n_modes
    n = state.n_modes
    # mixer_map(m, -n) gives a -> m a + n b, b -> m b - n a
    bmap = ge.mixer_map(sched.mu_t, -sched.nu_t, optical, MATTER, n)
    out = ge.apply_map(state, bmap)
    return ReadoutResult(
        sched,
        ge.quadrature_stats(out, optical),
        ge.quadrature_stats(out, MATTER),
        ge.quadrature_covariance(out, optical),
    )


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class SweepTable:
    """Columnar sweep result: two rows (bright, dark) per grid point."""

    columns: dict = field(repr=False)

    HEADER = ("delta", "alpha2", "phi", "N", "gain", "Vin", "clone",
              "meanQ", "meanP", "varQ", "varP", "gain_signal", "fidelity", "flags")

    def __len__(self):
        return len(self.columns["clone"])

    def rows(self):
        cols = [self.columns[h] for h in self.HEADER]
        for i in range(len(self)):
            yield tuple(c[i] for c in cols)

    def column(self, name):
        return self.columns[name]


def _axis_values(grid, name, default):
    vals = grid.get(name, [default])
    vals = [float(v) for v in np.atleast_1d(vals)]
    if not vals:
        raise InvalidArgumentError(f"sweep axis {name!r} is empty")
    return vals


def sweep(grid, gamma=1.0, g=1.0, cap=DEFAULT_SWEEP_CAP, defaults=None,
          convention="formula", literal_sign=False):
    """Evaluate the pipeline on the Cartesian product of the axes in ``grid``.

    Axes are ``delta, alpha2, phi, N, gain, V_in``; rows come out in
    lexicographic order of that axis sequence, bright before dark. Axes
    missing from ``grid`` take their value from ``defaults``. Each row
    equals the matching :func:`run_cloning` result.
    """
    unknown = set(grid) - set(SWEEP_AXES)
    if unknown:
        raise InvalidArgumentError(f"unknown sweep axes: {sorted(unknown)}")
    base = {"delta": 0.0, "alpha2": 1.0, "phi": 0.0, "N": 0, "gain": 2.0, "V_in": 1.0}
    base.update(defaults or {})
    axes = [_axis_values(grid, a, base[a]) for a in SWEEP_AXES]
    total = math.prod(len(a) for a in axes)
    if total > cap:
        raise InvalidArgumentError(f"sweep has {total} points, above the cap of {cap}")
    for v in axes[1]:
        if not 0.0 <= v <= 1.0:
            raise InvalidArgumentError(f"alpha2 must lie in [0, 1], got {v}")
    for v in axes[3]:
        if v < 0 or v != int(v):
            raise InvalidArgumentError(f"N must be a non-negative integer, got {v}")
    for v in axes[4]:
        if v < 1:
            raise InvalidArgumentError(f"gain must be >= 1, got {v}")
    for v in axes[5]:
        if v < 1:
            raise InvalidArgumentError(f"V_in must be >= 1, got {v}")

    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(total, len(SWEEP_AXES))
    delta, alpha2, phi, N, gain, V_in = pts.T
    pairs = {d: hopfield(d, g) for d in axes[0]}
    mu = np.array([pairs[d].mu for d in delta])
    nu = np.array([pairs[d].coefficients(signed=literal_sign)[1] for d in delta])

    abs_a = np.sqrt(alpha2)
    abs_b = np.sqrt(1.0 - alpha2)
    fQ, fP, fVQ, fVP, fC, clamp = _spin_moment_arrays(N, abs_a, abs_b, phi, convention)

    gamma = complex(gamma)
    means = np.zeros((total, 6))
    means[:, 0] = 2 * gamma.real
    means[:, 1] = 2 * gamma.imag
    means[:, 4], means[:, 5] = fQ, fP
    cov = np.zeros((total, 6, 6))
    cov[:, 0, 0] = cov[:, 1, 1] = V_in
    cov[:, 2, 2] = cov[:, 3, 3] = 1.0
    cov[:, 4, 4], cov[:, 5, 5] = fVQ, fVP
    cov[:, 4, 5] = cov[:, 5, 4] = fC

    S = _cloning_quadrature_batch(gain, mu, nu)
    out_m, out_c = kernels.congruence_batch(S, means, cov)

    rows = {h: [] for h in SweepTable.HEADER}
    for i in range(total):
        for name, mode in (("bright", PSI), ("dark", MATTER)):
            q = 2 * mode
            vQ, vP = float(out_c[i, q, q]), float(out_c[i, q + 1, q + 1])
            g_sig = float(S[i, q, 0])
            F, flags = _clone_fidelity(vQ, vP, g_sig)
            if clamp[i]:
                flags = flags + (FLAG_CLAMP,)
            rows["delta"].append(delta[i])
            rows["alpha2"].append(alpha2[i])
            rows["phi"].append(phi[i])
            rows["N"].append(int(N[i]))
            rows["gain"].append(gain[i])
            rows["Vin"].append(V_in[i])
            rows["clone"].append(name)
            rows["meanQ"].append(float(out_m[i, q]))
            rows["meanP"].append(float(out_m[i, q + 1]))
            rows["varQ"].append(vQ)
            rows["varP"].append(vP)
            rows["gain_signal"].append(g_sig)
            rows["fidelity"].append(F)
            rows["flags"].append(";".join(flags))
    return SweepTable(rows)


def _cloning_quadrature_batch(gain, mu, nu):
    """Stack of quadrature matrices of :func:`cloning_map`, one per point."""
    n = len(gain)
    s, t = np.sqrt(gain), np.sqrt(gain - 1.0)
    A1 = np.tile(np.eye(N_REGISTER), (n, 1, 1))
    B1 = np.zeros((n, N_REGISTER, N_REGISTER))
    A1[:, PSI, PSI] = A1[:, ANCILLA, ANCILLA] = s
    B1[:, PSI, ANCILLA] = B1[:, ANCILLA, PSI] = t
    A2 = np.tile(np.eye(N_REGISTER), (n, 1, 1))
    A2[:, PSI, PSI] = A2[:, MATTER, MATTER] = mu
    A2[:, PSI, MATTER] = -nu
    A2[:, MATTER, PSI] = nu
    return ge.quadrature_matrix(A2, np.zeros_like(A2)) @ ge.quadrature_matrix(A1, B1)
