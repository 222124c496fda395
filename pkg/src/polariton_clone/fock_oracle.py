"""Brute-force truncated Fock-space ground truth.

States are dense amplitude vectors on a product of truncated single-mode
spaces. Operators are kept as dense matrices on the modes they touch
(``OperatorMatrix``) and applied by tensor contraction, so that spaces far
too large for a full dense matrix remain usable.

Unitaries are exponentials of anti-Hermitian generators, evaluated block by
block over the sectors of the quantity the generator conserves.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.stats import poisson

from . import kernels
from .errors import InvalidArgumentError

DEFAULT_CAP = 2_000_000
DENSE_LIMIT = 4096
COHERENT_TAIL_TOL = 1e-10
MASS_TOL = 1e-8


class FockSpace:
    def __init__(self, cutoffs, labels=None, cap=DEFAULT_CAP):
        cutoffs = tuple(int(d) for d in cutoffs)
        if not cutoffs:
            raise InvalidArgumentError("a Fock space needs at least one mode")
        if min(cutoffs) < 2:
            raise InvalidArgumentError(f"every cutoff must be >= 2, got {cutoffs}")
        total = math.prod(cutoffs)
        if total > cap:
            raise InvalidArgumentError(
                f"Fock space {cutoffs} needs {total} amplitudes, above the cap of {cap}"
            )
        self.cutoffs = cutoffs
        self.total_dim = total
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(cutoffs)))
        if len(self.labels) != len(cutoffs):
            raise InvalidArgumentError("one label per mode is required")

    def __repr__(self):
        return f"FockSpace(cutoffs={self.cutoffs}, labels={self.labels})"

    @property
    def n_modes(self):
        return len(self.cutoffs)

    def mode(self, key):
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise InvalidArgumentError(f"no mode labelled {key!r}") from None
        if not 0 <= key < self.n_modes:
            raise InvalidArgumentError(f"mode {key} out of range")
        return int(key)

    def basis_state(self, occupations):
        if len(occupations) != self.n_modes:
            raise InvalidArgumentError("one occupation per mode is required")
        psi = np.zeros(self.cutoffs, dtype=complex)
        for n, d in zip(occupations, self.cutoffs):
            if not 0 <= n < d:
                raise InvalidArgumentError(f"occupation {n} outside cutoff {d}")
        psi[tuple(occupations)] = 1.0
        return FockState(self, psi.ravel())

    def vacuum(self):
        return self.basis_state((0,) * self.n_modes)

    def product_state(self, vectors):
        """Tensor product of one amplitude vector per mode."""
        if len(vectors) != self.n_modes:
            raise InvalidArgumentError("one vector per mode is required")
        psi = np.ones(1, dtype=complex)
        for v, d in zip(vectors, self.cutoffs):
            v = np.asarray(v, dtype=complex)
            if v.shape != (d,):
                raise InvalidArgumentError(f"vector of length {v.size} for cutoff {d}")
            psi = np.multiply.outer(psi, v).ravel()
        return FockState(self, psi)


@dataclass(frozen=True)
class FockState:
    space: FockSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex, copy=True).ravel()
        if amp.size != self.space.total_dim:
            raise InvalidArgumentError("amplitude vector does not match the space")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def tensor(self):
        return self.amplitudes.reshape(self.space.cutoffs)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        nrm = self.norm
        if nrm == 0:
            raise InvalidArgumentError("cannot normalise the zero vector")
        return FockState(self.space, self.amplitudes / nrm)

    def occupation_distribution(self, mode):
        mode = self.space.mode(mode)
        p = np.abs(self.tensor) ** 2
        axes = tuple(i for i in range(self.space.n_modes) if i != mode)
        return p.sum(axis=axes)

    def truncation_mass(self, mode, levels=2):
        """Probability in the top ``levels`` occupation levels of ``mode``."""
        return float(self.occupation_distribution(mode)[-levels:].sum())

    def overlap(self, other):
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _lowering(d):
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def _embed(matrix, modes, target, space):
    """Extend a matrix on ``modes`` to the sorted superset ``target`` by identities."""
    if tuple(modes) == tuple(target):
        return matrix
    rest = [k for k in target if k not in modes]
    order = list(modes) + rest
    d_rest = math.prod(space.cutoffs[k] for k in rest)
    big = np.kron(matrix, np.eye(d_rest))
    dims = [space.cutoffs[k] for k in order]
    T = big.reshape(dims + dims)
    perm = [order.index(k) for k in target]
    T = T.transpose(perm + [p + len(order) for p in perm])
    D = math.prod(dims)
    return T.reshape(D, D)


class OperatorMatrix:
    """Dense operator on a subset of modes, identity on the rest."""

    def __init__(self, space, modes, matrix):
        modes = tuple(int(m) for m in modes)
        if list(modes) != sorted(set(modes)):
            raise InvalidArgumentError("modes must be sorted and distinct")
        D = math.prod(space.cutoffs[m] for m in modes)
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (D, D):
            raise InvalidArgumentError(f"local matrix must be {D}x{D}, got {matrix.shape}")
        self.space = space
        self.modes = modes
        self.matrix = matrix

    def __repr__(self):
        return f"OperatorMatrix(modes={self.modes}, local_dim={self.matrix.shape[0]})"

    def dag(self):
        return OperatorMatrix(self.space, self.modes, self.matrix.conj().T)

    def _aligned(self, other):
        target = tuple(sorted(set(self.modes) | set(other.modes)))
        return (target, _embed(self.matrix, self.modes, target, self.space),
                _embed(other.matrix, other.modes, target, self.space))

    def __matmul__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if not set(self.modes) & set(other.modes):
            order = list(self.modes) + list(other.modes)
            target = tuple(sorted(order))
            kron = np.kron(self.matrix, other.matrix)
            dims = [self.space.cutoffs[k] for k in order]
            perm = [order.index(k) for k in target]
            T = kron.reshape(dims + dims).transpose(perm + [p + len(order) for p in perm])
            D = kron.shape[0]
            return OperatorMatrix(self.space, target, T.reshape(D, D))
        target, a, b = self._aligned(other)
        return OperatorMatrix(self.space, target, a @ b)

    def __add__(self, other):
        target, a, b = self._aligned(other)
        return OperatorMatrix(self.space, target, a + b)

    def __sub__(self, other):
        target, a, b = self._aligned(other)
        return OperatorMatrix(self.space, target, a - b)

    def __mul__(self, scalar):
        return OperatorMatrix(self.space, self.modes, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return OperatorMatrix(self.space, self.modes, self.matrix / scalar)

    def __neg__(self):
        return self * -1.0

    def commutator(self, other):
        return self @ other - other @ self

    def full(self):
        """Matrix on the whole space (small spaces only)."""
        if self.space.total_dim > DENSE_LIMIT:
            raise InvalidArgumentError(
                f"full matrix of dimension {self.space.total_dim} exceeds {DENSE_LIMIT}"
            )
        return _embed(self.matrix, self.modes, tuple(range(self.space.n_modes)), self.space)

    def apply_tensor(self, psi):
        k = len(self.modes)
        front = list(range(k))
        moved = np.moveaxis(psi, self.modes, front)
        shape = moved.shape
        out = (self.matrix @ moved.reshape(self.matrix.shape[0], -1)).reshape(shape)
        return np.moveaxis(out, front, self.modes)

    def apply(self, state):
        if state.space is not self.space:
            raise InvalidArgumentError("operator and state live on different spaces")
        return FockState(self.space, self.apply_tensor(state.tensor).ravel())

    def expectation(self, state):
        return complex(np.vdot(state.amplitudes, self.apply(state).amplitudes))

    def local_occupations(self):
        """Occupation numbers of the local basis, one row per mode."""
        dims = [self.space.cutoffs[m] for m in self.modes]
        return np.indices(dims).reshape(len(dims), -1)


def identity_op(space, mode):
    mode = space.mode(mode)
    return OperatorMatrix(space, (mode,), np.eye(space.cutoffs[mode]))


def annihilation_op(space, mode):
    """Truncated lowering operator ``a|n> = sqrt(n)|n-1>`` on one mode."""
    mode = space.mode(mode)
    return OperatorMatrix(space, (mode,), _lowering(space.cutoffs[mode]))


def number_op(space, mode):
    mode = space.mode(mode)
    return OperatorMatrix(space, (mode,), np.diag(np.arange(space.cutoffs[mode], dtype=complex)))


def schwinger_ops(space, mode_a, mode_b):
    """Pseudospin operators built from the lower-level mode ``a`` and upper-level mode ``b``."""
    ia, ib = space.mode(mode_a), space.mode(mode_b)
    if ia == ib:
        raise InvalidArgumentError("Schwinger operators need two distinct modes")
    a, b = annihilation_op(space, ia), annihilation_op(space, ib)
    na, nb = a.dag() @ a, b.dag() @ b
    ab = a.dag() @ b
    ba = b.dag() @ a
    return {
        "S_x": 0.5 * (ab + ba),
        "S_y": 0.5j * (ab - ba),
        "S_z": 0.5 * (nb - na),
        "S_0": 0.5 * (na + nb),
        "S_plus": ba,
        "S_minus": ab,
    }


def sector_sizes_ok(space, modes, max_total):
    """Mask of local basis states with total occupation ``<= max_total``."""
    occ = OperatorMatrix(space, modes, np.eye(math.prod(space.cutoffs[m] for m in modes)))
    return occ.local_occupations().sum(axis=0) <= max_total


class LadderCheck(NamedTuple):
    coefficient_plus: float
    coefficient_minus: float
    max_deviation: float


def ladder_action_check(s, s_z):
    """Compare matrix action of ``S_+`` and ``S_-`` on ``|n_a, n_b>`` with the closed form.

    ``s = (n_a + n_b)/2`` and ``s_z = (n_b - n_a)/2``.
    """
    two_s, n_a2, n_b2 = 2 * s, s - s_z, s + s_z
    if abs(two_s - round(two_s)) > 1e-12 or abs(n_a2 - round(n_a2)) > 1e-12 or abs(s_z) > s:
        raise InvalidArgumentError(f"(s, s_z) = ({s}, {s_z}) is not a valid pseudospin state")
    n_a, n_b = int(round(n_a2)), int(round(n_b2))
    d = n_a + n_b + 2
    space = FockSpace((d, d), labels=("a", "b"))
    ops = schwinger_ops(space, 0, 1)
    ket = space.basis_state((n_a, n_b))
    c_plus = math.sqrt((s + s_z + 1) * (s - s_z))
    c_minus = math.sqrt((s - s_z + 1) * (s_z + s))
    expected_plus = np.zeros(space.total_dim, dtype=complex)
    if n_a >= 1:
        expected_plus = space.basis_state((n_a - 1, n_b + 1)).amplitudes * c_plus
    expected_minus = np.zeros(space.total_dim, dtype=complex)
    if n_b >= 1:
        expected_minus = space.basis_state((n_a + 1, n_b - 1)).amplitudes * c_minus
    dev = max(
        np.abs(ops["S_plus"].apply(ket).amplitudes - expected_plus).max(),
        np.abs(ops["S_minus"].apply(ket).amplitudes - expected_minus).max(),
    )
    return LadderCheck(c_plus, c_minus, float(dev))


def hp_excitation_ops(space, mode_a, mode_b, N):
    """Low-density collective excitation ``phi = a^dag b / sqrt(N)`` and its adjoint."""
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    ia, ib = space.mode(mode_a), space.mode(mode_b)
    a, b = annihilation_op(space, ia), annihilation_op(space, ib)
    phi = (a.dag() @ b) / math.sqrt(N)
    return {"phi": phi, "phi_dagger": phi.dag()}


def hp_exact_ops(space, mode_a, mode_b):
    """Exact bosonic excitation ``phi = (2s - phi^dag phi)^(-1/2) S_-``.

    On ``|n_a, n_b>`` this is ``n_a^(-1/2) a^dag b``, i.e. ``phi|n_a, k> =
    sqrt(k)|n_a + 1, k - 1>``. The inverse root is taken on the image, which
    always has ``n_a >= 1``.
    """
    ia, ib = space.mode(mode_a), space.mode(mode_b)
    a, b = annihilation_op(space, ia), annihilation_op(space, ib)
    d = space.cutoffs[ia]
    inv = np.zeros(d)
    inv[1:] = 1.0 / np.sqrt(np.arange(1, d))
    inv_root = OperatorMatrix(space, (ia,), np.diag(inv))
    phi = inv_root @ (a.dag() @ b)
    return {"phi": phi, "phi_dagger": phi.dag()}


def binomial_amplitudes(N, alpha, beta):
    """``sqrt(C(N,k)) alpha^(N-k) beta^k`` for ``k = 0..N``."""
    k = np.arange(N + 1)
    logc = 0.5 * np.array([math.lgamma(N + 1) - math.lgamma(j + 1) - math.lgamma(N - j + 1) for j in k])
    abs_a, abs_b = abs(alpha), abs(beta)
    mag = np.exp(logc) * np.power(abs_a, N - k) * np.power(abs_b, k)
    phase = np.exp(1j * ((N - k) * np.angle(alpha) + k * np.angle(beta)))
    return mag * phase


def coherent_vector(gamma, d):
    """Normalised coherent state truncated to ``d`` levels."""
    gamma = complex(gamma)
    v = np.zeros(d, dtype=complex)
    v[0] = math.exp(-0.5 * abs(gamma) ** 2)
    for n in range(1, d):
        v[n] = v[n - 1] * gamma / math.sqrt(n)
    return v / np.linalg.norm(v)


def coherent_tail_mass(gamma, d):
    """Poisson weight of a coherent state above the top level ``d - 1``."""
    return float(poisson.sf(d - 1, abs(complex(gamma)) ** 2))


def coherent_spin_state(space, N, alpha, beta, gamma=0.0, mode_a=0, mode_b=1, mode_photon=None):
    """State ``e^{gamma psi^dag} (alpha a^dag + beta b^dag)^N |vac> / sqrt(N!)``, normalised.

    The atomic part is the binomial superposition over ``|N-k, k>``; the photon
    factor is normalised and treated as a coherent state of amplitude ``gamma``.
    """
    ia, ib = space.mode(mode_a), space.mode(mode_b)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-12:
        raise InvalidArgumentError("|alpha|^2 + |beta|^2 must equal 1")
    if min(space.cutoffs[ia], space.cutoffs[ib]) < N + 1:
        raise InvalidArgumentError(f"atomic cutoffs must be >= N + 1 = {N + 1}")
    amps = binomial_amplitudes(N, alpha, beta)
    psi = np.zeros(space.cutoffs, dtype=complex)
    index = [0] * space.n_modes
    for k, c in enumerate(amps):
        index[ia], index[ib] = N - k, k
        psi[tuple(index)] = c
    if mode_photon is not None:
        ip = space.mode(mode_photon)
        d = space.cutoffs[ip]
        if coherent_tail_mass(gamma, d) > COHERENT_TAIL_TOL:
            raise InvalidArgumentError(
                f"photon cutoff {d} leaves {coherent_tail_mass(gamma, d):.3g} of the coherent state"
            )
        shape = [1] * space.n_modes
        shape[ip] = d
        photon = coherent_vector(gamma, d).reshape(shape)
        psi = psi.sum(axis=ip, keepdims=True) * photon
    elif gamma != 0:
        raise InvalidArgumentError("gamma != 0 needs a photon mode")
    return FockState(space, psi.ravel()).normalized()


def hp_image_vector(N, alpha, beta, d):
    """Matter-mode image of the spin state: amplitude of ``|k>`` is that of ``|N-k, k>``."""
    if d < N + 1:
        raise InvalidArgumentError(f"matter cutoff {d} is below N + 1 = {N + 1}")
    v = np.zeros(d, dtype=complex)
    v[: N + 1] = binomial_amplitudes(N, alpha, beta)
    return v


def _sector_expm(generator, labels):
    """``expm`` of a matrix that is block diagonal in the sectors given by ``labels``."""
    G = generator.matrix
    if np.any(np.abs(G[labels[:, None] != labels[None, :]]) > 0):
        raise InvalidArgumentError("generator couples different sectors")
    U = np.zeros_like(G)
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        U[np.ix_(idx, idx)] = sla.expm(G[np.ix_(idx, idx)])
    return OperatorMatrix(generator.space, generator.modes, U)


def two_mode_squeezer(space, mode_1, mode_2, gain):
    """``exp(r (a1^dag a2^dag - a1 a2))`` with ``cosh(r) = sqrt(gain)``.

    Heisenberg action ``a1 -> sqrt(G) a1 + sqrt(G-1) a2^dag``.
    """
    if gain < 1:
        raise InvalidArgumentError(f"gain must be >= 1, got {gain}")
    i1, i2 = space.mode(mode_1), space.mode(mode_2)
    if i1 == i2:
        raise InvalidArgumentError("squeezer needs two distinct modes")
    r = math.acosh(math.sqrt(gain))
    a1, a2 = annihilation_op(space, i1), annihilation_op(space, i2)
    gen = r * (a1.dag() @ a2.dag() - a1 @ a2)
    occ = gen.local_occupations()
    return _sector_expm(gen, occ[0] - occ[1])


def beamsplitter_unitary(space, mode_1, mode_2, mu):
    """Passive rotation with Heisenberg action ``a1 -> mu a1 - nu a2``, ``a2 -> mu a2 + nu a1``.

    Generator ``theta (a1 a2^dag - a1^dag a2)`` with ``theta = arccos(mu)``.
    """
    if not 0.0 <= mu <= 1.0:
        raise InvalidArgumentError(f"mu must lie in [0, 1], got {mu}")
    i1, i2 = space.mode(mode_1), space.mode(mode_2)
    if i1 == i2:
        raise InvalidArgumentError("beamsplitter needs two distinct modes")
    theta = math.acos(mu)
    a1, a2 = annihilation_op(space, i1), annihilation_op(space, i2)
    gen = theta * (a1 @ a2.dag() - a1.dag() @ a2)
    occ = gen.local_occupations()
    return _sector_expm(gen, occ[0] + occ[1])


class Moments(NamedTuple):
    meanQ: float
    meanP: float
    varQ: float
    varP: float
    covQP: float


def _moments_from_sums(ea, ea2, n_ab, n_ba):
    """Quadrature moments from ``<o>``, ``<o^2>``, ``<o^dag o>`` and ``<o o^dag>``."""
    Q, P = 2.0 * ea.real, 2.0 * ea.imag
    return Moments(
        Q, P,
        2.0 * ea2.real + n_ab + n_ba - Q * Q,
        -2.0 * ea2.real + n_ab + n_ba - P * P,
        2.0 * ea2.imag - Q * P,
    )


def quadrature_moments(state, mode):
    """Exact ``Q = a + a^dag``, ``P = i(a^dag - a)`` moments of a bosonic mode."""
    mode = state.space.mode(mode)
    d = state.space.cutoffs[mode]
    psi3 = state.tensor.reshape(
        math.prod(state.space.cutoffs[:mode]), d, math.prod(state.space.cutoffs[mode + 1:])
    )
    ea, ea2, en, norm2 = kernels.fock_mode_sums(psi3)
    ea, ea2, en = ea / norm2, ea2 / norm2, en / norm2
    return _moments_from_sums(ea, ea2, en, en + 1.0)


def operator_quadrature_moments(state, op):
    """Moments of ``Q = o + o^dag``, ``P = i(o^dag - o)`` for any operator ``o``."""
    o_psi = op.apply(state)
    od_psi = op.dag().apply(state)
    norm2 = state.norm ** 2
    ea = np.vdot(state.amplitudes, o_psi.amplitudes) / norm2
    ea2 = np.vdot(state.amplitudes, op.apply(o_psi).amplitudes) / norm2
    n_ab = np.vdot(o_psi.amplitudes, o_psi.amplitudes).real / norm2  # <o^dag o>
    n_ba = np.vdot(od_psi.amplitudes, od_psi.amplitudes).real / norm2  # <o o^dag>
    return _moments_from_sums(complex(ea), complex(ea2), float(n_ab), float(n_ba))


class OperatorSum:
    """Sum of operators on different mode subsets, applied term by term."""

    def __init__(self, terms):
        self.terms = list(terms)
        if not self.terms:
            raise InvalidArgumentError("an operator sum needs at least one term")

    def dag(self):
        return OperatorSum(t.dag() for t in self.terms)

    def apply(self, state):
        psi = sum(t.apply_tensor(state.tensor) for t in self.terms)
        return FockState(state.space, psi.ravel())


@dataclass(frozen=True)
class OracleRun:
    bright: Moments
    dark: Moments
    requested_cutoff: int
    cutoffs: tuple
    truncation_mass: float
    norm_error: float
    matter: str
    state: FockState = field(repr=False)


def _initial_state(space, gamma, alpha, beta, N, matter):
    d = space.cutoffs[0]
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    if matter == "hp":
        return space.product_state(
            [coherent_vector(gamma, d), vac, hp_image_vector(N, alpha, beta, space.cutoffs[2])]
        )
    spin = coherent_spin_state(FockSpace(space.cutoffs[2:]), N, alpha, beta)
    psi = np.multiply.outer(np.multiply.outer(coherent_vector(gamma, d), vac), spin.tensor)
    return FockState(space, psi.ravel())


def oracle_clone_run(gamma, alpha=1.0, beta=0.0, N=0, gain=2.0, mu=math.sqrt(0.5),
                     cutoff=30, cap=DEFAULT_CAP, adaptive=True, mass_tol=MASS_TOL, step=5,
                     matter="hp"):
    """Cloning pipeline evaluated on an explicit Fock space.

    ``psi`` starts coherent and ``c`` in vacuum; a two-mode squeezer acts on
    ``(psi, c)``. The matter side depends on ``matter``:

    ``"hp"``
        a single bosonic mode holding the image of the spin state
        (amplitude of ``|k>`` equal to that of ``|N-k, k>``); the mixer is the
        beamsplitter unitary on ``(psi, phi)``. Finite-N corrections to the
        spin moments show up as ``O(1/N)`` deviations.
    ``"schwinger"``
        the two atomic modes ``(a, b)`` in the spin state, with
        ``phi = a^dag b / sqrt(N)``. The clones are the operators
        ``mu psi - nu phi`` and ``mu phi + nu psi`` evaluated on the
        amplified state, so the moments are exact at every ``N``.

    With ``adaptive`` the cutoff of the bosonic modes grows by ``step``
    until the probability in their top two levels stays below ``mass_tol``
    after each stage; the largest such mass is reported.
    """
    if matter not in ("hp", "schwinger"):
        raise InvalidArgumentError(f"matter must be 'hp' or 'schwinger', got {matter!r}")
    if matter == "schwinger" and N < 1:
        raise InvalidArgumentError("the schwinger matter model needs N >= 1")
    if not 0.0 <= mu <= 1.0:
        raise InvalidArgumentError(f"mu must lie in [0, 1], got {mu}")
    if cutoff < N + 1:
        raise InvalidArgumentError(f"cutoff {cutoff} is below N + 1 = {N + 1}")
    nu = math.sqrt(max(0.0, 1.0 - mu * mu))
    d = int(cutoff)
    while True:
        dims = (d, d, d) if matter == "hp" else (d, d, N + 1, N + 1)
        if math.prod(dims) > cap:
            raise InvalidArgumentError(
                f"oracle run needs {math.prod(dims)} amplitudes (cutoffs {dims}), above the cap of {cap}"
            )
        if coherent_tail_mass(gamma, d) > COHERENT_TAIL_TOL:
            if not adaptive:
                raise InvalidArgumentError(f"cutoff {d} truncates the coherent input")
            d += step
            continue
        labels = ("psi", "c", "phi") if matter == "hp" else ("psi", "c", "a", "b")
        space = FockSpace(dims, labels=labels, cap=cap)
        state = _initial_state(space, gamma, alpha, beta, N, matter)
        state = two_mode_squeezer(space, 0, 1, gain).apply(state)
        mass = max(state.truncation_mass(m) for m in range(3 if matter == "hp" else 2))
        if matter == "hp":
            state = beamsplitter_unitary(space, 0, 2, mu).apply(state)
            mass = max(mass, *(state.truncation_mass(m) for m in range(3)))
        if not adaptive or mass <= mass_tol:
            break
        d += step
    if matter == "hp":
        bright, dark = quadrature_moments(state, 0), quadrature_moments(state, 2)
    else:
        psi_op = annihilation_op(space, 0)
        phi = hp_excitation_ops(space, 2, 3, N)["phi"]
        bright = operator_quadrature_moments(state, OperatorSum([mu * psi_op, -nu * phi]))
        dark = operator_quadrature_moments(state, OperatorSum([mu * phi, nu * psi_op]))
    return OracleRun(bright, dark, int(cutoff), dims, float(mass), abs(state.norm - 1.0), matter, state)
