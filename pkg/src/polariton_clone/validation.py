"""Oracle check suite: Fock-space ground truth against the closed forms and the engine.

Checks fall in three groups. ``algebra`` checks are exact up to rounding and
use a fixed ``1e-12`` tolerance. ``truncation`` checks depend on the Fock
cutoff and use the configurable tolerance. ``convergence`` checks compare
finite-N deviations at two ensemble sizes. Checks against an analytic bound
report deviation divided by bound, with tolerance 1.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cloning_protocol as cp
from . import fock_oracle as fo
from .errors import InvalidArgumentError

ALGEBRA_TOL = 1e-12
DEFAULT_TOLERANCE = 1e-6
CONVERGENCE_RATIO = 0.6
FINITE_N = (8, 16)
# low-density family used for the finite-N comparison: n_b = N |beta|^2 held fixed
LOW_DENSITY_NB = 0.5
LOW_DENSITY_PHI = math.pi / 3
MOMENT_NAMES = ("meanQ", "meanP", "varQ", "varP", "covQP")


@dataclass(frozen=True)
class Check:
    name: str
    category: str
    value: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "category": self.category,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


def _check(name, category, value, tolerance, **details):
    value = float(value)
    return Check(name, category, value, float(tolerance), bool(value <= tolerance), details)


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    tolerance: float
    cutoff: int
    seed: int

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures),
            "tolerance": self.tolerance,
            "cutoff": self.cutoff,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }


def compare_moments(engine_stats, oracle_moments, run, prefix):
    """Per-quantity comparison entries for one clone."""
    out = []
    for q in MOMENT_NAMES:
        e, o = float(getattr(engine_stats, q)), float(getattr(oracle_moments, q))
        out.append({
            "quantity": f"{prefix}.{q}",
            "engine_value": e,
            "oracle_value": o,
            "abs_error": abs(e - o),
            "truncation_mass": run.truncation_mass,
            "cutoffs": list(run.cutoffs),
        })
    return out


def engine_oracle_comparison(gamma, ensemble=cp.VACUUM_ENSEMBLE, gain=2.0, mu=math.sqrt(0.5),
                             cutoff=30, cap=fo.DEFAULT_CAP, matter="hp"):
    """Run both paths on one configuration; returns ``(entries, run)``."""
    nu = math.sqrt(max(0.0, 1.0 - mu * mu))
    report = cp.run_cloning(gamma, 1.0, ensemble, gain, cp.HopfieldPair(mu, nu, 0.0), convention="operator")
    run = fo.oracle_clone_run(gamma, ensemble.alpha, ensemble.beta, ensemble.N, gain, mu,
                              cutoff=cutoff, cap=cap, matter=matter)
    entries = compare_moments(report.bright, run.bright, run, "bright")
    entries += compare_moments(report.dark, run.dark, run, "dark")
    return entries, run


def _safe_columns(space, margin=2):
    occ = np.indices(space.cutoffs).reshape(space.n_modes, -1)
    return np.flatnonzero(occ.sum(axis=0) <= min(space.cutoffs) - margin)


def _restricted_residual(op, space, cols):
    return float(np.abs(op.full()[:, cols]).max()) if cols.size else 0.0


def _su2_residuals(d):
    space = fo.FockSpace((d, d), labels=("a", "b"))
    S = fo.schwinger_ops(space, 0, 1)
    cols = _safe_columns(space)
    c = lambda x, y: x.commutator(y)  # noqa: E731
    return {
        "sx_sy": _restricted_residual(c(S["S_x"], S["S_y"]) - 1j * S["S_z"], space, cols),
        "splus_sminus": _restricted_residual(c(S["S_plus"], S["S_minus"]) - 2.0 * S["S_z"], space, cols),
        "sz_splus": _restricted_residual(c(S["S_z"], S["S_plus"]) - S["S_plus"], space, cols),
        "sz_sminus": _restricted_residual(c(S["S_z"], S["S_minus"]) + S["S_minus"], space, cols),
    }


def check_boson_commutator(rng, tolerance):
    worst = 0.0
    for d in rng.integers(4, 13, size=5):
        space = fo.FockSpace((int(d),))
        a = fo.annihilation_op(space, 0)
        resid = a.commutator(a.dag()).full() - np.eye(int(d))
        worst = max(worst, float(np.abs(resid[:, : int(d) - 1]).max()))
    return [_check("boson_commutator", "algebra", worst, ALGEBRA_TOL)]


def check_su2_commutators(rng, tolerance):
    cutoffs = [int(d) for d in rng.integers(4, 13, size=4)]
    worst = {}
    for d in cutoffs:
        for k, v in _su2_residuals(d).items():
            worst[k] = max(worst.get(k, 0.0), v)
    return [_check(f"su2_{k}", "algebra", v, ALGEBRA_TOL, cutoffs=cutoffs) for k, v in worst.items()]


def check_diagonal_values(rng, tolerance):
    d = 8
    space = fo.FockSpace((d, d))
    S = fo.schwinger_ops(space, 0, 1)
    Sz, S0 = np.diag(S["S_z"].full()), np.diag(S["S_0"].full())
    occ = np.indices((d, d)).reshape(2, -1)
    dev = max(np.abs(Sz - 0.5 * (occ[1] - occ[0])).max(), np.abs(S0 - 0.5 * (occ[1] + occ[0])).max())
    offdiag = max(np.abs(S["S_z"].full() - np.diag(Sz)).max(), np.abs(S["S_0"].full() - np.diag(S0)).max())
    return [_check("diagonal_sz_s0", "algebra", max(dev, offdiag), ALGEBRA_TOL)]


def check_ladder(rng, tolerance):
    worst, count = 0.0, 0
    for two_s in range(0, 13):
        s = two_s / 2
        for k in range(two_s + 1):
            worst = max(worst, fo.ladder_action_check(s, -s + k).max_deviation)
            count += 1
    return [_check("ladder_coefficients", "algebra", worst, ALGEBRA_TOL, states=count)]


def check_hp_exact(rng, tolerance):
    N = 10
    space = fo.FockSpace((N + 2, N + 2))
    ops = fo.hp_exact_ops(space, 0, 1)
    comm = ops["phi"].commutator(ops["phi_dagger"]).full()
    occ = np.indices(space.cutoffs).reshape(2, -1)
    cols = np.flatnonzero((occ[0] >= 1) & (occ[1] <= N) & (occ[0] + occ[1] <= N + 1))
    resid = comm[:, cols] - np.eye(space.total_dim)[:, cols]
    return [_check("hp_exact_commutator", "algebra", float(np.abs(resid).max()), ALGEBRA_TOL)]


def check_hp_approx(rng, tolerance):
    """``<[phi, phi^dag]>`` on random low-density states against ``2<n_b>/N + 2/N``."""
    worst_ratio, worst_dev = 0.0, 0.0
    spaces = {}
    for i in range(100):
        N = int(rng.integers(10, 31))
        if N not in spaces:
            space = fo.FockSpace((N + 2, N + 2))
            spaces[N] = (space, fo.hp_excitation_ops(space, 0, 1, N)["phi"])
        space, phi = spaces[N]
        if i % 2:
            beta2 = rng.uniform(0.0, 0.1)
            state = fo.coherent_spin_state(space, N, math.sqrt(1 - beta2),
                                           math.sqrt(beta2) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        else:
            nb_max = max(1, N // 10)
            psi = np.zeros(space.cutoffs, dtype=complex)
            for k in range(nb_max + 1):
                psi[N - k, k] = rng.normal() + 1j * rng.normal()
            state = fo.FockState(space, psi.ravel()).normalized()
        nb = float(np.real(fo.number_op(space, 1).expectation(state)))
        comm = phi.dag().apply(state).norm ** 2 - phi.apply(state).norm ** 2
        dev = abs(comm - 1.0)
        worst_dev = max(worst_dev, dev)
        worst_ratio = max(worst_ratio, dev / (2 * nb / N + 2 / N))
    return [_check("hp_approx_commutator", "algebra", worst_ratio, 1.0,
                   max_deviation=worst_dev, states=100)]


def check_hp_low_sector(rng, tolerance):
    N = 20
    space = fo.FockSpace((N + 2, N + 2))
    exact = fo.hp_exact_ops(space, 0, 1)["phi"]
    approx = fo.hp_excitation_ops(space, 0, 1, N)["phi"]
    dev = 0.0
    for k in (1, 2):
        ket = space.basis_state((N - k, k))
        dev = max(dev, float(np.abs(exact.apply(ket).amplitudes - approx.apply(ket).amplitudes).max()))
    return [_check("hp_exact_vs_approx_low_sector", "algebra", dev * N, 1.0,
                   deviation=dev, bound=1.0 / N)]


def check_spin_state_mean(rng, tolerance):
    N = 10
    space = fo.FockSpace((N + 1, N + 1))
    state = fo.coherent_spin_state(space, N, math.sqrt(0.5), math.sqrt(0.5))
    mean = fo.hp_excitation_ops(space, 0, 1, N)["phi"].expectation(state)
    return [_check("spin_state_phi_mean", "algebra", abs(mean - math.sqrt(N) / 2), ALGEBRA_TOL,
                   expectation=[mean.real, mean.imag])]


def check_spin_moments(rng, tolerance):
    N = 8
    space = fo.FockSpace((N + 1, N + 1))
    worst = 0.0
    for phi in (0.0, math.pi / 4, 1.1):
        ens = cp.SpinEnsemble.from_populations(N, 0.5, phi)
        state = fo.coherent_spin_state(space, N, ens.alpha, ens.beta)
        got = fo.operator_quadrature_moments(state, fo.hp_excitation_ops(space, 0, 1, N)["phi"])
        want = cp.spin_mode_moments(ens, convention="operator")
        worst = max(worst, max(abs(a - b) for a, b in zip(got, want)))
    return [_check("spin_moments_schwinger", "algebra", worst, 1e-12)]


def check_squeezer(rng, tolerance):
    gain = 1.5
    d = 40
    space = fo.FockSpace((d, d))
    U = fo.two_mode_squeezer(space, 0, 1, gain)
    a1, a2 = fo.annihilation_op(space, 0), fo.annihilation_op(space, 1)
    target = math.sqrt(gain) * a1 + math.sqrt(gain - 1) * a2.dag()
    heis = 0.0
    for occ in ((0, 0), (1, 0), (0, 1), (2, 1)):
        ket = space.basis_state(occ)
        lhs = U.dag().apply(a1.apply(U.apply(ket)))
        heis = max(heis, float(np.abs(lhs.amplitudes - target.apply(ket).amplitudes).max()))
    unit = float(np.abs(U.matrix.conj().T @ U.matrix - np.eye(d * d)).max())

    d2 = 40
    sp2 = fo.FockSpace((d2, d2))
    out = fo.two_mode_squeezer(sp2, 0, 1, 2.0).apply(sp2.vacuum())
    m = fo.quadrature_moments(out, 0)
    n1 = float(np.real(fo.number_op(sp2, 0).expectation(out)))
    n2 = float(np.real(fo.number_op(sp2, 1).expectation(out)))
    vac_err = max(abs(m.meanQ), abs(m.varQ - 3.0), abs(m.varP - 3.0), abs(n1 - 1.0), abs(n2 - 1.0))
    return [
        _check("squeezer_heisenberg", "truncation", heis, tolerance, gain=gain, cutoff=d),
        _check("squeezer_unitarity", "algebra", unit, 1e-10),
        _check("squeezer_vacuum_moments", "truncation", vac_err, tolerance,
               varQ=m.varQ, n1=n1, n2=n2, cutoff=d2,
               truncation_mass=max(out.truncation_mass(0), out.truncation_mass(1))),
    ]


def check_beamsplitter(rng, tolerance):
    mu = 0.6
    nu = 0.8
    d = 10
    space = fo.FockSpace((d, d))
    U = fo.beamsplitter_unitary(space, 0, 1, mu)
    a1, a2 = fo.annihilation_op(space, 0), fo.annihilation_op(space, 1)
    heis = 0.0
    for occ in ((1, 0), (0, 1), (2, 3), (4, 1)):
        ket = space.basis_state(occ)
        for a, target in ((a1, mu * a1 - nu * a2), (a2, mu * a2 + nu * a1)):
            lhs = U.dag().apply(a.apply(U.apply(ket)))
            heis = max(heis, float(np.abs(lhs.amplitudes - target.apply(ket).amplitudes).max()))
    unit = float(np.abs(U.matrix.conj().T @ U.matrix - np.eye(d * d)).max())
    half = fo.beamsplitter_unitary(space, 0, 1, math.sqrt(0.5)).apply(space.basis_state((1, 0)))
    p = np.abs(half.tensor) ** 2
    split = max(abs(p[1, 0] - 0.5), abs(p[0, 1] - 0.5))
    return [
        _check("beamsplitter_heisenberg", "algebra", heis, ALGEBRA_TOL),
        _check("beamsplitter_unitarity", "algebra", unit, 1e-10),
        _check("beamsplitter_single_photon", "algebra", split, ALGEBRA_TOL),
    ]


def check_coherent_moments(rng, tolerance):
    space = fo.FockSpace((30,))
    state = space.product_state([fo.coherent_vector(1.0, 30)])
    m = fo.quadrature_moments(state, 0)
    err = max(abs(a - b) for a, b in zip(m, (2.0, 0.0, 1.0, 1.0, 0.0)))
    return [_check("coherent_moments", "truncation", err, tolerance)]


def _comparison_check(name, entries, run, tolerance, **extra):
    worst = max(e["abs_error"] for e in entries)
    return _check(name, "truncation", max(worst, run.norm_error), tolerance,
                  comparison=entries, truncation_mass=run.truncation_mass,
                  requested_cutoff=run.requested_cutoff, cutoffs=list(run.cutoffs),
                  norm_error=run.norm_error, **extra)


def make_oracle_checks(cutoff, cap):
    def vacuum_gamma1(rng, tolerance):
        entries, run = engine_oracle_comparison(1.0, cutoff=cutoff, cap=cap)
        return [_comparison_check("oracle_vacuum_ensemble", entries, run, tolerance)]

    def phased_input(rng, tolerance):
        gamma = 0.8 * complex(math.cos(0.7), math.sin(0.7))
        entries, run = engine_oracle_comparison(gamma, gain=1.5, mu=0.6, cutoff=cutoff, cap=cap)
        return [_comparison_check("oracle_phased_input", entries, run, tolerance)]

    def identity(rng, tolerance):
        entries, run = engine_oracle_comparison(0.0, gain=1.0, mu=1.0, cutoff=cutoff, cap=cap)
        return [_comparison_check("oracle_identity", entries, run, tolerance)]

    def symmetric_ensemble(rng, tolerance):
        ens = cp.SpinEnsemble.from_populations(12, 0.5, math.pi / 4)
        entries, run = engine_oracle_comparison(1.0, ens, cutoff=cutoff, cap=cap, matter="schwinger")
        return [_comparison_check("oracle_symmetric_ensemble", entries, run, tolerance,
                                  variances=[run.bright.varQ, run.bright.varP])]

    def finite_n(rng, tolerance):
        errors = {}
        runs = {}
        for N in FINITE_N:
            ens = cp.SpinEnsemble.from_populations(N, 1.0 - LOW_DENSITY_NB / N, LOW_DENSITY_PHI)
            entries, run = engine_oracle_comparison(0.5, ens, cutoff=max(cutoff, N + 1), cap=cap)
            errors[N] = {e["quantity"]: e["abs_error"] for e in entries}
            runs[N] = run
        n_small, n_large = FINITE_N
        ratios = {q: errors[n_large][q] / errors[n_small][q] for q in errors[n_small]
                  if errors[n_small][q] > 1e-9}
        worst = max(ratios.values())
        c_fit = max(n * max(errors[n].values()) for n in FINITE_N)
        return [_check("finite_n_convergence", "convergence", worst, CONVERGENCE_RATIO,
                       ratios=ratios, errors={str(n): errors[n] for n in FINITE_N}, c_over_N=c_fit,
                       n_b=LOW_DENSITY_NB, phi=LOW_DENSITY_PHI,
                       truncation_mass=max(r.truncation_mass for r in runs.values()))]

    return [vacuum_gamma1, phased_input, identity, symmetric_ensemble, finite_n]


ALGEBRA_CHECKS = (
    check_boson_commutator,
    check_su2_commutators,
    check_diagonal_values,
    check_ladder,
    check_hp_exact,
    check_hp_approx,
    check_hp_low_sector,
    check_spin_state_mean,
    check_spin_moments,
    check_squeezer,
    check_beamsplitter,
    check_coherent_moments,
)


def run_checks(cutoff=30, cap=fo.DEFAULT_CAP, tolerance=DEFAULT_TOLERANCE, seed=0, workers=1):
    """Run the full suite; configuration problems raise ``InvalidArgumentError``."""
    need = max(FINITE_N) + 1
    if cutoff < need:
        raise InvalidArgumentError(f"oracle cutoff {cutoff} is below N + 1 = {need} for N = {max(FINITE_N)}")
    if not tolerance > 0:
        raise InvalidArgumentError(f"tolerance must be > 0, got {tolerance}")
    tasks = list(ALGEBRA_CHECKS) + make_oracle_checks(int(cutoff), cap)
    seeds = np.random.SeedSequence(seed).spawn(len(tasks))

    def run(i):
        return tasks[i](np.random.default_rng(seeds[i]), tolerance)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(tasks))))
    else:
        results = [run(i) for i in range(len(tasks))]
    checks = tuple(c for group in results for c in group)
    return ValidationReport(checks, float(tolerance), int(cutoff), int(seed))
