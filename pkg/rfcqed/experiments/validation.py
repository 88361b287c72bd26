"""
Oracle comparisons and the acceptance suite behind `rfcqed validate`.

Every check returns one or more CheckResult rows. Gating rows decide the exit
code; informational rows record numbers that are compared against published
values we do not reproduce exactly (see DESIGN.md).
"""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.optimize import brentq

from rfcqed.adiabatic.analytics import (
    dm_potential,
    excited_lambda_critical_sq,
    tunnel_splitting,
    tunnel_splitting_critical,
    splitting_log_slope,
    triplet_singlet_gap,
    two_qubit_unperturbed,
)
from rfcqed.adiabatic.born_oppenheimer import (
    XGrid,
    bo_eigenstate_energies,
    build_surfaces,
    critical_coupling_scan,
    default_grid,
    doublet_splitting,
    evaluate_curve,
    excited_label,
    find_minima,
    ground_label,
    nonadiabatic_coupling,
    sector_label,
    solve_bound_states,
    spin_sectors,
    wronskian_splitting,
)
from rfcqed.circuit.elements import CircuitParams
from rfcqed.circuit.flux_qubit import dressed_qubit_frequency, flux_qubit_spectrum
from rfcqed.circuit.normal_modes import normal_modes
from rfcqed.circuit.two_mode import compare_surfaces, projection_convergence, single_mode_params, two_mode_bo_surfaces
from rfcqed.config import CIRCUIT_BENCHMARKS, BENCHMARK_COUPLINGS, REFERENCE_CIRCUIT
from rfcqed.errors import NumericalError, ParameterError
from rfcqed.probes.ramsey import (
    RamseyConfig,
    modulation_frequency,
    ramsey_scan,
    revival_peaks,
    trace_contrast,
)
from rfcqed.probes.spectroscopy import SpectrumConfig, spectrum_ground, spectrum_thermal
from rfcqed.quantum.models import (
    ModelParams,
    build_h_edm,
    build_h_stark,
    lowest_levels,
    minimal_fock_cutoff,
)
from rfcqed.quantum.operators import BasisDescriptor, collective_spin, commutator, parity_operator
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.experiments.validation")

MU = 1e4


class CheckResult(BaseModel):
    name: str
    value: Optional[float] = None
    target: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool
    gating: bool = True
    detail: str = ""


def _row(name: str, value: float, target: float, tolerance: float, gating: bool = True,
         relative: bool = False, detail: str = "") -> CheckResult:
    deviation = abs(value - target) / abs(target) if relative else abs(value - target)
    return CheckResult(
        name=name, value=value, target=target, tolerance=tolerance,
        passed=bool(deviation <= tolerance), gating=gating, detail=detail,
    )


def _bound(name: str, value: float, limit: float, below: bool = True, gating: bool = True,
           detail: str = "") -> CheckResult:
    passed = value < limit if below else value > limit
    return CheckResult(name=name, value=value, target=limit, passed=bool(passed), gating=gating, detail=detail)


# --- adiabatic potentials ------------------------------------------------------------------

def check_dicke_exactness() -> List[CheckResult]:
    """eps = -1: numeric branches equal X^2/2 + m sqrt(1 + 2 lambda^2 X^2)."""
    rows = []
    grid = XGrid.symmetric(6.0, 1201)
    x = grid.values
    for n_qubits in (1, 2, 3):
        p = ModelParams.from_dimensionless(0.8, MU, epsilon=-1.0, N=n_qubits)
        surfaces = build_surfaces(grid, p)
        expected = []
        for sector in spin_sectors(n_qubits):
            for k in range(sector.dimension):
                expected.append(dm_potential(sector.spin, -sector.spin + k, x, p.lam))
        expected = np.sort(np.asarray(expected), axis=0)
        deviation = float(np.max(np.abs(surfaces.branches - expected)))
        rows.append(_bound(f"dicke_exactness_N{n_qubits}", deviation, 1e-10))
    return rows


def check_ground_critical() -> List[CheckResult]:
    rows = []
    for n_qubits in (1, 2, 3, 4):
        p = ModelParams.from_dimensionless(0.5, MU, N=n_qubits)
        found = critical_coupling_scan(p, ground_label(n_qubits))
        rows.append(_row(f"ground_critical_N{n_qubits}", found, 1.0 / n_qubits, 1e-3))
    return rows


def check_triplet_critical() -> List[CheckResult]:
    rows = []
    for epsilon in (0.0, 0.02, 0.1):
        p = ModelParams.from_dimensionless(0.5, MU, epsilon=epsilon, N=2)
        found = critical_coupling_scan(p, excited_label(2))
        rows.append(_row(f"triplet_critical_eps{epsilon:g}", found, excited_lambda_critical_sq(epsilon), 1e-3))
    return rows


def check_two_qubit_origin() -> List[CheckResult]:
    """N = 2 sector curves at X = 0 against the closed forms; singlet-triplet gap."""
    rows = []
    for epsilon in (0.0, 0.1):
        p = ModelParams.from_dimensionless(0.8, MU, epsilon=epsilon, N=2)
        origin = np.zeros(1)
        closed = two_qubit_unperturbed(origin, p.lam, epsilon)
        numeric = {
            "minus": evaluate_curve(p, sector_label(1, 0), origin)[0],
            "triplet": evaluate_curve(p, sector_label(1, 1), origin)[0],
            "plus": evaluate_curve(p, sector_label(1, 2), origin)[0],
            "singlet": evaluate_curve(p, sector_label(0, 0), origin)[0],
        }
        worst = max(abs(numeric[k] - float(np.asarray(closed[k]).ravel()[0])) for k in numeric)
        rows.append(_bound(f"two_qubit_origin_eps{epsilon:g}", worst, 1e-12))
        gap = numeric["triplet"] - numeric["singlet"]
        rows.append(_row(f"singlet_triplet_gap_eps{epsilon:g}", gap, triplet_singlet_gap(p.lam, epsilon),
                         0.01, relative=True))
    return rows


def check_three_wells() -> List[CheckResult]:
    """
    N = 3, eps = 0.02: a max-spin branch becomes a triple well whose central and
    outer minima are degenerate near lambda^2 = 1.86 (first-order jump of X_min).
    """
    grid = XGrid.symmetric(5.0, 2001)
    x = grid.values

    def depth_gap(lambda_sq: float, key: str) -> Optional[float]:
        p = ModelParams.from_dimensionless(lambda_sq, MU, epsilon=0.02, N=3)
        minima = find_minima(evaluate_curve(p, key, x), x)
        central = [v for pos, v in minima if abs(pos) < 0.5 * grid.spacing]
        outer = [v for pos, v in minima if pos > 0.1]
        if not central or not outer:
            return None
        return central[0] - min(outer)

    # the highest max-spin level always has its minimum at X = 0
    for k in range(3):
        key = sector_label(1.5, k)
        scan = [(v, depth_gap(v, key)) for v in np.linspace(1.70, 2.00, 16)]
        scan = [(v, gap) for v, gap in scan if gap is not None]
        bracket = next(((a, b) for (a, ga), (b, gb) in zip(scan, scan[1:]) if ga * gb <= 0), None)
        if bracket is None:
            continue

        def gap_or_fail(v: float, key: str = key) -> float:
            gap = depth_gap(v, key)
            if gap is None:
                raise NumericalError(f"a minimum of {key} vanished at lambda^2 = {v:.6f}")
            return gap

        try:
            root = brentq(gap_or_fail, *bracket, xtol=1e-7)
        except NumericalError as e:
            logger.debug(f"🔧 {e}")
            continue
        p = ModelParams.from_dimensionless(root, MU, epsilon=0.02, N=3)
        depths = [v for _, v in find_minima(evaluate_curve(p, key, x), x)]
        return [
            _row("three_wells_lambda_sq", root, 1.86, 0.02, detail=f"branch {key}"),
            CheckResult(name="three_wells_count", value=float(len(depths)), target=3.0,
                        passed=len(depths) == 3, detail=f"branch {key}"),
            _bound("three_wells_depth_spread", max(depths) - min(depths), 1e-3, detail=f"branch {key}"),
        ]
    return [CheckResult(name="three_wells_N3", passed=False,
                        detail="no max-spin branch has degenerate triple-well minima for lambda^2 in [1.7, 2.0]")]


# --- tunnelling ---------------------------------------------------------------------------

def _ground_splitting(lambda_sq: float, mu: float, half_width: float, points: int) -> float:
    p = ModelParams.from_dimensionless(lambda_sq, mu, N=1)
    surfaces = build_surfaces(XGrid.symmetric(half_width, points), p)
    return doublet_splitting(solve_bound_states(surfaces, 0, mu, k_max=2))


def check_critical_splitting() -> List[CheckResult]:
    rows = []
    for mu in (1e4, 1e5):
        numeric = _ground_splitting(1.0, mu, 2.0, 4001)
        rows.append(_row(f"critical_splitting_mu{mu:g}", numeric, tunnel_splitting_critical(1.0, mu), 0.10,
                         relative=True))
    return rows


def check_deep_splitting() -> List[CheckResult]:
    """
    ln(splitting) against the closed form for lambda^2 in {1.3, 1.5, 1.8}. The
    1.8 doublet lies below the resolution of the finite-difference eigenvalues,
    so that point (and the slope into the deep regime) uses the Wronskian estimate.
    """
    rows = []
    numeric: Dict[float, float] = {}
    for lambda_sq in (1.3, 1.5, 1.8):
        p = ModelParams.from_dimensionless(lambda_sq, MU, N=1)
        surfaces = build_surfaces(XGrid.symmetric(3.0, 4001), p)
        if lambda_sq < 1.8:
            numeric[lambda_sq] = doublet_splitting(solve_bound_states(surfaces, 0, MU, k_max=2))
            method = "doublet eigenvalues"
        else:
            numeric[lambda_sq] = wronskian_splitting(surfaces, 0, MU)
            method = "Wronskian at X = 0"
        formula = tunnel_splitting(math.sqrt(lambda_sq), 1.0, MU)
        rows.append(_row(f"deep_splitting_l2_{lambda_sq:g}", math.log(numeric[lambda_sq]), math.log(formula),
                         0.15 * abs(math.log(formula)), detail=f"natural log, {method}"))

    numeric_slope = (math.log(numeric[1.8]) - math.log(numeric[1.5])) / 0.3
    formula_slope = (math.log(tunnel_splitting(math.sqrt(1.8), 1.0, MU))
                     - math.log(tunnel_splitting(math.sqrt(1.5), 1.0, MU))) / 0.3
    rows.append(_row("deep_splitting_slope", numeric_slope, formula_slope, 0.10, relative=True,
                     detail="lambda^2 in [1.5, 1.8]"))
    rows.append(_row("deep_splitting_asymptotic_slope", numeric_slope, splitting_log_slope(1, MU), 0.10,
                     relative=True, detail="lambda^2 in [1.5, 1.8]"))
    return rows


# --- exact vs BO ----------------------------------------------------------------------------

def check_bo_vs_exact(couplings: Sequence[float] = (0.3, 0.8)) -> List[CheckResult]:
    rows = []
    for lambda_sq in couplings:
        p = ModelParams.from_dimensionless(lambda_sq, MU, N=2)
        bo = bo_eigenstate_energies(p, k_per_branch=10)[:10]
        n_max = minimal_fock_cutoff(p, k_levels=10)
        exact = lowest_levels(build_h_edm(p, n_max), 10) / p.omega_q
        rows.append(_bound(f"bo_vs_exact_l2_{lambda_sq:g}", float(np.max(np.abs(bo - exact))),
                           0.05 * p.omega_r_tilde, detail=f"n_max={n_max}"))

        surfaces = build_surfaces(default_grid(p), p)
        worst = 0.0
        for n, m in ((sector_label(1, 0), sector_label(1, 1)), (sector_label(1, 1), sector_label(1, 2))):
            bound = solve_bound_states(surfaces, n, p.mu, k_max=1)
            worst = max(worst, nonadiabatic_coupling(surfaces, bound, n, m))
        rows.append(_bound(f"nonadiabatic_l2_{lambda_sq:g}", worst, 0.05))
    return rows


def check_stark() -> List[CheckResult]:
    rows = []
    for n_qubits in (1, 2):
        p = ModelParams.from_dimensionless(0.01, MU, N=n_qubits)
        exact = lowest_levels(build_h_edm(p, 40), 5)
        stark = lowest_levels(build_h_stark(p, 40), 5)
        rows.append(_bound(f"stark_N{n_qubits}", float(np.max(np.abs(exact - stark))), 10 * p.lambda_sq ** 2))
    return rows


def check_properties() -> List[CheckResult]:
    p = ModelParams.from_dimensionless(0.5, 100.0, N=2)
    h = build_h_edm(p, 30)
    parity = parity_operator(h.basis)
    qubits = BasisDescriptor(qubit_count=3)
    sx, sy, sz = (collective_spin(qubits, axis) for axis in "xyz")
    algebra = np.max(np.abs(commutator(sx, sy) - 1j * sz.matrix))
    return [
        _bound("parity_commutes", float(np.max(np.abs(commutator(parity, h)))), 1e-12 * np.max(np.abs(h.matrix))),
        _bound("spin_algebra", float(algebra), 1e-12),
    ]


# --- spectra --------------------------------------------------------------------------------

def _nearest_peak(centers: np.ndarray, target: float) -> float:
    if centers.size == 0:
        return math.inf
    return float(centers[np.argmin(np.abs(centers - target))])


def check_spectrum_lines(couplings: Sequence[float] = (0.1, 0.3)) -> List[CheckResult]:
    """Dominant lines track V_T(0) - V_0(0) and V_S(0) - V_0(0)."""
    rows = []
    gamma = 0.005
    for lambda_sq in couplings:
        p = ModelParams.from_dimensionless(lambda_sq, MU, N=2)
        origin = np.zeros(1)
        ground = evaluate_curve(p, ground_label(2), origin)[0]
        predicted = {
            "triplet": evaluate_curve(p, sector_label(1, 1), origin)[0] - ground,
            "singlet": evaluate_curve(p, sector_label(0, 0), origin)[0] - ground,
        }
        cfg = SpectrumConfig.uniform(
            min(predicted.values()) - 0.1, max(predicted.values()) + 0.1, 4001,
            gamma=gamma, fock_cutoff=minimal_fock_cutoff(p),
        )
        result = spectrum_ground(p, cfg)
        centers = np.array([peak.center for peak in result.peaks])
        for name, value in predicted.items():
            rows.append(_row(f"spectrum_{name}_l2_{lambda_sq:g}", _nearest_peak(centers, value), value, gamma / 2))
    return rows


def check_rabi_fan(couplings: Sequence[float] = (0.03, 0.05)) -> List[CheckResult]:
    """Resonant N = 2: outer peaks split by sqrt(2) g."""
    rows = []
    gamma = 0.005
    for g in couplings:
        p = ModelParams(omega_r=1.0, omega_q=1.0, g=g, N=2)
        cfg = SpectrumConfig.uniform(0.85, 1.15, 6001, gamma=gamma, fock_cutoff=20)
        result = spectrum_ground(p, cfg)
        strong = [peak.center for peak in result.peaks if peak.height >= 0.1 * max(pk.height for pk in result.peaks)]
        separation = max(strong) - min(strong) if len(strong) >= 2 else 0.0
        rows.append(_row(f"rabi_fan_g{g:g}", separation, math.sqrt(2) * g, gamma / 2))
    return rows


def check_thermal_branches() -> List[CheckResult]:
    """Above the triplet transition the thermal triplet line shows the gaps at X = 0 and at X_min."""
    p = ModelParams.from_dimensionless(0.8, MU, N=2)
    gamma = 0.005
    grid = default_grid(p)
    ground_curve = evaluate_curve(p, ground_label(2), grid.values)
    x_min = max((m[0] for m in find_minima(ground_curve, grid.values)), default=0.0)
    points = np.array([0.0, x_min])
    gaps = evaluate_curve(p, excited_label(2), points) - evaluate_curve(p, ground_label(2), points)
    cfg = SpectrumConfig.uniform(
        float(gaps.min()) - 0.1, float(gaps.max()) + 0.1, 4001,
        gamma=gamma, temperature=0.1, fock_cutoff=minimal_fock_cutoff(p),
    )
    result = spectrum_thermal(p, cfg)
    centers = np.array([peak.center for peak in result.peaks])
    return [
        _row(f"thermal_branch_{name}", _nearest_peak(centers, gap), float(gap), gamma)
        for name, gap in zip(("origin", "x_min"), gaps)
    ]


# --- dynamics -------------------------------------------------------------------------------

def check_ramsey() -> List[CheckResult]:
    cfg = RamseyConfig(tau_w_max=1500.0, tau_w_points=301)
    traces = {}
    for lambda_sq in BENCHMARK_COUPLINGS["ramsey"]:
        p = ModelParams.from_dimensionless(lambda_sq, MU, N=2)
        traces[lambda_sq] = ramsey_scan(p, cfg=cfg)
    low, mid, high = (traces[v] for v in BENCHMARK_COUPLINGS["ramsey"])
    rows = [
        _bound("ramsey_contrast_below", trace_contrast(low), 0.05),
        _bound("ramsey_contrast_above", trace_contrast(mid), 0.3, below=False),
        _bound("ramsey_modulation_increases", modulation_frequency(high) - modulation_frequency(mid), 0.0,
               below=False),
    ]
    revivals = revival_peaks(mid)
    if len(revivals) >= 2:
        rows.append(_bound("ramsey_no_perfect_revival", revivals[1][1] - revivals[0][1], 0.0))
    else:
        rows.append(CheckResult(name="ramsey_no_perfect_revival", passed=False, detail="fewer than two revivals"))
    for lambda_sq, trace in traces.items():
        rows.append(_row(f"ramsey_fidelity_l2_{lambda_sq:g}", trace.fidelity, 0.95, 0.03))
    return rows


# --- circuit --------------------------------------------------------------------------------

def circuit_benchmarks(values: Dict[str, float]) -> List[CheckResult]:
    """Benchmark rows; entries flagged gating=False are reported only."""
    rows = []
    for name, spec in CIRCUIT_BENCHMARKS.items():
        if name not in values:
            continue
        rows.append(_row(f"circuit_{name}", values[name], spec["target"], spec["rtol"], relative=True,
                         gating=spec.get("gating", True)))
    return rows


def check_circuit() -> List[CheckResult]:
    """Reference circuit at the flux sweet spot; benchmarks use the bare qubit."""
    cp = CircuitParams(**REFERENCE_CIRCUIT)
    modes = normal_modes(cp)
    spectrum = flux_qubit_spectrum(cp)
    _, mapping = single_mode_params(cp, spectrum, modes)
    summary = modes.summary()
    values = {
        "omega_q_ghz": mapping["omega_q_ghz"],
        "omega_minus_mhz": summary["omega_minus_mhz"],
        "mu": mapping["mu"],
        "g_phi_minus_ratio": summary["g_phi_minus_ratio"],
        "g_q_minus_ratio": summary["g_q_minus_ratio"],
        "omega_plus_ghz": summary["omega_plus_ghz"],
        "g_q_plus_ratio": summary["g_q_plus_ratio"],
        "g_phi_plus_ratio": summary["g_phi_plus_ratio"],
        "lambda_sq": mapping["lambda_sq"],
    }
    rows = circuit_benchmarks(values)
    for name, deviation in modes.limit_deviation.items():
        rows.append(_bound(f"circuit_limit_form_{name}", deviation, 0.05))
    rows.append(_row("circuit_omega_plus_limit_form", modes.omega_plus, 1 / math.sqrt(cp.L_s * cp.C_b), 0.05,
                     relative=True, detail="omega_+ against 1/sqrt(L_s C_b)"))

    grid = XGrid.symmetric(3.0, 241)
    two_mode = two_mode_bo_surfaces(cp, grid, branches=3, spectrum=spectrum, modes=modes)
    single = build_surfaces(grid, two_mode.params)
    asymmetry = float(np.max(np.abs(two_mode.branches - two_mode.branches[:, ::-1])))
    rows.append(_bound("circuit_surface_symmetry", asymmetry, 1e-8))
    rows.append(_bound("circuit_surface_overlay", compare_surfaces(single, two_mode, 2.0, count=3), 0.1))
    rows.append(_bound("circuit_projection_convergence", projection_convergence(cp, grid), 1e-3))

    heavier = cp.model_copy(update={"C_J_fF": 3.5})
    bare = flux_qubit_spectrum(heavier, check_convergence=False).omega_q_ghz
    rows.append(_row("circuit_single_mode_qubit", bare, dressed_qubit_frequency(cp, spectrum, modes), 0.05,
                     relative=True, gating=False, detail="C_J = 3.5 fF without parasitic mode vs dressed gap"))
    rows.append(_bound("circuit_p_term_bound", mapping["p_term_bound"], 0.01))
    return rows


# --- suite ----------------------------------------------------------------------------------

CHECKS: Dict[str, Tuple[Callable[[], List[CheckResult]], bool]] = {
    # name: (check, expensive)
    "dicke_exactness": (check_dicke_exactness, False),
    "ground_critical": (check_ground_critical, False),
    "triplet_critical": (check_triplet_critical, False),
    "two_qubit_origin": (check_two_qubit_origin, False),
    "three_wells": (check_three_wells, False),
    "critical_splitting": (check_critical_splitting, False),
    "deep_splitting": (check_deep_splitting, False),
    "stark": (check_stark, False),
    "properties": (check_properties, False),
    "rabi_fan": (check_rabi_fan, False),
    "bo_vs_exact": (check_bo_vs_exact, True),
    "spectrum_lines": (check_spectrum_lines, True),
    "thermal_branches": (check_thermal_branches, True),
    "ramsey": (check_ramsey, True),
    "circuit": (check_circuit, True),
}

ORACLES = ("dicke_exactness", "ground_critical", "triplet_critical", "two_qubit_origin",
           "critical_splitting", "deep_splitting", "stark")


def run_checks(names: Optional[Sequence[str]] = None, quick: bool = False) -> List[CheckResult]:
    selected = list(names) if names else list(CHECKS)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise ParameterError(f"unknown checks: {', '.join(unknown)}")

    results: List[CheckResult] = []
    for name in selected:
        check, expensive = CHECKS[name]
        if quick and expensive:
            logger.info(f"⚠️ Skipping expensive check '{name}' (quick mode)")
            continue
        logger.info(f"🔧 Running check '{name}'")
        try:
            rows = check()
        except (NumericalError, ParameterError) as e:
            logger.error(f"❌ Check '{name}' raised: {e}")
            rows = [CheckResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")]
        for row in rows:
            glyph = "✅" if row.passed else ("❌" if row.gating else "⚠️")
            logger.info(f"{glyph} {row.name}: value={row.value} target={row.target} {row.detail}".rstrip())
        results.extend(rows)
    return results


def results_frame(results: Sequence[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [row.model_dump() for row in results],
        columns=["name", "value", "target", "tolerance", "passed", "gating", "detail"],
    )


def failed_gating(results: Sequence[CheckResult]) -> List[str]:
    return [row.name for row in results if row.gating and not row.passed]
