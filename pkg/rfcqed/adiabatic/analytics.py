"""
Closed-form results for the BO potentials: Dicke-model potentials, tunnel
splittings, strong-coupling displaced parabolas and the two-qubit quartic
expansion. All functions are pure; energies are in units of omega_q.
"""
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np

from rfcqed.config import settings
from rfcqed.errors import ParameterError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class SpinSector:
    """Total spin s with projection m (m_z or m_x depending on context)."""

    s: float
    m: float

    def __post_init__(self):
        twice_s, twice_m = 2 * self.s, 2 * self.m
        if self.s < 0 or not float(twice_s).is_integer() or not float(twice_m).is_integer():
            raise ParameterError(f"invalid spin sector (s={self.s}, m={self.m})")
        if abs(self.m) > self.s or (int(twice_s) - int(twice_m)) % 2:
            raise ParameterError(f"invalid spin sector (s={self.s}, m={self.m})")

    @property
    def casimir(self) -> float:
        return self.s * (self.s + 1)


def lambda_critical(n_qubits: int) -> float:
    """Ground-state symmetry-breaking coupling lambda_c = 1/sqrt(N)."""
    if n_qubits < 1:
        raise ParameterError("N must be at least 1")
    return 1.0 / math.sqrt(n_qubits)


def excited_lambda_critical_sq(epsilon: float) -> float:
    """Two-qubit triplet transition, lambda^2 = 1/(2 sqrt(1 + eps))."""
    if epsilon <= -1.0:
        raise ParameterError("the triplet transition needs eps > -1")
    return 1.0 / (2.0 * math.sqrt(1.0 + epsilon))


def dm_potential(s: float, m_z: float, X: ArrayLike, lam: float) -> ArrayLike:
    """Dicke-model potential X^2/2 + m_z sqrt(1 + 2 lambda^2 X^2)."""
    SpinSector(s, m_z)
    X = np.asarray(X, dtype=float)
    return 0.5 * X ** 2 + m_z * np.sqrt(1.0 + 2.0 * lam ** 2 * X ** 2)


def ground_minima(lam: float, lam_c: float) -> Tuple[float, float]:
    """(-X_min, +X_min) with X_min = sqrt(lambda^4 - lambda_c^4)/(sqrt(2) lambda lambda_c^2)."""
    if lam <= lam_c:
        raise ParameterError("single-well regime")
    x_min = math.sqrt(lam ** 4 - lam_c ** 4) / (math.sqrt(2) * lam * lam_c ** 2)
    return -x_min, x_min


def tunnel_splitting_critical(lam_c: float, mu: float, prefactor: Optional[float] = None) -> float:
    """Splitting at the transition, c (lambda_c^2/mu^2)^(1/3)."""
    c = settings.tunnel_prefactor if prefactor is None else prefactor
    return c * (lam_c ** 2 / mu ** 2) ** (1.0 / 3.0)


def tunnel_exponent(lam: float, lam_c: float, mu: float) -> float:
    """WKB exponent S_0 of the equivalent quartic double well."""
    l2, c2 = lam ** 2, lam_c ** 2
    return (2.0 / 3.0) * math.sqrt(mu * (l2 - c2) ** 3 * (l2 + c2)) / (l2 * c2 ** 2)


def tunnel_splitting(lam: float, lam_c: float, mu: float) -> float:
    """
    Ground-doublet splitting (8/sqrt(pi)) A exp(-S_0) above the transition.
    At or below lambda_c the critical law is returned instead.
    """
    if lam <= lam_c:
        return tunnel_splitting_critical(lam_c, mu)
    l2, c2 = lam ** 2, lam_c ** 2
    amplitude = ((l2 - c2) ** 5 / (mu * (l2 + c2))) ** 0.25 / (lam * c2)
    return 8.0 / math.sqrt(math.pi) * amplitude * math.exp(-tunnel_exponent(lam, lam_c, mu))


def splitting_log_slope(n_qubits: int, mu: float) -> float:
    """Deep-regime d ln(splitting) / d lambda^2 = -2 sqrt(mu) N^2 / 3."""
    return -2.0 * math.sqrt(mu) * n_qubits ** 2 / 3.0


def critical_dos_ratio(lam_c: float, mu: float) -> float:
    """nu_lambda_c / nu_0 = (1/splitting)/sqrt(mu); grows as mu^(1/6)."""
    return 1.0 / (tunnel_splitting_critical(lam_c, mu) * math.sqrt(mu))


def displaced_parabola(s: float, m_x: float, X: ArrayLike, lam: float, epsilon: float) -> ArrayLike:
    """Strong-coupling potential (X + sqrt(2) lambda m_x)^2/2 + eps lambda^2 m_x^2."""
    SpinSector(s, m_x)
    X = np.asarray(X, dtype=float)
    return 0.5 * (X + math.sqrt(2) * lam * m_x) ** 2 + epsilon * lam ** 2 * m_x ** 2


def parabola_crossing(m_x: float, lam: float, epsilon: float = 0.0) -> float:
    """X where the m_x and m_x + 1 parabolas cross: -lambda (1 + eps)(2 m_x + 1)/sqrt(2)."""
    return -lam * (1.0 + epsilon) * (2 * m_x + 1) / math.sqrt(2)


class StrongCouplingCorrection(NamedTuple):
    well_shift: float              # eps -> 0 form
    well_shift_first_order: float  # linear in eps
    well_shift_full: float         # complete eps dependence
    splitting: float               # gap at the m_x / m_x + 1 crossing


def strong_coupling_corrections(s: float, m_x: float, lam: float, epsilon: float = 0.0) -> StrongCouplingCorrection:
    """Second-order S_z corrections to the displaced parabolas."""
    sector = SpinSector(s, m_x)
    casimir = sector.casimir
    s_plus_sq = casimir - m_x * (m_x + 1)
    s_minus_sq = casimir - m_x * (m_x - 1)

    up = 1.0 + (2 * m_x + 1) * epsilon
    down = 1.0 - (2 * m_x - 1) * epsilon
    full = 0.0
    if s_plus_sq > 0:
        full += s_plus_sq / up
    if s_minus_sq > 0:
        full += s_minus_sq / down

    return StrongCouplingCorrection(
        well_shift=(m_x ** 2 - casimir) / (2 * lam ** 2),
        well_shift_first_order=((1 - 3 * epsilon) * m_x ** 2 - (1 - epsilon) * casimir) / (2 * lam ** 2),
        well_shift_full=-full / (4 * lam ** 2),
        splitting=math.sqrt(max(s_plus_sq, 0.0)),
    )


class QuarticExpansion(NamedTuple):
    potential: ArrayLike
    lambda_crit_sq: float


def two_qubit_quartic(X: ArrayLike, lam: float, epsilon: float = 0.0) -> QuarticExpansion:
    """
    Fourth-order expansion of the N = 2 triplet potential about X = 0:
    eb lambda^2 + (X^2/2)(1 - 4 eb lambda^4) + 4 X^4 eb lambda^6 (1 + eb^2 lambda^4),
    eb = 1 + eps. Not meant for locating minima above the transition.
    """
    eb = 1.0 + epsilon
    X = np.asarray(X, dtype=float)
    l2 = lam ** 2
    potential = eb * l2 + 0.5 * X ** 2 * (1 - 4 * eb * l2 ** 2) + 4 * X ** 4 * eb * l2 ** 3 * (1 + eb ** 2 * l2 ** 2)
    return QuarticExpansion(potential, excited_lambda_critical_sq(epsilon))


def two_qubit_unperturbed(X: ArrayLike, lam: float, epsilon: float = 0.0) -> Dict[str, ArrayLike]:
    """
    N = 2 levels of X^2/2 + S_z + eb lambda^2 S_x^2 (coupling term dropped):
    minus/plus from the m_z = +-1 mixture, the triplet m_z = 0 and the singlet.
    """
    eb = 1.0 + epsilon
    X = np.asarray(X, dtype=float)
    c = eb * lam ** 2
    root = math.sqrt(4.0 + c ** 2)
    return {
        "minus": 0.5 * (X ** 2 + c - root),
        "singlet": 0.5 * X ** 2,
        "triplet": 0.5 * X ** 2 + c,
        "plus": 0.5 * (X ** 2 + c + root),
    }


def triplet_singlet_gap(lam: float, epsilon: float = 0.0) -> float:
    """V_T(0) - V_S(0) = (1 + eps) lambda^2."""
    return (1.0 + epsilon) * lam ** 2
