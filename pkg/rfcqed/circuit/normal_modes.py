"""
Normal modes of the resonator network and their couplings to the qubit
flux (phi_q / Phi_0) and charge (Q_q / 2e) variables.

H_int = sum_eta i g_Q,eta/2 (c^dag - c) n_q + g_phi,eta/2 (c^dag + c) phi_q.

The exact result comes from the generalized eigenproblem K v = omega^2 C v;
the closed-form mode expressions and the small-parasitics limit forms are
kept alongside for comparison.
"""
import math
from typing import Dict

import numpy as np
from pydantic import BaseModel
from scipy.linalg import eigh

from rfcqed.circuit.elements import CircuitParams, to_ghz
from rfcqed.config import PHYSICAL
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.circuit.normal_modes")

COUPLINGS = ("g_phi_minus", "g_phi_plus", "g_q_minus", "g_q_plus")


class NormalModeData(BaseModel):
    """Angular frequencies and couplings in rad/s."""

    omega_minus: float
    omega_plus: float
    xi: float
    g_phi_minus: float
    g_phi_plus: float
    g_q_minus: float
    g_q_plus: float
    Z: float
    Z_b: float
    closed_form: Dict[str, float]
    limit_ratios: Dict[str, float]

    @property
    def ratios(self) -> Dict[str, float]:
        return {
            "g_phi_minus": self.g_phi_minus / self.omega_minus,
            "g_q_minus": self.g_q_minus / self.omega_minus,
            "g_phi_plus": self.g_phi_plus / self.omega_plus,
            "g_q_plus": self.g_q_plus / self.omega_plus,
        }

    @property
    def limit_deviation(self) -> Dict[str, float]:
        """Relative deviation of the exact coupling ratios from the limit forms."""
        exact = self.ratios
        return {k: abs(exact[k] - self.limit_ratios[k]) / abs(self.limit_ratios[k]) for k in exact}

    @property
    def closed_form_deviation(self) -> Dict[str, float]:
        exact = {"omega_minus": self.omega_minus, "omega_plus": self.omega_plus}
        exact.update({k: getattr(self, k) for k in COUPLINGS})
        return {k: abs(exact[k] - self.closed_form[k]) / abs(exact[k]) for k in exact}

    def summary(self) -> Dict[str, float]:
        out = {
            "omega_minus_mhz": to_ghz(self.omega_minus) * 1e3,
            "omega_plus_ghz": to_ghz(self.omega_plus),
            "xi": self.xi,
        }
        out.update({f"{k}_ratio": v for k, v in self.ratios.items()})
        return out


def _exact_modes(cp: CircuitParams):
    """Mode frequencies (ascending) and mass-weighted eigenvectors, rows (a, b)."""
    capacitance = np.diag([cp.C, cp.C_b])
    inductance = np.array([
        [1 / cp.L_s, -1 / cp.L_s],
        [-1 / cp.L_s, 1 / cp.L_s + 1 / cp.L],
    ])
    root = np.diag(1 / np.sqrt(np.diag(capacitance)))
    omega_sq, vectors = eigh(root @ inductance @ root)
    return np.sqrt(omega_sq), vectors


def _couplings(cp: CircuitParams, omega: float, weight_b: float) -> Dict[str, float]:
    """g_phi and g_Q of one mode from its mass-weighted node-b amplitude."""
    hbar, phi0, e = PHYSICAL["hbar"], PHYSICAL["phi0"], PHYSICAL["e"]
    weight_b = abs(weight_b)
    g_phi = 2 * phi0 * weight_b / (cp.L * math.sqrt(cp.C_b)) / math.sqrt(2 * hbar * omega)
    g_q = 2 * (2 * e) * math.sqrt(cp.C_b) * weight_b * math.sqrt(omega / (2 * hbar)) / cp.C_q
    return {"g_phi": g_phi, "g_q": g_q}


def closed_form_modes(cp: CircuitParams) -> Dict[str, float]:
    """Two-mode expressions in terms of omega_a = 1/sqrt(L_s C), omega_b = 1/sqrt(L_b C_b)."""
    r_q = PHYSICAL["r_q"]
    omega_a = 1 / math.sqrt(cp.L_s * cp.C)
    omega_b = 1 / math.sqrt(cp.L_b * cp.C_b)
    g_ab = math.sqrt(cp.Z_b / cp.Z_a) * omega_a

    mean = omega_a ** 2 + omega_b ** 2
    root = math.sqrt((omega_a ** 2 - omega_b ** 2) ** 2 + 4 * g_ab ** 2 * omega_a * omega_b)
    omega_plus = math.sqrt(0.5 * (mean + root))
    omega_minus = math.sqrt(0.5 * (mean - root))

    # branch of tan(2 xi) on which cos(xi) is the node-b weight of the low mode
    detuning = omega_a ** 2 - omega_b ** 2
    mixing = -2 * g_ab * math.sqrt(omega_a * omega_b)
    xi = 0.5 * math.atan(mixing / detuning) if detuning else -math.pi / 4
    if omega_a < omega_b:
        xi -= math.pi / 2
    sin_xi, cos_xi = abs(math.sin(xi)), abs(math.cos(xi))

    charge = 2 * math.sqrt(math.pi * cp.Z_b / r_q) * cp.C_b / cp.C_q * omega_b
    flux = math.sqrt(r_q / (math.pi * cp.Z_b)) * cp.L_b / cp.L * omega_b
    return {
        "omega_minus": omega_minus,
        "omega_plus": omega_plus,
        "xi": xi,
        "g_q_plus": charge * math.sqrt(omega_plus / omega_b) * sin_xi,
        "g_q_minus": charge * math.sqrt(omega_minus / omega_b) * cos_xi,
        "g_phi_plus": flux * math.sqrt(omega_b / omega_plus) * sin_xi,
        "g_phi_minus": flux * math.sqrt(omega_b / omega_minus) * cos_xi,
    }


def limit_coupling_ratios(cp: CircuitParams) -> Dict[str, float]:
    """g/omega for L_s << L, C_s << C."""
    r_q = PHYSICAL["r_q"]
    return {
        "g_phi_minus": math.sqrt(r_q / (math.pi * cp.Z)),
        "g_q_minus": 2 * math.sqrt(math.pi * cp.Z / r_q) * cp.C_b / cp.C_q,
        "g_phi_plus": math.sqrt(r_q / (math.pi * cp.Z_b_limit)) * cp.L_s / cp.L,
        "g_q_plus": 2 * math.sqrt(math.pi * cp.Z_b_limit / r_q) * cp.C_b / cp.C_q,
    }


def normal_modes(cp: CircuitParams) -> NormalModeData:
    omegas, vectors = _exact_modes(cp)
    low = _couplings(cp, omegas[0], vectors[1, 0])
    high = _couplings(cp, omegas[1], vectors[1, 1])
    closed = closed_form_modes(cp)

    data = NormalModeData(
        omega_minus=float(omegas[0]),
        omega_plus=float(omegas[1]),
        xi=closed["xi"],
        g_phi_minus=low["g_phi"],
        g_phi_plus=high["g_phi"],
        g_q_minus=low["g_q"],
        g_q_plus=high["g_q"],
        Z=cp.Z,
        Z_b=cp.Z_b,
        closed_form=closed,
        limit_ratios=limit_coupling_ratios(cp),
    )
    worst = max(data.closed_form_deviation.values())
    if worst > 1e-6:
        logger.warning(f"⚠️ Closed-form modes deviate from the exact network by {worst:.2e}")
    logger.info(
        f"📊 Normal modes: omega_-/2pi={to_ghz(data.omega_minus) * 1e3:.2f} MHz, "
        f"omega_+/2pi={to_ghz(data.omega_plus):.1f} GHz, "
        f"g_phi,-/omega_-={data.ratios['g_phi_minus']:.3f}"
    )
    return data
