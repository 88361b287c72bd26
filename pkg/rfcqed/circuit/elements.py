"""
Lumped-element description of the two-qubit rf circuit: LC resonator with
parasitic self-capacitance C_s and self-inductance L_s, three-junction flux
qubits sharing node b. Inputs are laboratory units (fF, pF, nH, GHz); the
SI properties below are the single conversion boundary.
"""
import math
from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rfcqed.config import FEMTO, GIGA, NANO, PHYSICAL, PICO, REFERENCE_CIRCUIT
from rfcqed.utils.logger import get_logger

logger = get_logger("rfcqed.circuit.elements")


def to_ghz(omega: float) -> float:
    """Angular frequency (rad/s) -> ordinary frequency in GHz."""
    return omega / (2 * math.pi * GIGA)


def joules_to_ghz(energy: float) -> float:
    return energy / PHYSICAL["h"] / GIGA


class CircuitParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    C_J_fF: float = Field(gt=0)
    E_J_GHz: float = Field(gt=0)
    alpha: float = Field(gt=0)
    C_pF: float = Field(gt=0)
    L_nH: float = Field(gt=0)
    C_s_fF: float = Field(gt=0)
    L_s_nH: float = Field(gt=0)
    flux_bias: float = 0.5  # Phi_e in flux quanta; 0.5 is the sweet spot
    qubits_on_node: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def _warn_alpha(self) -> "CircuitParams":
        if not 0 < self.alpha < 1:
            logger.warning(f"⚠️ Junction asymmetry alpha={self.alpha} outside the usual (0, 1) range")
        return self

    @classmethod
    def reference_circuit(cls, **overrides) -> "CircuitParams":
        values = dict(REFERENCE_CIRCUIT)
        values.update(overrides)
        return cls(**values)

    def scaled_parasitics(self, factor: float) -> "CircuitParams":
        """Same circuit with C_s and L_s multiplied by factor."""
        return self.model_copy(update={"C_s_fF": self.C_s_fF * factor, "L_s_nH": self.L_s_nH * factor})

    # SI values
    @property
    def C_J(self) -> float:
        return self.C_J_fF * FEMTO

    @property
    def C(self) -> float:
        return self.C_pF * PICO

    @property
    def L(self) -> float:
        return self.L_nH * NANO

    @property
    def C_s(self) -> float:
        return self.C_s_fF * FEMTO

    @property
    def L_s(self) -> float:
        return self.L_s_nH * NANO

    @property
    def C_q(self) -> float:
        return self.C_J * (self.alpha + 0.5)

    @property
    def C_minus(self) -> float:
        return self.C_J / 2

    @property
    def C_b(self) -> float:
        return self.C_s * self.C_q / (self.C_q + self.qubits_on_node * self.C_s)

    @property
    def L_b(self) -> float:
        """Inductance seen from node b with node a grounded through C: L_s in parallel with L."""
        return self.L * self.L_s / (self.L + self.L_s)

    @property
    def Z(self) -> float:
        return math.sqrt(self.L / self.C)

    @property
    def Z_a(self) -> float:
        return math.sqrt(self.L_s / self.C)

    @property
    def Z_b(self) -> float:
        return math.sqrt(self.L_b / self.C_b)

    @property
    def Z_b_limit(self) -> float:
        """sqrt(L_s/C_b), the impedance entering the small-parasitics coupling estimates."""
        return math.sqrt(self.L_s / self.C_b)

    # qubit energy scales, GHz
    @property
    def E_C_GHz(self) -> float:
        return joules_to_ghz(PHYSICAL["e"] ** 2 / (2 * self.C_J))

    @property
    def E_L_GHz(self) -> float:
        return joules_to_ghz(PHYSICAL["phi0"] ** 2 / self.L)

    @property
    def flux_phase(self) -> float:
        return 2 * math.pi * self.flux_bias

    def derived(self) -> Dict[str, float]:
        return {
            "C_q_fF": self.C_q / FEMTO,
            "C_b_fF": self.C_b / FEMTO,
            "L_b_nH": self.L_b / NANO,
            "Z_ohm": self.Z,
            "Z_a_ohm": self.Z_a,
            "Z_b_ohm": self.Z_b,
            "E_C_GHz": self.E_C_GHz,
            "E_L_GHz": self.E_L_GHz,
        }
