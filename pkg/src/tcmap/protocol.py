"""One step of the iterated postselection protocol, ideal and numerically exact.

A step takes two atoms prepared in the same pure state labelled by z, applies
the single-qubit gate diag(e^{i varphi}, -e^{-i varphi}) to atom B, lets the
pair interact with the coherent field, projects the field back onto |alpha>
and atom B onto |0>, and reads off the new label z' of atom A.  The ideal
step uses the rank-two postselection projector; the exact step compresses
the full truncated field evolution into a 4x4 operator and reproduces the
ideal map in the limit of large mean photon number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .rational_map import DegenerateParameterError, DEGENERACY_EPS
from .sphere import INFINITY, SpherePoint, as_point, is_infinite
from .tavis_cummings import (
    AtomPairState,
    CoherentFieldSpec,
    evolve_exact,
    poisson_amplitudes,
)

NULL_OUTCOME_EPS = 1e-14


class NullOutcomeError(ValueError):
    """Raised when a postselection outcome has (numerically) zero probability."""


def _require_gate(varphi: float) -> None:
    if abs(math.cos(varphi)) < DEGENERACY_EPS:
        raise DegenerateParameterError(
            f"gate angle varphi={varphi!r} makes every step land on |0> (cos varphi ~ 0)"
        )


def gate_unitary(varphi: float) -> np.ndarray:
    """The single-atom gate diag(e^{i varphi}, -e^{-i varphi}), basis (|1>, |0>)."""
    return np.array(
        [[cmath.exp(1j * varphi), 0.0], [0.0, -cmath.exp(-1j * varphi)]],
        dtype=np.complex128,
    )


def _gate_diag4(varphi: float) -> np.ndarray:
    # gate on atom B in the product basis (|1,1>, |1,0>, |0,1>, |0,0>)
    gp = cmath.exp(1j * varphi)
    gm = -cmath.exp(-1j * varphi)
    return np.array([gp, gm, gp, gm], dtype=np.complex128)


def product_state_vector(z: SpherePoint) -> np.ndarray:
    """Normalized two-copy state of |0> + z|1> in the product basis.

    Evaluated through 1/z for |z| > 1 so that arbitrarily large labels and
    the point at infinity (the state |1,1>) stay exact; the two evaluation
    branches differ only by a global phase.
    """
    z = as_point(z)
    if is_infinite(z):
        return np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)
    if abs(z) <= 1.0:
        return np.array([z * z, z, z, 1.0], dtype=np.complex128) / (1.0 + abs(z) ** 2)
    w = 1.0 / z
    return np.array([1.0, w, w, w * w], dtype=np.complex128) / (1.0 + abs(w) ** 2)


def step_amplitudes(z: SpherePoint, varphi: float, phi: float = 0.0) -> AtomPairState:
    """Atomic amplitudes after the gate on atom B, before the field interaction.

    The per-atom state is (|0> + z e^{i phi} |1>)/sqrt(1+|z|^2); z at
    infinity means |1,1>.  All four amplitudes are carried: the |Psi+>
    component drops out of the ideal postselection but feeds the exact one.
    """
    z = as_point(z)
    eg = cmath.exp(1j * varphi)
    if is_infinite(z):
        return AtomPairState(c0=0j, cminus=0j, cplus=0j, c1=eg * cmath.exp(2j * phi))
    norm = 1.0 + abs(z) ** 2
    zph = z * cmath.exp(1j * phi)
    return AtomPairState(
        c0=-cmath.exp(-1j * varphi) / norm,
        cminus=math.sqrt(2.0) * zph * math.cos(varphi) / norm,
        cplus=1j * math.sqrt(2.0) * zph * math.sin(varphi) / norm,
        c1=zph * zph * eg / norm,
    )


def protocol_step_ideal(z: SpherePoint, varphi: float, phi: float = 0.0) -> tuple[SpherePoint, float]:
    """One ideal step: new label z' and the success probability of both projections.

    Computed entirely through the postselection amplitudes (not through the
    closed-form rational map): the field projection keeps the |Psi-> and
    |Phi-_phi> components, the |0>_B projection then contributes 1/2, and
    p_success is bounded below by cos^2(varphi)/4 for every z.
    """
    _require_gate(varphi)
    amps = step_amplitudes(z, varphi, phi)
    # <Phi-_phi| component of the gated state
    d = (cmath.exp(1j * phi) * amps.c0 - cmath.exp(-1j * phi) * amps.c1) / math.sqrt(2.0)
    # after <0|_B: amplitude of |1>_A is -cminus/sqrt2, of |0>_A is d e^{-i phi}/sqrt2
    amp1 = -amps.cminus / math.sqrt(2.0)
    amp0 = d * cmath.exp(-1j * phi) / math.sqrt(2.0)
    p_success = abs(amp1) ** 2 + abs(amp0) ** 2
    # relative pole rule analogous to the rational map's denominator test
    if abs(amp0) <= 1e-14 * abs(amp1):
        return INFINITY, p_success
    # z' is defined against the e^{i phi} convention of the one-atom state
    return (amp1 / amp0) * cmath.exp(-1j * phi), p_success


@dataclass(frozen=True)
class ExactStepOperator:
    """4x4 compression <alpha| e^{-iHt} |alpha> in the product atomic basis."""

    matrix: np.ndarray
    nbar: float
    gt: float

    def exchange_symmetric_defect(self) -> float:
        """Max deviation from A<->B exchange symmetry (swap of |1,0>, |0,1>)."""
        perm = [0, 2, 1, 3]
        swapped = self.matrix[np.ix_(perm, perm)]
        return float(np.max(np.abs(self.matrix - swapped)))


_BELL_INPUTS = (
    AtomPairState(c0=0j, cminus=0j, cplus=0j, c1=1.0 + 0j),                        # |1,1>
    AtomPairState(c0=0j, cminus=-1 / math.sqrt(2) + 0j, cplus=1 / math.sqrt(2) + 0j, c1=0j),  # |1,0>
    AtomPairState(c0=0j, cminus=1 / math.sqrt(2) + 0j, cplus=1 / math.sqrt(2) + 0j, c1=0j),   # |0,1>
    AtomPairState(c0=1.0 + 0j, cminus=0j, cplus=0j, c1=0j),                        # |0,0>
)


def default_interaction_time(nbar: float) -> float:
    """The protocol's interaction time gt = pi sqrt(nbar) / 2."""
    return math.pi * math.sqrt(nbar) / 2.0


def exact_step_operator(field: CoherentFieldSpec, gt: Optional[float] = None) -> ExactStepOperator:
    """Exact 4x4 step operator for the given field, column by column.

    Each product-basis input evolves through the block eigensystem and is
    projected back on the truncated |alpha>; the |Psi-> channel survives
    with coefficient <alpha|alpha> (unity up to the truncation tail).
    """
    if gt is None:
        gt = default_interaction_time(field.nbar)
    bra = poisson_amplitudes(field)
    m = np.zeros((4, 4), dtype=np.complex128)
    for col, atom in enumerate(_BELL_INPUTS):
        joint = evolve_exact(atom, field, gt)
        projected = joint.project_field(bra)
        m[:, col] = projected.to_product_basis()
    return ExactStepOperator(matrix=m, nbar=field.nbar, gt=gt)


def protocol_step_exact(
    z: SpherePoint,
    varphi: float,
    op: ExactStepOperator,
) -> tuple[SpherePoint, float]:
    """One numerically exact step through the compressed operator.

    Builds the two-atom product state for z (field phase fixed to 0),
    applies the gate to atom B, applies the operator, projects atom B on
    |0>, renormalizes.  Raises NullOutcomeError when the surviving norm is
    below NULL_OUTCOME_EPS.
    """
    _require_gate(varphi)
    v = product_state_vector(z)
    u = op.matrix @ (_gate_diag4(varphi) * v)
    amp1 = u[1]  # |1,0> = |1>_A |0>_B
    amp0 = u[3]  # |0,0>
    p_success = float(abs(amp1) ** 2 + abs(amp0) ** 2)
    if p_success < NULL_OUTCOME_EPS:
        raise NullOutcomeError(f"postselection outcome has probability {p_success:.3e}")
    if abs(amp0) <= 1e-14 * abs(amp1):
        return INFINITY, p_success
    return complex(amp1 / amp0), p_success


def write_step_operator(op: Union[ExactStepOperator, np.ndarray], path) -> None:
    """Serialize the 16 complex entries, row-major, one matrix row per line.

    Format: four lines of eight comma-separated floats (re,im per entry),
    17 significant digits, basis order (|1,1>, |1,0>, |0,1>, |0,0>).
    """
    m = op.matrix if isinstance(op, ExactStepOperator) else np.asarray(op)
    if m.shape != (4, 4):
        raise ValueError("expected a 4x4 operator")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in m:
            cells = []
            for entry in row:
                cells.append(f"{entry.real:.17g}")
                cells.append(f"{entry.imag:.17g}")
            fh.write(",".join(cells) + "\n")


def read_step_operator(path, nbar: float = math.nan, gt: float = math.nan) -> ExactStepOperator:
    """Load a serialized step operator; nbar/gt metadata are caller-supplied."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vals = [float(tok) for tok in line.split(",")]
            if len(vals) != 8:
                raise ValueError(f"expected 8 numbers per line, got {len(vals)}")
            rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(4)])
    if len(rows) != 4:
        raise ValueError(f"expected 4 lines, got {len(rows)}")
    return ExactStepOperator(matrix=np.array(rows, dtype=np.complex128), nbar=nbar, gt=gt)
