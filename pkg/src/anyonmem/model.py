"""Anyon model data: charges, fusion rules, braiding and modular data.

The only model shipped is the Ising anyon model (vacuum, fermion, sigma),
whose non-Abelian sector underlies every simulation in this package.  The
`AnyonModel` interface is deliberately small so that an Abelian toy model or
a different non-Abelian theory could be dropped in, but nothing else is
implemented here.

Conventions
-----------
Charges are ordered ``VACUUM < FERMION < SIGMA`` everywhere a matrix basis
is needed.  ``f_matrix(a, b, c, d)`` returns the change-of-basis matrix
between the two fusion orders of ``a x b x c -> d``, rows indexed by the
``a x b`` intermediate charge and columns by the ``b x c`` intermediate
charge, both restricted to admissible labels in charge order.
``braid_phase(a, b, c)`` is the phase acquired when ``a`` is exchanged
clockwise with ``b`` in definite fusion channel ``c``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

import numpy as np


class Charge(Enum):
    """Topological charge labels of the Ising anyon model."""

    VACUUM = 0
    FERMION = 1
    SIGMA = 2

    def __repr__(self) -> str:  # compact in test output
        return self.name

    @property
    def is_trivial(self) -> bool:
        return self is Charge.VACUUM


CHARGES: Tuple[Charge, Charge, Charge] = (Charge.VACUUM, Charge.FERMION, Charge.SIGMA)

_I, _F, _S = Charge.VACUUM, Charge.FERMION, Charge.SIGMA

# Fusion table: admissible outcomes of a x b, in charge order.
_FUSION: Dict[Tuple[Charge, Charge], Tuple[Charge, ...]] = {
    (_I, _I): (_I,),
    (_I, _F): (_F,),
    (_I, _S): (_S,),
    (_F, _F): (_I,),
    (_F, _S): (_S,),
    (_S, _S): (_I, _F),
}
for (_a, _b), _out in list(_FUSION.items()):
    _FUSION[(_b, _a)] = _out

# Clockwise exchange phases R^{ab}_c keyed by (a, b, c).  Unlisted admissible
# triples involving the vacuum are all 1.
_R_PHASE: Dict[Tuple[Charge, Charge, Charge], complex] = {
    (_F, _F, _I): -1.0 + 0j,
    (_S, _S, _I): cmath.exp(-1j * cmath.pi / 8),
    (_S, _S, _F): cmath.exp(3j * cmath.pi / 8),
    (_F, _S, _S): -1j,
    (_S, _F, _S): -1j,
}


class FusionError(ValueError):
    """Raised for queries about charge combinations that cannot fuse."""


@dataclass(frozen=True)
class IsingAnyonModel:
    """Static data of the Ising anyon model plus consistency checks.

    All matrix elements are exact up to floating point in the eighth roots
    of unity; nothing here is fitted or tuned.
    """

    name: str = "ising"
    charges: Tuple[Charge, ...] = CHARGES
    _spins: Dict[Charge, complex] = field(
        default_factory=lambda: {
            _I: 1.0 + 0j,
            _F: -1.0 + 0j,
            _S: cmath.exp(1j * cmath.pi / 8),
        }
    )

    # -- basic data -------------------------------------------------------

    def fusion(self, a: Charge, b: Charge) -> Tuple[Charge, ...]:
        """Admissible fusion outcomes of ``a x b`` in charge order."""
        return _FUSION[(a, b)]

    def can_fuse(self, a: Charge, b: Charge, c: Charge) -> bool:
        return c in _FUSION[(a, b)]

    def quantum_dimension(self, a: Charge) -> float:
        return float(np.sqrt(2.0)) if a is _S else 1.0

    @property
    def total_quantum_dimension(self) -> float:
        """sqrt(sum of squared quantum dimensions) = 2 for Ising."""
        return float(np.sqrt(sum(self.quantum_dimension(c) ** 2 for c in self.charges)))

    def topological_spin(self, a: Charge) -> complex:
        return self._spins[a]

    def dual(self, a: Charge) -> Charge:
        """Antiparticle of ``a``; every Ising charge is its own dual."""
        return a

    # -- braiding and F-moves --------------------------------------------

    def braid_phase(self, a: Charge, b: Charge, c: Charge) -> complex:
        """Phase for a clockwise exchange of ``a`` and ``b`` fusing to ``c``."""
        if not self.can_fuse(a, b, c):
            raise FusionError(f"{a} x {b} cannot give {c}")
        return _R_PHASE.get((a, b, c), 1.0 + 0j)

    def monodromy_phase(self, a: Charge, b: Charge, c: Charge) -> complex:
        """Phase for a full anticlockwise-free wrap of ``a`` around ``b``."""
        return self.braid_phase(a, b, c) * self.braid_phase(b, a, c)

    def f_matrix_basis(
        self, a: Charge, b: Charge, c: Charge, d: Charge
    ) -> Tuple[Tuple[Charge, ...], Tuple[Charge, ...]]:
        """Row and column charge labels of ``f_matrix(a, b, c, d)``."""
        rows = tuple(e for e in self.fusion(a, b) if self.can_fuse(e, c, d))
        cols = tuple(f for f in self.fusion(b, c) if self.can_fuse(a, f, d))
        return rows, cols

    def f_matrix(self, a: Charge, b: Charge, c: Charge, d: Charge) -> np.ndarray:
        """Basis change between the two fusion orders of ``a x b x c -> d``.

        Returns a complex matrix indexed by the admissible intermediate
        charges (see `f_matrix_basis`).  Raises `FusionError` when ``d``
        cannot be reached at all.
        """
        rows, cols = self.f_matrix_basis(a, b, c, d)
        if not rows or not cols:
            raise FusionError(f"{a} x {b} x {c} cannot give {d}")
        mat = np.zeros((len(rows), len(cols)), dtype=complex)
        for i, e in enumerate(rows):
            for j, f in enumerate(cols):
                mat[i, j] = self._f_element(a, b, c, d, e, f)
        return mat

    def _f_element(
        self, a: Charge, b: Charge, c: Charge, d: Charge, e: Charge, f: Charge
    ) -> complex:
        """Single element [F^{abc}_d]_{ef}; 0 when either path is inadmissible."""
        if not (self.can_fuse(a, b, e) and self.can_fuse(e, c, d)):
            return 0.0
        if not (self.can_fuse(b, c, f) and self.can_fuse(a, f, d)):
            return 0.0
        if _I in (a, b, c):
            return 1.0
        trip = (a, b, c, d)
        if trip == (_F, _F, _F, _F):
            return 1.0
        if trip == (_S, _F, _S, _F) or trip == (_F, _S, _F, _S):
            return -1.0
        if trip == (_S, _S, _S, _S):
            sign = -1.0 if (e is _F and f is _F) else 1.0
            return sign / np.sqrt(2.0)
        return 1.0

    # -- modular data -----------------------------------------------------

    def s_matrix(self, flux: Charge) -> np.ndarray:
        """Flux-sector S-matrix in charge order.

        ``flux=VACUUM`` gives the modular S-matrix; the fermion-flux sector
        has a single nonzero element and the sigma-flux sector vanishes
        identically.
        """
        rt2 = np.sqrt(2.0)
        if flux is _I:
            return np.array(
                [[1, 1, rt2], [1, 1, -rt2], [rt2, -rt2, 0]], dtype=complex
            ) / 2.0
        if flux is _F:
            out = np.zeros((3, 3), dtype=complex)
            out[2, 2] = cmath.exp(-1j * cmath.pi / 4)
            return out
        return np.zeros((3, 3), dtype=complex)

    # -- consistency ------------------------------------------------------

    def check_consistency(self, atol: float = 1e-12) -> Dict[str, bool]:
        """Verify the algebraic identities the model data must satisfy.

        Checks the pentagon identity, both hexagon identities, the ribbon
        relation between exchange phases and topological spins, quantum
        dimension bookkeeping, and unitarity/symmetry of the modular
        S-matrix.  Returns a dict of named booleans (all True for the
        shipped data); useful as a self-test hook.
        """
        report = {
            "pentagon": self._check_pentagon(atol),
            "hexagon_clockwise": self._check_hexagon(atol, inverse=False),
            "hexagon_anticlockwise": self._check_hexagon(atol, inverse=True),
            "ribbon": self._check_ribbon(atol),
            "quantum_dimensions": self._check_dims(atol),
            "s_matrix": self._check_s_matrix(atol),
        }
        return report

    def _check_pentagon(self, atol: float) -> bool:
        C = self.charges
        F = self._f_element
        for a in C:
            for b in C:
                for c in C:
                    for d in C:
                        for e in C:
                            for f in C:
                                for g in C:
                                    for k in C:
                                        for l in C:
                                            lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k)
                                            rhs = sum(
                                                F(a, b, c, g, f, h)
                                                * F(a, h, d, e, g, k)
                                                * F(b, c, d, k, h, l)
                                                for h in C
                                            )
                                            if abs(lhs - rhs) > atol:
                                                return False
        return True

    def _check_hexagon(self, atol: float, inverse: bool) -> bool:
        C = self.charges

        def R(x: Charge, y: Charge, z: Charge) -> complex:
            if not self.can_fuse(x, y, z):
                return 0.0
            phase = self.braid_phase(x, y, z)
            return phase.conjugate() if inverse else phase

        F = self._f_element
        for a in C:
            for b in C:
                for c in C:
                    for d in C:
                        for e in C:
                            for g in C:
                                # Both sides vanish unless the outer labels fuse.
                                lhs = R(c, a, e) * F(a, c, b, d, e, g) * R(c, b, g)
                                rhs = sum(
                                    F(c, a, b, d, e, f) * R(c, f, d) * F(a, b, c, d, f, g)
                                    for f in C
                                )
                                if abs(lhs - rhs) > atol:
                                    return False
        return True

    def _check_ribbon(self, atol: float) -> bool:
        for (a, b), outs in _FUSION.items():
            for c in outs:
                lhs = self.braid_phase(a, b, c) * self.braid_phase(b, a, c)
                rhs = self.topological_spin(c) / (
                    self.topological_spin(a) * self.topological_spin(b)
                )
                if abs(lhs - rhs) > atol:
                    return False
        return True

    def _check_dims(self, atol: float) -> bool:
        ok = True
        for (a, b), outs in _FUSION.items():
            lhs = self.quantum_dimension(a) * self.quantum_dimension(b)
            rhs = sum(self.quantum_dimension(c) for c in outs)
            ok = ok and abs(lhs - rhs) <= atol
        ok = ok and abs(self.total_quantum_dimension - 2.0) <= atol
        return ok

    def _check_s_matrix(self, atol: float) -> bool:
        s = self.s_matrix(_I)
        unitary = np.allclose(s @ s.conj().T, np.eye(3), atol=atol)
        symmetric = np.allclose(s, s.T, atol=atol)
        # S^2 is charge conjugation, which is trivial for Ising.
        involutive = np.allclose(s @ s, np.eye(3), atol=atol)
        # Verlinde-consistent first row: S_{0a} = d_a / D.
        dims_ok = np.allclose(
            s[0].real,
            [self.quantum_dimension(c) / self.total_quantum_dimension for c in self.charges],
            atol=atol,
        )
        return bool(unitary and symmetric and involutive and dims_ok)


ISING = IsingAnyonModel()

# The interface other code programs against: any object with the same methods
# as IsingAnyonModel.  Kept as an alias rather than an ABC; there is exactly
# one model and duck typing keeps call sites simple.
AnyonModel = IsingAnyonModel
