"""Dense state-vector reference for small collections of Majorana modes.

Pairs map onto qubits through a Jordan-Wigner encoding in creation order:
the pair made at step k becomes qubit k, with mode operators
``c[2k] = Z...Z X_k`` and ``c[2k+1] = Z...Z Y_k``, so a vacuum pair is a
qubit in |0>.  Everything is simulated on the full 2^n amplitude vector,
which keeps this honest and slow: it shares no bookkeeping with the
tableau simulator it cross-checks, and it is only meant for a couple
dozen modes.

Mode ids are arbitrary; callers bind them at insertion so that a twin run
against another simulator can use identical labels.  Qubits are never
deallocated.  Dropping a fused pair from the bookkeeping just forgets the
ids; a fused pair commutes with every operation on the survivors, so the
statistics of everything still tracked are unchanged.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .tableau import MajoranaProduct

__all__ = ["DenseMajoranaSim"]

_SNAP_TOL = 1e-9


class DenseMajoranaSim:
    def __init__(self) -> None:
        self._psi = np.ones(1, dtype=complex)
        self._nq = 0
        self._wire: dict[int, int] = {}
        self._sign: dict[int, int] = {}
        self._next_id = 0
        self._parity_cache: dict[int, np.ndarray] = {}

    @property
    def num_qubits(self) -> int:
        return self._nq

    @property
    def mode_ids(self) -> list[int]:
        return sorted(self._wire)

    def state(self) -> np.ndarray:
        return self._psi.copy()

    # ------------------------------------------------------------------

    def insert_vacuum_pair(
        self, u: Optional[int] = None, v: Optional[int] = None
    ) -> tuple[int, int]:
        """Append a fresh vacuum pair, optionally binding it to given ids."""
        if u is None:
            u = self._fresh_id()
        if v is None:
            v = self._fresh_id()
        if u == v or u in self._wire or v in self._wire:
            raise ValueError(f"bad mode ids for a fresh pair: {u}, {v}")
        self._psi = np.kron(self._psi, np.array([1.0, 0.0], dtype=complex))
        self._wire[u] = 2 * self._nq
        self._wire[v] = 2 * self._nq + 1
        self._sign[u] = 1
        self._sign[v] = 1
        self._nq += 1
        return u, v

    def release_pair(self, u: int, v: int) -> None:
        """Forget two ids (their qubit stays in the vector, untouched)."""
        del self._wire[u], self._sign[u]
        del self._wire[v], self._sign[v]

    def braid(self, u: int, v: int, clockwise: bool = True) -> None:
        """Exchange two modes: clockwise maps c[u] -> c[v], c[v] -> -c[u]."""
        phi = self._apply_mode(v, self._psi)
        phi = self._apply_mode(u, phi)
        if clockwise:
            self._psi = (self._psi - phi) / np.sqrt(2.0)
        else:
            self._psi = (self._psi + phi) / np.sqrt(2.0)

    def negate_mode(self, u: int) -> None:
        self._sign[u] = -self._sign[u]

    def outcome_distribution(self, op: MajoranaProduct) -> tuple[float, float]:
        phi = self._apply_product(op)
        p_plus = float(np.linalg.norm(self._psi + phi) ** 2) / 4.0
        p_minus = float(np.linalg.norm(self._psi - phi) ** 2) / 4.0
        return self._snap(p_plus), self._snap(p_minus)

    def measure(self, op: MajoranaProduct, rng=None, forced: Optional[int] = None) -> int:
        phi = self._apply_product(op)
        p_plus = self._snap(float(np.linalg.norm(self._psi + phi) ** 2) / 4.0)
        if forced is not None:
            s = 1 if forced > 0 else -1
            if (s > 0 and p_plus == 0.0) or (s < 0 and p_plus == 1.0):
                raise ValueError("forced outcome has probability zero")
        elif p_plus == 1.0:
            s = 1
        elif p_plus == 0.0:
            s = -1
        else:
            if rng is None:
                raise ValueError("random outcome needs an rng or a forced value")
            s = 1 if rng.random() < p_plus else -1
        proj = (self._psi + phi) / 2.0 if s > 0 else (self._psi - phi) / 2.0
        self._psi = proj / np.linalg.norm(proj)
        return s

    def snapshot(self):
        return (self._psi.copy(), self._nq, dict(self._wire), dict(self._sign),
                self._next_id)

    def restore(self, snap) -> None:
        psi, nq, wire, sign, next_id = snap
        self._psi = psi.copy()
        self._nq = nq
        self._wire = dict(wire)
        self._sign = dict(sign)
        self._next_id = next_id

    # ------------------------------------------------------------------

    def _fresh_id(self) -> int:
        while self._next_id in self._wire:
            self._next_id += 1
        nid = self._next_id
        self._next_id += 1
        return nid

    @staticmethod
    def _snap(p: float) -> float:
        for target in (0.0, 0.5, 1.0):
            if abs(p - target) < _SNAP_TOL:
                return target
        raise AssertionError(f"outcome probability {p} is not in {{0, 1/2, 1}}")

    def _prefix_parity(self, k: int) -> np.ndarray:
        if k not in self._parity_cache:
            vec = np.ones(1)
            for _ in range(k):
                vec = np.concatenate([vec, -vec])
            self._parity_cache[k] = vec
        return self._parity_cache[k]

    def _apply_mode(self, mode_id: int, psi: np.ndarray) -> np.ndarray:
        """Apply c[mode_id] (with its sign flag) to an amplitude vector."""
        wire = self._wire[mode_id]
        k, which = divmod(wire, 2)
        pre = 1 << k
        suf = 1 << (self._nq - k - 1)
        psi = psi.reshape(pre, 2, suf)
        out = np.empty_like(psi)
        if which == 0:  # X on qubit k
            out[:, 0, :] = psi[:, 1, :]
            out[:, 1, :] = psi[:, 0, :]
        else:  # Y on qubit k
            out[:, 0, :] = -1j * psi[:, 1, :]
            out[:, 1, :] = 1j * psi[:, 0, :]
        if k:
            out *= self._prefix_parity(k).reshape(pre, 1, 1)
        if self._sign[mode_id] < 0:
            out = -out
        return out.reshape(-1)

    def _apply_product(self, op: MajoranaProduct) -> np.ndarray:
        phi = self._psi
        for m in reversed(op.modes):
            phi = self._apply_mode(m, phi)
        return (1j ** op.k) * phi
