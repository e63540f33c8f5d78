"""Entanglement quantification for bipartite Gaussian states.

Partial transposition acts in phase space as a sign flip of the momentum
quadratures of one party. Log-negativity is computed in natural-log units
from the symplectic eigenvalues of the partially transposed covariance
matrix: E_N = sum_k max(0, -ln nu_tilde_k). (Some references use log2; the
conversion is the constant factor 1/ln 2.)
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSplit
from .states import GaussianState
from .symplectic import quad_indices, symplectic_eigenvalues

#: PPT threshold on the smallest PT symplectic eigenvalue.
PPT_TOL = 1e-9


@dataclass(frozen=True)
class BipartiteSplit:
    """Partition of the modes of a state between Alice and Bob."""

    alice: tuple
    bob: tuple

    def __post_init__(self):
        alice = tuple(int(m) for m in self.alice)
        bob = tuple(int(m) for m in self.bob)
        if not alice or not bob:
            raise InvalidSplit("both parties need at least one mode")
        if set(alice) & set(bob):
            raise InvalidSplit(f"parties overlap: {set(alice) & set(bob)}")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    def validate_for(self, n_modes: int) -> None:
        modes = set(self.alice) | set(self.bob)
        if modes != set(range(n_modes)):
            raise InvalidSplit(
                f"split {self.alice}|{self.bob} does not cover modes 0..{n_modes - 1}"
            )


@dataclass(frozen=True)
class EntanglementReport:
    """Log-negativity figures for one state and split.

    ``ppt_conclusive`` is True only for 1-vs-1 mode splits, where PPT is
    necessary and sufficient for separability; beyond that PPT is only a
    necessary condition and ``ppt`` must be read as "not detected by PPT".
    """

    log_negativity: float
    min_pt_symplectic_eigenvalue: float
    ppt: bool
    ppt_conclusive: bool

    def to_dict(self) -> dict:
        return {
            "log_negativity": self.log_negativity,
            "nu_tilde_min": self.min_pt_symplectic_eigenvalue,
            "ppt": self.ppt,
            "ppt_conclusive": self.ppt_conclusive,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def partial_transpose_cov(cov: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """Covariance of the partial transpose: momentum signs flipped on Bob."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    split.validate_for(n)
    lam = np.ones(2 * n)
    lam[quad_indices(split.bob)[1::2]] = -1.0
    return cov * np.outer(lam, lam)


def log_negativity(state: GaussianState, split: BipartiteSplit) -> EntanglementReport:
    """Entanglement report for a physical state across ``split``."""
    state.require_physical()
    nus = symplectic_eigenvalues(partial_transpose_cov(state.cov, split))
    nu_min = float(nus[-1])
    e_n = float(np.sum(np.maximum(0.0, -np.log(nus))))
    return EntanglementReport(
        log_negativity=e_n,
        min_pt_symplectic_eigenvalue=nu_min,
        ppt=nu_min >= 1.0 - PPT_TOL,
        ppt_conclusive=len(split.alice) == 1 and len(split.bob) == 1,
    )


def ppt_separable(state: GaussianState, split: BipartiteSplit) -> bool:
    """PPT check; exact separability criterion only for 1-vs-1 mode splits."""
    return log_negativity(state, split).ppt
