"""The identified state-space model together with its structural targets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_matrix(value, name: str) -> np.ndarray | None:
    if value is None:
        return None
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class StateSpaceModel:
    """Identified triple (A_hat, B_hat, C_hat) plus known structural B, C.

    A constraint side is active only when both the identified and the target
    matrix for that side are present. Models with no active side are legal
    and yield pure symmetry recovery.
    """

    A_hat: np.ndarray
    C_hat: np.ndarray | None = None
    B_hat: np.ndarray | None = None
    C_target: np.ndarray | None = None
    B_target: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "A_hat", _as_matrix(self.A_hat, "A_hat"))
        for attr in ("C_hat", "B_hat", "C_target", "B_target"):
            object.__setattr__(self, attr, _as_matrix(getattr(self, attr), attr))
        n = self.A_hat.shape[0]
        if self.A_hat.shape != (n, n):
            raise ValueError(f"A_hat must be square, got {self.A_hat.shape}")
        if self.C_hat is not None and self.C_hat.shape[1] != n:
            raise ValueError("C_hat must have n columns")
        if self.B_hat is not None and self.B_hat.shape[0] != n:
            raise ValueError("B_hat must have n rows")
        if self.C_target is not None:
            if self.C_hat is None:
                raise ValueError("C_target given without an identified C_hat")
            if self.C_target.shape != self.C_hat.shape:
                raise ValueError(
                    f"C_target {self.C_target.shape} and C_hat {self.C_hat.shape} differ"
                )
        if self.B_target is not None:
            if self.B_hat is None:
                raise ValueError("B_target given without an identified B_hat")
            if self.B_target.shape != self.B_hat.shape:
                raise ValueError(
                    f"B_target {self.B_target.shape} and B_hat {self.B_hat.shape} differ"
                )

    @property
    def n(self) -> int:
        return self.A_hat.shape[0]

    @property
    def p(self) -> int:
        return 0 if self.C_hat is None else self.C_hat.shape[0]

    @property
    def m(self) -> int:
        return 0 if self.B_hat is None else self.B_hat.shape[1]

    @property
    def output_constrained(self) -> bool:
        return self.C_target is not None

    @property
    def input_constrained(self) -> bool:
        return self.B_target is not None
