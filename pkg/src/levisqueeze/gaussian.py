"""Linear-Gaussian plumbing shared by every model in the package.

Conventions
-----------
Quadratures are ordered in canonical pairs, one (position-like,
momentum-like) pair per bosonic mode.  Covariances are kept in the
"vacuum = identity" normalization

    V_ij = <r_i r_j + r_j r_i> - 2 <r_i><r_j>,

so a pure vacuum state has V = I and a thermal state with occupation n has
V = (2n + 1) I.  With [x, p] = i the commutators read [r_i, r_j] = i Omega_ij
and physical states satisfy V + i Omega >= 0.

A model is the pair (A, N) of drift and diffusion generating the Lyapunov
flow dV/dt = A V + V A^T + N; both may depend on time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import BasisError, CovarianceError, ParameterError

# Tolerances used across the package: symmetry is relative to the largest
# entry, physicality is an absolute floor on the eigenvalues of V + i Omega.
SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9


def _frozen(a: NDArray[np.float64]) -> NDArray[np.float64]:
    """Copy an array and make it read-only."""
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class QuadratureBasis:
    """Ordered quadrature labels, two per mode."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) == 0 or len(self.labels) % 2 != 0:
            raise BasisError(f"need an even, nonzero number of labels, got {self.labels!r}")
        if len(set(self.labels)) != len(self.labels):
            raise BasisError(f"duplicate quadrature labels in {self.labels!r}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def n_modes(self) -> int:
        return len(self.labels) // 2

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise BasisError(f"label {label!r} not in basis {self.labels!r}") from None


#: Cavity quadratures followed by the mechanical pair.
CAVITY_MECH = QuadratureBasis(("X", "Y", "x", "p"))
#: Mechanical pair alone, for models with the cavity integrated out.
MECH = QuadratureBasis(("x", "p"))


def _omega(dim: int) -> NDArray[np.float64]:
    """Symplectic form for dim quadratures as a plain array."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(dim // 2), block)


@dataclass(frozen=True, eq=False)
class SymplecticForm:
    """Block-diagonal symplectic form attached to a basis."""

    basis: QuadratureBasis
    omega: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", _frozen(self.omega))


def symplectic_form(basis: QuadratureBasis) -> SymplecticForm:
    """Return the symplectic form Omega for the given basis."""
    return SymplecticForm(basis, _omega(basis.dim))


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric covariance matrix tied to a quadrature basis.

    The constructor enforces the structural invariants (symmetry within
    SYMMETRY_TOL relative to the largest entry, strictly positive diagonal)
    and stores a read-only symmetrized copy.  Physicality against the
    uncertainty bound is a separate, report-only check: see
    :func:`validate_covariance`.
    """

    basis: QuadratureBasis
    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        v = np.asarray(self.entries, dtype=float)
        if v.shape != (self.basis.dim, self.basis.dim):
            raise CovarianceError(
                f"shape {v.shape} does not match basis dimension {self.basis.dim}"
            )
        if not np.all(np.isfinite(v)):
            raise CovarianceError("covariance has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(v))))
        asym = float(np.max(np.abs(v - v.T)))
        if asym > SYMMETRY_TOL * scale:
            raise CovarianceError(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e} * {scale:.3e}")
        if np.any(np.diag(v) <= 0.0):
            raise CovarianceError(f"non-positive diagonal entries {np.diag(v)}")
        object.__setattr__(self, "entries", _frozen(0.5 * (v + v.T)))

    def block(self, labels: tuple[str, ...]) -> "CovarianceMatrix":
        """Sub-covariance for a subset of quadratures, in the given order."""
        idx = [self.basis.index(l) for l in labels]
        return CovarianceMatrix(QuadratureBasis(tuple(labels)), self.entries[np.ix_(idx, idx)])


@dataclass(frozen=True)
class ModelDescriptor:
    """What a model is and where its numbers came from."""

    variant: str
    summary: str = ""
    params: object = None  # SystemParams for the physics builders, else None


@dataclass(frozen=True, eq=False)
class LinearGaussianModel:
    """Drift/diffusion pair generating dV/dt = A V + V A^T + N.

    drift_at / diffusion_at return dense arrays for any time; models built
    from time-independent physics set is_time_independent so solvers can take
    the cheap path.  fastest_rate is the largest rate appearing in the
    generator and fixes the default integration step.
    """

    basis: QuadratureBasis
    drift_at: Callable[[float], NDArray[np.float64]]
    diffusion_at: Callable[[float], NDArray[np.float64]]
    is_time_independent: bool
    descriptor: ModelDescriptor
    fastest_rate: float = field(default=1.0)

    @staticmethod
    def constant(
        basis: QuadratureBasis,
        drift: NDArray[np.float64],
        diffusion: NDArray[np.float64],
        descriptor: ModelDescriptor,
        fastest_rate: float,
    ) -> "LinearGaussianModel":
        a = _frozen(drift)
        n = _frozen(diffusion)
        if a.shape != (basis.dim, basis.dim) or n.shape != (basis.dim, basis.dim):
            raise BasisError(f"drift/diffusion shapes {a.shape}, {n.shape} do not fit {basis!r}")
        return LinearGaussianModel(
            basis=basis,
            drift_at=lambda t: a,
            diffusion_at=lambda t: n,
            is_time_independent=True,
            descriptor=descriptor,
            fastest_rate=fastest_rate,
        )


def drift_from_quadratic(
    h_mat: NDArray[np.float64], decay: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Drift matrix A = Omega H - diag(decay) for H = (1/2) r^T H r.

    Parameters
    ----------
    h_mat:
        Symmetric quadratic form of the Hamiltonian in the quadrature basis.
    decay:
        Per-quadrature amplitude decay rates, all >= 0.
    """
    h = np.asarray(h_mat, dtype=float)
    d = np.asarray(decay, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2 != 0:
        raise BasisError(f"quadratic form must be square with even dimension, got {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if float(np.max(np.abs(h - h.T))) > SYMMETRY_TOL * scale:
        raise CovarianceError("quadratic form is not symmetric")
    if d.shape != (h.shape[0],):
        raise BasisError(f"decay vector shape {d.shape} does not match dimension {h.shape[0]}")
    if np.any(d < 0.0):
        raise ParameterError(f"negative decay rates {d}")
    return _omega(h.shape[0]) @ h - np.diag(d)


def lyapunov_residual(
    a: NDArray[np.float64], v: NDArray[np.float64], n: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Residual A V + V A^T + N of the algebraic Lyapunov equation."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    return a @ v + v @ a.T + n


@dataclass(frozen=True)
class CovarianceReport:
    """Outcome of the structural and physicality checks on a covariance."""

    symmetric: bool
    positive_diagonal: bool
    physical: bool
    max_asymmetry: float
    min_diagonal: float
    min_uncertainty_eigenvalue: float

    @property
    def valid(self) -> bool:
        return self.symmetric and self.positive_diagonal and self.physical


def validate_covariance(
    v: CovarianceMatrix | NDArray[np.float64],
    symmetry_tol: float = SYMMETRY_TOL,
    physicality_tol: float = PHYSICALITY_TOL,
) -> CovarianceReport:
    """Check symmetry, diagonal positivity and the uncertainty bound.

    The uncertainty bound is evaluated through the eigenvalues of the
    Hermitian matrix V + i Omega; a state is physical when the smallest one
    is above -physicality_tol.  The check only reports, it never raises.
    """
    m = v.entries if isinstance(v, CovarianceMatrix) else np.asarray(v, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    asym = float(np.max(np.abs(m - m.T)))
    min_diag = float(np.min(np.diag(m)))
    herm = m + 1j * _omega(m.shape[0])
    min_eig = float(np.min(np.linalg.eigvalsh(herm)))
    return CovarianceReport(
        symmetric=asym <= symmetry_tol * scale,
        positive_diagonal=min_diag > 0.0,
        physical=min_eig >= -physicality_tol,
        max_asymmetry=asym,
        min_diagonal=min_diag,
        min_uncertainty_eigenvalue=min_eig,
    )
