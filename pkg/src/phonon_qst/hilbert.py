"""Operator algebra on truncated tensor-product Hilbert spaces.

Slot-order convention used throughout the package: slot 0 is the cavity
mode, slot 1 the phonon mode, slot 2 the qubit.  Qubit basis index 0 is
the ground state |g> and index 1 the excited state |e>, so that
sigma_z = diag(-1, +1) and sigma_z|e> = +|e>.  All flat indexing derives
from :class:`SpaceSignature`; no other module does its own index math.

Everything here is dense: the largest space in scope is ~32-dimensional,
so sparse formats would be pure overhead.  All types are immutable after
construction and all operations are pure functions.
"""

from dataclasses import dataclass

import numpy as np

PURE_NORM_TOL = 1e-9
MIXED_TRACE_TOL = 1e-9
MIXED_HERMITICITY_TOL = 1e-12


def _frozen_array(values, shape_kind="matrix"):
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceSignature:
    """Ordered subsystem dimensions of a truncated tensor-product space.

    Reduced spaces produced by :func:`partial_trace` reuse this type, so
    any number of subsystems (each of dimension >= 2) is allowed.  The
    canonical full space is built with :meth:`cavity_phonon_qubit`, which
    additionally pins the qubit slot to dimension exactly 2.
    """

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("signature needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must all be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def cavity_phonon_qubit(cls, n_cavity: int, n_phonon: int) -> "SpaceSignature":
        """The canonical (cavity, phonon, qubit) space with a 2-level qubit."""
        if n_cavity < 2 or n_phonon < 2:
            raise ValueError("cavity and phonon truncations must be >= 2")
        return cls((n_cavity, n_phonon, 2))

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def flat_index(self, occupations) -> int:
        """Row-major index of the product basis state |n_0, n_1, ...>."""
        occupations = tuple(occupations)
        if len(occupations) != len(self.dims):
            raise ValueError(
                f"expected {len(self.dims)} occupation numbers, got {len(occupations)}"
            )
        idx = 0
        for d, n in zip(self.dims, occupations):
            if not 0 <= n < d:
                raise ValueError(f"occupation {occupations} out of range for dims {self.dims}")
            idx = idx * d + n
        return idx


def _require_same_signature(left, right):
    if left.signature != right.signature:
        raise ValueError(
            f"operands live on different spaces: {left.signature.dims} vs {right.signature.dims}"
        )


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix tied to the space it acts on."""

    signature: SpaceSignature
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen_array(self.matrix)
        d = self.signature.total_dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match total dim {d}")
        object.__setattr__(self, "matrix", mat)

    def dag(self) -> "Operator":
        return Operator(self.signature, self.matrix.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol)

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_signature(self, other)
        return Operator(self.signature, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_signature(self, other)
        return Operator(self.signature, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_signature(self, other)
        return Operator(self.signature, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.signature, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.signature, -self.matrix)


@dataclass(frozen=True)
class QuantumState:
    """Pure state vector or density matrix on a signed space.

    Exactly one of ``vector``/``density`` is set.  Construction validates
    the usual sanity invariants: unit norm for pure states, unit trace and
    Hermiticity for density matrices.
    """

    signature: SpaceSignature
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("provide exactly one of vector or density")
        d = self.signature.total_dim
        if self.vector is not None:
            vec = _frozen_array(self.vector)
            if vec.shape != (d,):
                raise ValueError(f"vector shape {vec.shape} does not match total dim {d}")
            norm_sq = float(np.vdot(vec, vec).real)
            if abs(norm_sq - 1.0) > PURE_NORM_TOL:
                raise ValueError(f"pure state not normalized: |psi|^2 = {norm_sq!r}")
            object.__setattr__(self, "vector", vec)
        else:
            rho = _frozen_array(self.density)
            if rho.shape != (d, d):
                raise ValueError(f"density shape {rho.shape} does not match total dim {d}")
            trace = complex(np.trace(rho))
            if abs(trace - 1.0) > MIXED_TRACE_TOL:
                raise ValueError(f"density matrix trace {trace!r} is not 1")
            if np.abs(rho - rho.conj().T).max() > MIXED_HERMITICITY_TOL:
                raise ValueError("density matrix is not Hermitian")
            object.__setattr__(self, "density", rho)

    @classmethod
    def pure(cls, signature: SpaceSignature, vector) -> "QuantumState":
        return cls(signature, vector=np.asarray(vector, dtype=complex))

    @classmethod
    def mixed(cls, signature: SpaceSignature, density) -> "QuantumState":
        return cls(signature, density=np.asarray(density, dtype=complex))

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def to_density(self) -> "QuantumState":
        """Outer-product conversion; a no-op for states that are already mixed."""
        if not self.is_pure:
            return self
        return QuantumState.mixed(self.signature, np.outer(self.vector, self.vector.conj()))


def basis_state(signature: SpaceSignature, occupations) -> QuantumState:
    """Product basis state |n_0, n_1, ...> as a pure state."""
    vec = np.zeros(signature.total_dim, dtype=complex)
    vec[signature.flat_index(occupations)] = 1.0
    return QuantumState.pure(signature, vec)


def annihilation(dim: int) -> Operator:
    """Truncated ladder lowering operator: <n-1|a|n> = sqrt(n).

    The commutator [a, a+] equals identity except in the top diagonal
    entry, which truncation turns into -(dim-1); callers are responsible
    for keeping population away from the top of the ladder.
    """
    if dim < 2:
        raise ValueError(f"ladder needs dim >= 2, got {dim}")
    mat = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        mat[n - 1, n] = np.sqrt(n)
    return Operator(SpaceSignature((dim,)), mat)


def identity(dim: int) -> Operator:
    return Operator(SpaceSignature((dim,)), np.eye(dim, dtype=complex))


def sigma_minus() -> Operator:
    """|g><e| in the (g, e) qubit basis."""
    return annihilation(2)


def sigma_plus() -> Operator:
    """|e><g| in the (g, e) qubit basis."""
    return annihilation(2).dag()


def sigma_z() -> Operator:
    """|e><e| - |g><g| = diag(-1, +1) in the (g, e) qubit basis."""
    return Operator(SpaceSignature((2,)), np.diag([-1.0, 1.0]).astype(complex))


def embed(op: Operator, slot: int, signature: SpaceSignature) -> Operator:
    """Lift a single-subsystem operator into the full space.

    Kronecker product with identities on every other slot, in slot order,
    e.g. embed(a, 0, (Nc, Nm, 2)) = a (x) I (x) I.
    """
    if op.signature.n_subsystems != 1:
        raise ValueError("embed expects a single-subsystem operator")
    if not 0 <= slot < signature.n_subsystems:
        raise ValueError(f"slot {slot} out of range for {signature.dims}")
    if op.signature.dims[0] != signature.dims[slot]:
        raise ValueError(
            f"operator dim {op.signature.dims[0]} does not match slot dim "
            f"{signature.dims[slot]}"
        )
    mat = np.ones((1, 1), dtype=complex)
    for s, d in enumerate(signature.dims):
        mat = np.kron(mat, op.matrix if s == slot else np.eye(d, dtype=complex))
    return Operator(signature, mat)


def partial_trace_matrix(rho: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace of a raw density matrix over the slots not in ``keep``.

    Low-level form used on trajectory data, where small trace drift is
    expected; :func:`partial_trace` is the validated state-level wrapper.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one slot")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep slots {keep} out of range for {dims}")
    reshaped = np.asarray(rho, dtype=complex).reshape(dims + dims)
    row_labels = list(range(n))
    col_labels = [i + n if i in keep else i for i in range(n)]
    out_labels = keep + [i + n for i in keep]
    reduced = np.einsum(reshaped, row_labels + col_labels, out_labels)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d_keep, d_keep)


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Reduced density matrix over the kept slots, in original slot order.

    Pure states are rejected; convert with ``state.to_density()`` first.
    """
    if state.is_pure:
        raise ValueError("partial_trace needs a density matrix; call to_density() first")
    keep = sorted(set(int(k) for k in keep))
    reduced = partial_trace_matrix(state.density, state.signature.dims, keep)
    new_sig = SpaceSignature(tuple(state.signature.dims[i] for i in keep))
    return QuantumState.mixed(new_sig, reduced)
