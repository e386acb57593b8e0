"""Exact dense linear algebra for small tensor-product Hilbert spaces.

States are complex amplitude vectors, operators are dense complex matrices,
and time evolution is generated by piecewise-constant Hermitian generators
(hbar = 1 throughout, so times and energies share one unit system).

Matrix exponentials go through the Hermitian eigendecomposition rather than a
series expansion: at the dimensions this package targets (products of a few
qubits) that is exact to rounding and lets every unitary be certified
numerically.  Operator properties (hermitian / unitary / projector) are never
assumed from context -- they are flags set only after an explicit numerical
check against ``CERT_TOL``.

Kronecker convention: in every tensor product the LEFT factor is the slow
index, i.e. ``tensor(a, b)`` indexes basis states as ``i_a * dim_b + i_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "CERT_TOL",
    "STATE_NORM_TOL",
    "CertificationError",
    "StateVector",
    "DenseOperator",
    "Segment",
    "PiecewiseHamiltonian",
    "basis_state",
    "identity",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "tensor",
    "overlap",
    "evolve",
    "expm_hermitian",
    "propagator",
    "heisenberg",
    "expectation",
]

# Tolerance for certifying operator flags (hermitian/unitary/projector).
CERT_TOL = 1e-12
# Tolerance on the Euclidean norm of a state after construction.
STATE_NORM_TOL = 1e-10

HERMITIAN = "hermitian"
UNITARY = "unitary"
PROJECTOR = "projector"
_ALL_FLAGS = frozenset({HERMITIAN, UNITARY, PROJECTOR})


class CertificationError(RuntimeError):
    """A numerical certification failed (flag check, norm bound, eigensolver)."""


def _as_state_array(amplitudes) -> np.ndarray:
    arr = np.array(amplitudes, dtype=np.complex128, copy=True)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("state amplitudes must form a non-empty 1-d array")
    arr.setflags(write=False)
    return arr


def _as_operator_array(entries) -> np.ndarray:
    arr = np.array(entries, dtype=np.complex128, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"operator entries must be a square matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitude vector over a finite Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _as_state_array(self.amplitudes)
        object.__setattr__(self, "amplitudes", arr)
        nrm = float(np.linalg.norm(arr))
        if abs(nrm - 1.0) > STATE_NORM_TOL:
            raise CertificationError(
                f"state norm {nrm!r} deviates from 1 by more than {STATE_NORM_TOL}"
            )

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        """Rescale arbitrary amplitudes to unit norm (rejects near-zero input)."""
        arr = np.asarray(amplitudes, dtype=np.complex128)
        nrm = float(np.linalg.norm(arr))
        if nrm < 1e-150:
            raise ValueError("cannot normalize a (numerically) zero vector")
        return cls(arr / nrm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(dim: int, index: int) -> StateVector:
    """Computational basis state |index> in a dim-dimensional space."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dim {dim}")
    amp = np.zeros(dim, dtype=np.complex128)
    amp[index] = 1.0
    return StateVector(amp)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _certify_flags(entries: np.ndarray, candidates: Iterable[str] = _ALL_FLAGS) -> frozenset:
    flags = set()
    cand = set(candidates)
    dag = entries.conj().T
    is_herm = float(np.max(np.abs(entries - dag))) <= CERT_TOL
    if HERMITIAN in cand and is_herm:
        flags.add(HERMITIAN)
    if UNITARY in cand:
        gram = dag @ entries
        if float(np.max(np.abs(gram - np.eye(entries.shape[0])))) <= CERT_TOL:
            flags.add(UNITARY)
    if PROJECTOR in cand and is_herm:
        if float(np.max(np.abs(entries @ entries - entries))) <= CERT_TOL:
            flags.add(PROJECTOR)
    return frozenset(flags)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square complex matrix with numerically certified property flags.

    The ``flags`` set may contain ``"hermitian"``, ``"unitary"`` and
    ``"projector"``.  Declaring a flag at construction triggers a
    re-certification; a flag that does not hold raises
    :class:`CertificationError`.  Use :meth:`certify` to discover the flags of
    an arbitrary matrix.
    """

    entries: np.ndarray
    flags: frozenset = frozenset()
    _eig_cache: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = _as_operator_array(self.entries)
        object.__setattr__(self, "entries", arr)
        declared = frozenset(self.flags)
        unknown = declared - _ALL_FLAGS
        if unknown:
            raise ValueError(f"unknown operator flags: {sorted(unknown)}")
        verified = _certify_flags(arr, declared)
        if verified != declared:
            missing = sorted(declared - verified)
            raise CertificationError(
                f"flags {missing} failed certification at tolerance {CERT_TOL}"
            )
        object.__setattr__(self, "flags", declared)

    @classmethod
    def certify(cls, entries) -> "DenseOperator":
        """Build an operator carrying every flag that passes certification."""
        arr = _as_operator_array(entries)
        return cls(arr, _certify_flags(arr))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return HERMITIAN in self.flags

    @property
    def is_unitary(self) -> bool:
        return UNITARY in self.flags

    @property
    def is_projector(self) -> bool:
        return PROJECTOR in self.flags

    def dagger(self) -> "DenseOperator":
        # All three certified properties are stable under conjugate transpose.
        return DenseOperator(self.entries.conj().T, self.flags)

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        if not isinstance(other, DenseOperator):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return DenseOperator.certify(self.entries @ other.entries)

    def hermitian_eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached eigendecomposition; requires the hermitian flag."""
        if not self.is_hermitian:
            raise CertificationError("eigensystem requested for an operator without the hermitian flag")
        cached = self._eig_cache
        if cached is None:
            try:
                w, v = np.linalg.eigh(self.entries)
            except np.linalg.LinAlgError as err:
                raise CertificationError(f"hermitian eigensolver failed: {err}") from err
            cached = (w, v)
            object.__setattr__(self, "_eig_cache", cached)
        return cached


def identity(dim: int) -> DenseOperator:
    return DenseOperator(np.eye(dim, dtype=np.complex128), _ALL_FLAGS)


def sigma_x() -> DenseOperator:
    return DenseOperator(np.array([[0, 1], [1, 0]], dtype=np.complex128),
                         frozenset({HERMITIAN, UNITARY}))


def sigma_y() -> DenseOperator:
    return DenseOperator(np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
                         frozenset({HERMITIAN, UNITARY}))


def sigma_z() -> DenseOperator:
    return DenseOperator(np.array([[1, 0], [0, -1]], dtype=np.complex128),
                         frozenset({HERMITIAN, UNITARY}))


def tensor(a, b):
    """Kronecker product of two states or two operators (left factor slow)."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DenseOperator) and isinstance(b, DenseOperator):
        # Each certified flag survives a Kronecker product, but re-certify
        # rather than trust algebra: flags are only ever set by measurement.
        entries = np.kron(a.entries, b.entries)
        return DenseOperator(entries, _certify_flags(entries, a.flags & b.flags))
    raise TypeError("tensor expects two StateVector or two DenseOperator operands")


def evolve(u: DenseOperator, psi: StateVector) -> StateVector:
    """Apply a certified unitary to a state."""
    if not u.is_unitary:
        raise CertificationError("evolve requires an operator carrying the unitary flag")
    if u.dim != psi.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {psi.dim}")
    return StateVector(u.entries @ psi.amplitudes)


def expm_hermitian(generator: DenseOperator, s: float) -> DenseOperator:
    """exp(-i * s * generator) for a certified Hermitian generator.

    Computed by spectral decomposition, so the result is unitary to rounding;
    the unitary flag is certified on the way out and a failure raises
    :class:`CertificationError`.
    """
    if not generator.is_hermitian:
        raise CertificationError("expm_hermitian requires the hermitian flag on its generator")
    w, v = generator.hermitian_eigensystem()
    phases = np.exp(-1j * float(s) * w)
    entries = (v * phases) @ v.conj().T
    out = DenseOperator.certify(entries)
    if not out.is_unitary:
        raise CertificationError("spectral exponential failed unitarity certification")
    return out


@dataclass(frozen=True, eq=False)
class Segment:
    """One constant-generator interval [t_start, t_end) of a piecewise Hamiltonian."""

    t_start: float
    t_end: float
    generator: DenseOperator

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"segment requires t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if not self.generator.is_hermitian:
            raise CertificationError("segment generator must carry the hermitian flag")


@dataclass(frozen=True, eq=False)
class PiecewiseHamiltonian:
    """Time-segmented constant Hermitian generators; zero outside all segments."""

    dim: int
    segments: tuple = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        prev_end = None
        for seg in segs:
            if not isinstance(seg, Segment):
                raise TypeError("segments must be Segment instances")
            if seg.generator.dim != self.dim:
                raise ValueError(
                    f"segment generator dim {seg.generator.dim} does not match dim {self.dim}"
                )
            if prev_end is not None and seg.t_start < prev_end:
                raise ValueError("segments must be ordered and non-overlapping")
            prev_end = seg.t_end

    @classmethod
    def constant(cls, generator: DenseOperator, t_start: float, t_end: float) -> "PiecewiseHamiltonian":
        return cls(generator.dim, (Segment(t_start, t_end, generator),))

    def generator_at(self, t: float) -> DenseOperator | None:
        """Generator active at time t, or None where the Hamiltonian vanishes."""
        for seg in self.segments:
            if seg.t_start <= t < seg.t_end:
                return seg.generator
        return None


def propagator(h: PiecewiseHamiltonian, t0: float, t1: float) -> DenseOperator:
    """Time-ordered evolution operator over [t0, t1] (hbar = 1).

    The product runs over every segment overlapping the window, later factors
    applied on the left; gaps contribute the identity.  The result carries a
    certified unitary flag.
    """
    if t1 < t0:
        raise ValueError(f"propagator requires t0 <= t1, got {t0} > {t1}")
    u = np.eye(h.dim, dtype=np.complex128)
    for seg in h.segments:
        lo = max(t0, seg.t_start)
        hi = min(t1, seg.t_end)
        if hi > lo:
            u = expm_hermitian(seg.generator, hi - lo).entries @ u
    out = DenseOperator.certify(u)
    if not out.is_unitary:
        raise CertificationError("propagator failed unitarity certification")
    return out


def heisenberg(op: DenseOperator, u: DenseOperator) -> DenseOperator:
    """Conjugate an operator into the Heisenberg picture: U^dag . op . U.

    Hermitian and projector flags of ``op`` are re-certified on the result and
    must survive (unitary conjugation preserves both).
    """
    if not u.is_unitary:
        raise CertificationError("heisenberg requires a certified unitary")
    if op.dim != u.dim:
        raise ValueError(f"dimension mismatch: {op.dim} vs {u.dim}")
    entries = u.entries.conj().T @ op.entries @ u.entries
    preserved = op.flags & frozenset({HERMITIAN, PROJECTOR})
    flags = _certify_flags(entries, _ALL_FLAGS)
    if not preserved <= flags:
        raise CertificationError(
            f"conjugation lost flags {sorted(preserved - flags)}; input is numerically suspect"
        )
    return DenseOperator(entries, flags)


def expectation(op: DenseOperator, psi: StateVector) -> float:
    """<psi| op |psi> for a certified Hermitian operator, as a real number."""
    if not op.is_hermitian:
        raise CertificationError("expectation requires the hermitian flag")
    if op.dim != psi.dim:
        raise ValueError(f"dimension mismatch: {op.dim} vs {psi.dim}")
    val = complex(np.vdot(psi.amplitudes, op.entries @ psi.amplitudes))
    if abs(val.imag) > CERT_TOL:
        raise CertificationError(f"expectation of a hermitian operator came out complex: {val!r}")
    return float(val.real)
