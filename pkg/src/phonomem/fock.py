"""Dense truncated Fock-space engine for few-mode quantum optics.

States are density matrices on a tensor product of per-mode truncated
oscillator spaces.  Operations (state preparation, Gaussian-generator
unitaries, projective measurement, partial trace) are pure functions that
return new states; the matrices themselves are flagged read-only, so
states are safe to share between threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TRACE_TOL = 1e-9
HERMITICITY_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-8
LEAKAGE_TOL = 1e-6

# Eigen-checking positivity costs O(d^3); skip it for large composite spaces.
_POSITIVITY_CHECK_MAX_DIM = 512


class TruncationLeakageError(ValueError):
    """An operation pushed more weight into the truncation edge than allowed."""


class ZeroProbabilityError(ValueError):
    """A projection has (numerically) zero success probability."""


@dataclass(frozen=True)
class FockSpace:
    """Tensor product of truncated single-mode Fock spaces.

    dims holds the per-mode truncation dimension (number of levels kept),
    so mode k supports occupations 0 .. dims[k]-1.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ValueError("a FockSpace needs at least one mode")
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode needs dim >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def check_mode(self, mode: int) -> int:
        if not 0 <= mode < self.n_modes:
            raise ValueError(f"mode {mode} out of range [0, {self.n_modes})")
        return mode

    def destroy(self, mode: int) -> np.ndarray:
        """Annihilation operator of `mode`, embedded in the full space."""
        self.check_mode(mode)
        d = self.dims[mode]
        a = np.diag(np.sqrt(np.arange(1, d)), k=1).astype(complex)
        return self._embed(mode, a)

    def create(self, mode: int) -> np.ndarray:
        return self.destroy(mode).conj().T

    def number(self, mode: int) -> np.ndarray:
        a = self.destroy(mode)
        return a.conj().T @ a

    def _embed(self, mode: int, op: np.ndarray) -> np.ndarray:
        full = np.eye(1, dtype=complex)
        for m, d in enumerate(self.dims):
            block = op if m == mode else np.eye(d, dtype=complex)
            full = np.kron(full, block)
        return full


class DensityMatrix:
    """Normalized Hermitian positive state on a FockSpace.

    Construction validates trace, Hermiticity and (for small spaces)
    positivity; the element array is then frozen.
    """

    __slots__ = ("space", "elements")

    def __init__(self, space: FockSpace, elements: np.ndarray):
        elements = np.array(elements, dtype=complex)
        d = space.total_dim
        if elements.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {elements.shape}")
        tr = elements.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond {TRACE_TOL}")
        herm_err = np.abs(elements - elements.conj().T).max()
        if herm_err > HERMITICITY_TOL:
            raise ValueError(f"Hermiticity violated by {herm_err:.3e}")
        if d <= _POSITIVITY_CHECK_MAX_DIM:
            lo = np.linalg.eigvalsh(elements)[0]
            if lo < EIGENVALUE_FLOOR:
                raise ValueError(f"negative eigenvalue {lo:.3e} below floor")
        elements.flags.writeable = False
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "elements", elements)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(op @ self.elements))

    def population(self, occupations: tuple[int, ...]) -> float:
        """Diagonal element <n0,n1,...|rho|n0,n1,...>."""
        idx = int(np.ravel_multi_index(occupations, self.space.dims))
        return float(self.elements[idx, idx].real)


def _normalized(space: FockSpace, elements: np.ndarray) -> DensityMatrix:
    elements = 0.5 * (elements + elements.conj().T)
    tr = elements.trace().real
    if tr <= 0:
        raise ZeroProbabilityError("state has vanished (trace <= 0)")
    return DensityMatrix(space, elements / tr)


@dataclass(frozen=True)
class ModePrep:
    """Single-mode preparation: vacuum, thermal(n_mean) or coherent(amplitude)."""

    kind: str
    n_mean: float = 0.0
    amplitude: complex = 0j

    _KINDS = ("vacuum", "thermal", "coherent")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown preparation {self.kind!r}")
        if self.kind == "thermal" and not (
            math.isfinite(self.n_mean) and self.n_mean >= 0
        ):
            raise ValueError(f"thermal occupation must be finite and >= 0, got {self.n_mean}")

    @classmethod
    def vacuum(cls) -> "ModePrep":
        return cls("vacuum")

    @classmethod
    def thermal(cls, n_mean: float) -> "ModePrep":
        return cls("thermal", n_mean=float(n_mean))

    @classmethod
    def coherent(cls, amplitude: complex) -> "ModePrep":
        return cls("coherent", amplitude=complex(amplitude))

    def single_mode_matrix(self, dim: int) -> np.ndarray:
        if self.kind == "vacuum" or (self.kind == "thermal" and self.n_mean == 0):
            rho = np.zeros((dim, dim), dtype=complex)
            rho[0, 0] = 1.0
            return rho
        if self.kind == "thermal":
            x = self.n_mean / (1.0 + self.n_mean)
            p = x ** np.arange(dim)
            return np.diag(p / p.sum()).astype(complex)
        # coherent: truncated Poisson-weighted vector, renormalized
        if abs(self.amplitude) ** 2 > dim / 4:
            warnings.warn(
                f"coherent amplitude |alpha|^2 = {abs(self.amplitude)**2:.3g} is large "
                f"for truncation dim {dim}; expect truncation artifacts",
                stacklevel=2,
            )
        k = np.arange(dim)
        log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
        vec = self.amplitude ** k * np.exp(-0.5 * log_fact)
        vec = vec / np.linalg.norm(vec)
        return np.outer(vec, vec.conj())


def build_state(space: FockSpace, preps: list[ModePrep]) -> DensityMatrix:
    """Tensor product of per-mode preparations, truncated and renormalized."""
    if len(preps) != space.n_modes:
        raise ValueError(f"need {space.n_modes} preparations, got {len(preps)}")
    rho = np.eye(1, dtype=complex)
    for prep, d in zip(preps, space.dims):
        rho = np.kron(rho, prep.single_mode_matrix(d))
    return _normalized(space, rho)


def expm(matrix: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaled Taylor series with repeated squaring.

    Dimensions here are small (<= a few hundred) and generators are
    anti-Hermitian with modest norm, so the plain series is well behaved.
    """
    norm = np.linalg.norm(matrix, 1)
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    a = matrix / (2.0**squarings)
    result = np.eye(matrix.shape[0], dtype=complex)
    term = result
    for k in range(1, 60):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) < 1e-17 * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def _edge_population(rho: DensityMatrix, modes: tuple[int, ...]) -> float:
    """Total weight sitting in the highest Fock level of the given modes."""
    total = 0.0
    for m in modes:
        stats = mode_stats(rho, m)
        total += stats.probabilities[-1]
    return total


def apply_two_mode_squeeze(
    rho: DensityMatrix,
    mode_pair: tuple[int, int],
    p_b: float,
    phase: float = 0.0,
    leakage_tol: float = LEAKAGE_TOL,
) -> DensityMatrix:
    """Two-mode squeezing U = exp(xi a+ b+ - xi* a b) on `mode_pair`.

    |xi| = artanh(sqrt(p_b)) so that acting on vacuum the |11>/|00>
    amplitude ratio is exactly sqrt(p_b) * exp(i phase).  Raises
    TruncationLeakageError when the operation grows the occupation of the
    highest kept Fock level by more than `leakage_tol` (dim too small);
    pass `leakage_tol=inf` to run deliberately truncation-limited cases.
    """
    a_mode, b_mode = mode_pair
    if a_mode == b_mode:
        raise ValueError("squeeze needs two distinct modes")
    if not 0.0 <= p_b < 1.0:
        raise ValueError(f"p_b must lie in [0, 1), got {p_b}")
    if p_b == 0.0:
        return rho
    xi = math.atanh(math.sqrt(p_b)) * np.exp(1j * phase)
    a = rho.space.destroy(a_mode)
    b = rho.space.destroy(b_mode)
    gen = xi * (a.conj().T @ b.conj().T) - np.conj(xi) * (a @ b)
    u = expm(gen)
    out = _normalized(rho.space, u @ rho.elements @ u.conj().T)
    leakage = _edge_population(out, mode_pair) - _edge_population(rho, mode_pair)
    if leakage > leakage_tol:
        raise TruncationLeakageError(
            f"squeeze leaked {leakage:.2e} of trace into the truncation edge; "
            "increase the mode dimensions"
        )
    return out


def apply_beamsplitter(
    rho: DensityMatrix,
    mode_pair: tuple[int, int],
    mixing_angle: float = math.pi / 4,
    phase: float = 0.0,
) -> DensityMatrix:
    """Beamsplitter U = exp(theta (e^{i phi} a+ c - e^{-i phi} a c+)).

    theta = pi/4 is the balanced 50:50 splitter.  The generator conserves
    total photon number over the pair, also in the truncated space.
    """
    a_mode, c_mode = mode_pair
    if a_mode == c_mode:
        raise ValueError("beamsplitter needs two distinct modes")
    if mixing_angle == 0.0:
        return rho
    a = rho.space.destroy(a_mode)
    c = rho.space.destroy(c_mode)
    gen = mixing_angle * (
        np.exp(1j * phase) * (a.conj().T @ c) - np.exp(-1j * phase) * (a @ c.conj().T)
    )
    u = expm(gen)
    return _normalized(rho.space, u @ rho.elements @ u.conj().T)


def project(
    rho: DensityMatrix, mode: int, outcome: int | str
) -> tuple[DensityMatrix, float]:
    """Projective detection on one mode.

    outcome is either a Fock number k (number-resolving detector) or the
    string "click" for the threshold POVM 1 - |0><0|.  Returns the
    renormalized post-measurement state and the outcome probability.
    """
    space = rho.space
    space.check_mode(mode)
    d = space.dims[mode]
    if outcome == "click":
        single = np.eye(d, dtype=complex)
        single[0, 0] = 0.0
    else:
        k = int(outcome)
        if not 0 <= k < d:
            raise ValueError(f"Fock outcome {k} outside mode dimension {d}")
        single = np.zeros((d, d), dtype=complex)
        single[k, k] = 1.0
    proj = space._embed(mode, single)
    projected = proj @ rho.elements @ proj
    prob = projected.trace().real
    if prob <= 1e-15:
        raise ZeroProbabilityError(
            f"projection {outcome!r} on mode {mode} has probability {prob:.2e}"
        )
    return _normalized(space, projected), float(prob)


def partial_trace(rho: DensityMatrix, keep_modes: tuple[int, ...]) -> DensityMatrix:
    """Reduced state on `keep_modes` (order preserved as in the original space)."""
    keep = sorted(set(int(m) for m in keep_modes))
    if not keep:
        raise ValueError("keep_modes must be a nonempty subset")
    for m in keep:
        rho.space.check_mode(m)
    dims = rho.space.dims
    n = len(dims)
    tensor = rho.elements.reshape(dims + dims)
    # einsum: traced modes share a letter between row and column indices
    row = [chr(ord("a") + i) for i in range(n)]
    col = [row[i] if i not in keep else chr(ord("A") + i) for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, tensor)
    new_space = FockSpace(tuple(dims[i] for i in keep))
    d = new_space.total_dim
    return _normalized(new_space, reduced.reshape(d, d))


class ModeStats(NamedTuple):
    mean_number: float
    probabilities: np.ndarray


def mode_stats(rho: DensityMatrix, mode: int) -> ModeStats:
    """Mean occupation and Fock probabilities of the reduced single-mode state."""
    rho.space.check_mode(mode)
    if rho.space.n_modes == 1:
        probs = np.diag(rho.elements).real.copy()
    else:
        reduced = partial_trace(rho, (mode,))
        probs = np.diag(reduced.elements).real.copy()
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    mean = float(np.dot(np.arange(probs.size), probs))
    return ModeStats(mean, probs)
