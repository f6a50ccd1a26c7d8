"""Pairwise concurrence, three ways, plus the transfer gap.

The full recipe (partial trace, spin-flipped product, characteristic
quartic) works for any two-qubit reduced state.  The single-excitation
shortcut ``2|a_m||a_n|`` is exact on the sector this system never leaves and
is cross-validated against the full recipe by the test suite.  The closed
forms evaluate fixed trigonometric reference expressions for the (1,2),
(3,4) and (1,3) pair signals; the validation sweep shows the first two track
the *square* of the Wootters value and the third matches neither, so the
Wootters route is always the source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SingleExcitationAmplitudes
from .errors import ContractViolationError, NumericalHealthError

WOOTTERS = "wootters"
CLOSED_FORM = "closed_form"
SINGLE_EXCITATION = "single_excitation"

ALL_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
#: The four pair signals tracked by scans: first pair, last pair, both legs.
SCAN_PAIRS = ((1, 2), (3, 4), (1, 3), (2, 4))

_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SPIN_FLIP = np.kron(_SIGMA_Y, _SIGMA_Y)


def _check_pair(pair) -> tuple[int, int]:
    m, n = pair
    if not (1 <= m <= 4 and 1 <= n <= 4):
        raise ValueError(f"pair sites must lie in 1..4, got {pair}")
    if m >= n:
        raise ValueError(f"pair must satisfy m < n, got {pair}")
    return int(m), int(n)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Two-qubit state of a pair (m, n), qubit m more significant."""

    matrix: np.ndarray
    pair: tuple[int, int]

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "pair", _check_pair(self.pair))
        if np.abs(mat - mat.conj().T).max() > 1e-12:
            raise ContractViolationError("reduced density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > 1e-12 or abs(np.trace(mat).imag) > 1e-12:
            raise ContractViolationError("reduced density matrix trace is not 1")
        if np.linalg.eigvalsh(mat).min() < -1e-10:
            raise ContractViolationError("reduced density matrix is not PSD")


@dataclass(frozen=True)
class ConcurrenceRecord:
    pair: tuple[int, int]
    value: float
    method: str


def partial_trace_pair(psi: np.ndarray, pair) -> ReducedDensityMatrix:
    """Trace out all qubits except the two in ``pair``.

    The result is over the ordered basis (|00>, |01>, |10>, |11>) of the kept
    qubits, with the lower site index as the more significant bit.
    """
    m, n = _check_pair(pair)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (16,):
        raise ValueError(f"expected a 16-vector, got shape {psi.shape}")
    keep = (m - 1, n - 1)
    rest = tuple(k for k in range(4) if k not in keep)
    block = np.transpose(psi.reshape(2, 2, 2, 2), keep + rest).reshape(4, 4)
    return ReducedDensityMatrix(block @ block.conj().T, (m, n))


def _char_poly_coeffs(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial of a 4x4 matrix (Faddeev-LeVerrier)."""
    n = 4
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    Mk = np.array(M, dtype=complex)
    for k in range(1, n + 1):
        coeffs[k] = -np.trace(Mk) / k
        if k < n:
            Mk = M @ (Mk + coeffs[k] * np.eye(n))
    return coeffs


def _quadratic_roots(b: float, c: float) -> np.ndarray:
    """Real roots of x^2 + b x + c, guarding small negative discriminants."""
    disc = b * b - 4.0 * c
    if disc < 0.0:
        if np.sqrt(-disc) / 2.0 > 1e-9:
            raise NumericalHealthError(
                f"spin-flip spectrum has imaginary part {np.sqrt(-disc) / 2.0:.3e}")
        disc = 0.0
    root = np.sqrt(disc)
    q = -0.5 * (b + np.copysign(root, b)) if b != 0.0 else 0.5 * root
    other = c / q if q != 0.0 else 0.0
    return np.array([q, other])


def _spin_flip_spectrum(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of rho @ rho_tilde via its guarded characteristic quartic.

    Trailing coefficients at roundoff level are deflated exactly (roots at
    zero); what remains is solved in closed form up to degree two and by the
    companion matrix above that.  Negative dust is clamped; anything beyond
    the 1e-9 guards raises NumericalHealthError.
    """
    coeffs = _char_poly_coeffs(M)
    if np.abs(coeffs.imag).max() > 1e-9:
        raise NumericalHealthError(
            f"characteristic coefficients have imaginary part {np.abs(coeffs.imag).max():.3e}")
    c = coeffs.real.copy()
    scale = max(1.0, float(np.abs(c).max()))
    while len(c) > 1 and abs(c[-1]) < 1e-12 * scale:
        c = c[:-1]
    degree = len(c) - 1
    lam = np.zeros(4)
    if degree == 1:
        lam[0] = -c[1]
    elif degree == 2:
        lam[:2] = _quadratic_roots(c[1], c[2])
    elif degree >= 3:
        roots = np.roots(c)
        if np.abs(roots.imag).max() > 1e-9:
            raise NumericalHealthError(
                f"spin-flip spectrum has imaginary part {np.abs(roots.imag).max():.3e}")
        lam[:degree] = roots.real
    if lam.min() < -1e-9:
        raise NumericalHealthError(
            f"spin-flip spectrum has negative eigenvalue {lam.min():.3e}")
    return np.maximum(lam, 0.0)


def wootters_concurrence(rho, pair=None) -> ConcurrenceRecord:
    """Concurrence from the spin-flipped product rho @ (sy x sy) rho* (sy x sy).

    Accepts a ReducedDensityMatrix or a bare 4x4 array (``pair`` then
    optional, defaulting to (1, 2)).
    """
    if isinstance(rho, ReducedDensityMatrix):
        mat = rho.matrix
        pair = rho.pair if pair is None else _check_pair(pair)
    else:
        mat = np.asarray(rho, dtype=complex)
        pair = (1, 2) if pair is None else _check_pair(pair)
    rho_tilde = _SPIN_FLIP @ mat.conj() @ _SPIN_FLIP
    lam = _spin_flip_spectrum(mat @ rho_tilde)
    gammas = np.sort(np.sqrt(lam))[::-1]
    value = max(0.0, float(2.0 * gammas[0] - gammas.sum()))
    return ConcurrenceRecord(pair=pair, value=value, method=WOOTTERS)


def single_excitation_concurrence(amps: SingleExcitationAmplitudes, pair) -> ConcurrenceRecord:
    """Sector shortcut: concurrence of pair (m, n) is 2|a_m||a_n|."""
    m, n = _check_pair(pair)
    value = 2.0 * abs(amps.site_amplitude(m)) * abs(amps.site_amplitude(n))
    return ConcurrenceRecord(pair=(m, n), value=float(value), method=SINGLE_EXCITATION)


def state_concurrence(psi: np.ndarray, pair) -> float:
    """Wootters concurrence of one pair, straight from a 16-vector."""
    return wootters_concurrence(partial_trace_pair(psi, pair)).value


def all_pair_concurrences(psi: np.ndarray, pairs=SCAN_PAIRS) -> dict[tuple[int, int], float]:
    return {pair: state_concurrence(psi, pair) for pair in pairs}


# ---------------------------------------------------------------------------
# Closed-form reference expressions (D = 1 units).
# ---------------------------------------------------------------------------

def closed_form_c12(t, J):
    """Reference expression for the (1,2) pair signal (tracks Wootters^2)."""
    return (2.0 * np.cos(t * (J - 3)) + 2.0 * np.cos(2 * t * (J - 1))
            + 12.0 * np.cos(t) * np.cos(t * J) + 2.0 * np.cos(2 * t * (J + 1))
            + 2.0 * np.cos(t * (J + 3)) + 4.0 * np.cos(2 * t)
            + np.cos(4 * t) + 7.0) / 32.0


def closed_form_c34(t, J):
    """Reference expression for the (3,4) pair signal (tracks Wootters^2)."""
    return (-2.0 * np.cos(t * (J - 3)) + 2.0 * np.cos(2 * t * (J - 1))
            - 12.0 * np.cos(t) * np.cos(t * J) + 2.0 * np.cos(2 * t * (J + 1))
            - 2.0 * np.cos(t * (J + 3)) + 4.0 * np.cos(2 * t)
            + np.cos(4 * t) + 7.0) / 32.0


def closed_form_c13(t, J):
    """Reference expression for the (1,3) pair signal.

    Known-bad: it evaluates to 0.125 at t = 0 where the pair is separable,
    and it can go negative.  Kept verbatim so the discrepancy can be
    quantified; never use it as a concurrence.
    """
    return (-2.0 * np.sin(2 * t * (J + 1)) - 2.0 * np.sin(2 * t * (1 - J))
            - 4.0 * np.sin(2 * t) - np.cos(4 * t) + 5.0) / 32.0


def concurrence_gap(t, J):
    """Gap between the (3,4) and (1,2) closed-form signals.

    Equals ``closed_form_c34 - closed_form_c12`` identically; the value 1
    certifies a complete transfer (C34 = 1 and C12 = 0 simultaneously).
    """
    return (-np.cos(t * (J - 3)) - 6.0 * np.cos(t) * np.cos(t * J)
            - np.cos(t * (3 + J))) / 8.0


def gap_from_state(psi: np.ndarray) -> float:
    """Cross-validation route: Wootters C34 minus Wootters C12."""
    return state_concurrence(psi, (3, 4)) - state_concurrence(psi, (1, 2))
