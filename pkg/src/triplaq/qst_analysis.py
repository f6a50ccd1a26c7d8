"""Transfer-event location, fractional coupling sequences, and scans.

A complete transfer (first-pair concurrence 0, last-pair concurrence 1) can
only happen where the gap signal reaches 1.  At the discrete times t = m*pi
the gap reduces exactly to (-1)**(m+1) * cos(m*pi*J), which makes the
admissible couplings exact rationals; everything here is organized around
that reduction and verified independently through the Wootters route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import closed_form_state
from .entanglement import (
    SCAN_PAIRS,
    closed_form_c12,
    closed_form_c13,
    closed_form_c34,
    concurrence_gap,
    state_concurrence,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# Exact sequences at the transfer times
# ---------------------------------------------------------------------------

def gap_at_transfer_times(m: int, J) -> float:
    """Closed reduction of the gap at t = m*pi: (-1)**(m+1) * cos(m*pi*J)."""
    m = _check_m(m)
    return float((-1.0) ** (m + 1) * np.cos(m * np.pi * float(J)))


def _check_m(m) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    return int(m)


def find_qst_J(m: int) -> tuple[Fraction, ...]:
    """All couplings in [0, 2] with a complete transfer at t = m*pi.

    Solves gap_at_transfer_times(m, J) = 1 exactly: J = 2k/m for odd m and
    J = (2k+1)/m for even m, reduced and ascending.
    """
    m = _check_m(m)
    if m % 2 == 1:
        values = {Fraction(2 * k, m) for k in range(0, m + 1)}
    else:
        values = {Fraction(2 * k + 1, m) for k in range(0, m)}
    return tuple(sorted(values))


@dataclass(frozen=True)
class SequenceEntry:
    """One populated cell pair of the fractional-coupling table.

    ``family`` is the odd integer k in the generating law (1 -+ k/m); the
    table's three printed columns are k = 1, 3, 5 and higher odd k extends
    the same law.
    """

    family: int
    m: int
    lower: Fraction
    upper: Fraction

    @property
    def label(self) -> str:
        return "J" + "*" * ((self.family + 1) // 2)

    @property
    def values(self) -> tuple[Fraction, Fraction]:
        return (self.lower, self.upper)


TABLE_FAMILIES = (1, 3, 5)


def sequence_table(max_m: int, families=TABLE_FAMILIES) -> list[SequenceEntry]:
    """Fractional coupling pairs (1 - k/m, 1 + k/m) per family and m.

    Family k populates rows m >= k only (at m = k the pair degenerates to
    the interval endpoints 0 and 2).  Pass families="all" to extend beyond
    the three standard columns with k = 7, 9, ...
    """
    max_m = _check_m(max_m)
    if families == "all":
        families = tuple(k for k in range(1, max_m + 1, 2))
    fams = tuple(int(k) for k in families)
    if any(k < 1 or k % 2 == 0 for k in fams):
        raise ValueError(f"families must be odd positive integers, got {families}")
    entries = []
    for m in range(1, max_m + 1):
        for k in fams:
            if k > m:
                continue
            entries.append(SequenceEntry(
                family=k, m=m,
                lower=Fraction(m - k, m), upper=Fraction(m + k, m)))
    return entries


# ---------------------------------------------------------------------------
# Scans over the gap surface
# ---------------------------------------------------------------------------

def _golden_max(f, lo: float, hi: float, budget: int, xtol: float = 1e-10):
    """Golden-section maximization on [lo, hi]; returns (x, evals_used)."""
    a, b = float(lo), float(hi)
    if not b > a:
        return a, 0
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    used = 2
    while (b - a) > xtol and used < budget:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        used += 1
    return (c, used) if fc > fd else (d, used)


def _grid_local_maxima(values: np.ndarray) -> list[tuple[int, int]]:
    """Indices of grid points that dominate their axis neighbors."""
    padded = np.full((values.shape[0] + 2, values.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = values
    center = padded[1:-1, 1:-1]
    is_max = ((center >= padded[:-2, 1:-1]) & (center >= padded[2:, 1:-1])
              & (center >= padded[1:-1, :-2]) & (center >= padded[1:-1, 2:]))
    return [tuple(ix) for ix in np.argwhere(is_max)]


@dataclass(frozen=True)
class QstEvent:
    """A located complete-transfer event.

    ``J`` is an exact Fraction when the event snapped onto the rational
    lattice (``snapped=True``), otherwise a float.  ``confirmed`` requires
    the gap to reach 1 within 1e-10 and the Wootters concurrences to satisfy
    c12 <= 1e-8 and c34 >= 1 - 1e-8.
    """

    m: int | None
    t: float
    J: Fraction | float
    gap_value: float
    c12: float
    c34: float
    confirmed: bool
    snapped: bool


def _verify_transfer(t: float, J: float) -> tuple[float, float]:
    psi = closed_form_state(t, J)
    return state_concurrence(psi, (1, 2)), state_concurrence(psi, (3, 4))


def locate_events_2d(t_range, J_range, resolution: int = 64, *,
                     max_denominator: int = 64, refine_budget: int = 200,
                     peak_threshold: float = 1e-4,
                     confirm_tol: float = 1e-10) -> list[QstEvent]:
    """Scan the gap surface for complete-transfer events.

    Grid-scans gap(t, J) at ``resolution`` points per pi in t (per unit in
    J), refines every grid local maximum by coordinate-wise golden-section
    ascent, keeps peaks reaching 1 - ``peak_threshold``, snaps them onto
    (m*pi, p/q) when the exact reduction certifies the snapped point, and
    verifies each event through the Wootters route.  The t interval is
    half-open: [t_lo, t_hi).
    """
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    J_lo, J_hi = float(J_range[0]), float(J_range[1])
    if not (t_hi > t_lo):
        raise ValueError("t range must have positive width")
    if J_hi < J_lo:
        raise ValueError("J range is reversed")
    if resolution < 64:
        raise ValueError(f"resolution must be at least 64 points per pi, got {resolution}")

    t_step = np.pi / resolution
    n_t = int(np.ceil((t_hi - t_lo) / t_step))
    ts = t_lo + t_step * np.arange(n_t)
    ts = ts[ts < t_hi - 1e-12]
    if J_hi > J_lo:
        j_step = 1.0 / resolution
        js = np.linspace(J_lo, J_hi, int(round((J_hi - J_lo) * resolution)) + 1)
    else:
        j_step = 0.0
        js = np.array([J_lo])
    if ts.size == 0:
        return []

    surface = concurrence_gap(ts[:, None], js[None, :])
    events: dict = {}
    for (it, ij) in _grid_local_maxima(surface):
        t_c, j_c = float(ts[it]), float(js[ij])
        used = 0
        for _ in range(2):  # alternate t / J line searches twice
            t_c, n_used = _golden_max(
                lambda x: concurrence_gap(x, j_c),
                max(t_lo, t_c - t_step), min(t_hi, t_c + t_step),
                refine_budget - used)
            used += n_used
            if j_step > 0.0 and used < refine_budget:
                j_c, n_used = _golden_max(
                    lambda x: concurrence_gap(t_c, x),
                    max(J_lo, j_c - j_step), min(J_hi, j_c + j_step),
                    refine_budget - used)
                used += n_used
            if used >= refine_budget:
                break
        value = float(concurrence_gap(t_c, j_c))
        if value < 1.0 - peak_threshold:
            continue
        reached_tol = abs(value - 1.0) < confirm_tol

        # Snap onto the exact lattice when the closed reduction certifies it;
        # the snap window is half a grid cell, and a wrong hypothesis cannot
        # pass the exact certification below.
        m_hyp = int(round(t_c / np.pi))
        j_frac = Fraction(j_c).limit_denominator(max_denominator)
        snap_ok = (m_hyp >= 1
                   and abs(t_c - m_hyp * np.pi) < 0.5 * t_step
                   and abs(j_c - float(j_frac)) < max(0.5 * j_step, 1e-8)
                   and J_lo - 1e-12 <= float(j_frac) <= J_hi + 1e-12
                   and abs(gap_at_transfer_times(m_hyp, j_frac) - 1.0) < 1e-12)
        if snap_ok:
            t_ev, j_ev = m_hyp * np.pi, float(j_frac)
            key = (m_hyp, j_frac)
            gap_ev = float(concurrence_gap(t_ev, j_ev))
            reached_tol = True
        else:
            t_ev, j_ev = t_c, j_c
            key = (round(t_ev, 6), round(j_ev, 6))
            gap_ev = value
        if t_ev >= t_hi - 1e-9:  # keep the window half-open after refinement
            continue
        if key in events:
            continue
        c12, c34 = _verify_transfer(t_ev, j_ev)
        events[key] = QstEvent(
            m=m_hyp if snap_ok else None,
            t=float(t_ev),
            J=j_frac if snap_ok else j_ev,
            gap_value=gap_ev,
            c12=c12, c34=c34,
            confirmed=bool(reached_tol and c12 <= 1e-8 and c34 >= 1.0 - 1e-8),
            snapped=snap_ok)
    return sorted(events.values(), key=lambda e: (e.t, float(e.J)))


@dataclass(frozen=True)
class ForbiddenScanResult:
    J: float
    sup_gap: float
    t_at_sup: float
    margin: float
    forbidden: bool


def forbidden_J_scan(J_values, t_max: float, *,
                     resolution: int = 256) -> list[ForbiddenScanResult]:
    """Supremum of the gap over t for each coupling, with local refinement.

    A coupling is certified forbidden when the refined supremum stays below
    1 by a strictly positive margin (the margin is reported, not assumed).
    """
    t_max = float(t_max)
    if t_max < 2 * np.pi:
        raise ValueError(f"t_max must cover at least 2*pi, got {t_max}")
    ts = np.arange(0.0, t_max + 1e-12, np.pi / resolution)
    results = []
    for J in J_values:
        J = float(J)
        values = concurrence_gap(ts, J)
        sup, t_sup = float(values.max()), float(ts[int(np.argmax(values))])
        # refine every grid maximum close to the leader
        interior = np.arange(1, len(ts) - 1)
        is_max = (values[interior] >= values[interior - 1]) & \
                 (values[interior] >= values[interior + 1])
        seeds = [int(i) for i in interior[is_max] if values[i] > sup - 0.05]
        seeds.append(int(np.argmax(values)))
        for i in set(seeds):
            lo = ts[max(0, i - 1)]
            hi = ts[min(len(ts) - 1, i + 1)]
            t_ref, _ = _golden_max(lambda x: concurrence_gap(x, J), lo, hi, 120)
            v = float(concurrence_gap(t_ref, J))
            if v > sup:
                sup, t_sup = v, float(t_ref)
        margin = 1.0 - sup
        results.append(ForbiddenScanResult(
            J=J, sup_gap=sup, t_at_sup=t_sup, margin=margin,
            forbidden=bool(margin > 1e-9)))
    return results


# ---------------------------------------------------------------------------
# W-state witness scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WStateCandidate:
    """A grid point where all four tracked pair concurrences sit near 1/2."""

    t: float
    J: float
    concurrences: tuple[float, float, float, float]  # ordered per SCAN_PAIRS
    max_deviation_from_half: float


def wstate_candidate_from_state(psi: np.ndarray, t: float = float("nan"),
                                J: float = float("nan")) -> WStateCandidate:
    """Evaluate the W-state witness on an arbitrary state (harness self-test)."""
    cs = tuple(state_concurrence(psi, pair) for pair in SCAN_PAIRS)
    return WStateCandidate(
        t=float(t), J=float(J), concurrences=cs,
        max_deviation_from_half=float(max(abs(c - 0.5) for c in cs)))


def wstate_scan(t_range, J_range, resolution: int = 32,
                threshold: float = 1e-3) -> list[WStateCandidate]:
    """Find grid points whose four pair concurrences all lie within
    ``threshold`` of 1/2 (every pair concurrence of a four-qubit W state
    equals 2/N = 1/2).  Grids are inclusive at both ends.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    J_lo, J_hi = float(J_range[0]), float(J_range[1])
    n_t = max(2, int(round((t_hi - t_lo) * resolution / np.pi)) + 1)
    n_j = max(1, int(round((J_hi - J_lo) * resolution)) + 1)
    ts = np.linspace(t_lo, t_hi, n_t)
    js = np.linspace(J_lo, J_hi, n_j) if J_hi > J_lo else np.array([J_lo])
    out = []
    for t in ts:
        for J in js:
            cand = wstate_candidate_from_state(
                closed_form_state(float(t), float(J)), t=float(t), J=float(J))
            if cand.max_deviation_from_half < threshold:
                out.append(cand)
    return out


# ---------------------------------------------------------------------------
# Oscillation periods
# ---------------------------------------------------------------------------

_SIGNALS = {
    "C12": closed_form_c12,
    "C34": closed_form_c34,
    "C13": closed_form_c13,
    "GAP": concurrence_gap,
}


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator * b.denominator,
                             b.numerator * a.denominator),
                    a.denominator * b.denominator)


def _signal_terms(name: str, J: Fraction):
    """(kind, frequency, coefficient) terms of one closed-form signal."""
    one16 = Fraction(1, 16)
    three16 = Fraction(3, 16)
    if name == "C12":
        return [("cos", J - 3, one16), ("cos", 2 * (J - 1), one16),
                ("cos", J + 1, three16), ("cos", J - 1, three16),
                ("cos", 2 * (J + 1), one16), ("cos", J + 3, one16),
                ("cos", Fraction(2), Fraction(1, 8)),
                ("cos", Fraction(4), Fraction(1, 32))]
    if name == "C34":
        return [("cos", J - 3, -one16), ("cos", 2 * (J - 1), one16),
                ("cos", J + 1, -three16), ("cos", J - 1, -three16),
                ("cos", 2 * (J + 1), one16), ("cos", J + 3, -one16),
                ("cos", Fraction(2), Fraction(1, 8)),
                ("cos", Fraction(4), Fraction(1, 32))]
    if name == "C13":
        return [("sin", 2 * (J + 1), -one16), ("sin", 2 * (1 - J), -one16),
                ("sin", Fraction(2), -Fraction(1, 8)),
                ("cos", Fraction(4), -Fraction(1, 32))]
    if name == "GAP":
        return [("cos", J - 3, -Fraction(1, 8)), ("cos", J + 1, -Fraction(3, 8)),
                ("cos", J - 1, -Fraction(3, 8)), ("cos", J + 3, -Fraction(1, 8))]
    raise ValueError(f"unknown signal {name!r}")


def exact_signal_period(name: str, J) -> float | None:
    """Algebraic fundamental period of a closed-form signal at rational J.

    Collects the signal's frequency/coefficient table exactly (Fraction
    arithmetic), drops cancelled terms, and returns 2*pi over the gcd of the
    surviving frequencies.  None when the signal is constant or J is not a
    small rational.
    """
    J_frac = _as_small_fraction(J)
    if J_frac is None:
        return None
    combined: dict = {}
    for kind, freq, coeff in _signal_terms(name, J_frac):
        if freq == 0:
            continue  # constant (cos) or vanishing (sin) term
        if freq < 0:
            freq = -freq
            if kind == "sin":
                coeff = -coeff
        key = (kind, freq)
        combined[key] = combined.get(key, Fraction(0)) + coeff
    freqs = [freq for (kind, freq), coeff in combined.items() if coeff != 0]
    if not freqs:
        return None
    g = freqs[0]
    for f in freqs[1:]:
        g = _frac_gcd(g, f)
    return float(2.0 * math.pi / g)


def _as_small_fraction(J, max_denominator: int = 512) -> Fraction | None:
    if isinstance(J, Fraction):
        return J
    if isinstance(J, int):
        return Fraction(J)
    frac = Fraction(float(J)).limit_denominator(max_denominator)
    return frac if abs(float(frac) - float(J)) < 1e-12 else None


def estimate_period(values, dt: float) -> float | None:
    """Fundamental period by autocorrelation peak picking.

    Returns None for a flat (degenerate) signal; otherwise the lag of the
    first strong autocorrelation maximum, refined by parabolic interpolation.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 8 or float(np.std(x)) < 1e-12:
        return None
    x = x - x.mean()
    n = x.size
    num = np.correlate(x, x, mode="full")[n - 1:]
    cum = np.concatenate(([0.0], np.cumsum(x * x)))
    lead = cum[1:][::-1]          # sum x_i^2 over i < n-k, for lag k = 0..n-1
    trail = cum[n] - cum[:n]      # sum x_i^2 over i >= k
    norm = np.sqrt(lead * trail)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(norm > 0, num / norm, 0.0)
    for k in range(2, n - 1):
        if r[k] >= r[k - 1] and r[k] >= r[k + 1] and r[k] >= 0.99:
            denom = r[k - 1] - 2.0 * r[k] + r[k + 1]
            delta = 0.5 * (r[k - 1] - r[k + 1]) / denom if denom != 0 else 0.0
            return float((k + delta) * dt)
    return None


@dataclass(frozen=True)
class PeriodEstimate:
    signal: str
    estimated: float | None
    exact: float | None
    degenerate: bool


def periodicity_report(J, t_max: float | None = None, samples: int = 8192,
                       signals=tuple(_SIGNALS)) -> list[PeriodEstimate]:
    """Estimated and (for rational J) exact fundamental periods per signal.

    ``t_max`` must cover at least four periods of each signal; by default it
    is sized automatically from the exact periods (16*pi fallback).
    """
    exact = {name: exact_signal_period(name, J) for name in signals}
    if t_max is None:
        known = [p for p in exact.values() if p]
        t_max = 4.5 * max(known) if known else 16.0 * np.pi
    t_max = float(t_max)
    for name in signals:
        if exact[name] and t_max < 4.0 * exact[name]:
            raise ValueError(
                f"t_max={t_max:.3f} covers fewer than 4 periods of {name} "
                f"(exact period {exact[name]:.3f})")
    ts = np.linspace(0.0, t_max, samples)
    dt = ts[1] - ts[0]
    out = []
    for name in signals:
        values = _SIGNALS[name](ts, float(J))
        est = estimate_period(values, float(dt))
        out.append(PeriodEstimate(
            signal=name, estimated=est, exact=exact[name],
            degenerate=bool(est is None)))
    return out
