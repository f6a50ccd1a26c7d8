"""Command-line front end: sweeps, reports, and file output.

Subcommands: evolve, surface, table1, events, forbidden, wstate, report.
CSV output is comma-separated with a header row, LF line endings and
17-significant-digit floats, so downstream equality checks are exact;
repeated runs with the same configuration are byte-identical.

Exit codes: 0 all checks pass, 1 usage or configuration error,
2 numerical-health or certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dynamics import (
    amplitudes_closed_form,
    closed_form_state,
    evolve_numeric,
    hermitian_eigendecompose,
    oracle_equivalence_report,
    phase_aligned_distance,
)
from .entanglement import (
    ALL_PAIRS,
    closed_form_c12,
    closed_form_c13,
    closed_form_c34,
    concurrence_gap,
    gap_from_state,
    state_concurrence,
)
from .errors import ConfigError, NumericalHealthError, TriplaqError
from .qst_analysis import (
    find_qst_J,
    forbidden_J_scan,
    gap_at_transfer_times,
    locate_events_2d,
    periodicity_report,
    sequence_table,
    wstate_candidate_from_state,
    wstate_scan,
)
from .spin_core import (
    build_hamiltonian,
    default_plaquette,
    embed_single_excitation,
    initial_bell_state,
    norm_error,
    parse_geometry_text,
    sector_leak,
    swapped_control_plaquette,
)

SCHEMA_VERSION = 1
KNOWN_SIGNALS = ("C12", "C34", "C13", "C24", "GAP")


@dataclass(frozen=True)
class SweepConfig:
    t_min: float = 0.0
    t_max: float = 4.0 * np.pi
    t_steps: int = 129
    j_min: float = 0.0
    j_max: float = 2.0
    j_steps: int = 65
    d: float = 1.0
    geometry: str = "default"
    out: str = ""
    fmt: str = "csv"
    threshold: float = 1e-3

    def __post_init__(self):
        if self.t_steps < 2 or self.j_steps < 2:
            raise ConfigError("t_steps and j_steps must both be at least 2")
        if not self.t_min < self.t_max:
            raise ConfigError(f"need t_min < t_max, got {self.t_min} >= {self.t_max}")
        if not self.j_min < self.j_max:
            raise ConfigError(f"need j_min < j_max, got {self.j_min} >= {self.j_max}")
        if not self.d > 0:
            raise ConfigError(f"d must be positive, got {self.d}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if not self.threshold > 0:
            raise ConfigError(f"threshold must be positive, got {self.threshold}")

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)

    def j_grid(self) -> np.ndarray:
        return np.linspace(self.j_min, self.j_max, self.j_steps)


_CONFIG_TYPES = {f.name: f.type for f in fields(SweepConfig)}


def config_to_text(cfg: SweepConfig) -> str:
    """Flat key=value serialization; parses back field-for-field identical."""
    lines = [f"{name} = {getattr(cfg, name)!r}" for name in _CONFIG_TYPES]
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> SweepConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            if key in ("t_steps", "j_steps"):
                values[key] = int(value)
            elif key in ("geometry", "out", "fmt"):
                values[key] = value.strip("'\"")
            else:
                values[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: {exc}") from None
    return SweepConfig(**values)


def load_config(path: str) -> SweepConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    return config_from_text(p.read_text())


def resolve_geometry(name_or_path: str, J: float, D: float):
    """Builtin name ('default', 'swapped-control') or a bond-record file."""
    if name_or_path == "default":
        return default_plaquette(J, D)
    if name_or_path == "swapped-control":
        return swapped_control_plaquette(J, D)
    p = Path(name_or_path)
    if not p.is_file():
        raise ConfigError(f"geometry file not found: {name_or_path}")
    return parse_geometry_text(p.read_text(), D=D, J=J, name=p.name)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt_float(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(
                    v if isinstance(v, str) else _fmt_float(v) for v in row) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path: str, payload) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}") from exc


def _write_table(path: str, fmt: str, header: list[str], rows,
                 json_payload) -> None:
    if fmt == "csv":
        write_csv(path, header, rows)
    else:
        write_json(path, json_payload)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

_EVOLVE_HEADER = [
    "t",
    "re_a0001", "im_a0001", "re_a0010", "im_a0010",
    "re_a0100", "im_a0100", "re_a1000", "im_a1000",
    "abs_a0001", "abs_a0010", "abs_a0100", "abs_a1000",
    "norm_error", "sector_leak", "numeric_deviation",
]


def cmd_evolve(cfg: SweepConfig, J: float) -> dict:
    """Closed-form trajectory at fixed J with the numeric-route deviation."""
    geom = resolve_geometry(cfg.geometry, J, cfg.d)
    H = build_hamiltonian(geom)
    decomp = hermitian_eigendecompose(H)
    psi0 = initial_bell_state()
    rows = []
    worst_dev = worst_norm = worst_leak = 0.0
    for t in cfg.t_grid():
        amps = amplitudes_closed_form(float(t), J, cfg.d)
        psi_c = embed_single_excitation(amps)
        psi_n = evolve_numeric(H, psi0, float(t), decomp=decomp)
        dev = phase_aligned_distance(psi_n, psi_c)
        nerr, leak = norm_error(psi_n), sector_leak(psi_n)
        worst_dev, worst_norm = max(worst_dev, dev), max(worst_norm, nerr)
        worst_leak = max(worst_leak, leak)
        a = amps.amplitudes
        rows.append([float(t)]
                    + [part for amp in a for part in (amp.real, amp.imag)]
                    + [abs(amp) for amp in a]
                    + [nerr, leak, dev])
    payload = {"columns": _EVOLVE_HEADER, "rows": rows, "J": J, "D": cfg.d,
               "geometry": cfg.geometry}
    _write_table(cfg.out, cfg.fmt, _EVOLVE_HEADER, rows, payload)
    return {"rows": len(rows), "max_numeric_deviation": worst_dev,
            "max_norm_error": worst_norm, "max_sector_leak": worst_leak}


_SIGNAL_COLUMNS = {
    "C12": ("c12_wootters", "c12_closed_form"),
    "C34": ("c34_wootters", "c34_closed_form"),
    "C13": ("c13_wootters", "c13_closed_form"),
    "C24": ("c24_wootters",),
    "GAP": ("gap_closed_form", "gap_from_states"),
}


def _surface_state(cfg: SweepConfig, t: float, J: float,
                   decomp_cache: dict) -> np.ndarray:
    if cfg.geometry == "default":
        return closed_form_state(t, J, cfg.d)
    if J not in decomp_cache:
        H = build_hamiltonian(resolve_geometry(cfg.geometry, J, cfg.d))
        decomp_cache[J] = (H, hermitian_eigendecompose(H))
    H, decomp = decomp_cache[J]
    return evolve_numeric(H, initial_bell_state(), t, decomp=decomp)


def cmd_surface(cfg: SweepConfig, signals) -> dict:
    """Signal surfaces on the (t, J) grid, rows ordered t-major.

    For each requested signal both the Wootters column and the closed-form
    column are emitted when both exist, so the discrepancy between them can
    be plotted externally.
    """
    signals = list(signals)
    if not signals:
        raise ConfigError("at least one signal is required")
    unknown = [s for s in signals if s not in KNOWN_SIGNALS]
    if unknown:
        raise ConfigError(f"unknown signals {unknown}; choose from {KNOWN_SIGNALS}")
    ordered = [s for s in KNOWN_SIGNALS if s in signals]
    header = ["t", "j"]
    for s in ordered:
        header.extend(_SIGNAL_COLUMNS[s])
    rows = []
    cache: dict = {}
    for t in cfg.t_grid():
        for J in cfg.j_grid():
            t_f, j_f = float(t), float(J)
            psi = _surface_state(cfg, t_f, j_f, cache)
            row = [t_f, j_f]
            for s in ordered:
                if s == "C12":
                    row += [state_concurrence(psi, (1, 2)), closed_form_c12(t_f, j_f)]
                elif s == "C34":
                    row += [state_concurrence(psi, (3, 4)), closed_form_c34(t_f, j_f)]
                elif s == "C13":
                    row += [state_concurrence(psi, (1, 3)), closed_form_c13(t_f, j_f)]
                elif s == "C24":
                    row += [state_concurrence(psi, (2, 4))]
                else:
                    row += [concurrence_gap(t_f, j_f), gap_from_state(psi)]
            rows.append(row)
    payload = {"columns": header, "rows": rows, "signals": ordered, "D": cfg.d,
               "geometry": cfg.geometry}
    _write_table(cfg.out, cfg.fmt, header, rows, payload)
    return {"rows": len(rows), "columns": header}


def _verify_cell(m: int, j_values) -> tuple[bool, bool]:
    gap_ok, wootters_ok = True, True
    for j in j_values:
        j_f = float(j)
        gap_ok &= abs(gap_at_transfer_times(m, j) - 1.0) <= 1e-12
        gap_ok &= abs(concurrence_gap(m * np.pi, j_f) - 1.0) <= 1e-12
        psi = closed_form_state(m * np.pi, j_f)
        wootters_ok &= state_concurrence(psi, (1, 2)) <= 1e-8
        wootters_ok &= state_concurrence(psi, (3, 4)) >= 1.0 - 1e-8
    return bool(gap_ok), bool(wootters_ok)


def cmd_table1(cfg: SweepConfig, max_m: int) -> dict:
    """The fractional-coupling table with per-cell verification status."""
    if max_m < 1:
        raise ConfigError(f"max_m must be at least 1, got {max_m}")
    entries = sequence_table(max_m)
    rows_by_m: dict[int, list] = {m: [] for m in range(1, max_m + 1)}
    for e in entries:
        rows_by_m[e.m].append(e)
    json_rows, csv_rows, populated = [], [], 0
    all_ok = True
    for m in range(1, max_m + 1):
        fams = []
        populated += 1  # the shared transfer-time cell of the row
        for e in rows_by_m[m]:
            gap_ok, wootters_ok = _verify_cell(m, e.values)
            all_ok &= gap_ok and wootters_ok
            fams.append({"label": e.label, "k": e.family,
                         "j_values": [str(e.lower), str(e.upper)],
                         "gap_exact_ok": gap_ok, "wootters_ok": wootters_ok})
            csv_rows.append([str(m), str(e.family), e.label, str(e.lower),
                             str(e.upper), str(m), str(gap_ok), str(wootters_ok)])
            populated += 1
        json_rows.append({"m": m, "transfer_time_over_pi": m, "families": fams})
    payload = {"max_m": max_m, "rows": json_rows, "populated_cells": populated,
               "all_verified": all_ok}
    header = ["m", "k", "label", "j_lower", "j_upper", "t_over_pi",
              "gap_exact_ok", "wootters_ok"]
    _write_table(cfg.out, cfg.fmt, header, csv_rows, payload)
    return {"populated_cells": populated, "all_verified": all_ok}


def _event_dict(e) -> dict:
    return {"m": e.m, "t": e.t, "j": str(e.J) if isinstance(e.J, Fraction) else e.J,
            "gap_value": e.gap_value, "c12": e.c12, "c34": e.c34,
            "confirmed": e.confirmed, "snapped": e.snapped}


def cmd_events(cfg: SweepConfig, resolution: int) -> dict:
    events = locate_events_2d((cfg.t_min, cfg.t_max), (cfg.j_min, cfg.j_max),
                              resolution)
    payload = {"events": [_event_dict(e) for e in events], "count": len(events)}
    header = ["m", "t", "j", "gap_value", "c12", "c34", "confirmed", "snapped"]
    rows = [[str(e.m), e.t, str(e.J), e.gap_value, e.c12, e.c34,
             str(e.confirmed), str(e.snapped)] for e in events]
    _write_table(cfg.out, cfg.fmt, header, rows, payload)
    return {"count": len(events),
            "unconfirmed": sum(1 for e in events if not e.confirmed)}


def cmd_forbidden(cfg: SweepConfig, j_values, t_max_scan: float) -> dict:
    results = forbidden_J_scan(j_values, t_max_scan)
    payload = {"t_max": t_max_scan,
               "results": [asdict(r) for r in results]}
    header = ["j", "sup_gap", "t_at_sup", "margin", "forbidden"]
    rows = [[r.J, r.sup_gap, r.t_at_sup, r.margin, str(r.forbidden)]
            for r in results]
    _write_table(cfg.out, cfg.fmt, header, rows, payload)
    return {"results": {str(r.J): r.margin for r in results}}


def cmd_wstate(cfg: SweepConfig, resolution: int) -> dict:
    cands = wstate_scan((cfg.t_min, cfg.t_max), (cfg.j_min, cfg.j_max),
                        resolution, cfg.threshold)
    payload = {"threshold": cfg.threshold,
               "candidates": [asdict(c) for c in cands], "count": len(cands)}
    header = ["t", "j", "c12", "c34", "c13", "c24", "max_deviation_from_half"]
    rows = [[c.t, c.J, *c.concurrences, c.max_deviation_from_half] for c in cands]
    _write_table(cfg.out, cfg.fmt, header, rows, payload)
    return {"count": len(cands)}


# ---------------------------------------------------------------------------
# Consolidated certification report
# ---------------------------------------------------------------------------

_ORACLE_J = (0.0, 0.25, 0.5, 2.0 / 3.0, 1.0, 4.0 / 3.0, 1.5, 2.0)


def _report_results(cfg: SweepConfig) -> tuple[dict, dict]:
    results: dict = {}
    checks: dict = {}

    # Route equivalence, committed geometry vs swapped negative control.
    t_fine = np.arange(0.0, 8.0 * np.pi + 1e-12, np.pi / 128.0)
    oracle = oracle_equivalence_report(_ORACLE_J, t_fine, D=cfg.d)
    t_coarse = np.arange(0.0, 2.0 * np.pi + 1e-12, np.pi / 16.0)
    control = oracle_equivalence_report(_ORACLE_J, t_coarse, D=cfg.d,
                                        geometry_factory=swapped_control_plaquette)
    results["oracle"] = {
        "max_deviation": oracle.max_deviation, "worst_t": oracle.worst_t,
        "worst_j": oracle.worst_J, "points": oracle.points,
        "control_max_deviation": control.max_deviation}
    checks["oracle_equivalence"] = oracle.max_deviation < 1e-9
    checks["negative_control_detects_swap"] = control.max_deviation > 1e-2

    # Closed-form comparison, monogamy and W-scan share one grid sweep.
    d12 = d34 = d13 = 0.0
    d12_sq = d34_sq = 0.0
    d13_vs_24 = gap_identity = monogamy_excess = 0.0
    wstate_candidates = []
    for t in cfg.t_grid():
        for J in cfg.j_grid():
            t_f, j_f = float(t), float(J)
            psi = closed_form_state(t_f, j_f, cfg.d)
            c = {pair: state_concurrence(psi, pair) for pair in ALL_PAIRS}
            p12, p34 = closed_form_c12(t_f, j_f), closed_form_c34(t_f, j_f)
            p13 = closed_form_c13(t_f, j_f)
            d12 = max(d12, abs(c[(1, 2)] - p12))
            d34 = max(d34, abs(c[(3, 4)] - p34))
            d13 = max(d13, abs(c[(1, 3)] - p13))
            d12_sq = max(d12_sq, abs(c[(1, 2)] ** 2 - p12))
            d34_sq = max(d34_sq, abs(c[(3, 4)] ** 2 - p34))
            d13_vs_24 = max(d13_vs_24, abs(c[(1, 3)] - c[(2, 4)]))
            gap_identity = max(gap_identity,
                               abs(concurrence_gap(t_f, j_f) - (p34 - p12)))
            for site in range(1, 5):
                total = sum(c[pair] ** 2 for pair in ALL_PAIRS if site in pair)
                monogamy_excess = max(monogamy_excess, total - 1.0)
            dev = max(abs(c[pair] - 0.5) for pair in
                      ((1, 2), (3, 4), (1, 3), (2, 4)))
            if dev < cfg.threshold:
                wstate_candidates.append({"t": t_f, "j": j_f,
                                          "max_deviation_from_half": dev})
    results["closed_form_comparison"] = {
        "max_abs_diff_c12": d12, "max_abs_diff_c34": d34, "max_abs_diff_c13": d13,
        "max_abs_diff_c12_vs_square": d12_sq, "max_abs_diff_c34_vs_square": d34_sq,
        "max_abs_diff_c13_vs_c24": d13_vs_24,
        "max_gap_identity_defect": gap_identity}
    checks["closed_form_c12_c34_match_wootters"] = d12 < 1e-8 and d34 < 1e-8
    checks["closed_form_c13_discrepancy_detected"] = d13 > 1e-3
    checks["closed_forms_track_squared_wootters"] = d12_sq < 1e-8 and d34_sq < 1e-8
    checks["gap_identity_pointwise"] = gap_identity < 1e-12
    checks["monogamy_bound"] = monogamy_excess <= 1e-9
    results["monogamy_max_excess"] = monogamy_excess

    results["wstate"] = {"threshold": cfg.threshold,
                         "candidates": wstate_candidates,
                         "count": len(wstate_candidates)}
    checks["wstate_scan_empty"] = len(wstate_candidates) == 0
    injected = wstate_candidate_from_state(
        embed_single_excitation((0.5, 0.5, 0.5, 0.5)))
    results["wstate_selftest_deviation"] = injected.max_deviation_from_half
    checks["wstate_selftest"] = injected.max_deviation_from_half < 1e-12

    # Exact gap reduction at transfer times.
    j_dense = np.linspace(cfg.j_min, cfg.j_max, 1001)
    reduction_defect = 0.0
    for m in range(1, 11):
        lhs = concurrence_gap(m * np.pi, j_dense)
        rhs = (-1.0) ** (m + 1) * np.cos(m * np.pi * j_dense)
        reduction_defect = max(reduction_defect, float(np.abs(lhs - rhs).max()))
    results["gap_reduction_max_defect"] = reduction_defect
    checks["gap_reduction_exact"] = reduction_defect <= 1e-12

    # Fractional table and per-event transfer verification, m <= 7.
    table_ok, transfers_ok = True, True
    transfer_stats = {"max_c12": 0.0, "min_c34": 1.0}
    for m in range(1, 8):
        sol = find_qst_J(m)
        cells = {v for e in sequence_table(7) if e.m == m for v in e.values}
        table_ok &= cells <= set(sol)
        for j in sol:
            psi = closed_form_state(m * np.pi, float(j))
            c12 = state_concurrence(psi, (1, 2))
            c34 = state_concurrence(psi, (3, 4))
            transfer_stats["max_c12"] = max(transfer_stats["max_c12"], c12)
            transfer_stats["min_c34"] = min(transfer_stats["min_c34"], c34)
            transfers_ok &= c12 <= 1e-8 and c34 >= 1.0 - 1e-8
    results["transfer_verification"] = transfer_stats
    checks["table1_families_in_solution_sets"] = table_ok
    checks["transfers_verified"] = transfers_ok

    # Forbidden couplings and the event finder at a pinned forbidden J.
    forb = forbidden_J_scan((1.0, 3.0), 20.0 * np.pi)
    results["forbidden"] = {str(r.J): {"sup_gap": r.sup_gap, "margin": r.margin,
                                       "t_at_sup": r.t_at_sup} for r in forb}
    pinned = locate_events_2d((cfg.t_min, cfg.t_max), (1.0, 1.0), 64)
    results["events_at_pinned_j1"] = len(pinned)
    checks["forbidden_couplings_certified"] = (
        all(r.forbidden for r in forb) and not pinned)

    # Event scan over the configured window.
    events = locate_events_2d((cfg.t_min, cfg.t_max), (cfg.j_min, cfg.j_max), 64)
    results["events"] = [_event_dict(e) for e in events]
    checks["all_events_confirmed"] = all(e.confirmed for e in events)

    # Conservation along numeric trajectories.
    worst_norm = worst_leak = 0.0
    psi0 = initial_bell_state()
    for J in (0.0, 0.5, 1.0, 2.0):
        H = build_hamiltonian(resolve_geometry(cfg.geometry, J, cfg.d))
        decomp = hermitian_eigendecompose(H)
        for t in np.arange(0.0, 4.0 * np.pi, np.pi / 32.0):
            psi = evolve_numeric(H, psi0, float(t), decomp=decomp)
            worst_norm = max(worst_norm, norm_error(psi))
            worst_leak = max(worst_leak, sector_leak(psi))
    results["conservation"] = {"max_norm_error": worst_norm,
                               "max_sector_leak": worst_leak}
    checks["norm_sector_conservation"] = worst_norm < 1e-10 and worst_leak < 1e-12

    # Oscillation periods at two representative couplings.
    period_ok = True
    periods = {}
    for J in (0.0, 1.0):
        rows = []
        for est in periodicity_report(J):
            rows.append({"signal": est.signal, "estimated": est.estimated,
                         "exact": est.exact, "degenerate": est.degenerate})
            if est.exact and est.estimated:
                period_ok &= abs(est.estimated - est.exact) < 0.05 * est.exact
        periods[str(J)] = rows
    results["periodicity"] = periods
    checks["periodicity_consistent"] = period_ok

    return results, checks


def cmd_report(cfg: SweepConfig) -> tuple[dict, int]:
    """Single JSON document bundling every certification scan.

    Configuration problems produce a structured error document and exit
    code 1; any failed check yields exit code 2.
    """
    try:
        results, checks = _report_results(cfg)
    except (ConfigError, TriplaqError) as exc:
        payload = {"schema_version": SCHEMA_VERSION,
                   "config_echo": asdict(cfg),
                   "error": {"type": type(exc).__name__, "message": str(exc)}}
        write_json(cfg.out, payload)
        return payload, 1 if isinstance(exc, ConfigError) else 2
    payload = {"schema_version": SCHEMA_VERSION,
               "config_echo": asdict(cfg),
               "results": results,
               "checks": checks}
    write_json(cfg.out, payload)
    return payload, 0 if all(checks.values()) else 2


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must map to exit code 1
        raise ConfigError(message)


def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be A:B:N, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}: {exc}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="triplaq",
                     description="Four-site plaquette dynamics and "
                                 "entanglement-transfer analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--t-range", metavar="A:B:N", help="time grid")
        p.add_argument("--j-range", metavar="A:B:N", help="coupling grid")
        p.add_argument("--d", type=float, help="ring coupling scale (default 1)")
        p.add_argument("--geometry",
                       help="builtin name (default, swapped-control) or file path")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"))
        p.add_argument("--out", help="output file path")
        p.add_argument("--threshold", type=float, help="W-scan threshold")

    p = sub.add_parser("evolve", help="trajectory at fixed J")
    common(p)
    p.add_argument("--j", type=float, default=0.5, help="coupling (default 0.5)")

    p = sub.add_parser("surface", help="signal surfaces over (t, J)")
    common(p)
    p.add_argument("--signals", default="C12,C34,C13,C24,GAP",
                   help="comma list from C12,C34,C13,C24,GAP")

    p = sub.add_parser("table1", help="fractional coupling table")
    common(p)
    p.add_argument("--max-m", type=int, default=7)

    p = sub.add_parser("events", help="locate complete-transfer events")
    common(p)
    p.add_argument("--resolution", type=int, default=64,
                   help="grid points per pi (>= 64)")

    p = sub.add_parser("forbidden", help="certify forbidden couplings")
    common(p)
    p.add_argument("--j-values", default="1,3", help="comma list of couplings")
    p.add_argument("--t-max", dest="t_max_scan", type=float,
                   default=20.0 * np.pi, help="scan horizon")

    p = sub.add_parser("wstate", help="W-state witness scan")
    common(p)
    p.add_argument("--resolution", type=int, default=32,
                   help="grid points per pi / per unit J")

    p = sub.add_parser("report", help="consolidated certification report")
    common(p)
    return parser


def _config_from_args(args) -> SweepConfig:
    cfg = load_config(args.config) if args.config else SweepConfig()
    overrides = {}
    if args.t_range:
        overrides["t_min"], overrides["t_max"], overrides["t_steps"] = \
            _parse_range(args.t_range)
    if args.j_range:
        overrides["j_min"], overrides["j_max"], overrides["j_steps"] = \
            _parse_range(args.j_range)
    for attr, key in (("d", "d"), ("geometry", "geometry"), ("fmt", "fmt"),
                      ("out", "out"), ("threshold", "threshold")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    merged = {**{f.name: getattr(cfg, f.name) for f in fields(SweepConfig)},
              **overrides}
    return SweepConfig(**merged)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config_from_args(args)
        if not cfg.out:
            ext = "json" if (cfg.fmt == "json" or args.command == "report") else "csv"
            cfg = SweepConfig(**{**{f.name: getattr(cfg, f.name)
                                    for f in fields(SweepConfig)},
                                 "out": f"{args.command}.{ext}"})
        if args.command == "evolve":
            summary = cmd_evolve(cfg, args.j)
        elif args.command == "surface":
            signals = [s.strip().upper() for s in args.signals.split(",") if s.strip()]
            summary = cmd_surface(cfg, signals)
        elif args.command == "table1":
            summary = cmd_table1(cfg, args.max_m)
        elif args.command == "events":
            summary = cmd_events(cfg, args.resolution)
        elif args.command == "forbidden":
            j_values = [float(v) for v in args.j_values.split(",") if v.strip()]
            summary = cmd_forbidden(cfg, j_values, args.t_max_scan)
        elif args.command == "wstate":
            summary = cmd_wstate(cfg, args.resolution)
        else:
            payload, code = cmd_report(cfg)
            if "checks" in payload:
                n_fail = sum(1 for ok in payload["checks"].values() if not ok)
                verdict = "all checks pass" if code == 0 else f"{n_fail} failed checks"
            else:
                verdict = "error"
            print(f"wrote {cfg.out} ({verdict})")
            return code
        print(f"wrote {cfg.out} " + " ".join(f"{k}={v}" for k, v in summary.items()))
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalHealthError as exc:
        print(f"numerical-health error: {exc}", file=sys.stderr)
        return 2
    except TriplaqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
