"""Command-line interface.

Commands: analyze (spectrum, noiseless rate, bounds), sweep (bound and
optimized rate curves vs observed error rate, CSV), characterize (response
CSVs -> detector spec JSON), attack (time-shift Monte-Carlo). Exit codes:
0 success, 1 input or solver error, 2 provably-zero rate.

Human output rounds to a few significant figures; --json / CSV carry full
double precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .adversary import (
    SolverConfig,
    maximize_phase_error,
    minimize_filter_success,
    mismatch_ratio_bounds,
)
from .characterize import diagonal_only_response, discretize_response, read_response_csv, sample_grid
from .detectors import (
    DetectorPair,
    deflate_common_nullspace,
    load_pair,
    mismatch_spectrum,
    read_spec_file,
    write_spec_file,
)
from .errors import QkdMismatchError
from .filtering import Knowledge, compute_filter, noiseless_rate, special_case_rate
from .rates import RateMethod, binary_entropy, four_phase_rate, noisy_rate
from .timeshift import TimeShiftScenario, simulate_time_shift

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ZERO_RATE = 2

SWEEP_COLUMNS = [
    "e_obs",
    "p_succ_bound",
    "p_succ_opt",
    "e_p_bound",
    "e_p_opt",
    "rate_bound",
    "rate_opt",
    "rate_4phase",
    "status",
]


def _sig(x: float, figures: int = 4) -> str:
    return f"{x:.{figures}g}"


def _rate(x: float) -> str:
    return f"{x:.3f}"


def _emit_json(doc, out=None) -> None:
    (out or sys.stdout).write(json.dumps(doc, indent=2) + "\n")


def _load_pair_from_spec(path) -> tuple[DetectorPair, str, str]:
    spec = read_spec_file(path)
    return load_pair(spec.e0_raw, spec.e1_raw), spec.label0, spec.label1


def _solver_config(args, seed=None) -> SolverConfig:
    return SolverConfig(
        starts=args.starts,
        rank=args.rank,
        seed=args.seed if seed is None else seed,
        constraint_tol=args.tol,
    )


# --- analyze ------------------------------------------------------------------


def cmd_analyze(args) -> int:
    pair, label0, label1 = _load_pair_from_spec(args.spec)
    knowledge = Knowledge(args.knowledge)
    result = special_case_rate(pair, knowledge)
    if result.zero_reason is not None:
        if args.json:
            _emit_json({
                "dimension": pair.dim,
                "labels": [label0, label1],
                "full_rank": [pair.full_rank0, pair.full_rank1],
                "noiseless_rate": 0.0,
                "zero_reason": result.zero_reason.value,
            })
        else:
            print(f"detectors: {label0} / {label1}  (d = {pair.dim})")
            print("R_noiseless = 0.000")
            print(f"zero-rate reason: {result.zero_reason.value}")
        return EXIT_ZERO_RATE

    effective = pair if pair.full_rank else deflate_common_nullspace(pair)
    spectrum = mismatch_spectrum(effective)
    filt = compute_filter(spectrum, effective)
    rate = noiseless_rate(spectrum)
    p_lo, ratio_up = mismatch_ratio_bounds(spectrum)

    if args.json:
        _emit_json({
            "dimension": pair.dim,
            "effective_dimension": effective.dim,
            "labels": [label0, label1],
            "full_rank": [pair.full_rank0, pair.full_rank1],
            "ratios": [float(x) for x in spectrum.ratios],
            "noiseless_rate": rate.rate,
            "limiting_ratio": rate.limiting_ratio,
            "p_succ_lower": p_lo,
            "ep_ratio_upper": ratio_up,
            "validity_margin": filt.validity_margin,
        })
        return EXIT_OK

    print(f"detectors: {label0} / {label1}  (d = {pair.dim})")
    rank_words = ["full" if ok else "singular" for ok in (pair.full_rank0, pair.full_rank1)]
    print(f"rank: {rank_words[0]} / {rank_words[1]}" + ("" if pair.full_rank else f", deflated to d' = {effective.dim}"))
    print("D = [" + ", ".join(_sig(x, 3) for x in spectrum.ratios) + "]")
    print(f"R_noiseless = {_rate(rate.rate)}")
    print(f"p_succ bound >= {_sig(p_lo, 3)}")
    print(f"e_p/e_p' bound <= {_sig(ratio_up, 3)}")
    print(f"filter validity margin = {_sig(filt.validity_margin)}")
    return EXIT_OK


# --- sweep --------------------------------------------------------------------


def _sweep_rows(pair: DetectorPair, args):
    spectrum = mismatch_spectrum(pair)
    filt = compute_filter(spectrum, pair)
    p_lo, ratio_up = mismatch_ratio_bounds(spectrum)
    grid = np.linspace(0.0, args.e_max, args.steps)

    rows = []
    for i, e in enumerate(grid):
        e = float(e)
        ep_bound = min(1.0, ratio_up * e)
        row = {
            "e_obs": e,
            "p_succ_bound": p_lo,
            "e_p_bound": ep_bound,
            "rate_bound": noisy_rate(p_lo, ep_bound, e, RateMethod.NOISY_BOUNDS).rate,
            "rate_4phase": four_phase_rate(e, e).rate,
            "p_succ_opt": None,
            "e_p_opt": None,
            "rate_opt": None,
            "status": "ok",
        }
        if not args.bounds_only:
            config = _solver_config(args, seed=args.seed + 7919 * i)
            try:
                p_opt, _ = minimize_filter_success(pair, filt, e, e, config)
                ep_opt, _ = maximize_phase_error(pair, filt, e, e, config)
                row["p_succ_opt"] = p_opt
                row["e_p_opt"] = ep_opt
                row["rate_opt"] = noisy_rate(p_opt, ep_opt, e, RateMethod.NOISY_OPTIMIZED).rate
                if p_opt < p_lo - 1e-4 or ep_opt > ep_bound + 1e-4:
                    row["status"] = "invariant-violation"
            except QkdMismatchError as exc:
                row["status"] = type(exc).__name__
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    if args.e_max > 0.25:
        raise QkdMismatchError(f"--e-max must be <= 0.25, got {args.e_max}")
    if args.steps < 2:
        raise QkdMismatchError(f"--steps must be >= 2, got {args.steps}")
    pair, _, _ = _load_pair_from_spec(args.spec)
    if not pair.full_rank:
        pair = deflate_common_nullspace(pair)
    rows = _sweep_rows(pair, args)

    if args.json:
        doc = [{k: row[k] for k in SWEEP_COLUMNS} for row in rows]
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                _emit_json(doc, fh)
        else:
            _emit_json(doc)
        return EXIT_OK

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([
            "" if row[k] is None else (repr(row[k]) if isinstance(row[k], float) else row[k])
            for k in SWEEP_COLUMNS
        ])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- characterize ---------------------------------------------------------------


def cmd_characterize(args) -> int:
    try:
        start_ns, end_ns = (float(tok) for tok in args.gate_ns.split(":"))
    except ValueError as exc:
        raise QkdMismatchError(f"--gate-ns expects START:END in ns, got {args.gate_ns!r}") from exc
    gate = sample_grid(args.bandwidth_ghz * 1e9, start_ns * 1e-9, end_ns * 1e-9)
    build = diagonal_only_response if args.diagonal_only else discretize_response
    responses = []
    for path in (args.csv0, args.csv1):
        responses.append(build(read_response_csv(path), gate))
    pair = load_pair(responses[0].matrix, responses[1].matrix)

    if args.out:
        write_spec_file(args.out, pair.e0.matrix, pair.e1.matrix, args.label0, args.label1)
    doc = {
        "dimension": gate.d,
        "spacing_ns": gate.spacing_s * 1e9,
        "sample_times_ns": [t * 1e9 for t in gate.sample_times_s],
        "full_rank": [pair.full_rank0, pair.full_rank1],
        "diagonal0": [float(x) for x in pair.e0.diagonal],
        "diagonal1": [float(x) for x in pair.e1.diagonal],
        "out": args.out,
    }
    if args.json:
        _emit_json(doc)
    else:
        print(f"d = {gate.d} samples, spacing {_sig(gate.spacing_s * 1e9)} ns")
        rank_words = ["full" if ok else "singular" for ok in (pair.full_rank0, pair.full_rank1)]
        print(f"rank: {rank_words[0]} / {rank_words[1]}")
        print("diagonal efficiencies 0: [" + ", ".join(_sig(x) for x in pair.e0.diagonal) + "]")
        print("diagonal efficiencies 1: [" + ", ".join(_sig(x) for x in pair.e1.diagonal) + "]")
        if args.out:
            print(f"wrote detector spec to {args.out}")
    if not args.out and not args.json:
        print("note: pass --out PATH to write the detector spec JSON")
    return EXIT_OK


# --- attack ---------------------------------------------------------------------


def _parse_shift(text: str, dim: int) -> tuple[np.ndarray, np.ndarray]:
    indices = []
    probs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            idx_s, p_s = token.split(":")
            indices.append(int(idx_s))
            probs.append(float(p_s))
        else:
            indices.append(int(token))
            probs.append(-1.0)
    if not indices:
        raise QkdMismatchError("--shift needs at least one index")
    p = np.asarray(probs)
    if np.all(p < 0):
        p = np.full(len(indices), 1.0 / len(indices))
    elif np.any(p < 0):
        raise QkdMismatchError("--shift must give probabilities for all indices or none")
    return np.asarray(indices, dtype=int), p


def cmd_attack(args) -> int:
    pair, _, _ = _load_pair_from_spec(args.spec)
    indices, probs = _parse_shift(args.shift, pair.dim)
    scenario = TimeShiftScenario(
        pair=pair, shift_indices=indices, shift_probs=probs, n_signals=args.n, seed=args.seed
    )
    outcome = simulate_time_shift(scenario)
    if args.json:
        _emit_json({
            "shift_indices": [int(i) for i in indices],
            "shift_probs": [float(p) for p in probs],
            "n_signals": args.n,
            "seed": args.seed,
            "detected_fraction": outcome.detected_fraction,
            "eve_guess_prob": outcome.eve_guess_prob,
            "eve_guess_prob_empirical": outcome.eve_guess_prob_empirical,
            "empirical_sigma": outcome.empirical_sigma,
            "naive_rate": outcome.naive_rate,
            "aware_rate": outcome.aware_rate,
            "eve_leak_bits": outcome.eve_leak_bits,
        })
        return EXIT_OK
    print(f"detected fraction = {_sig(outcome.detected_fraction)}")
    print(
        f"Eve guess probability = {_sig(outcome.eve_guess_prob)} analytic, "
        f"{_sig(outcome.eve_guess_prob_empirical)} +/- {_sig(outcome.empirical_sigma)} empirical"
    )
    print(f"Eve leak = {_sig(outcome.eve_leak_bits)} bits per detected signal")
    print(f"naive rate = {_rate(outcome.naive_rate)}")
    print(f"aware rate = {_rate(outcome.aware_rate)}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--starts", type=int, default=64, help="multistart count (default 64)")
    p.add_argument("--rank", type=int, default=1, help="attack-state rank (default 1)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--tol", type=float, default=1e-5, help="constraint tolerance (default 1e-5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkd-mismatch",
        description="Secure BB84 key rates for receivers with mismatched detector efficiencies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="spectrum, noiseless rate, and analytic bounds")
    p.add_argument("--spec", required=True, help="detector spec JSON")
    p.add_argument("--knowledge", choices=[k.value for k in Knowledge], default="full",
                   help="what is known about the responses (default full)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="bound and optimized rate curves vs observed error rate")
    p.add_argument("--spec", required=True)
    p.add_argument("--e-max", type=float, default=0.1, dest="e_max")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--bounds-only", action="store_true", dest="bounds_only")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--json", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("characterize", help="build a detector spec from response CSVs")
    p.add_argument("csv0", help="response tabulation for detector 0 (time_ns, efficiency)")
    p.add_argument("csv1", help="response tabulation for detector 1")
    p.add_argument("--bandwidth-ghz", type=float, required=True, dest="bandwidth_ghz")
    p.add_argument("--gate-ns", required=True, dest="gate_ns", help="gate window START:END in ns")
    p.add_argument("--diagonal-only", action="store_true", dest="diagonal_only")
    p.add_argument("--out", help="write the detector spec JSON here")
    p.add_argument("--label0", default="detector0")
    p.add_argument("--label1", default="detector1")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("attack", help="time-shift attack Monte-Carlo")
    p.add_argument("--spec", required=True)
    p.add_argument("--shift", default="0", help="index list 'j' or mixture 'j:p,k:q' (default 0)")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QkdMismatchError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
