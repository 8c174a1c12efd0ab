"""Command-line front end: ``cosmicbell <subcommand> [options]``.

Every report is JSON (stdout, or ``--output``); plot data is CSV. Exit
status: 0 success, 2 bad input, 3 infeasible request, 1 internal failure.
"""

from __future__ import annotations

import argparse
import functools
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, bellsim, catalog, causal, cosmology, diagram, noisebudget, photonstat, randomness
from .config import (
    CONFIG_ENV_VAR,
    ExperimentSpec,
    bands_from,
    cosmology_from,
    default_config_path,
    read_config,
    spec_from_config,
)
from .pipeline import StageError, end_to_end

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

REFERENCE_THRESHOLDS = ((180.0, 2), (130.0, 2), (120.0, 3), (105.0, 3))
ROW_NAMES = {(180.0, 2): "2-way space", (130.0, 2): "2-way ground", (120.0, 3): "3-way space", (105.0, 3): "3-way ground"}

log = logging.getLogger("cosmicbell")


class InputError(ValueError):
    pass


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def emit(obj, output=None):
    text = json.dumps(obj, indent=2, default=_json_default, allow_nan=True)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


# --- subcommands -----------------------------------------------------------

def cmd_cosmo(args, ctx):
    params = ctx["params"]
    rows = []
    for z in args.z:
        rows.append({
            "z": z,
            "hubble_rate_per_mpc": cosmology.hubble_rate(z, params),
            "comoving_distance_mpc": cosmology.comoving_distance(z, params),
            "conformal_time_mpc": cosmology.conformal_time(z, params),
            "lookback_time_s": cosmology.lookback_time(z, params),
        })
    return {"params": params.as_dict(), "conformal_age_mpc": cosmology.conformal_age(params), "redshifts": rows}


def _parse_source(text):
    parts = _floats(text)
    if len(parts) != 3:
        raise InputError(f"--source expects z,ra,dec; got {text!r}")
    z, ra, dec = parts
    return z, causal.SkyPosition(ra, dec)


def cmd_causal(args, ctx):
    params = ctx["params"]
    sources = [_parse_source(s) for s in (args.source or [])]
    if args.sources:
        for rec in catalog.load_catalog(args.sources, strict=True).records:
            sources.append((rec.z, rec.position))
    if not sources:
        raise InputError("give at least one --source z,ra,dec or --sources file")
    events = [causal.emission_event(z, p, params) for z, p in sources]
    verdict = causal.lightcones_disjoint(events)
    seps = {
        f"{i}-{j}": causal.angular_separation(sources[i][1], sources[j][1])
        for i in range(len(sources)) for j in range(i + 1, len(sources))
    }
    return {
        "sources": [{"z": z, "ra_deg": p.right_ascension, "dec_deg": p.declination} for z, p in sources],
        "separations_deg": seps,
        "verdict": verdict.to_dict(),
    }


def cmd_thresholds(args, ctx):
    params = ctx["params"]
    if args.cmb:
        alpha_min = causal.cmb_min_separation(params, args.z_cmb)
        out = {
            "mode": "cmb",
            "z_cmb": args.z_cmb,
            "min_separation_deg": alpha_min,
            "closed_form_deg": causal.cmb_min_separation_closed_form(params, args.z_cmb),
            "min_separation_rounded_deg": round(alpha_min, 1),
        }
        if args.alpha:
            rows = []
            for a in args.alpha:
                pair, _ = causal.symmetric_margin(args.z_cmb, a, params)
                rows.append({"alpha_deg": a, "disjoint": pair >= 0, "pairwise_margin_mpc": pair})
            out["requested"] = rows
        return out

    if args.alpha:
        requests = [(a, args.n_way) for a in args.alpha]
    else:
        requests = list(REFERENCE_THRESHOLDS)
    rows = []
    for alpha, n in requests:
        z = causal.threshold_redshift(alpha, n, params)
        pair, earth = causal.symmetric_margin(z, alpha, params)
        rows.append({
            "name": ROW_NAMES.get((alpha, n), f"{n}-way"),
            "alpha_deg": alpha,
            "n_way": n,
            "z_threshold": z,
            "pairwise_margin_mpc": pair,
            "earth_margin_mpc": earth,
        })
    return {"mode": "quasar", "params": params.as_dict(), "rows": rows}


def _geometry(args):
    scope = photonstat.TelescopeConfig(args.diameter, args.efficiency)
    link = photonstat.LinkGeometry(args.baseline, args.latency)
    return photonstat.ExperimentGeometry.symmetric(scope, link)


def _search(args, ctx, finder):
    load = catalog.load_catalog(args.catalog)
    found = finder(load.records, _geometry(args), args.min_z, ctx["params"], ctx["bands"])
    shown = found[: args.limit] if args.limit else found
    return {
        "catalog": str(args.catalog),
        "accepted_rows": load.n_accepted,
        "rejected_rows": [{"line": ln, "reason": why} for ln, why in load.rejected],
        "n_candidates": len(found),
        "candidates": [c.to_dict() for c in shown],
    }


def cmd_pairs(args, ctx):
    return _search(args, ctx, catalog.find_pairs)


def cmd_triples(args, ctx):
    return _search(args, ctx, catalog.find_triples)


def cmd_coincidence(args, ctx):
    fluxes = args.flux
    if len(fluxes) == 1:
        fluxes = fluxes * args.arms
    geom = _geometry(args)
    window = photonstat.timing_window(geom.arms[0].link)
    mus = geom.mus(fluxes)
    p = photonstat.coincidence_probability(mus)
    rate = p / window.window
    runs = photonstat.runs_estimate(rate, args.duration)
    out = {
        "flux_per_s_m2": fluxes,
        "photon_rate_hz": [photonstat.photon_rate(photonstat.SourceFlux(f), geom.arms[0].scope) for f in fluxes],
        "window_s": window.window,
        "slack_s": window.slack,
        "timing_valid": window.valid,
        "mu": mus,
        "p_arm": [photonstat.detection_probability(m) for m in mus],
        "p_coincidence": p,
        "coincidence_rate_hz": rate,
        "duration_s": args.duration,
        "runs_expected": runs.expected,
        "runs_std": runs.std,
        "scaling": photonstat.scaling_report(mus, args.area_factor, args.baseline_factor).to_dict(),
    }
    if args.mc_windows:
        est, se = photonstat.simulate_coincidences(mus, args.mc_windows, args.seed)
        out["monte_carlo"] = {"windows": args.mc_windows, "seed": args.seed, "p_estimate": est, "standard_error": se,
                              "z_score": (est - p) / se if se > 0 else 0.0}
    if args.rate is not None:
        r = photonstat.runs_estimate(args.rate, args.duration)
        out["runs_at_given_rate"] = {"rate_hz": args.rate, "runs_expected": r.expected, "runs_std": r.std,
                                     "order_of_magnitude": round(math.log10(r.expected)) if r.expected > 0 else None}
    return out


def cmd_extract(args, ctx):
    if args.input:
        stream = randomness.ArrivalStream.load(args.input)
        seed = None
    else:
        stream = randomness.simulate_arrivals(args.rate, args.duration, args.seed)
        seed = args.seed
    if args.stream_out:
        stream.save(args.stream_out)
    if args.mode == "parity":
        bits = randomness.parity_bits(stream, args.bin_width)
    else:
        bits = randomness.whitened_bits(stream, args.k, args.whiten_rate)
    if args.bits_out:
        bits.save(args.bits_out)
    out = {
        "mode": args.mode,
        "n_arrivals": len(stream),
        "nominal_rate_hz": stream.nominal_rate,
        "seed": seed,
        "n_bits": len(bits),
        "bin_width_s": args.bin_width if args.mode == "parity" else None,
        "bits_per_arrival": args.k if args.mode == "whiten" else 1,
    }
    out["report"] = randomness.randomness_report(bits).to_dict() if len(bits) >= randomness.MIN_REPORT_BITS else None
    return out


def _bell_common(args, n_det):
    model = bellsim.make_model(args.model, n_det, args.f)
    source = None
    if args.bits:
        streams = [randomness.SettingBitstream.load(p) for p in args.bits]
        source = bellsim.Bitstreams(streams)
    return model, source


def _audit(args, records, model):
    if not args.audit:
        return None
    audit = bellsim.mutual_information_audit(records, model).to_dict()
    ctrl = bellsim.mutual_information_audit(bellsim.shuffled_settings(records, args.seed), model)
    audit["shuffled_control_bits"] = ctrl.measured_bits
    return audit


def cmd_simulate_bell(args, ctx):
    model, source = _bell_common(args, 2)
    angles = [math.radians(a) for a in _floats(args.angles)]
    if len(angles) != 4:
        raise InputError("--angles needs four values a,a',b,b' in degrees")
    stats, records = bellsim.run_chsh(model, source, angles, args.trials, args.seed)
    if args.records_out:
        records.save(args.records_out)
    return {
        "model": model.name, "f": args.f, "seed": args.seed, "angles_deg": _floats(args.angles),
        "statistics": stats.to_dict(),
        "local_bound": 2.0, "tsirelson_bound": bellsim.TSIRELSON,
        "runs": {k: v.to_dict() for k, v in bellsim.classify_runs(records).items()},
        "audit": _audit(args, records, model),
    }


def cmd_simulate_ghz(args, ctx):
    model, source = _bell_common(args, 3)
    stats, records = bellsim.run_ghz(model, args.trials, args.seed, source)
    if args.records_out:
        records.save(args.records_out)
    return {
        "model": model.name, "f": args.f, "seed": args.seed,
        "statistics": stats.to_dict(), "local_bound": 2.0, "quantum_value": 4.0,
        "runs": {k: v.to_dict() for k, v in bellsim.classify_runs(records).items()},
        "audit": _audit(args, records, model),
    }


def cmd_noise(args, ctx):
    nm = noisebudget.NoiseModel(args.background_rate, args.dark_rate)
    frac = noisebudget.local_fraction(args.signal_rate, nm)
    kinds = ["CHSH", "GHZ"] if args.test_kind == "both" else [args.test_kind.upper()]
    return {
        "signal_rate_hz": args.signal_rate,
        "background_rate_hz": args.background_rate,
        "dark_count_rate_hz": args.dark_rate,
        "local_fraction": frac,
        "verdicts": [noisebudget.budget_check(frac, k).to_dict() for k in kinds],
    }


def improvement_orders(lookback_s: float, latency_s: float) -> float:
    if not (lookback_s > 0 and latency_s > 0):
        raise ValueError("lookback and latency must be positive")
    return math.log10(lookback_s / latency_s)


def cmd_improvement(args, ctx):
    if (args.lookback is None) == (args.z is None):
        raise InputError("give exactly one of --lookback or --z")
    if args.z is not None:
        lookback = (cosmology.age_of_universe(ctx["params"]) if math.isinf(args.z)
                    else cosmology.lookback_time(args.z, ctx["params"]))
    else:
        lookback = args.lookback
    orders = improvement_orders(lookback, args.qrng_latency)
    return {
        "lookback_s": lookback,
        "z": None if args.z is None else ("inf" if math.isinf(args.z) else args.z),
        "qrng_latency_s": args.qrng_latency,
        "orders_of_magnitude": orders,
        "integer_orders": math.floor(orders + 1e-12),
    }


def cmd_conformal_diagram(args, ctx):
    sources = diagram.read_sources(args.sources) if args.sources else []
    rows = diagram.diagram_rows(sources, ctx["params"])
    if args.output:
        diagram.write_diagram(rows, args.output)
        return None
    w = sys.stdout
    w.write(",".join(diagram.COLUMNS) + "\n")
    for r in rows:
        w.write(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in diagram.COLUMNS) + "\n")
    return None


def cmd_end_to_end(args, ctx):
    if args.spec:
        spec = spec_from_config(read_config(args.spec))
    elif ctx["config"] is not None and ctx["config"].has_section("experiment"):
        spec = spec_from_config(ctx["config"])
    else:
        spec = ExperimentSpec.reference(args.test_kind or "CHSH", cosmology=ctx["params"])
    spec = spec.with_overrides(n_trials=args.trials, seed=args.seed, model=args.model, f=args.f)
    return end_to_end(spec)


# --- parser ----------------------------------------------------------------

def _add_geometry(p, baseline=50.0):
    p.add_argument("--diameter", type=float, default=1.0, help="telescope diameter, m")
    p.add_argument("--efficiency", type=float, default=0.5, help="detector efficiency")
    p.add_argument("--baseline", type=float, default=baseline, help="source-detector baseline, km")
    p.add_argument("--latency", type=float, default=0.0, help="setting latency, s")


def _add_bell(p):
    p.add_argument("--model", default="quantum", help="quantum | lhv | conspiracy")
    p.add_argument("--f", type=float, default=0.0, help="conspiracy fraction")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bits", nargs="+", help="one bit-per-line file per detector")
    p.add_argument("--records-out", help="write trial records as CSV")
    p.add_argument("--audit", action="store_true", help="mutual-information audit")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cosmicbell", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="store_true", help="print version as JSON and exit")
    ap.add_argument("--params-dump", action="store_true", help="print resolved configuration as JSON and exit")
    ap.add_argument("--config", "--params", dest="config",
                    help=f"INI config file (default: ${CONFIG_ENV_VAR})")
    ap.add_argument("-o", "--output", help="write the report here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    # -o/-v also accepted after the subcommand; SUPPRESS keeps the global value otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", parser_class=functools.partial(argparse.ArgumentParser, parents=[common]))

    p = sub.add_parser("cosmo", help="background quantities at given redshifts")
    p.add_argument("--z", type=float, nargs="+", default=[0.0, 3.65, 1090.0])
    p.set_defaults(func=cmd_cosmo)

    p = sub.add_parser("causal", help="light-cone verdict for a set of sources")
    p.add_argument("--source", action="append", help="z,ra_deg,dec_deg (repeatable)")
    p.add_argument("--sources", help="catalog file of sources")
    p.set_defaults(func=cmd_causal)

    p = sub.add_parser("thresholds", help="threshold redshifts for given separations")
    p.add_argument("--alpha", type=float, nargs="+", help="separation(s) in degrees")
    p.add_argument("--n-way", type=int, default=2, choices=(2, 3))
    p.add_argument("--cmb", action="store_true", help="minimum CMB patch separation mode")
    p.add_argument("--z-cmb", type=float, default=1090.0)
    p.set_defaults(func=cmd_thresholds)

    for name, func in (("pairs", cmd_pairs), ("triples", cmd_triples)):
        p = sub.add_parser(name, help=f"causally independent quasar {name} from a catalog")
        p.add_argument("--catalog", required=True)
        p.add_argument("--min-z", type=float, default=0.0)
        p.add_argument("--limit", type=int, default=0)
        _add_geometry(p)
        p.set_defaults(func=func)

    p = sub.add_parser("coincidence", help="coincidence probability and run-rate estimate")
    p.add_argument("--flux", type=float, nargs="+", default=[photonstat.REFERENCE_FLUX], help="photons/s/m^2 per arm")
    p.add_argument("--arms", type=int, default=2, help="arm count when a single flux is given")
    _add_geometry(p)
    p.add_argument("--duration", type=float, default=900.0, help="observing time, s")
    p.add_argument("--rate", type=float, help="also estimate runs at this coincidence rate, Hz")
    p.add_argument("--area-factor", type=float, default=1.0)
    p.add_argument("--baseline-factor", type=float, default=1.0)
    p.add_argument("--mc-windows", type=int, default=0)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_coincidence)

    p = sub.add_parser("extract", help="extract setting bits from photon arrivals")
    p.add_argument("--mode", choices=("parity", "whiten"), default="parity")
    p.add_argument("--bin-width", type=float, default=1e-6, help="parity bin, s")
    p.add_argument("--k", type=int, default=1, help="whitened bits per arrival")
    p.add_argument("--whiten-rate", type=float, help="rate used for whitening (default: empirical)")
    p.add_argument("--input", help="timestamp-per-line file; simulated if absent")
    p.add_argument("--rate", type=float, default=1e4)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--stream-out")
    p.add_argument("--bits-out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("simulate-bell", help="Monte Carlo CHSH test")
    _add_bell(p)
    p.add_argument("--angles", default="0,45,22.5,67.5", help="a,a',b,b' in degrees")
    p.set_defaults(func=cmd_simulate_bell)

    p = sub.add_parser("simulate-ghz", help="Monte Carlo GHZ/Mermin test")
    _add_bell(p)
    p.set_defaults(func=cmd_simulate_ghz)

    p = sub.add_parser("noise", help="noise-loophole budget")
    p.add_argument("--signal-rate", type=float, required=True)
    p.add_argument("--background-rate", type=float, default=0.0)
    p.add_argument("--dark-rate", type=float, default=0.0)
    p.add_argument("--test-kind", default="both", choices=("CHSH", "GHZ", "chsh", "ghz", "both"))
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("improvement-factor", help="orders of magnitude gained in causal lookback")
    p.add_argument("--lookback", type=float, help="lookback time, s")
    p.add_argument("--z", type=float, help="source redshift (inf for the big bang)")
    p.add_argument("--qrng-latency", type=float, default=1e-3, help="s")
    p.set_defaults(func=cmd_improvement)

    p = sub.add_parser("conformal-diagram", help="CSV polylines for a conformal diagram")
    p.add_argument("--sources", help="CSV with label,z,angle_deg")
    p.set_defaults(func=cmd_conformal_diagram)

    p = sub.add_parser("end-to-end", help="full pipeline report")
    p.add_argument("--spec", help="experiment INI file")
    p.add_argument("--test-kind", choices=("CHSH", "GHZ"))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--model")
    p.add_argument("--f", type=float)
    p.set_defaults(func=cmd_end_to_end)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.version:
        emit({"name": "cosmicbell", "version": __version__})
        return EXIT_OK
    try:
        path = args.config or default_config_path()
        cp = read_config(path) if path else None
        ctx = {"config": cp, "params": cosmology_from(cp), "bands": bands_from(cp)}
        if args.params_dump:
            dump = {"config_path": path, "cosmology": ctx["params"].as_dict(),
                    "bands": {b.name: [b.effective_wavelength, b.bandwidth] for b in ctx["bands"].values()}}
            if cp is not None and cp.has_section("experiment"):
                dump["experiment"] = spec_from_config(cp).to_dict()
            emit(dump, args.output)
            return EXIT_OK
        if args.command is None:
            ap.print_help(sys.stderr)
            return EXIT_INPUT
        result = args.func(args, ctx)
        if result is not None:
            result = {"command": args.command, **result}
            emit(result, args.output)
        return EXIT_OK
    except causal.InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL if not isinstance(exc.cause, (ValueError, KeyError, OSError)) else EXIT_INPUT
    except (ValueError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
