"""Command line experiment runner.

    bandlaw simulate --config exp.toml [--seed S] [--n N] [--replicas R] ...
    bandlaw predict --weight band:0.5 --kmax 8
    bandlaw check-scl --weight kband4
    bandlaw verify-conditions --kind toeplitz --k 2 --block-n 15
    bandlaw oracle jw --partition 1-2,3-4 --weight band:0.5 --n 400
    bandlaw repro fig1 --out fig1.json --emit-hist bins=80

Reports are JSON (``"schema": 1``); CSV side outputs have a header row.
Exit status: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import limitlaw, spectra, structure
from .combinat import PairPartition, is_crossing
from .ensembles import make_sampler
from .rng import RngStream
from .structure import BandSpec, WeightFunction

SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

ENSEMBLES = ("rademacher", "gaussian", "curie_weiss", "au_gaussian")
STRUCTURES = ("full", "periodic_band", "nonperiodic_band", "weighted", "block")

# four narrow bands placed symmetrically about 1/2
KBAND4 = ((0.1, 0.2), (0.3, 0.4), (0.6, 0.7), (0.8, 0.9))


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


# --------------------------------------------------------------------------
# weight specs
# --------------------------------------------------------------------------

def _floats(text: str, path: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{path}: cannot parse numbers in {text!r}") from exc


def parse_weight(spec: str, path: str = "weight") -> WeightFunction:
    """Weight from a short spec string.

    const:C                     constant C
    band:RHO                    indicator of [0, RHO]
    pbband:RHO                  indicator of [0, RHO] and [1 - RHO, 1]
    indicator:LO:HI[,LO:HI...]  indicator of a union of intervals
    piecewise:B0,..,Bm:V1,..,Vm piecewise constant
    tabulated:V0,..,Vm          linear interpolation on a uniform grid
    kband4                      four bands symmetric about 1/2
    kband4-drop:I               the same with band I (1..4) removed
    """
    kind, _, rest = spec.strip().partition(":")
    try:
        if kind == "const":
            return WeightFunction.constant(float(rest or 1.0))
        if kind == "band":
            return WeightFunction.indicator_union([(0.0, float(rest))])
        if kind == "pbband":
            rho = float(rest)
            return WeightFunction.indicator_union([(0.0, rho), (1.0 - rho, 1.0)])
        if kind == "indicator":
            ivs = []
            for item in rest.split(","):
                lo, hi = item.split(":")
                ivs.append((float(lo), float(hi)))
            return WeightFunction.indicator_union(ivs)
        if kind == "piecewise":
            b, v = rest.split(":")
            return WeightFunction.piecewise_constant(_floats(b, path), _floats(v, path))
        if kind == "tabulated":
            return WeightFunction.tabulated(_floats(rest, path))
        if kind == "kband4":
            return WeightFunction.indicator_union(KBAND4)
        if kind == "kband4-drop":
            i = int(rest)
            if not 1 <= i <= 4:
                raise ValueError("band index must be 1..4")
            return WeightFunction.indicator_union([iv for j, iv in enumerate(KBAND4, 1) if j != i])
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}: unknown weight spec {spec!r}")


def parse_partition(text: str) -> PairPartition:
    """'1-2,3-4' or '{1,2},{3,4}' to a pair partition."""
    t = text.replace(" ", "")
    try:
        if "{" in t:
            blocks = [tuple(int(x) for x in b.strip("{}").split(",")) for b in t.split("},{")]
        else:
            blocks = [tuple(int(x) for x in b.split("-")) for b in t.split(",")]
        return PairPartition.from_blocks(blocks)
    except ValueError as exc:
        raise ConfigError(f"partition: {exc}") from exc


def _parse_kv(spec: str, path: str) -> dict:
    # "kind:key=val,key=val" -> {"kind": kind, key: val}
    kind, _, rest = spec.partition(":")
    out: dict = {"kind": kind.strip()}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"{path}: expected key=value, got {item!r}")
        try:
            out[key.strip()] = int(val) if val.strip().lstrip("-").isdigit() else float(val)
        except ValueError:
            out[key.strip()] = val.strip()
    return out


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    ensemble: dict = field(default_factory=lambda: {"kind": "rademacher"})
    structure: dict = field(default_factory=lambda: {"kind": "full"})
    n: int = 100
    replicas: int = 1
    seed: int = 0
    kmax: int = 8
    grid_m: int = limitlaw.DEFAULT_GRID_M

    def validate(self) -> ExperimentConfig:
        for name, lo in (("n", 1), ("replicas", 1), ("grid_m", 1)):
            v = getattr(self, name)
            if not isinstance(v, int) or v < lo:
                raise ConfigError(f"{name}: must be an integer >= {lo}, got {v!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.kmax not in (2, 4, 6, 8):
            raise ConfigError(f"kmax: must be an even integer <= 8, got {self.kmax!r}")
        e = self.ensemble
        if e.get("kind") not in ENSEMBLES:
            raise ConfigError(f"ensemble.kind: expected one of {ENSEMBLES}, got {e.get('kind')!r}")
        if e["kind"] == "curie_weiss":
            beta = e.get("beta")
            if not isinstance(beta, (int, float)) or not 0 < beta <= 1:
                raise ConfigError(f"ensemble.beta: must lie in (0, 1], got {beta!r}")
        if e["kind"] == "au_gaussian":
            rho = e.get("rho")
            if not isinstance(rho, (int, float)) or not 0 <= rho <= 1:
                raise ConfigError(f"ensemble.rho: must lie in [0, 1], got {rho!r}")
        s = self.structure
        kind = s.get("kind")
        if kind not in STRUCTURES:
            raise ConfigError(f"structure.kind: expected one of {STRUCTURES}, got {kind!r}")
        if kind in ("periodic_band", "nonperiodic_band"):
            given = [key for key in ("h", "exponent", "rho") if key in s]
            if len(given) != 1:
                raise ConfigError("structure: give exactly one of h, exponent, rho")
            band_spec(self)
        if kind == "weighted":
            if "weight" not in s:
                raise ConfigError("structure.weight: required for weighted structure")
            parse_weight(str(s["weight"]), "structure.weight")
        if kind == "block":
            bk = s.get("block_kind")
            if bk not in structure.EQUIVALENCE_KINDS:
                raise ConfigError(f"structure.block_kind: expected one of "
                                  f"{structure.EQUIVALENCE_KINDS}, got {bk!r}")
            k = s.get("k")
            if not isinstance(k, int) or k < 1:
                raise ConfigError(f"structure.k: must be a positive integer, got {k!r}")
            if bk == "hankel" and k % 2 == 0:
                raise ConfigError("structure.k: Hankel blocks need odd k")
        return self


def band_spec(cfg: ExperimentConfig) -> BandSpec:
    """Band geometry from h, an exponent (b = n^delta), or a ratio rho (h - 1 = floor(rho n))."""
    s, n = cfg.structure, cfg.n
    periodic = s["kind"] == "periodic_band"
    if "h" in s:
        h = s["h"]
        if not isinstance(h, int) or not 1 <= h <= n:
            raise ConfigError(f"structure.h: must be an integer in 1..{n}, got {h!r}")
        return BandSpec(n, h, periodic)
    if "exponent" in s:
        delta = s["exponent"]
        if not isinstance(delta, (int, float)) or not 0 <= delta <= 1:
            raise ConfigError(f"structure.exponent: must lie in [0, 1], got {delta!r}")
        b = math.ceil(n ** delta - 1e-9)
        b = b + 1 if b % 2 == 0 else b
        return BandSpec(n, (b + 1) // 2 if b < n else n, periodic)
    rho = s["rho"]
    if not isinstance(rho, (int, float)) or not 0 <= rho <= 1:
        raise ConfigError(f"structure.rho: must lie in [0, 1], got {rho!r}")
    return BandSpec(n, min(n, int(math.floor(rho * n + 1e-9)) + 1), periodic)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: {path}: {exc}") from exc


def config_from_mapping(data: dict) -> ExperimentConfig:
    known = {"ensemble", "structure", "n", "replicas", "seed", "kmax", "grid_m"}
    extra = set(data) - known - {"threads", "output"}
    if extra:
        raise ConfigError(f"{sorted(extra)[0]}: unknown configuration key")
    kw = {k: data[k] for k in known if k in data}
    for key in ("ensemble", "structure"):
        if key in kw:
            if isinstance(kw[key], str):
                kw[key] = _parse_kv(kw[key], key)
            elif not isinstance(kw[key], dict):
                raise ConfigError(f"{key}: must be a table or a spec string")
            else:
                kw[key] = dict(kw[key])
    return ExperimentConfig(**kw).validate()


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    summary: dict
    eigenvalues: list[np.ndarray]


def _weight_model(cfg: ExperimentConfig) -> tuple[WeightFunction | None, float]:
    """Weight whose limit law the (rescaled) matrix should follow, and the rescale."""
    s = cfg.structure
    kind = s["kind"]
    if kind == "full":
        return WeightFunction.constant(1.0), 1.0
    if kind == "weighted":
        return parse_weight(str(s["weight"]), "structure.weight"), 1.0
    if kind in ("periodic_band", "nonperiodic_band") and "rho" in s:
        spec = band_spec(cfg)
        rho = float(s["rho"])
        w = (WeightFunction.indicator_union([(0.0, rho), (1.0 - rho, 1.0)])
             if kind == "periodic_band" else WeightFunction.indicator_union([(0.0, rho)]))
        return w, math.sqrt(spec.b / cfg.n)
    return None, 1.0


def _build(cfg: ExperimentConfig, replica: int):
    rng = RngStream(cfg.seed, replica)
    e = cfg.ensemble
    sampler = make_sampler(e["kind"], **{k: v for k, v in e.items() if k != "kind"})
    s = cfg.structure
    kind = s["kind"]
    if kind == "block":
        rel = structure.make_equivalence(s["block_kind"], s["k"], cfg.n)
        return structure.build_from_relation(sampler(rel.n, rng), rel)
    sample = sampler(cfg.n, rng)
    if kind == "full":
        scale = 1.0 / math.sqrt(cfg.n)
        return structure.StructuredMatrix(cfg.n, sample.entries * scale, scale,
                                          {"structure": "full"})
    if kind == "weighted":
        return structure.build_weighted(sample, parse_weight(str(s["weight"])))
    return structure.build_band(sample, band_spec(cfg))


def _replica(cfg: ExperimentConfig, replica: int, rescale: float) -> tuple[np.ndarray, dict]:
    mat = _build(cfg, replica)
    lam = spectra.eigenvalues_symmetric(mat).eigenvalues * rescale
    res = spectra.SpectralResult(lam.size, lam)
    mom = [spectra.esd_moment(res, k) for k in range(1, cfg.kmax + 1)]
    norm = spectra.SpectralResult(lam.size, lam / math.sqrt(mom[1])) if mom[1] > 0 else res
    stats = {
        "replica": replica,
        "moments": mom,
        "ks_semicircle": spectra.ks_distance(res, spectra.semicircle_cdf),
        "ks_semicircle_normalized": spectra.ks_distance(norm, spectra.semicircle_cdf),
        "lambda_min": float(lam[0]),
        "lambda_max": float(lam[-1]),
    }
    return lam, stats


def _mean_se(x) -> dict:
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else None
    return {"mean": float(x.mean()), "stderr": se}


def predict_table(w: WeightFunction, kmax: int, grid_m: int) -> dict:
    grid = limitlaw.QuadGrid(grid_m)
    lm = limitlaw.limit_moments(w, kmax, grid)
    verdict = limitlaw.is_semicircle(w, grid)
    rows = [{"k": k, "raw": lm.values[k], "normalized": lm.normalized(k),
             "catalan": limitlaw.catalan_reference(k)} for k in range(2, kmax + 1, 2)]
    return {"weight": w.describe(), "grid_m": grid_m, "phi0": lm.phi0, "moments": rows,
            "semicircle": asdict(verdict)}


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   timings: bool = False) -> ExperimentReport:
    cfg.validate()
    t0 = time.perf_counter()
    w, rescale = _weight_model(cfg)
    R = cfg.replicas
    if threads > 1 and R > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: _replica(cfg, r, rescale), range(R)))
    else:
        results = [_replica(cfg, r, rescale) for r in range(R)]
    t_sim = time.perf_counter() - t0
    eig = [lam for lam, _ in results]
    per = [st for _, st in results]
    moments = np.array([st["moments"] for st in per])  # (R, kmax)
    m2 = moments[:, 1]
    summary: dict = {
        "schema": SCHEMA_VERSION,
        "command": "simulate",
        "config": asdict(cfg),
        "dimension": int(eig[0].size),
        "rescale": rescale,
        "empirical_moments": [dict(k=k, **_mean_se(moments[:, k - 1]))
                              for k in range(1, cfg.kmax + 1)],
        "normalized_moments": [dict(k=k, **_mean_se(moments[:, k - 1] / m2 ** (k / 2)))
                               for k in range(2, cfg.kmax + 1, 2)],
        "ks_semicircle": _mean_se([st["ks_semicircle"] for st in per]),
        "ks_semicircle_normalized": _mean_se([st["ks_semicircle_normalized"] for st in per]),
        "per_replica": per,
        "prediction": None,
    }
    if w is not None:
        pred = predict_table(w, cfg.kmax, cfg.grid_m)
        p0 = pred["phi0"]
        pred["phi0_normalized_empirical"] = [
            dict(k=k, **_mean_se(moments[:, k - 1] / p0 ** (k / 2)))
            for k in range(2, cfg.kmax + 1, 2)] if p0 > 0 else None
        summary["prediction"] = pred
    if timings:
        summary["timings"] = {"simulate_s": t_sim, "total_s": time.perf_counter() - t0}
    return ExperimentReport(summary, eig)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _dump(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _side_path(out: str | None, suffix: str) -> Path:
    if not out:
        raise ConfigError(f"--out: required to write the {suffix} CSV")
    p = Path(out)
    return p.with_name(p.stem + "." + suffix + ".csv")


def write_eigenvalues_csv(path: Path, eig: list[np.ndarray], label: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(([label] if label else []) + ["replica", "index", "eigenvalue"])
        for r, lam in enumerate(eig):
            for i, x in enumerate(lam):
                wr.writerow(([label] if label else []) + [r, i, repr(float(x))])


def histogram_rows(eig: list[np.ndarray], bins: int) -> list[list]:
    pooled = np.concatenate(eig)
    counts, edges = np.histogram(pooled, bins=bins)
    width = edges[1] - edges[0]
    dens = counts / (pooled.size * width)
    mids = 0.5 * (edges[1:] + edges[:-1])
    ref = spectra.semicircle_density(mids)
    return [[repr(float(a)), repr(float(b)), int(c), repr(float(d)), repr(float(s))]
            for a, b, c, d, s in zip(edges[:-1], edges[1:], counts, dens, ref)]


HIST_HEADER = ["bin_lo", "bin_hi", "count", "density", "semicircle_density"]


def parse_hist(text: str | None) -> int | None:
    if text is None:
        return None
    key, _, val = text.partition("=")
    try:
        bins = int(val if key.strip() == "bins" else key)
    except ValueError as exc:
        raise ConfigError(f"--emit-hist: expected bins=INT, got {text!r}") from exc
    if bins < 1:
        raise ConfigError("--emit-hist: bins must be positive")
    return bins


def resolve_threads(arg: int | None, data: dict) -> int:
    if arg is not None:
        t = arg
    elif os.environ.get("BANDLAW_THREADS"):
        try:
            t = int(os.environ["BANDLAW_THREADS"])
        except ValueError as exc:
            raise ConfigError("BANDLAW_THREADS: must be an integer") from exc
    else:
        t = int(data.get("threads", 1))
    if t < 1:
        raise ConfigError(f"threads: must be >= 1, got {t}")
    return t


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _overrides(args, data: dict) -> dict:
    data = dict(data)
    for key in ("seed", "n", "replicas", "kmax", "grid_m"):
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    if getattr(args, "ensemble", None):
        data["ensemble"] = _parse_kv(args.ensemble, "ensemble")
    if getattr(args, "structure", None):
        data["structure"] = _parse_kv(args.structure, "structure")
    if getattr(args, "weight", None):
        st = dict(data.get("structure", {"kind": "weighted"}))
        st["weight"] = args.weight
        data["structure"] = st
    return data


def cmd_simulate(args) -> int:
    data = load_config(args.config)
    cfg = config_from_mapping(_overrides(args, data))
    threads = resolve_threads(args.threads, data)
    bins = parse_hist(args.emit_hist)
    rep = run_experiment(cfg, threads, args.timings)
    if args.emit_eigenvalues:
        write_eigenvalues_csv(_side_path(args.out, "eigenvalues"), rep.eigenvalues)
    if bins:
        with open(_side_path(args.out, "hist"), "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(HIST_HEADER)
            wr.writerows(histogram_rows(rep.eigenvalues, bins))
    _dump(rep.summary, args.out)
    return 0


def cmd_predict(args) -> int:
    w = parse_weight(args.weight)
    if args.kmax not in (2, 4, 6, 8):
        raise ConfigError(f"kmax: must be an even integer <= 8, got {args.kmax}")
    out = {"schema": SCHEMA_VERSION, "command": "predict",
           **predict_table(w, args.kmax, args.grid_m)}
    _dump(out, args.out)
    return 0


def cmd_check_scl(args) -> int:
    w = parse_weight(args.weight)
    v = limitlaw.is_semicircle(w, limitlaw.QuadGrid(args.grid_m), args.tol)
    _dump({"schema": SCHEMA_VERSION, "command": "check-scl", "weight": w.describe(),
           "tol": args.tol, **asdict(v)}, args.out)
    return 0


def cmd_verify_conditions(args) -> int:
    try:
        rel = structure.make_equivalence(args.kind, args.k, args.block_n)
    except ValueError as exc:
        raise ConfigError(f"verify-conditions: {exc}") from exc
    rep = structure.verify_conditions(rel)
    _dump({"schema": SCHEMA_VERSION, "command": "verify-conditions", "kind": args.kind,
           "k": args.k, "block_n": args.block_n, "dimension": rel.n,
           "num_classes": rel.num_classes, **asdict(rep)}, args.out)
    return 0


def cmd_oracle_jw(args) -> int:
    pp = parse_partition(args.partition)
    if is_crossing(pp):
        raise ConfigError(f"partition: {pp} is crossing")
    w = parse_weight(args.weight)
    try:
        val = limitlaw.jw_finite_n(pp, w, args.n, args.mode, args.samples,
                                   RngStream(args.seed))
    except ValueError as exc:
        raise ConfigError(f"oracle: {exc}") from exc
    limit = limitlaw.jw(pp, w, limitlaw.QuadGrid(args.grid_m))
    _dump({"schema": SCHEMA_VERSION, "command": "oracle jw", "partition": str(pp),
           "weight": w.describe(), "n": args.n, "mode": args.mode, "finite_n": val,
           "limit": limit, "abs_error": abs(val - limit)}, args.out)
    return 0


def fig1_config(block_n: int, k: int, replicas: int, seed: int) -> ExperimentConfig:
    return ExperimentConfig(ensemble={"kind": "rademacher"},
                            structure={"kind": "block", "block_kind": "homogeneous", "k": k},
                            n=block_n, replicas=replicas, seed=seed, kmax=8).validate()


def cmd_repro_fig1(args) -> int:
    threads = resolve_threads(args.threads, {})
    bins = parse_hist(args.emit_hist)
    panels = []
    hist_rows = []
    eig_all = []
    for k in args.k:
        cfg = fig1_config(args.block_n, k, args.replicas, args.seed)
        rep = run_experiment(cfg, threads, args.timings)
        s = rep.summary
        panels.append({"k": k, "dimension": s["dimension"],
                       "empirical_moments": s["empirical_moments"],
                       "normalized_moments": s["normalized_moments"],
                       "ks_semicircle": s["ks_semicircle"],
                       "ks_semicircle_normalized": s["ks_semicircle_normalized"],
                       **({"timings": s["timings"]} if args.timings else {})})
        if bins:
            hist_rows += [[k, *row] for row in histogram_rows(rep.eigenvalues, bins)]
        if args.emit_eigenvalues:
            eig_all.append((k, rep.eigenvalues))
    if bins:
        with open(_side_path(args.out, "hist"), "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["k", *HIST_HEADER])
            wr.writerows(hist_rows)
    if args.emit_eigenvalues:
        path = _side_path(args.out, "eigenvalues")
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["k", "replica", "index", "eigenvalue"])
            for k, eig in eig_all:
                for r, lam in enumerate(eig):
                    for i, x in enumerate(lam):
                        wr.writerow([k, r, i, repr(float(x))])
    _dump({"schema": SCHEMA_VERSION, "command": "repro fig1", "ensemble": "rademacher",
           "block_kind": "homogeneous", "block_n": args.block_n, "replicas": args.replicas,
           "seed": args.seed, "panels": panels}, args.out)
    return 0


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bandlaw", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common_out(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")

    def run_flags(sp):
        sp.add_argument("--seed", type=_u64)
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--threads", type=int, help="worker threads (env BANDLAW_THREADS)")
        sp.add_argument("--emit-eigenvalues", action="store_true",
                        help="write <out>.eigenvalues.csv")
        sp.add_argument("--emit-hist", metavar="bins=INT", help="write <out>.hist.csv")
        sp.add_argument("--timings", action="store_true",
                        help="include wall-clock timings (breaks byte-identical output)")
        common_out(sp)

    sp = sub.add_parser("simulate", help="sample replicas and compare spectra to predictions")
    sp.add_argument("--config", help="TOML experiment file")
    sp.add_argument("--n", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--grid-m", dest="grid_m", type=int)
    sp.add_argument("--ensemble", help="e.g. curie_weiss:beta=0.5")
    sp.add_argument("--structure", help="e.g. periodic_band:exponent=0.8")
    sp.add_argument("--weight", help="weight spec for the weighted structure")
    run_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("predict", help="limit moments of a weight")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--grid-m", dest="grid_m", type=int, default=limitlaw.DEFAULT_GRID_M)
    common_out(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("check-scl", help="semicircle verdict for a weight")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--grid-m", dest="grid_m", type=int, default=limitlaw.DEFAULT_GRID_M)
    common_out(sp)
    sp.set_defaults(func=cmd_check_scl)

    sp = sub.add_parser("verify-conditions", help="brute-force structural condition counts")
    sp.add_argument("--kind", required=True, choices=structure.EQUIVALENCE_KINDS)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--block-n", dest="block_n", type=int, required=True)
    common_out(sp)
    sp.set_defaults(func=cmd_verify_conditions)

    sp = sub.add_parser("oracle", help="finite-n oracles")
    osub = sp.add_subparsers(dest="oracle", required=True)
    jp = osub.add_parser("jw", help="finite-n tree sum against the limit integral")
    jp.add_argument("--partition", required=True, help="e.g. 1-2,3-4")
    jp.add_argument("--weight", required=True)
    jp.add_argument("--n", type=int, required=True)
    jp.add_argument("--mode", choices=("auto", "exact", "mc"), default="auto")
    jp.add_argument("--samples", type=int, default=10**6)
    jp.add_argument("--seed", type=_u64, default=0)
    jp.add_argument("--grid-m", dest="grid_m", type=int, default=limitlaw.DEFAULT_GRID_M)
    common_out(jp)
    jp.set_defaults(func=cmd_oracle_jw)

    sp = sub.add_parser("repro", help="reproduce reference experiments")
    rsub = sp.add_subparsers(dest="target", required=True)
    fp = rsub.add_parser("fig1", help="homogeneous block spectra for several k")
    fp.add_argument("--block-n", dest="block_n", type=int, default=500)
    fp.add_argument("--k", type=int, nargs="+", default=[2, 3, 4])
    run_flags(fp)
    fp.set_defaults(func=cmd_repro_fig1, seed=0, replicas=10)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "repro":
        args.seed = 0 if args.seed is None else args.seed
        args.replicas = 10 if args.replicas is None else args.replicas
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except spectra.NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
