"""Experiment runner: noise-trajectory sweeps, tomography, and result files.

Per hop count m the runner simulates `trajectories` independent protocol
runs, averages their reduced (axis, holder) density matrices, and feeds
the average through sampled (or exact) tomography.  Shots are drawn from
the trajectory-averaged state rather than one per run, which is
statistically equivalent for linear functionals of the ensemble at a
fraction of the cost.  In post-selection mode trajectories are bucketed by
discriminator first and each bucket is reconstructed against its own
variant target.

Reproducibility: every random consumer derives its own stream from
(seed, m, index); trajectory index t uses [seed, m, t] and the QST and
bootstrap streams use fixed indices far above any realistic trajectory
count.  Results are therefore byte-identical for a fixed seed and backend
regardless of worker count.  Wall-clock seconds are reported through an
injectable clock so tests can pin them.
"""

import json
import multiprocessing
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import (
    ALL_DISCRIMINATORS,
    bootstrap_ci,
    fidelity_pure,
    negativity,
    two_qubit_graph_state,
    variant_targets,
)
from .noise import NoiseModel, build_calibration
from .protocol import WheelConfig, discriminator, run_protocol
from .tomography import reconstruct_counts, tomograph, tomograph_buckets

CSV_HEADER = "m,mode,negativity,neg_err,fidelity,fid_err,trajectories,seconds"

# Stream indices that cannot collide with trajectory indices.
_QST_STREAM = 1 << 40
_BOOT_NEG_STREAM = (1 << 40) + 1
_BOOT_FID_STREAM = (1 << 40) + 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    hop_list: tuple = ()
    qubits: int = 20
    mode: str = "dynamic"
    trajectories: int = 200
    shots_per_setting: int = 1000
    bootstrap_resamples: int = 200
    seed: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel)
    exact: bool = False
    propagate_readout_flips: bool = True
    workers: int = 1
    output: str = "results.csv"
    format: str = "csv"

    def __post_init__(self):
        if not self.hop_list:
            raise ConfigError("hops must list at least one hop count")
        if any(m < 0 for m in self.hop_list):
            raise ConfigError("hop counts must be non-negative")
        if self.qubits < 3:
            raise ConfigError("qubits must be at least 3")
        if self.mode not in ("dynamic", "post_selection"):
            raise ConfigError(f"mode must be dynamic or post_selection, got {self.mode!r}")
        for name in ("trajectories", "shots_per_setting", "bootstrap_resamples", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")


_INT_KEYS = {
    "qubits": "qubits",
    "trajectories": "trajectories",
    "shots_per_setting": "shots_per_setting",
    "bootstrap_resamples": "bootstrap_resamples",
    "seed": "seed",
    "workers": "workers",
}
_FLOAT_KEYS = ("p1", "p2", "eps01", "eps10", "reset_flip")
_BOOL_KEYS = ("exact", "propagate_readout_flips")
_STR_KEYS = {"mode": "mode", "output": "output", "format": "format"}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse `key = value` lines; unknown keys and bad values are hard errors."""
    values = {}
    noise_values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "hops":
                values["hop_list"] = tuple(int(tok) for tok in value.split(","))
            elif key in _INT_KEYS:
                values[_INT_KEYS[key]] = int(value)
            elif key in _FLOAT_KEYS:
                noise_values[key] = float(value)
            elif key in _BOOL_KEYS:
                if value.lower() not in ("true", "false"):
                    raise ValueError(f"expected true or false, got {value!r}")
                values[key] = value.lower() == "true"
            elif key in _STR_KEYS:
                values[_STR_KEYS[key]] = value
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    try:
        if noise_values:
            values["noise"] = NoiseModel(**noise_values)
        return ExperimentConfig(**values)
    except (ConfigError, ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read(), source=str(path))


def config_echo(config: ExperimentConfig) -> dict:
    """Canonical `key -> string` form; parsing it back reproduces the config."""
    echo = {
        "hops": ", ".join(str(m) for m in config.hop_list),
        "qubits": str(config.qubits),
        "mode": config.mode,
        "trajectories": str(config.trajectories),
        "shots_per_setting": str(config.shots_per_setting),
        "bootstrap_resamples": str(config.bootstrap_resamples),
        "seed": str(config.seed),
        "p1": repr(config.noise.p1),
        "p2": repr(config.noise.p2),
        "eps01": repr(config.noise.eps01),
        "eps10": repr(config.noise.eps10),
        "reset_flip": repr(config.noise.reset_flip),
        "exact": "true" if config.exact else "false",
        "propagate_readout_flips": (
            "true" if config.propagate_readout_flips else "false"
        ),
        "workers": str(config.workers),
        "output": config.output,
        "format": config.format,
    }
    return echo


@dataclass
class ResultRow:
    m: int
    mode: str
    negativity: float
    neg_err: float
    fidelity: float
    fid_err: float
    trajectories: int
    seconds: float
    variants: list | None = None


def _trajectory_batch(args):
    """One worker's share of trajectories; returns (discriminator, rho) pairs."""
    config, m, start, stop = args
    wheel = WheelConfig(
        num_qubits=config.qubits,
        hops=m,
        correction_mode=config.mode,
        noise=config.noise,
        propagate_readout_flips=config.propagate_readout_flips,
    )
    out = []
    for t in range(start, stop):
        rng = np.random.default_rng([config.seed, m, t])
        run = run_protocol(wheel, rng=rng)
        out.append((discriminator(run.record), run.reduced_pair()))
    return out


def _collect_trajectories(config: ExperimentConfig, m: int):
    total = config.trajectories
    if config.workers == 1 or total < 4 * config.workers:
        return _trajectory_batch((config, m, 0, total))
    bounds = np.linspace(0, total, config.workers + 1).astype(int)
    jobs = [
        (config, m, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=config.workers) as pool:
        chunks = pool.map(_trajectory_batch, jobs)
    return [item for chunk in chunks for item in chunk]


def _readout_pair(noise: NoiseModel):
    if noise.eps01 == 0.0 and noise.eps10 == 0.0:
        return None, None
    cal = build_calibration(noise)
    return (noise.eps01, noise.eps10), (cal, cal)


def _run_dynamic(config, m, results, compute_ci):
    target = two_qubit_graph_state()
    rho_bar = np.mean([rho for _, rho in results], axis=0)
    readout, cal = _readout_pair(config.noise)
    if config.exact:
        res = tomograph(rho_bar, cal=cal, readout=readout, exact=True)
        return (
            negativity(res.rho),
            0.0,
            fidelity_pure(res.rho, target),
            0.0,
            None,
        )
    qst_rng = np.random.default_rng([config.seed, m, _QST_STREAM])
    res = tomograph(
        rho_bar,
        shots_per_setting=config.shots_per_setting,
        cal=cal,
        readout=readout,
        rng=qst_rng,
    )
    neg = negativity(res.rho)
    fid = fidelity_pure(res.rho, target)
    neg_err = fid_err = 0.0
    if compute_ci:
        neg_boot = bootstrap_ci(
            res.counts,
            lambda c: negativity(reconstruct_counts(c, cal=cal)),
            n_resamples=config.bootstrap_resamples,
            rng=np.random.default_rng([config.seed, m, _BOOT_NEG_STREAM]),
        )
        fid_boot = bootstrap_ci(
            res.counts,
            lambda c: fidelity_pure(reconstruct_counts(c, cal=cal), target),
            n_resamples=config.bootstrap_resamples,
            rng=np.random.default_rng([config.seed, m, _BOOT_FID_STREAM]),
        )
        neg_err = neg_boot.epsilon
        fid_err = fid_boot.epsilon
    return neg, neg_err, fid, fid_err, None


def _weighted_bucket_metrics(rhos, weights, targets):
    neg = sum(weights[d] * negativity(rhos[d]) for d in rhos)
    fid = sum(weights[d] * fidelity_pure(rhos[d], targets[d]) for d in rhos)
    return neg, fid


def _run_post_selection(config, m, results, compute_ci):
    groups = {}
    for disc, rho in results:
        groups.setdefault(disc, []).append(rho)
    total = len(results)
    sources = {
        disc: (len(rhos) / total, np.mean(rhos, axis=0))
        for disc, rhos in groups.items()
    }
    targets = dict(zip(ALL_DISCRIMINATORS, variant_targets(m)))
    readout, cal = _readout_pair(config.noise)
    if config.exact:
        bucket = tomograph_buckets(sources, cal=cal, readout=readout, exact=True)
        neg, fid = _weighted_bucket_metrics(bucket.rhos, bucket.weights, targets)
        neg_err = fid_err = 0.0
    else:
        qst_rng = np.random.default_rng([config.seed, m, _QST_STREAM])
        bucket = tomograph_buckets(
            sources,
            shots_per_setting=config.shots_per_setting,
            cal=cal,
            readout=readout,
            rng=qst_rng,
        )
        neg, fid = _weighted_bucket_metrics(bucket.rhos, bucket.weights, targets)
        neg_err = fid_err = 0.0
        if compute_ci:

            def neg_estimator(tables):
                recon = {d: reconstruct_counts(t, cal=cal) for d, t in tables.items()}
                return _weighted_bucket_metrics(recon, bucket.weights, targets)[0]

            def fid_estimator(tables):
                recon = {d: reconstruct_counts(t, cal=cal) for d, t in tables.items()}
                return _weighted_bucket_metrics(recon, bucket.weights, targets)[1]

            neg_err = bootstrap_ci(
                bucket.counts,
                neg_estimator,
                n_resamples=config.bootstrap_resamples,
                rng=np.random.default_rng([config.seed, m, _BOOT_NEG_STREAM]),
            ).epsilon
            fid_err = bootstrap_ci(
                bucket.counts,
                fid_estimator,
                n_resamples=config.bootstrap_resamples,
                rng=np.random.default_rng([config.seed, m, _BOOT_FID_STREAM]),
            ).epsilon
    variants = []
    for disc in ALL_DISCRIMINATORS:
        entry = {
            "discriminator": f"{disc[0]}{disc[1]}",
            "weight": sources[disc][0] if disc in sources else 0.0,
            "missing": disc not in bucket.rhos,
        }
        if disc in bucket.rhos:
            entry["negativity"] = negativity(bucket.rhos[disc])
            entry["fidelity"] = fidelity_pure(bucket.rhos[disc], targets[disc])
        else:
            entry["negativity"] = None
            entry["fidelity"] = None
        variants.append(entry)
    return neg, neg_err, fid, fid_err, variants


def run_hop_count(
    config: ExperimentConfig, m: int, clock=time.perf_counter, compute_ci=True
) -> ResultRow:
    """Simulate, reconstruct, and score one hop count."""
    t0 = clock()
    results = _collect_trajectories(config, m)
    if config.mode == "dynamic":
        neg, neg_err, fid, fid_err, variants = _run_dynamic(
            config, m, results, compute_ci
        )
    else:
        neg, neg_err, fid, fid_err, variants = _run_post_selection(
            config, m, results, compute_ci
        )
    return ResultRow(
        m=m,
        mode=config.mode,
        negativity=neg,
        neg_err=neg_err,
        fidelity=fid,
        fid_err=fid_err,
        trajectories=config.trajectories,
        seconds=clock() - t0,
        variants=variants,
    )


def run_experiment(
    config: ExperimentConfig,
    clock=time.perf_counter,
    compute_ci=True,
    progress=None,
) -> list:
    """All hop counts of the sweep, in config order."""
    rows = []
    for m in config.hop_list:
        row = run_hop_count(config, m, clock=clock, compute_ci=compute_ci)
        rows.append(row)
        if progress is not None:
            progress(row)
    return rows


def _round6(value: float) -> float:
    return float(f"{value:.6g}")


def _format_row_csv(row: ResultRow) -> str:
    return ",".join(
        [
            str(row.m),
            row.mode,
            f"{row.negativity:.6g}",
            f"{row.neg_err:.6g}",
            f"{row.fidelity:.6g}",
            f"{row.fid_err:.6g}",
            str(row.trajectories),
            f"{row.seconds:.6g}",
        ]
    )


def _row_to_dict(row: ResultRow) -> dict:
    out = {
        "m": row.m,
        "mode": row.mode,
        "negativity": _round6(row.negativity),
        "neg_err": _round6(row.neg_err),
        "fidelity": _round6(row.fidelity),
        "fid_err": _round6(row.fid_err),
        "trajectories": row.trajectories,
        "seconds": _round6(row.seconds),
    }
    if row.variants is not None:
        out["variants"] = [
            {
                "discriminator": v["discriminator"],
                "weight": _round6(v["weight"]),
                "missing": v["missing"],
                "negativity": None if v["negativity"] is None else _round6(v["negativity"]),
                "fidelity": None if v["fidelity"] is None else _round6(v["fidelity"]),
            }
            for v in row.variants
        ]
    else:
        out["variants"] = None
    return out


def render_results(rows, config_lines, fmt: str) -> str:
    """Serialize rows plus a config echo to CSV or JSON text.

    `config_lines` is the key -> string echo mapping.  CSV prefixes it as
    `# key = value` comment lines and carries only the fixed eight columns;
    per-variant detail survives only in JSON.
    """
    if fmt == "csv":
        lines = [f"# {key} = {value}" for key, value in config_lines.items()]
        lines.append(CSV_HEADER)
        lines.extend(_format_row_csv(row) for row in rows)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = {
            "config": dict(config_lines),
            "rows": [_row_to_dict(row) for row in rows],
        }
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def emit_results(rows, config: ExperimentConfig, path: str, fmt=None) -> str:
    """Write results to `path`; returns the path."""
    fmt = config.format if fmt is None else fmt
    text = render_results(rows, config_echo(config), fmt)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return path


def _parse_csv_results(text: str):
    echo = {}
    rows = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            echo[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise ValueError(f"unexpected results header: {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"expected 8 columns, got {len(parts)}: {line!r}")
        rows.append(
            ResultRow(
                m=int(parts[0]),
                mode=parts[1],
                negativity=float(parts[2]),
                neg_err=float(parts[3]),
                fidelity=float(parts[4]),
                fid_err=float(parts[5]),
                trajectories=int(parts[6]),
                seconds=float(parts[7]),
            )
        )
    if not header_seen:
        raise ValueError("no results header found")
    return echo, rows


def _parse_json_results(text: str):
    payload = json.loads(text)
    echo = dict(payload["config"])
    rows = []
    for entry in payload["rows"]:
        rows.append(
            ResultRow(
                m=int(entry["m"]),
                mode=entry["mode"],
                negativity=float(entry["negativity"]),
                neg_err=float(entry["neg_err"]),
                fidelity=float(entry["fidelity"]),
                fid_err=float(entry["fid_err"]),
                trajectories=int(entry["trajectories"]),
                seconds=float(entry["seconds"]),
                variants=entry.get("variants"),
            )
        )
    return echo, rows


def load_results(path: str):
    """Read a results file back as (config echo, rows); format is sniffed."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    if text.lstrip().startswith("{"):
        return _parse_json_results(text)
    return _parse_csv_results(text)


def calibrate_p2(
    config: ExperimentConfig,
    target: float = 0.459,
    at_hops: int = 9,
    tol: float = 0.004,
    max_iter: int = 18,
    p2_cap: float = 0.08,
):
    """Bisect p2 until the simulated negativity at `at_hops` meets `target`.

    p1 tracks p2 at the ratio implied by the config (default one tenth);
    readout and reset rates are taken from the config unchanged.  Returns
    (noise model, achieved negativity at `at_hops`).
    """
    if not 0.0 < target < 0.5:
        raise ValueError("target negativity must lie in (0, 0.5)")
    base = config.noise
    ratio = base.p1 / base.p2 if base.p2 > 0.0 else 0.1

    def build(p2: float) -> NoiseModel:
        return NoiseModel(
            p1=ratio * p2,
            p2=p2,
            eps01=base.eps01,
            eps10=base.eps10,
            reset_flip=base.reset_flip,
        )

    def evaluate(p2: float) -> float:
        probe = replace(config, hop_list=(at_hops,), noise=build(p2), exact=False)
        return run_hop_count(probe, at_hops, compute_ci=False).negativity

    evaluations = []

    def measured(p2: float) -> float:
        value = evaluate(p2)
        evaluations.append((p2, value))
        return value

    lo, hi = 0.0, 0.004
    value = measured(hi)
    while value > target and hi < p2_cap:
        lo, hi = hi, hi * 2.0
        value = measured(hi)
    if value > target:
        raise RuntimeError(
            f"negativity {value:.4f} still above target at p2={hi}; "
            "the target may be unreachable for this configuration"
        )
    best_p2, best_value = min(evaluations, key=lambda e: abs(e[1] - target))
    for _ in range(max_iter):
        if abs(best_value - target) <= tol:
            break
        mid = 0.5 * (lo + hi)
        value = measured(mid)
        if abs(value - target) < abs(best_value - target):
            best_p2, best_value = mid, value
        if value > target:
            lo = mid
        else:
            hi = mid
    return build(best_p2), best_value
