"""Experiment orchestration: dataset generation, sweeps, and benchmarks.

Everything here is driven by an :class:`ExperimentConfig` (loadable from a
flat ``key = value`` config file) and a master seed. Random draws come
from named substreams keyed by (domain, index), so runs are reproducible
byte for byte regardless of worker count, and training/evaluation data
never share streams.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import LinkGeometry, SystemConfig, sample_channel_pair
from .codebook import (
    Codebook,
    RisProfile,
    build_ideal_codebook,
    build_practical_codebook,
    label_layout_hash,
)
from .dataset import Dataset
from .mlp import (
    MlpModel,
    TrainingConfig,
    TrainingLog,
    architecture_for,
    init_model,
    predict_batch,
    train,
)
from .precoding import (
    calibration_scale,
    codeword_rates,
    exhaustive_search,
    feature_matrix,
    feature_vector,
)
from .rng import (
    DOMAIN_EVAL_DATA,
    DOMAIN_MODEL_INIT,
    DOMAIN_RANDOM_BASELINE,
    DOMAIN_TRAIN_DATA,
    DOMAIN_TRAINING,
    derived_seed,
    substream,
)

# Evaluation-stream tags (second key int after the domain).
_TAG_EVAL = 0
_TAG_ELEMENTS = 1
_TAG_DISTANCE = 2
_TAG_BENCH = 3

_MODE_CODES = {"ideal": 0, "practical": 1}

SWEEP_ELEMENTS_CSV = "sweep_elements.csv"
SWEEP_DISTANCE_CSV = "sweep_distance.csv"
BENCHMARK_CSV = "benchmark.csv"


class ConfigError(ValueError):
    """Config file problem, message names the file, section and key."""


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    geometry_t: LinkGeometry
    geometry_r: LinkGeometry
    ris: RisProfile
    codebook_mode: str
    training: TrainingConfig
    n_train: int
    n_test: int
    element_counts: tuple
    distances_m: tuple
    sweep_realizations: int
    master_seed: int

    def __post_init__(self):
        if self.codebook_mode not in _MODE_CODES:
            raise ValueError(f"unknown codebook mode {self.codebook_mode!r}")
        if self.ris.n_h != self.system.n_h or self.ris.n_v != self.system.n_v:
            raise ValueError("RIS profile dimensions must match the system config")


def default_config(master_seed: int = 1) -> ExperimentConfig:
    """Workstation-scale defaults for the reference scenario.

    Reference path loss of -30 dB at 1 m puts the selected-codeword rates
    in the tens of bits/s/Hz where scheme gaps are visible; it is a config
    field like everything else.
    """
    system = SystemConfig(
        n_tx=10,
        n_rx=2,
        n_h=9,
        n_v=5,
        tx_power_dbm=20.0,
        noise_power_dbm=-80.0,
        antenna_spacing_over_wavelength=0.5,
    )
    geometry_t = LinkGeometry(
        rician_k=10.0,
        n_nlos_paths=2,
        pathloss_exponent=2.0,
        distance_m=10.0,
        ref_pathloss_db=-30.0,
        ref_distance_m=1.0,
        ris_gain_db=5.0,
    )
    geometry_r = LinkGeometry(
        rician_k=10.0,
        n_nlos_paths=2,
        pathloss_exponent=2.8,
        distance_m=30.0,
        ref_pathloss_db=-30.0,
        ref_distance_m=1.0,
        ris_gain_db=5.0,
    )
    ris = RisProfile(beta_min=0.2, alpha=1.6, psi_zero=0.43 * np.pi, n_h=9, n_v=5)
    return ExperimentConfig(
        system=system,
        geometry_t=geometry_t,
        geometry_r=geometry_r,
        ris=ris,
        codebook_mode="practical",
        training=TrainingConfig(seed=master_seed),
        n_train=200_000,
        n_test=10_000,
        element_counts=(45, 65, 85, 105),
        distances_m=(10.0, 20.0, 30.0, 40.0, 50.0),
        sweep_realizations=500,
        master_seed=master_seed,
    )


# ---------------------------------------------------------------------------
# Config file handling


_CONFIG_SCHEMA = {
    "system": {
        "n_tx": int,
        "n_rx": int,
        "n_h": int,
        "n_v": int,
        "tx_power_dbm": float,
        "noise_power_dbm": float,
        "antenna_spacing_over_wavelength": float,
    },
    "geometry_t": {
        "rician_k": float,
        "n_nlos_paths": int,
        "pathloss_exponent": float,
        "distance_m": float,
        "ref_pathloss_db": float,
        "ref_distance_m": float,
        "ris_gain_db": float,
    },
    "geometry_r": {
        "rician_k": float,
        "n_nlos_paths": int,
        "pathloss_exponent": float,
        "distance_m": float,
        "ref_pathloss_db": float,
        "ref_distance_m": float,
        "ris_gain_db": float,
    },
    "ris": {"beta_min": float, "alpha": float, "psi_zero": float},
    "codebook": {"mode": str},
    "training": {
        "batch_size": int,
        "learning_rate": float,
        "adam_beta1": float,
        "adam_beta2": float,
        "adam_epsilon": float,
        "max_epochs": int,
        "early_stop_patience": int,
        "validation_fraction": float,
    },
    "experiment": {
        "n_train": int,
        "n_test": int,
        "element_counts": "int_list",
        "distances_m": "float_list",
        "sweep_realizations": int,
        "master_seed": int,
    },
}


def _convert(path, section, key, kind, value):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        if kind == "int_list":
            return tuple(int(v.strip()) for v in value.split(",") if v.strip())
        if kind == "float_list":
            return tuple(float(v.strip()) for v in value.split(",") if v.strip())
        return value.strip()
    except ValueError:
        raise ConfigError(
            f"{path}: [{section}] {key}: cannot parse {value!r} as {getattr(kind, '__name__', kind)}"
        ) from None


def load_config(path) -> ExperimentConfig:
    """Parse a sectioned ``key = value`` config file.

    Unknown sections or keys and malformed values are rejected with the
    file, section and key named; low-level syntax errors carry the line
    number from the parser. Missing keys fall back to the defaults of
    :func:`default_config`.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except ConfigParserError as exc:
        raise ConfigError(str(exc)) from None

    values = {}
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in _CONFIG_SCHEMA[section]:
                raise ConfigError(f"{path}: [{section}] unknown key {key!r}")
            values[(section, key)] = _convert(path, section, key, _CONFIG_SCHEMA[section][key], value)

    base = default_config()

    def section_kwargs(section, defaults):
        kwargs = {}
        for key in _CONFIG_SCHEMA[section]:
            if (section, key) in values:
                kwargs[key] = values[(section, key)]
        return dataclasses.replace(defaults, **kwargs) if kwargs else defaults

    system = section_kwargs("system", base.system)
    master_seed = values.get(("experiment", "master_seed"), base.master_seed)
    try:
        ris_kwargs = {
            k: values[("ris", k)] for k in _CONFIG_SCHEMA["ris"] if ("ris", k) in values
        }
        cfg = ExperimentConfig(
            system=system,
            geometry_t=section_kwargs("geometry_t", base.geometry_t),
            geometry_r=section_kwargs("geometry_r", base.geometry_r),
            ris=dataclasses.replace(base.ris, n_h=system.n_h, n_v=system.n_v, **ris_kwargs),
            codebook_mode=values.get(("codebook", "mode"), base.codebook_mode),
            training=section_kwargs("training", dataclasses.replace(base.training, seed=master_seed)),
            n_train=values.get(("experiment", "n_train"), base.n_train),
            n_test=values.get(("experiment", "n_test"), base.n_test),
            element_counts=values.get(("experiment", "element_counts"), base.element_counts),
            distances_m=values.get(("experiment", "distances_m"), base.distances_m),
            sweep_realizations=values.get(("experiment", "sweep_realizations"), base.sweep_realizations),
            master_seed=master_seed,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical config-file text for a config (also used for hashing)."""
    lines = []
    sources = {
        "system": cfg.system,
        "geometry_t": cfg.geometry_t,
        "geometry_r": cfg.geometry_r,
        "ris": cfg.ris,
        "training": cfg.training,
    }
    for section, keys in _CONFIG_SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            if section == "codebook":
                value = cfg.codebook_mode
            elif section == "experiment":
                value = getattr(cfg, key)
            else:
                value = getattr(sources[section], key)
            if isinstance(value, tuple):
                value = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = f"{value!r}"
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def config_fingerprint(cfg: ExperimentConfig) -> int:
    """Stable 64-bit hash of the full config, stored in dataset headers."""
    digest = hashlib.sha256(dump_config(cfg).encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def worker_count() -> int:
    """Worker processes for data generation; RIS_BEAMSEL_THREADS overrides
    (0 or unset = one worker per CPU)."""
    raw = os.environ.get("RIS_BEAMSEL_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"RIS_BEAMSEL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"RIS_BEAMSEL_THREADS must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Runtime assembly (per sweep point)


@dataclass(frozen=True)
class Runtime:
    """Concrete system/geometry/codebook for one experimental point."""

    system: SystemConfig
    geometry_t: LinkGeometry
    geometry_r: LinkGeometry
    codebook: Codebook


def build_codebook(profile: RisProfile, mode: str) -> Codebook:
    if mode == "ideal":
        return build_ideal_codebook(profile)
    if mode == "practical":
        return build_practical_codebook(profile)
    raise ValueError(f"unknown codebook mode {mode!r}")


def runtime_for(
    cfg: ExperimentConfig,
    mode: str | None = None,
    n_elements: int | None = None,
    distance_r: float | None = None,
) -> Runtime:
    """Config specialized to a sweep point (element count and/or distance)."""
    system = cfg.system
    profile = cfg.ris
    if n_elements is not None and n_elements != system.n_h * system.n_v:
        if n_elements % system.n_v != 0:
            raise ValueError(
                f"element count {n_elements} is not a multiple of n_v={system.n_v}"
            )
        n_h = n_elements // system.n_v
        system = dataclasses.replace(system, n_h=n_h)
        profile = dataclasses.replace(profile, n_h=n_h)
    geometry_r = cfg.geometry_r
    if distance_r is not None:
        geometry_r = dataclasses.replace(geometry_r, distance_m=distance_r)
    return Runtime(
        system=system,
        geometry_t=cfg.geometry_t,
        geometry_r=geometry_r,
        codebook=build_codebook(profile, mode or cfg.codebook_mode),
    )


# ---------------------------------------------------------------------------
# Dataset generation


def _generate_block(runtime: Runtime, master_seed: int, domain_key: tuple, start: int, stop: int):
    system = runtime.system
    feat_len = 2 * system.n_tx * system.n_rx * system.n_ris
    feats = np.empty((stop - start, feat_len), dtype=np.float32)
    labels = np.empty(stop - start, dtype=np.uint32)
    rates = np.empty(stop - start, dtype=np.float32)
    for i in range(start, stop):
        rng = substream(master_seed, *domain_key, i)
        pair = sample_channel_pair(system, runtime.geometry_t, runtime.geometry_r, rng, seed=i)
        all_rates = codeword_rates(pair, runtime.codebook, system)
        label = int(all_rates.argmax())
        feats[i - start] = feature_vector(feature_matrix(pair))
        labels[i - start] = label
        rates[i - start] = all_rates[label]
    return feats, labels, rates


def generate_dataset(
    cfg: ExperimentConfig,
    n: int,
    runtime: Runtime | None = None,
    domain_key: tuple = (DOMAIN_TRAIN_DATA,),
) -> Dataset:
    """``n`` labeled samples from independent seeded channel draws.

    Sample ``i`` always comes from substream (master_seed, *domain_key, i),
    so the result is identical for any worker count; blocks are assembled
    in index order.
    """
    runtime = runtime or runtime_for(cfg)
    workers = worker_count()
    block = 2048
    if n < 2 * block or workers == 1:
        feats, labels, rates = _generate_block(runtime, cfg.master_seed, domain_key, 0, n)
    else:
        spans = [(s, min(s + block, n)) for s in range(0, n, block)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _generate_block,
                    *zip(*[(runtime, cfg.master_seed, domain_key, s, e) for s, e in spans]),
                    chunksize=1,
                )
            )
        feats = np.concatenate([p[0] for p in parts])
        labels = np.concatenate([p[1] for p in parts])
        rates = np.concatenate([p[2] for p in parts])
    return Dataset(
        features=feats,
        labels=labels,
        es_rates=rates,
        n_tx=runtime.system.n_tx,
        n_rx=runtime.system.n_rx,
        n_h=runtime.system.n_h,
        n_v=runtime.system.n_v,
        codebook_mode=runtime.codebook.mode,
        config_hash=config_fingerprint(cfg),
    )


def generate_training_dataset(cfg: ExperimentConfig) -> Dataset:
    return generate_dataset(cfg, cfg.n_train, domain_key=(DOMAIN_TRAIN_DATA,))


# ---------------------------------------------------------------------------
# Training and evaluation


def train_model(
    cfg: ExperimentConfig,
    dataset: Dataset,
    runtime: Runtime | None = None,
    seed_key: tuple = (),
) -> tuple[MlpModel, TrainingLog]:
    """Train a classifier for one runtime from a labeled dataset."""
    runtime = runtime or runtime_for(cfg)
    n_classes = len(runtime.codebook)
    arch = architecture_for(dataset.feature_length, n_classes)
    scale = calibration_scale(dataset.features)
    mode_code = _MODE_CODES[runtime.codebook.mode]
    model = init_model(
        arch,
        substream(cfg.master_seed, DOMAIN_MODEL_INIT, mode_code, *seed_key),
        feature_scale=scale,
        label_layout_hash=label_layout_hash(runtime.codebook),
    )
    training = dataclasses.replace(
        cfg.training,
        seed=derived_seed(cfg.master_seed, DOMAIN_TRAINING, mode_code, *seed_key),
    )
    log = train(model, dataset.features, dataset.labels, training)
    return model, log


@dataclass(frozen=True)
class SchemeRates:
    """Per-realization rates of the three selection schemes."""

    es: np.ndarray
    dnn: np.ndarray
    random: np.ndarray

    @property
    def means(self) -> tuple:
        return float(self.es.mean()), float(self.dnn.mean()), float(self.random.mean())


def evaluate_schemes(
    runtime: Runtime,
    model: MlpModel | None,
    master_seed: int,
    n: int,
    eval_key: tuple,
) -> SchemeRates:
    """Exhaustive-search, classifier, and random rates on fresh draws.

    The random baseline draws from its own named substream; the classifier
    column is zero when no model is supplied.
    """
    system = runtime.system
    n_codes = len(runtime.codebook)
    rate_table = np.empty((n, n_codes))
    feats = None
    if model is not None:
        feats = np.empty((n, model.arch.input_width), dtype=np.float32)
    rand_rng = substream(master_seed, DOMAIN_RANDOM_BASELINE, *eval_key)
    for i in range(n):
        rng = substream(master_seed, DOMAIN_EVAL_DATA, *eval_key, i)
        pair = sample_channel_pair(system, runtime.geometry_t, runtime.geometry_r, rng, seed=i)
        rate_table[i] = codeword_rates(pair, runtime.codebook, system)
        if feats is not None:
            feats[i] = feature_vector(feature_matrix(pair))
    es = rate_table.max(axis=1)
    random_idx = rand_rng.integers(n_codes, size=n)
    random_rates = rate_table[np.arange(n), random_idx]
    if model is not None:
        dnn_idx = predict_batch(model, feats)
        dnn = rate_table[np.arange(n), dnn_idx]
    else:
        dnn = np.zeros(n)
    return SchemeRates(es=es, dnn=dnn, random=random_rates)


# ---------------------------------------------------------------------------
# Sweeps and benchmark


def _write_csv(path: Path, header: str, rows: list) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def run_rate_vs_elements(cfg: ExperimentConfig, out_dir, models: dict | None = None) -> list:
    """Mean scheme rates per element count and codebook mode.

    Trains a classifier per (N, mode) point with the configured training
    set size unless one is supplied in ``models`` keyed by (N, mode).
    Writes ``sweep_elements.csv``.
    """
    rows = []
    for n_elements in cfg.element_counts:
        for mode in ("ideal", "practical"):
            runtime = runtime_for(cfg, mode=mode, n_elements=n_elements)
            model = (models or {}).get((n_elements, mode))
            if model is None:
                data = generate_dataset(
                    cfg,
                    cfg.n_train,
                    runtime,
                    domain_key=(DOMAIN_TRAIN_DATA, _TAG_ELEMENTS, n_elements, _MODE_CODES[mode]),
                )
                model, _ = train_model(cfg, data, runtime, seed_key=(_TAG_ELEMENTS, n_elements))
            rates = evaluate_schemes(
                runtime,
                model,
                cfg.master_seed,
                cfg.sweep_realizations,
                eval_key=(_TAG_ELEMENTS, n_elements, _MODE_CODES[mode]),
            )
            es, dnn, rnd = rates.means
            rows.append((n_elements, mode, es, dnn, rnd))
    _write_csv(Path(out_dir) / SWEEP_ELEMENTS_CSV, "N,mode,es_rate,dnn_rate,random_rate", rows)
    return rows


def run_rate_vs_distance(cfg: ExperimentConfig, out_dir, models: dict | None = None) -> list:
    """Mean scheme rates across receiver distances with a fixed model.

    The classifier is trained once per mode at the configured training
    distance and then applied unchanged across the sweep. Writes
    ``sweep_distance.csv``.
    """
    rows = []
    for mode in ("ideal", "practical"):
        runtime = runtime_for(cfg, mode=mode)
        model = (models or {}).get(mode)
        if model is None:
            data = generate_dataset(
                cfg,
                cfg.n_train,
                runtime,
                domain_key=(DOMAIN_TRAIN_DATA, _TAG_DISTANCE, _MODE_CODES[mode]),
            )
            model, _ = train_model(cfg, data, runtime, seed_key=(_TAG_DISTANCE,))
        for d_index, distance in enumerate(cfg.distances_m):
            point = runtime_for(cfg, mode=mode, distance_r=distance)
            rates = evaluate_schemes(
                point,
                model,
                cfg.master_seed,
                cfg.sweep_realizations,
                eval_key=(_TAG_DISTANCE, d_index, _MODE_CODES[mode]),
            )
            es, dnn, rnd = rates.means
            rows.append((float(distance), mode, es, dnn, rnd, dnn / es if es > 0 else 0.0))
    rows.sort(key=lambda r: (r[0], r[1]))
    _write_csv(
        Path(out_dir) / SWEEP_DISTANCE_CSV,
        "d_r,mode,es_rate,dnn_rate,random_rate,dnn_over_es",
        rows,
    )
    return rows


def run_timing_benchmark(
    cfg: ExperimentConfig,
    out_dir,
    models: dict | None = None,
    n_decisions: int = 1000,
    n_timing_batches: int = 10,
    warmup: int = 100,
) -> list:
    """Per-decision latency of exhaustive search vs the classifier.

    Both paths see identical realizations. The exhaustive-search side
    evaluates every codeword (effective channel + SVD each); the
    classifier side assembles features and runs one forward pass, with
    decisions in a timing batch processed together. Monotonic clock,
    median of per-batch means, warmup excluded. Writes ``benchmark.csv``.
    """
    mode = cfg.codebook_mode
    rows = []
    for n_elements in cfg.element_counts:
        runtime = runtime_for(cfg, mode=mode, n_elements=n_elements)
        model = (models or {}).get((n_elements, mode))
        if model is None:
            data = generate_dataset(
                cfg,
                cfg.n_train,
                runtime,
                domain_key=(DOMAIN_TRAIN_DATA, _TAG_BENCH, n_elements, _MODE_CODES[mode]),
            )
            model, _ = train_model(cfg, data, runtime, seed_key=(_TAG_BENCH, n_elements))
        batch = max(1, (n_decisions + n_timing_batches - 1) // n_timing_batches)
        pairs = []
        for i in range(warmup + n_timing_batches * batch):
            rng = substream(cfg.master_seed, DOMAIN_EVAL_DATA, _TAG_BENCH, n_elements, i)
            pairs.append(
                sample_channel_pair(runtime.system, runtime.geometry_t, runtime.geometry_r, rng, seed=i)
            )

        for pair in pairs[:warmup]:
            exhaustive_search(pair, runtime.codebook, runtime.system)
        es_means = []
        es_rates = []
        for b in range(n_timing_batches):
            chunk = pairs[warmup + b * batch : warmup + (b + 1) * batch]
            t0 = time.perf_counter()
            picks = [exhaustive_search(p, runtime.codebook, runtime.system) for p in chunk]
            es_means.append((time.perf_counter() - t0) / len(chunk))
            es_rates.extend(r.rate_bps_hz for r in picks)

        warm_feats = np.stack([feature_vector(feature_matrix(p)) for p in pairs[:warmup]])
        predict_batch(model, warm_feats)
        dnn_means = []
        dnn_labels = []
        for b in range(n_timing_batches):
            chunk = pairs[warmup + b * batch : warmup + (b + 1) * batch]
            t0 = time.perf_counter()
            feats = np.stack([feature_vector(feature_matrix(p)) for p in chunk])
            labels = predict_batch(model, feats)
            dnn_means.append((time.perf_counter() - t0) / len(chunk))
            dnn_labels.extend(int(l) for l in labels)

        dnn_rates = []
        for pair, label in zip(pairs[warmup:], dnn_labels):
            dnn_rates.append(codeword_rates(pair, runtime.codebook, runtime.system)[label])
        es_seconds = float(np.median(es_means))
        dnn_seconds = float(np.median(dnn_means))
        rate_ratio = float(np.mean(dnn_rates) / np.mean(es_rates))
        rows.append((n_elements, es_seconds, dnn_seconds, es_seconds / dnn_seconds, rate_ratio))
    _write_csv(
        Path(out_dir) / BENCHMARK_CSV,
        "N,es_seconds,dnn_seconds,speedup,dnn_over_es_rate",
        rows,
    )
    return rows
