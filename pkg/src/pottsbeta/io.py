"""File formats: images, label fields, flat configs and run directories.

Images are plain text: a header line ``dims: d1 d2 [d3]`` followed by the
values in row-major order, separated by whitespace. Large images can use the
binary variant, raw little-endian float64 with the same header stored in a
``<name>.hdr`` sidecar. Label files hold integers 1..k.
"""
from __future__ import annotations

import datetime as _dt
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .inference import FitConfig, ConfigError
from .mixture import MixturePriors

BINARY_SUFFIX = ".bin"
SIDECAR_SUFFIX = ".hdr"


@dataclass
class ImageFile:
    dims: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) not in (2, 3) or any(d < 1 for d in self.dims):
            raise ValueError(f"dims must have 2 or 3 positive extents, got {self.dims}")
        self.values = np.asarray(self.values).ravel()
        if self.values.shape[0] != int(np.prod(self.dims)):
            raise ValueError(f"{self.values.shape[0]} values do not fill dims {self.dims}")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _parse_header(line: str) -> tuple[int, ...]:
    key, sep, rest = line.partition(":")
    if not sep or key.strip().lower() != "dims":
        raise ValueError(f"expected a 'dims: ...' header, got {line.strip()!r}")
    try:
        return tuple(int(tok) for tok in rest.split())
    except ValueError:
        raise ValueError(f"non-integer extent in header {line.strip()!r}") from None


def _header(dims) -> str:
    return "dims: " + " ".join(str(int(d)) for d in dims) + "\n"


def _format_rows(values: np.ndarray, dims, fmt) -> str:
    width = dims[-1]
    rows = values.reshape(-1, width)
    return "".join(" ".join(fmt(v) for v in row) + "\n" for row in rows)


def save_image(path, img: ImageFile, binary: bool | None = None) -> None:
    """Write intensities. ``binary=None`` picks binary for ``.bin`` paths."""
    path = Path(path)
    values = np.asarray(img.values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("image intensities must be finite")
    if binary is None:
        binary = path.suffix == BINARY_SUFFIX
    if binary:
        values.astype("<f8").tofile(path)
        Path(str(path) + SIDECAR_SUFFIX).write_text(_header(img.dims))
    else:
        path.write_text(_header(img.dims) + _format_rows(values, img.dims, lambda v: repr(float(v))))


def load_image(path) -> ImageFile:
    path = Path(path)
    sidecar = Path(str(path) + SIDECAR_SUFFIX)
    if sidecar.exists():
        dims = _parse_header(sidecar.read_text().splitlines()[0])
        values = np.fromfile(path, dtype="<f8").astype(float)
    else:
        text = path.read_text()
        head, _, body = text.partition("\n")
        dims = _parse_header(head)
        try:
            values = np.array(body.split(), dtype=float)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
    img = ImageFile(dims, values)
    if not np.all(np.isfinite(img.values)):
        raise ValueError(f"{path}: intensities must be finite")
    return img


def save_labels(path, dims, labels0) -> None:
    """Write 0-based labels as 1-based integers."""
    labels = np.asarray(labels0, dtype=np.int64).ravel() + 1
    ImageFile(dims, labels)  # shape check
    Path(path).write_text(_header(dims) + _format_rows(labels, tuple(dims), str))


def load_labels(path, k: int | None = None) -> ImageFile:
    """Read a 1-based label file; ``values`` come back 0-based."""
    path = Path(path)
    head, _, body = path.read_text().partition("\n")
    dims = _parse_header(head)
    try:
        labels = np.array(body.split(), dtype=np.int64)
    except ValueError:
        raise ValueError(f"{path}: labels must be integers") from None
    img = ImageFile(dims, labels)
    top = k if k is not None else int(labels.max(initial=1))
    if labels.size and (labels.min() < 1 or labels.max() > top):
        raise ValueError(f"{path}: labels must lie in 1..{top}")
    img.values = img.values - 1
    return img


# --------------------------------------------------------------------------
# flat key-value configuration

# key: (default, unit / meaning), in the order they are written out
CONFIG_KEYS = {
    "method": ("PL", "PL | TI | MAVM | ABC"),
    "iterations": ("10000", "MCMC iterations, including burn-in"),
    "burn_in": ("5000", "iterations discarded; proposal adaptation stops here"),
    "prior_beta": ("0 3", "uniform prior support for beta, dimensionless"),
    "aux_sweeps": ("500", "Gibbs sweeps per auxiliary field (MAVM, ABC)"),
    "aux_init": ("uniform", "auxiliary start: uniform | current"),
    "abc_epsilon": ("auto", "ABC tolerance in like-neighbour pairs; auto = 0.01 x edge count"),
    "ti_grid_path": ("none", "precomputed TI grid CSV"),
    "seed": ("0", "integer RNG seed"),
    "target_rate": ("0.44", "target acceptance rate of the beta proposal"),
    "init_bandwidth": ("0.05", "initial proposal sd for beta"),
    "init_beta": ("auto", "starting beta; auto = prior midpoint"),
    "update_beta": ("true", "false holds beta fixed at init_beta"),
    "k": ("3", "number of mixture components"),
    "prior_mean": ("-0.15 0.05 0.25", "prior means of mu_j, intensity units"),
    "prior_sd": ("0.05", "prior sd of mu_j, intensity units"),
    "prior_shape": ("1.5", "inverse-gamma shape of sigma2_j"),
    "prior_scale": ("0.01", "inverse-gamma scale of sigma2_j, intensity^2 units"),
}

_NONE = ("auto", "none", "")


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip().lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _floats(key, value) -> list[float]:
    try:
        return [float(v) for v in value.split()]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {value!r}") from None


def _scalar(key, value, kind):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from None


def _bool(key, value) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {value!r}")


def build_config(raw: dict[str, str]) -> tuple[FitConfig, MixturePriors]:
    """FitConfig and priors from string values; missing keys take defaults."""
    vals = {key: raw.get(key, default) for key, (default, _) in CONFIG_KEYS.items()}
    prior = _floats("prior_beta", vals["prior_beta"])
    if len(prior) != 2:
        raise ConfigError("prior_beta needs two numbers: lo hi")
    k = _scalar("k", vals["k"], int)
    try:
        priors = MixturePriors(
            mean=_floats("prior_mean", vals["prior_mean"]),
            sd=_floats("prior_sd", vals["prior_sd"]),
            shape=_floats("prior_shape", vals["prior_shape"]),
            scale=_floats("prior_scale", vals["prior_scale"]),
        )
    except ValueError as exc:
        raise ConfigError(f"mixture priors: {exc}") from None
    if priors.k != k:
        raise ConfigError(f"k = {k} but the priors describe {priors.k} components")
    cfg = FitConfig(
        method=vals["method"],
        iterations=_scalar("iterations", vals["iterations"], int),
        burn_in=_scalar("burn_in", vals["burn_in"], int),
        prior_beta=tuple(prior),
        aux_sweeps=_scalar("aux_sweeps", vals["aux_sweeps"], int),
        aux_init=vals["aux_init"],
        abc_epsilon=None if vals["abc_epsilon"].lower() in _NONE else _scalar("abc_epsilon", vals["abc_epsilon"], float),
        ti_grid_path=None if vals["ti_grid_path"].lower() in _NONE else vals["ti_grid_path"],
        seed=_scalar("seed", vals["seed"], int),
        target_rate=_scalar("target_rate", vals["target_rate"], float),
        init_bandwidth=_scalar("init_bandwidth", vals["init_bandwidth"], float),
        init_beta=None if vals["init_beta"].lower() in _NONE else _scalar("init_beta", vals["init_beta"], float),
        update_beta=_bool("update_beta", vals["update_beta"]),
    )
    return cfg, priors


def load_config(path) -> tuple[FitConfig, MixturePriors]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return build_config(parse_config_text(text))


def _fmt(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_fmt(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def config_text(cfg: FitConfig, priors: MixturePriors) -> str:
    """Every key with its effective value, readable by :func:`load_config`."""
    d = cfg.as_dict()
    d["ti_grid_path"] = d["ti_grid_path"] or "none"
    d.update(k=priors.k, prior_mean=priors.mean, prior_sd=priors.sd, prior_shape=priors.shape,
             prior_scale=priors.scale)
    width = max(len(k) for k in CONFIG_KEYS)
    lines = []
    for key, (_, unit) in CONFIG_KEYS.items():
        lines.append(f"{key.ljust(width)} = {_fmt(d[key])}  # {unit}")
    return "\n".join(lines) + "\n"


def priors_dict(priors: MixturePriors) -> dict:
    return {name: [float(v) for v in getattr(priors, name)] for name in ("mean", "sd", "shape", "scale")}


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def run_directory(base, command: str, seed: int, now: _dt.datetime | None = None) -> Path:
    """Fresh ``<base>/<command>-<timestamp>-seed<seed>`` directory."""
    now = now or _dt.datetime.now()
    stem = f"{command}-{now.strftime('%Y%m%d-%H%M%S')}-seed{seed}"
    path = Path(base) / stem
    suffix = 1
    while path.exists():
        path = Path(base) / f"{stem}-{suffix}"
        suffix += 1
    os.makedirs(path)
    return path
