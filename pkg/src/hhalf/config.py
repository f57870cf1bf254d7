"""Run configuration shared by the command line subcommands."""

import json
import os

from dataclasses import dataclass

from .errors import ValidationError

config_env_var = "HHP_CONFIG"
_fields = ("cutoff", "grid_size", "spectral_tol", "matrix_tol", "seed", "out")


@dataclass(frozen=True)
class RunConfig:
    """Knobs every subcommand reads before touching its inputs.

    Attributes
    ----------
    cutoff : int
        Truncation order N for operators and period matrices.
    grid_size : int
        Sample count M; must leave room for degree-1 pullbacks, M >= 4N.
    spectral_tol : float
        Pass tolerance for coefficient-level checks (energy, kernels).
    matrix_tol : float
        Pass tolerance for matrix-level checks (Siegel, equivariance).
    seed : int
        Seed for every randomized trial set; fixes report bytes.
    out : str
        Default output path, or None for stdout only.
    """

    cutoff: int = 32
    grid_size: int = 4096
    spectral_tol: float = 1e-8
    matrix_tol: float = 1e-6
    seed: int = 0
    out: str = None

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValidationError("cutoff must be an integer >= 1")
        object.__setattr__(self, "cutoff", int(self.cutoff))
        if int(self.grid_size) != self.grid_size:
            raise ValidationError("grid size must be an integer")
        object.__setattr__(self, "grid_size", int(self.grid_size))
        if self.grid_size < 4 * self.cutoff:
            raise ValidationError(
                "grid size %d is below 4 * cutoff = %d"
                % (self.grid_size, 4 * self.cutoff)
            )
        for name in ("spectral_tol", "matrix_tol"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValidationError("%s must be positive" % name)
            object.__setattr__(self, name, float(value))
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError("seed must be a nonnegative integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.out is not None and not isinstance(self.out, str):
            raise ValidationError("out must be a path string or None")


def config_from_json(obj):
    """Build a RunConfig from a dict; missing fields keep defaults."""
    if not isinstance(obj, dict):
        raise ValidationError("RunConfig object must be a JSON object")
    unknown = set(obj) - set(_fields)
    if unknown:
        raise ValidationError(
            "unknown RunConfig fields: %s" % ", ".join(sorted(unknown))
        )
    try:
        return RunConfig(**obj)
    except TypeError as exc:
        raise ValidationError("malformed RunConfig object: %s" % exc)


def config_to_json(cfg):
    return {name: getattr(cfg, name) for name in _fields}


def load_config(path):
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except OSError as exc:
        raise ValidationError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ValidationError("config %s is not valid JSON: %s" % (path, exc))
    return config_from_json(obj)


def config_from_env(environ=None):
    """Default config, overridden by HHP_CONFIG.

    The variable holds either inline JSON (leading brace) or the path
    of a JSON file, matching the inline-or-path convention of the
    command line flags.
    """
    environ = os.environ if environ is None else environ
    value = environ.get(config_env_var, "")
    if not value:
        return RunConfig()
    if value.lstrip().startswith("{"):
        try:
            obj = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "%s is not valid JSON: %s" % (config_env_var, exc)
            )
        return config_from_json(obj)
    return load_config(value)
