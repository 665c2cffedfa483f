"""
Run configuration for the `reconstruct` command.

Stored as JSON. Unknown keys are rejected, numbers and booleans are
coerced to the field types.
"""

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

from errors import DataError
from patches import PatchConfig
from solver import SolverParams


@dataclass
class RunConfig:
    # solver
    algo: str = 'a1'
    nu: float = 3.81
    lambda0: float = 0.2
    sparsity_frac: float = 0.055
    eta: Optional[float] = None
    energy_cap: float = 1e5
    inner: int = 1
    iters: int = 40
    schedule: bool = False
    early_stop: Optional[float] = None
    subtract_offset: bool = False
    l_factor: str = 'cholesky'
    # patches
    patch: int = 6
    stride: int = 1
    wrap: bool = True
    # files
    kspace: Optional[str] = None
    mask: Optional[str] = None
    ref: Optional[str] = None
    out: Optional[str] = None
    trace: Optional[str] = None
    save_transform: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        """
        Raises:
            DataError: On unknown keys or values of the wrong type.
        """
        if not isinstance(data, dict):
            raise DataError(f"Config must be a JSON object, got {type(data).__name__}")
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise DataError(f"Unknown config keys: {', '.join(unknown)}")
        defaults = cls()
        values = {}
        for key, value in data.items():
            values[key] = _coerce(key, value, getattr(defaults, key))
        return cls(**values)

    @classmethod
    def from_json(cls, path: str) -> 'RunConfig':
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}: invalid JSON: {e}") from e
        return cls.from_dict(data)

    def to_json(self, path: str) -> None:
        with open(path, 'w') as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write('\n')

    def merged(self, overrides: dict) -> 'RunConfig':
        """Copy with every non-None override applied."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None and k in data})
        return RunConfig(**data)

    def patch_config(self) -> PatchConfig:
        return PatchConfig(side=self.patch, stride=self.stride, wrap=self.wrap)

    def solver_params(self) -> SolverParams:
        return SolverParams(
            algo=self.algo, nu=self.nu, lambda0=self.lambda0,
            s_frac=None if self.algo == 'a3' else self.sparsity_frac,
            eta=self.eta, C=self.energy_cap, inner=self.inner, outer=self.iters,
            schedule=self.schedule, early_stop=self.early_stop,
            subtract_offset=self.subtract_offset, l_factor=self.l_factor,
        )


# optional fields and their value type
_OPTIONAL_TYPES = {'eta': float, 'early_stop': float}


def _coerce(key: str, value, default):
    if value is None:
        if default is None:
            return None
        raise DataError(f"Config key {key!r} may not be null")
    kind = _OPTIONAL_TYPES.get(key, str if default is None else type(default))
    if kind is bool:
        if not isinstance(value, bool):
            raise DataError(f"Config key {key!r} must be a boolean, got {value!r}")
        return value
    if kind in (int, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataError(f"Config key {key!r} must be a number, got {value!r}")
        if not math.isfinite(value):
            raise DataError(f"Config key {key!r} must be finite, got {value!r}")
        if kind is int and value != int(value):
            raise DataError(f"Config key {key!r} must be an integer, got {value!r}")
        return kind(value)
    if not isinstance(value, str):
        raise DataError(f"Config key {key!r} must be a string, got {value!r}")
    return value
