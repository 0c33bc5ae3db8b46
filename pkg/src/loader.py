import json
import logging
import math
import os
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter
from pydantic import ValidationError as PydanticValidationError

try:
    from .dv_states import DensityMatrix, pure_state, validate_density
    from .errors import InvalidStateSpec
    from .gaussian import GaussianState, validate_gaussian
except ImportError:
    from dv_states import DensityMatrix, pure_state, validate_density
    from errors import InvalidStateSpec
    from gaussian import GaussianState, validate_gaussian

logger = logging.getLogger(__name__)

DENSITY = "density"
GAUSSIAN = "gaussian"
PURE_OVERLAP = "pure-overlap"


# --- Input documents ---

class DensitySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["density"]
    dim: int = Field(ge=1)
    matrix: List[List[Tuple[float, float]]]  # rows of [re, im] pairs


class GaussianSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian"]
    modes: int = Field(ge=1)
    mean: List[float]
    cov: List[List[float]]


class PureOverlapSpec(BaseModel):
    """An abstract pure pair known only through its fidelity."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["pure-overlap"]
    fidelity: float = Field(ge=0.0, le=1.0)


StateSpec = Annotated[Union[DensitySpec, GaussianSpec, PureOverlapSpec], Field(discriminator="kind")]
_spec_adapter = TypeAdapter(StateSpec)


@dataclass(frozen=True, eq=False)
class StatePair:
    kind: str
    first: Union[DensityMatrix, GaussianState]
    second: Union[DensityMatrix, GaussianState]


def parse_state_spec(data) -> StateSpec:
    try:
        return _spec_adapter.validate_python(data)
    except PydanticValidationError as e:
        raise InvalidStateSpec(f"invalid state description: {e.errors()[0]['msg']}") from e


def _read_json(file_path: str):
    """Helper that reads one JSON document."""
    if not os.path.isfile(file_path):
        raise InvalidStateSpec(f"state file not found: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidStateSpec(f"{file_path} is not valid JSON: {e}") from e


def load_state_spec(file_path: str) -> StateSpec:
    spec = parse_state_spec(_read_json(file_path))
    logger.debug("loaded %s state from %s", spec.kind, file_path)
    return spec


def density_from_spec(spec: DensitySpec) -> DensityMatrix:
    rows = [[complex(re, im) for re, im in row] for row in spec.matrix]
    if len(rows) != spec.dim or any(len(row) != spec.dim for row in rows):
        raise InvalidStateSpec(f"matrix is not {spec.dim}x{spec.dim}")
    return validate_density(np.array(rows, dtype=complex))


def gaussian_from_spec(spec: GaussianSpec) -> GaussianState:
    return validate_gaussian(spec.mean, spec.cov, spec.modes)


def pure_pair_from_overlap(fidelity: float) -> Tuple[DensityMatrix, DensityMatrix]:
    """Qubit realization |0> and F|0> + sqrt(1-F^2)|1> of a pure pair with overlap F."""
    return pure_state([1.0, 0.0]), pure_state([fidelity, math.sqrt(max(1.0 - fidelity ** 2, 0.0))])


def build_pair(first: StateSpec, second: Optional[StateSpec] = None) -> StatePair:
    """Turn one or two input documents into a validated state pair.

    A pure-overlap document describes the whole pair and must come alone.
    """
    if first.kind == PURE_OVERLAP:
        if second is not None:
            raise InvalidStateSpec("a pure-overlap description already defines both states")
        rho1, rho2 = pure_pair_from_overlap(first.fidelity)
        return StatePair(kind=PURE_OVERLAP, first=rho1, second=rho2)
    if second is None:
        raise InvalidStateSpec(f"{first.kind} input needs a second state")
    if second.kind != first.kind:
        raise InvalidStateSpec(f"cannot pair a {first.kind} state with a {second.kind} state")
    if first.kind == DENSITY:
        return StatePair(DENSITY, density_from_spec(first), density_from_spec(second))
    return StatePair(GAUSSIAN, gaussian_from_spec(first), gaussian_from_spec(second))


def load_pair(path1: str, path2: Optional[str] = None) -> StatePair:
    first = load_state_spec(path1)
    second = load_state_spec(path2) if path2 else None
    pair = build_pair(first, second)
    logger.info("input pair: %s", pair.kind)
    return pair


def density_to_spec(rho: DensityMatrix) -> dict:
    """Inverse of density_from_spec, for writing example inputs."""
    m = np.asarray(rho.matrix, dtype=complex)
    return {
        "kind": DENSITY,
        "dim": int(m.shape[0]),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def gaussian_to_spec(g: GaussianState) -> dict:
    return {
        "kind": GAUSSIAN,
        "modes": int(g.modes),
        "mean": [float(x) for x in g.mean],
        "cov": [[float(x) for x in row] for row in g.cov],
    }
