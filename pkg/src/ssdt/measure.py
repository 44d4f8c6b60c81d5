"""Discrete population-spectrum model: two atomic measures and an aspect ratio.

The noise matrix is A^(1/2) G B^(1/2) with G iid of variance 1/l.  The model
holds the limiting spectra of A and B as discrete measures (`nu` and `unu`)
together with the dimension ratio gamma = lim k/l.  Atoms are kept sorted
ascending with exact duplicates merged, so the largest atoms a*, b* are O(1)
lookups and serialized output is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Union

import math

import numpy as np

from .accumulate import comp_sum
from .errors import (
    BadGamma,
    EmptyMeasure,
    ModelSyntaxError,
    NonPositiveAtom,
    NonPositiveWeight,
    WeightSumError,
)

# Weight sums within this tolerance of 1 are silently renormalized; larger
# deviations are user errors.
WEIGHT_SUM_TOL = 1e-8
# Below this deviation the weights are considered already normalized and are
# used unchanged, which makes validation idempotent bit-for-bit.
_NORMALIZED_EPS = 1e-12

MeasureLike = Union["DiscreteMeasure", Mapping, Iterable]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atomic probability measure: positive atoms with positive weights.

    Atoms are strictly increasing and weights sum to 1 within 1e-8.
    Instances are immutable and safe to share across threads.
    """

    atoms: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.atoms) == 0:
            raise EmptyMeasure("measure has no atoms")
        if len(self.atoms) != len(self.weights):
            raise ValueError(
                f"{len(self.atoms)} atoms but {len(self.weights)} weights"
            )
        a = np.asarray(self.atoms, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
            raise NonPositiveAtom("atoms must be positive finite numbers")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise NonPositiveWeight("weights must be positive finite numbers")
        if np.any(np.diff(a) <= 0.0):
            raise ValueError("atoms must be strictly increasing")
        total = comp_sum(w)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise WeightSumError(
                f"weights sum to {total!r}, more than {WEIGHT_SUM_TOL} away from 1"
            )

    @cached_property
    def atoms_array(self) -> np.ndarray:
        arr = np.asarray(self.atoms, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def weights_array(self) -> np.ndarray:
        arr = np.asarray(self.weights, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def max_atom(self) -> float:
        return self.atoms[-1]


@dataclass(frozen=True)
class NoiseModel:
    """Complete noise description: spectra of A and B plus the ratio gamma."""

    nu: DiscreteMeasure
    unu: DiscreteMeasure
    gamma: float

    def __post_init__(self) -> None:
        g = self.gamma
        if not isinstance(g, float):
            object.__setattr__(self, "gamma", float(g))
            g = self.gamma
        if not math.isfinite(g) or g <= 0.0:
            raise BadGamma(f"gamma must be a positive finite real, got {g!r}")

    @property
    def a_star(self) -> float:
        return self.nu.max_atom

    @property
    def b_star(self) -> float:
        return self.unu.max_atom

    @property
    def j_left(self) -> float:
        """Left endpoint of the domain J = (-1/(gamma*b*), inf) of G."""
        return -1.0 / (self.gamma * self.b_star)


def _coerce_entries(raw: MeasureLike, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Extract (atoms, weights) arrays from the accepted input shapes."""
    if isinstance(raw, DiscreteMeasure):
        return raw.atoms_array.copy(), raw.weights_array.copy()
    if isinstance(raw, Mapping):
        try:
            atoms, weights = raw["atoms"], raw["weights"]
        except KeyError as exc:
            raise ModelSyntaxError(f"{name}: missing key {exc}") from None
        return (
            np.atleast_1d(np.asarray(atoms, dtype=np.float64)),
            np.atleast_1d(np.asarray(weights, dtype=np.float64)),
        )
    # Otherwise: iterable of (atom, weight) pairs or {"atom","weight"} mappings.
    atom_list, weight_list = [], []
    for i, entry in enumerate(raw):
        if isinstance(entry, Mapping):
            try:
                atom_list.append(entry["atom"])
                weight_list.append(entry["weight"])
            except KeyError as exc:
                raise ModelSyntaxError(f"{name}[{i}]: missing key {exc}") from None
        else:
            try:
                atom, weight = entry
            except (TypeError, ValueError):
                raise ModelSyntaxError(
                    f"{name}[{i}]: expected an (atom, weight) pair"
                ) from None
            atom_list.append(atom)
            weight_list.append(weight)
    return (
        np.asarray(atom_list, dtype=np.float64),
        np.asarray(weight_list, dtype=np.float64),
    )


def _build_measure(raw: MeasureLike, name: str) -> DiscreteMeasure:
    atoms, weights = _coerce_entries(raw, name)
    if atoms.size == 0:
        raise EmptyMeasure(f"{name}: measure has no atoms")
    if atoms.size != weights.size:
        raise ModelSyntaxError(
            f"{name}: {atoms.size} atoms but {weights.size} weights"
        )
    if not np.all(np.isfinite(atoms)) or np.any(atoms <= 0.0):
        bad = atoms[~(np.isfinite(atoms) & (atoms > 0.0))][0]
        raise NonPositiveAtom(f"{name}: atom {bad!r} is not a positive finite real")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
        bad = weights[~(np.isfinite(weights) & (weights > 0.0))][0]
        raise NonPositiveWeight(
            f"{name}: weight {bad!r} is not a positive finite real"
        )

    # Merge exact duplicates by summing their weights; sort ascending.
    order = np.argsort(atoms, kind="stable")
    atoms, weights = atoms[order], weights[order]
    uniq, inverse = np.unique(atoms, return_inverse=True)
    if uniq.size != atoms.size:
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, weights)
        atoms, weights = uniq, merged

    total = comp_sum(weights)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumError(
            f"{name}: weights sum to {total!r}, "
            f"more than {WEIGHT_SUM_TOL} away from 1"
        )
    if abs(total - 1.0) > _NORMALIZED_EPS:
        weights = weights / total
    return DiscreteMeasure(tuple(atoms.tolist()), tuple(weights.tolist()))


def validate(raw_nu: MeasureLike, raw_unu: MeasureLike, gamma: float) -> NoiseModel:
    """Build a NoiseModel from raw inputs, merging duplicates and normalizing.

    Accepts DiscreteMeasure instances, mappings with "atoms"/"weights" lists,
    or iterables of (atom, weight) pairs / {"atom","weight"} mappings.
    """
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
        raise BadGamma(f"gamma must be a number, got {gamma!r}")
    return NoiseModel(
        nu=_build_measure(raw_nu, "nu"),
        unu=_build_measure(raw_unu, "unu"),
        gamma=float(gamma),
    )


def _require_number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelSyntaxError(f"{context}: expected a number, got {value!r}")
    return float(value)


def parse_model(text: str) -> NoiseModel:
    """Parse the JSON model document and validate it.

    Format: {"gamma": number, "nu": [{"atom": x, "weight": w}, ...],
    "unu": [...]}.  Round-trips exactly with `serialize_model`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ModelSyntaxError("top level must be an object")
    for field in ("gamma", "nu", "unu"):
        if field not in doc:
            raise ModelSyntaxError(f"missing field {field!r}")
    gamma = _require_number(doc["gamma"], "gamma")
    for field in ("nu", "unu"):
        entries = doc[field]
        if not isinstance(entries, list):
            raise ModelSyntaxError(f"{field}: expected a list of atom entries")
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise ModelSyntaxError(f"{field}[{i}]: expected an object")
            for key in ("atom", "weight"):
                if key not in entry:
                    raise ModelSyntaxError(f"{field}[{i}]: missing field {key!r}")
                _require_number(entry[key], f"{field}[{i}].{key}")
    return validate(doc["nu"], doc["unu"], gamma)


def serialize_model(model: NoiseModel) -> str:
    """Serialize a NoiseModel to the JSON document format.

    Floats are written with shortest round-trip precision, so
    parse_model(serialize_model(m)) == m exactly.
    """
    doc = {
        "gamma": model.gamma,
        "nu": [
            {"atom": a, "weight": w}
            for a, w in zip(model.nu.atoms, model.nu.weights)
        ],
        "unu": [
            {"atom": a, "weight": w}
            for a, w in zip(model.unu.atoms, model.unu.weights)
        ],
    }
    return json.dumps(doc, indent=2)
