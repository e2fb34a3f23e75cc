"""Incremental Naive Bayes and the test-then-train evaluation loop.

prequential_run drives a classifier over labeled instances: each
instance is predicted first, the 0/1 error is recorded and offered to
the drift detector, and only then is the instance used for training.
Detector flags reset the model, either to blank or to a shadow model
that has been training since the warning zone began.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Hashable, Protocol, Sequence

from .detection import Detection, Verdict

__all__ = ["NaiveBayesModel", "PrequentialResult", "prequential_run"]


class NaiveBayesModel:
    """Categorical Naive Bayes with Laplace add-one smoothing.

    Built from the attribute domains and class list up front; learning
    just bumps integer counts, so the model is exact, deterministic,
    and cheap to deep-copy. Prediction ties resolve to the class
    declared first.
    """

    def __init__(
        self,
        attribute_values: Sequence[Sequence[Hashable]],
        classes: Sequence[Hashable],
    ) -> None:
        if not attribute_values:
            raise ValueError("need at least one attribute")
        if len(classes) < 2:
            raise ValueError("need at least two classes")
        if len(set(classes)) != len(classes):
            raise ValueError("classes must be distinct")
        self.classes = tuple(classes)
        self._class_index = {c: i for i, c in enumerate(self.classes)}
        self._value_index: list[dict[Hashable, int]] = []
        for a, values in enumerate(attribute_values):
            if len(set(values)) != len(values) or not values:
                raise ValueError(f"attribute {a} values must be non-empty and distinct")
            self._value_index.append({v: i for i, v in enumerate(values)})
        self.reset()

    def reset(self) -> None:
        """Drop all learned counts."""
        n_classes = len(self.classes)
        self._class_counts = [0] * n_classes
        self._total = 0
        self._value_counts = [
            [[0] * len(index) for index in self._value_index] for _ in range(n_classes)
        ]

    def _encode(self, features: Sequence[Hashable]) -> list[int]:
        if len(features) != len(self._value_index):
            raise ValueError(
                f"expected {len(self._value_index)} features, got {len(features)}"
            )
        encoded = []
        for a, value in enumerate(features):
            idx = self._value_index[a].get(value)
            if idx is None:
                raise ValueError(f"unknown value {value!r} for attribute {a}")
            encoded.append(idx)
        return encoded

    def learn(self, features: Sequence[Hashable], label: Hashable) -> None:
        encoded = self._encode(features)
        c = self._class_index.get(label)
        if c is None:
            raise ValueError(f"unknown class {label!r}")
        self._class_counts[c] += 1
        self._total += 1
        counts = self._value_counts[c]
        for a, v in enumerate(encoded):
            counts[a][v] += 1

    def _log_joint(self, encoded: list[int]) -> list[float]:
        n_classes = len(self.classes)
        scores = []
        for c in range(n_classes):
            n_c = self._class_counts[c]
            score = math.log((n_c + 1.0) / (self._total + n_classes))
            counts = self._value_counts[c]
            for a, v in enumerate(encoded):
                score += math.log((counts[a][v] + 1.0) / (n_c + len(counts[a])))
            scores.append(score)
        return scores

    def predict(self, features: Sequence[Hashable]) -> Hashable:
        scores = self._log_joint(self._encode(features))
        best = 0
        for c in range(1, len(scores)):
            if scores[c] > scores[best]:
                best = c
        return self.classes[best]

    def predict_proba(self, features: Sequence[Hashable]) -> list[float]:
        """Class probabilities in declared-class order; they sum to 1."""
        scores = self._log_joint(self._encode(features))
        peak = max(scores)
        weights = [math.exp(s - peak) for s in scores]
        total = sum(weights)
        return [w / total for w in weights]


class _Instance(Protocol):
    label: Hashable

    @property
    def features(self) -> Sequence[Hashable]: ...


class _Detector(Protocol):
    def add_element(self, error: float) -> Detection: ...


@dataclass(frozen=True, slots=True)
class PrequentialResult:
    """Per-step errors plus where the detector warned and fired."""

    errors: list[float]
    drifts: list[int]
    warnings: list[int]
    accuracy: float


def prequential_run(
    instances: Sequence[_Instance],
    model: NaiveBayesModel,
    detector: _Detector | None = None,
    reset_policy: str = "hard",
) -> PrequentialResult:
    """Test-then-train loop with detector-triggered model resets.

    Under the "hard" policy a drift flag wipes the model. Under
    "shadow" a warning starts a fresh background model that trains
    alongside the live one; a drift then swaps it in, and a return to
    no-change discards it. Detectors without a warning state behave
    identically under both policies apart from the swap being a wipe.
    """
    if reset_policy not in ("hard", "shadow"):
        raise ValueError(f"reset_policy must be 'hard' or 'shadow', got {reset_policy!r}")
    errors: list[float] = []
    drifts: list[int] = []
    warnings: list[int] = []
    shadow: NaiveBayesModel | None = None
    pristine = copy.deepcopy(model)
    n_correct = 0
    for step, instance in enumerate(instances):
        features = instance.features
        predicted = model.predict(features)
        correct = predicted == instance.label
        if correct:
            n_correct += 1
        error = 0.0 if correct else 1.0
        errors.append(error)
        verdict = Verdict.NO_CHANGE
        if detector is not None:
            verdict = detector.add_element(error).verdict
        if verdict is Verdict.DRIFT:
            drifts.append(step)
            if reset_policy == "shadow" and shadow is not None:
                model = shadow
            else:
                model.reset()
            shadow = None
        elif verdict is Verdict.WARNING:
            warnings.append(step)
            if reset_policy == "shadow" and shadow is None:
                shadow = copy.deepcopy(pristine)
        else:
            shadow = None
        model.learn(features, instance.label)
        if shadow is not None:
            shadow.learn(features, instance.label)
    accuracy = n_correct / len(instances) if instances else 0.0
    return PrequentialResult(errors, drifts, warnings, accuracy)
