"""A deliberately slow re-derivation of the split-window detector.

Keeps the window as a plain list and recomputes every moment from
scratch each step with fsum, so it shares no state-update code with the
real detector. Decisions (not just statistics) must match element for
element; the equivalence check compares verdict streams.
"""

from __future__ import annotations

import math

from optwin.detection import Verdict
from optwin.detector import CutTable, OptwinConfig


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


class NaiveSplitDetector:
    """Same decision rule, no incremental state."""

    def __init__(self, config: OptwinConfig, table: CutTable) -> None:
        self.config = config
        self.table = table
        self.values: list[float] = []

    def add_element(self, x: float) -> Verdict:
        cfg = self.config
        if not math.isfinite(x):
            raise ValueError(f"stream value must be finite, got {x!r}")
        if len(self.values) == cfg.w_max:
            self.values.pop(0)
        self.values.append(x)
        n = len(self.values)
        if n < cfg.w_min:
            return Verdict.NO_CHANGE
        idx = n - cfg.w_min
        split = self.table.nu_split[idx]
        mean_old, std_old = _mean_std(self.values[:split])
        mean_new, std_new = _mean_std(self.values[split:])
        if cfg.one_sided and mean_new < mean_old:
            return Verdict.NO_CHANGE
        s_old = std_old + cfg.eta
        s_new = std_new + cfg.eta
        var_old = s_old * s_old
        var_new = s_new * s_new
        f_ratio = var_new / var_old
        shift_se = math.sqrt(var_old / split + var_new / (n - split))
        t_value = (mean_old - mean_new) / shift_se
        shift = abs(mean_new - mean_old)
        floor = max(cfg.rho, self.table.rho_temp[idx])
        fired = std_old >= cfg.eta and f_ratio > self.table.f_crit[idx]
        if not fired:
            fired = (
                abs(t_value) > self.table.t_crit[idx]
                and shift > floor * s_old + shift_se
            )
        if fired:
            if cfg.keep_new_window_on_reset:
                self.values = self.values[split:]
            else:
                self.values = []
            return Verdict.DRIFT
        return Verdict.NO_CHANGE
