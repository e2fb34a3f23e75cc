"""Drift detection over an optimally split sliding window (OPTWIN).

The detector keeps a window W of recent stream values (classifier error
rates, residuals, any real signal) and splits it into an older part
W_hist and a newer part W_new at a precomputed optimal cut. Each update
compares the parts with two tests:

* an F test on the ratio of (regularized) standard deviations, and
* a Welch t test on the means,

flagging drift when either fires. The cut for every window length is
chosen offline as the largest split fraction nu whose combined critical
region still guarantees that a mean shift of rho standard deviations
cannot hide inside W_new:

    bound(nu, L) = t_crit * sqrt(1/(nu L) + f_crit / ((1 - nu) L))

with f_crit = f_ppf(delta', nu L - 1, (1 - nu) L - 1) and t_crit the
t quantile at the Welch degrees of freedom for the two parts. Solving
bound(nu, L) <= rho for the largest nu favors a long history and a
short, reactive new part. Below the first solvable length (w_proof) the
window falls back to the midpoint split, whose achievable bound is
recorded as rho_temp. delta' is the fourth root of the configured
confidence delta: the guarantee stacks four quantile bounds (two solved
into the cut above, two applied at runtime), each at an equal share.

A stream is tested at every step, so over thousands of stationary steps
raw delta'-quantile thresholds would still flag eventually. Each
runtime test therefore carries a guard drawn from the same
construction:

* the t test only fires when the observed mean shift also clears the
  design shift, max(rho, rho_temp) * sigma_hist, by at least one
  standard error of the shift estimate, and
* the F test critical is taken at confidence 1 - (1 - delta')/L, a
  union bound over the up-to-L lengths a stationary window is tested
  at, and the test is skipped while sigma_hist < eta, where the raw
  ratio measures the regularizer rather than the data.

Shifts at the design size or above pass both guards within about one
turnover of W_new, leaving the detection-delay bounds intact.

All cut data lives in a CutTable indexed by window length, making
add_element O(1): a table lookup, a bounded split move, and two O(1)
moment reads.
"""

from __future__ import annotations

import math
import os
import struct
import tempfile
from dataclasses import dataclass

from .detection import NO_CHANGE, Detection, DriftDetail, Verdict
from .stats import RollingWindow, f_ppf, t_ppf

__all__ = [
    "OptwinConfig",
    "CutTable",
    "OptwinDetector",
    "min_detectable_shift",
    "optimal_split",
    "build_cut_table",
]


@dataclass(frozen=True, slots=True)
class OptwinConfig:
    """Detector parameters.

    delta is the detection confidence, rho the robustness (smallest
    mean shift, in units of historical standard deviation, the window
    geometry is sized to catch). w_min/w_max bound the window length,
    eta regularizes standard deviations so constant streams do not
    produce degenerate statistics, one_sided restricts flags to error
    increases, and keep_new_window_on_reset carries W_new over into the
    fresh window after a drift instead of starting empty.
    """

    delta: float = 0.99
    rho: float = 0.5
    w_max: int = 25000
    w_min: int = 30
    eta: float = 1e-5
    one_sided: bool = True
    keep_new_window_on_reset: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not self.rho > 0.0:
            raise ValueError(f"rho must be positive, got {self.rho!r}")
        if self.w_min < 30:
            raise ValueError(f"w_min must be at least 30, got {self.w_min!r}")
        if self.w_max < self.w_min:
            raise ValueError(
                f"w_max ({self.w_max!r}) must be at least w_min ({self.w_min!r})"
            )
        if self.eta < 0.0:
            raise ValueError(f"eta must be non-negative, got {self.eta!r}")

    @property
    def delta_prime(self) -> float:
        """Per-test confidence: delta split across four test outcomes."""
        return self.delta ** 0.25


def _split_stats(
    n1: float, n2: float, delta_prime: float
) -> tuple[float, float, float, float]:
    """Bound and critical values for sub-window sizes (n1, n2).

    Returns (bound, t_crit, f_crit, welch_df). Sizes may be fractional
    (the midpoint fallback on odd lengths); both must exceed 1 so the
    F quantile has positive degrees of freedom.
    """
    f_crit = f_ppf(delta_prime, n1 - 1.0, n2 - 1.0)
    a = 1.0 / n1
    b = f_crit / n2
    df = (a + b) ** 2 / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0))
    t_crit = t_ppf(delta_prime, df)
    return t_crit * math.sqrt(a + b), t_crit, f_crit, df


def _welch_df(n1: float, n2: float, f_crit: float) -> float:
    a = 1.0 / n1
    b = f_crit / n2
    return (a + b) ** 2 / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0))


def min_detectable_shift(nu: float, length: float, delta_prime: float) -> float:
    """Smallest certifiable mean shift (in sigma_hist units) for a split.

    Evaluates the combined-test bound at split fraction nu of a window
    of the given length, using per-test confidence delta_prime. Both
    sub-windows must hold at least two elements.
    """
    if not 0.0 < delta_prime < 1.0:
        raise ValueError(f"delta_prime must lie in (0, 1), got {delta_prime!r}")
    n1 = nu * length
    n2 = length - n1
    if not (n1 >= 2.0 and n2 >= 2.0):
        raise ValueError(
            f"split nu={nu!r} of length {length!r} leaves a sub-window below 2 elements"
        )
    return _split_stats(n1, n2, delta_prime)[0]


def optimal_split(length: int, rho: float, delta_prime: float) -> int | None:
    """Largest split index k in [2, length-2] with bound(k) <= rho.

    The bound is U shaped in k (it diverges as either sub-window
    shrinks toward one element), so the qualifying set is a contiguous
    interval; a ternary search locates the minimum and a binary search
    walks to the interval's right edge. Returns None when no split
    qualifies. The bound itself does not depend on rho, so a larger rho
    can only move the answer right.
    """
    if length < 4:
        return None
    cache: dict[int, float] = {}

    def bound(k: int) -> float:
        v = cache.get(k)
        if v is None:
            v = _split_stats(float(k), float(length - k), delta_prime)[0]
            cache[k] = v
        return v

    lo, hi = 2, length - 2
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if bound(m1) <= bound(m2):
            hi = m2
        else:
            lo = m1
    k_min = min(range(lo, hi + 1), key=bound)
    if bound(k_min) > rho:
        return None
    lo, hi = k_min, length - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bound(mid) <= rho:
            lo = mid
        else:
            hi = mid - 1
    return lo


class CutTable:
    """Per-length split data for a detector configuration.

    Parallel lists indexed by window length L - w_min:

    * nu, nu_split: chosen split fraction and realized integer index
    * t_crit: mean-test critical at per-test confidence delta'
    * f_crit: variance-test critical at confidence 1 - (1 - delta')/L,
      the union bound over tested window lengths (module docstring)
    * df: Welch degrees of freedom behind t_crit
    * rho_temp: the bound actually achieved at the stored split (for
      lengths below w_proof this is the midpoint bound, which exceeds
      the configured rho; from w_proof on it is <= rho by construction)

    w_proof is the smallest length with a qualifying split, or None if
    none exists up to w_max.
    """

    __slots__ = (
        "delta",
        "rho",
        "w_min",
        "w_max",
        "w_proof",
        "nu",
        "nu_split",
        "t_crit",
        "f_crit",
        "df",
        "rho_temp",
    )

    _MAGIC = b"OPTW"
    _VERSION = 1
    _HEADER = struct.Struct("<4sHHII")  # magic, version, w_min, w_max, w_proof
    _PARAMS = struct.Struct("<dd")  # delta, rho
    _ROW = struct.Struct("<fIfff")  # nu, nu_split, t_crit, f_crit, rho_temp

    def __init__(
        self,
        *,
        delta: float,
        rho: float,
        w_min: int,
        w_max: int,
        w_proof: int | None,
        nu: list[float],
        nu_split: list[int],
        t_crit: list[float],
        f_crit: list[float],
        df: list[float],
        rho_temp: list[float],
    ) -> None:
        expected = w_max - w_min + 1
        for name, rows in (
            ("nu", nu),
            ("nu_split", nu_split),
            ("t_crit", t_crit),
            ("f_crit", f_crit),
            ("df", df),
            ("rho_temp", rho_temp),
        ):
            if len(rows) != expected:
                raise ValueError(f"{name} has {len(rows)} rows, expected {expected}")
        self.delta = delta
        self.rho = rho
        self.w_min = w_min
        self.w_max = w_max
        self.w_proof = w_proof
        self.nu = nu
        self.nu_split = nu_split
        self.t_crit = t_crit
        self.f_crit = f_crit
        self.df = df
        self.rho_temp = rho_temp

    def __len__(self) -> int:
        return self.w_max - self.w_min + 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CutTable):
            return NotImplemented
        return (
            (self.delta, self.rho, self.w_min, self.w_max, self.w_proof)
            == (other.delta, other.rho, other.w_min, other.w_max, other.w_proof)
            and self.nu == other.nu
            and self.nu_split == other.nu_split
            and self.t_crit == other.t_crit
            and self.f_crit == other.f_crit
            and self.df == other.df
            and self.rho_temp == other.rho_temp
        )

    def __hash__(self) -> int:  # tables are mutable containers; identity hash
        return id(self)

    def index(self, length: int) -> int:
        """List index for window length ``length``."""
        if not self.w_min <= length <= self.w_max:
            raise ValueError(
                f"length {length!r} outside table range [{self.w_min}, {self.w_max}]"
            )
        return length - self.w_min

    def save(self, path: str | os.PathLike[str]) -> None:
        """Write the table as a flat little-endian binary file.

        Layout: 16-byte header (magic "OPTW", version u16, w_min u16,
        w_max u32, w_proof u32 with 0 meaning none), delta and rho as
        f64, then one 20-byte row per length from w_min to w_max:
        (nu f32, nu_split u32, t_crit f32, f_crit f32, rho_temp f32).
        Criticals are stored single precision; df is derivable from the
        stored fields and is not serialized.
        """
        parts = [
            self._HEADER.pack(
                self._MAGIC, self._VERSION, self.w_min, self.w_max, self.w_proof or 0
            ),
            self._PARAMS.pack(self.delta, self.rho),
        ]
        pack_row = self._ROW.pack
        for i in range(len(self)):
            parts.append(
                pack_row(
                    self.nu[i],
                    self.nu_split[i],
                    self.t_crit[i],
                    self.f_crit[i],
                    self.rho_temp[i],
                )
            )
        _atomic_write_bytes(path, b"".join(parts))

    @classmethod
    def load(cls, path: str | os.PathLike[str]) -> "CutTable":
        """Read a table written by save().

        Criticals come back at single precision (about 1e-7 relative),
        so a loaded table is interchangeable with a freshly built one
        for detection but not bit-identical to it. df is recomputed
        from the stored split sizes at confidence delta', the same
        inputs the builder used, so it matches the built values.
        """
        with open(path, "rb") as fh:
            data = fh.read()
        head_len = cls._HEADER.size + cls._PARAMS.size
        if len(data) < head_len:
            raise ValueError(f"{path}: truncated cut table (no header)")
        magic, version, w_min, w_max, w_proof_raw = cls._HEADER.unpack_from(data, 0)
        if magic != cls._MAGIC:
            raise ValueError(f"{path}: not a cut table (bad magic {magic!r})")
        if version != cls._VERSION:
            raise ValueError(f"{path}: unsupported cut table version {version}")
        delta, rho = cls._PARAMS.unpack_from(data, cls._HEADER.size)
        n_rows = w_max - w_min + 1
        expected = head_len + n_rows * cls._ROW.size
        if len(data) != expected:
            raise ValueError(
                f"{path}: expected {expected} bytes for {n_rows} rows, found {len(data)}"
            )
        w_proof = w_proof_raw or None
        dp = delta ** 0.25
        nu: list[float] = []
        nu_split: list[int] = []
        t_crit: list[float] = []
        f_crit: list[float] = []
        df: list[float] = []
        rho_temp: list[float] = []
        offset = head_len
        for i in range(n_rows):
            nu_i, k_i, t_i, f_i, rt_i = cls._ROW.unpack_from(data, offset)
            offset += cls._ROW.size
            length = w_min + i
            nu.append(nu_i)
            nu_split.append(k_i)
            t_crit.append(t_i)
            f_crit.append(f_i)
            rho_temp.append(rt_i)
            if w_proof is not None and length >= w_proof:
                n1 = float(k_i)
            else:
                n1 = nu_i * length  # midpoint fallback used real sizes
            n2 = length - n1
            df.append(_welch_df(n1, n2, f_ppf(dp, n1 - 1.0, n2 - 1.0)))
        return cls(
            delta=delta,
            rho=rho,
            w_min=w_min,
            w_max=w_max,
            w_proof=w_proof,
            nu=nu,
            nu_split=nu_split,
            t_crit=t_crit,
            f_crit=f_crit,
            df=df,
            rho_temp=rho_temp,
        )

    def export_csv(self, path: str | os.PathLike[str]) -> None:
        """Write the table as CSV with header L,nu,nu_split,t_crit,f_crit,df,rho_temp."""
        lines = ["L,nu,nu_split,t_crit,f_crit,df,rho_temp"]
        for i in range(len(self)):
            lines.append(
                f"{self.w_min + i},{self.nu[i]!r},{self.nu_split[i]},"
                f"{self.t_crit[i]!r},{self.f_crit[i]!r},{self.df[i]!r},{self.rho_temp[i]!r}"
            )
        _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def _atomic_write_bytes(path: str | os.PathLike[str], payload: bytes) -> None:
    """Write via a temp file and rename so failures leave no partial file."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def build_cut_table(config: OptwinConfig) -> CutTable:
    """Solve the split bound for every length in [w_min, w_max].

    The qualifying frontier (largest k with bound <= rho) is monotone
    non-decreasing in L because the bound at fixed k strictly falls as
    the second sub-window grows, so after the first solvable length the
    per-length work is a short walk from the previous answer. Before
    that, the running minimum of the bound is tracked the same way to
    decide when a solution first appears.

    The split search and rho_temp use the delta' criticals the bound is
    defined with; the stored f_crit is then re-taken at the compensated
    confidence 1 - (1 - delta')/L the runtime test applies.
    """
    dp = config.delta_prime
    rho = config.rho
    w_min, w_max = config.w_min, config.w_max

    nu: list[float] = []
    nu_split: list[int] = []
    t_crit: list[float] = []
    f_crit: list[float] = []
    df: list[float] = []
    rho_temp: list[float] = []

    w_proof: int | None = None
    k_frontier: int | None = None
    k_argmin: int | None = None

    for length in range(w_min, w_max + 1):
        top = length - 2
        stats_cache: dict[int, tuple[float, float, float, float]] = {}

        def stats_at(k: int) -> tuple[float, float, float, float]:
            v = stats_cache.get(k)
            if v is None:
                v = _split_stats(float(k), float(length - k), dp)
                stats_cache[k] = v
            return v

        if k_frontier is None:
            # still searching for w_proof: follow the bound's minimum
            k = min(k_argmin if k_argmin is not None else length // 2, top)
            while k > 2 and stats_at(k - 1)[0] < stats_at(k)[0]:
                k -= 1
            while k < top and stats_at(k + 1)[0] < stats_at(k)[0]:
                k += 1
            k_argmin = k
            if stats_at(k)[0] <= rho:
                w_proof = length
                found = optimal_split(length, rho, dp)
                # the minimum qualifies, so a frontier must exist
                assert found is not None
                k_frontier = found
        else:
            k = k_frontier
            while k < top and stats_at(k + 1)[0] <= rho:
                k += 1
            if stats_at(k)[0] > rho:
                # the carried frontier should still qualify at a longer
                # window; if rounding ever breaks that, resolve exactly
                found = optimal_split(length, rho, dp)
                assert found is not None
                k = found
            k_frontier = k

        if k_frontier is not None:
            k = k_frontier
            bound_k, t_k, _f_k, df_k = stats_at(k)
            nu.append(k / length)
            nu_split.append(k)
            n1 = float(k)
        else:
            n1 = length / 2.0
            bound_k, t_k, _f_k, df_k = _split_stats(n1, n1, dp)
            nu.append(0.5)
            nu_split.append(length // 2)
        n2 = length - n1
        t_crit.append(t_k)
        f_crit.append(f_ppf(1.0 - (1.0 - dp) / length, n1 - 1.0, n2 - 1.0))
        df.append(df_k)
        rho_temp.append(bound_k)

    return CutTable(
        delta=config.delta,
        rho=rho,
        w_min=w_min,
        w_max=w_max,
        w_proof=w_proof,
        nu=nu,
        nu_split=nu_split,
        t_crit=t_crit,
        f_crit=f_crit,
        df=df,
        rho_temp=rho_temp,
    )


class OptwinDetector:
    """Streaming drift detector over the optimally split window.

    Feed one value per step to add_element; it answers NO_CHANGE or a
    DRIFT detection carrying the test statistics. The detector never
    emits WARNING (there is no warning zone in the combined test). On
    drift the window resets per the configuration.

    When ``table`` is omitted the cut table is built on the spot, which
    is the expensive part (seconds for large w_max); pass a prebuilt or
    loaded table to share it across detectors.
    """

    __slots__ = (
        "_config",
        "_table",
        "_window",
        "_nu_split",
        "_t_crit",
        "_f_crit",
        "_shift_floor",
    )

    def __init__(self, config: OptwinConfig, table: CutTable | None = None) -> None:
        if table is None:
            table = build_cut_table(config)
        elif (table.delta, table.rho, table.w_min, table.w_max) != (
            config.delta,
            config.rho,
            config.w_min,
            config.w_max,
        ):
            raise ValueError(
                "cut table geometry (delta, rho, w_min, w_max) does not match config"
            )
        self._config = config
        self._table = table
        self._window = RollingWindow(config.w_max)
        self._nu_split = table.nu_split
        self._t_crit = table.t_crit
        self._f_crit = table.f_crit
        # design shift per length: rho where the split is proven, the
        # midpoint bound where it is not
        rho = config.rho
        self._shift_floor = [rho if rho >= rt else rt for rt in table.rho_temp]

    @property
    def config(self) -> OptwinConfig:
        return self._config

    @property
    def table(self) -> CutTable:
        return self._table

    @property
    def window_length(self) -> int:
        return len(self._window)

    def add_element(self, x: float) -> Detection:
        """Ingest one stream value and report the verdict."""
        if not math.isfinite(x):
            raise ValueError(f"stream value must be finite, got {x!r}")
        w = self._window
        if w.full:
            w.evict_oldest()
        w.push(x)
        cfg = self._config
        n = len(w)
        if n < cfg.w_min:
            return NO_CHANGE
        idx = n - cfg.w_min
        split = self._nu_split[idx]
        w.set_split(split)
        older = w.older_moments()
        newer = w.newer_moments()
        if cfg.one_sided and newer.mean < older.mean:
            return NO_CHANGE
        eta = cfg.eta
        s_old = older.std + eta
        s_new = newer.std + eta
        var_old = s_old * s_old
        var_new = s_new * s_new
        f_ratio = var_new / var_old
        shift_se = math.sqrt(var_old / older.count + var_new / newer.count)
        t_value = (older.mean - newer.mean) / shift_se
        shift = abs(newer.mean - older.mean)
        fired = older.std >= eta and f_ratio > self._f_crit[idx]
        if not fired:
            fired = (
                abs(t_value) > self._t_crit[idx]
                and shift > self._shift_floor[idx] * s_old + shift_se
            )
        if fired:
            detail = DriftDetail(t_value, f_ratio, split, n)
            self.reset()
            return Detection(Verdict.DRIFT, detail)
        return NO_CHANGE

    def reset(self) -> None:
        """Restart the window: cleared, or seeded with W_new if configured."""
        w = self._window
        if self._config.keep_new_window_on_reset:
            kept = w.values()[w.split :]
            w.clear()
            for v in kept:
                w.push(v)
        else:
            w.clear()
