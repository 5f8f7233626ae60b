"""Monte Carlo model of the heralded two-photon amplifier experiment.

Two weak down-converters (gain ``herald_pdc_gain``) each emit ``k`` pairs with
the squeezed-vacuum law.  One photon of every pair hits a trigger detector.
Its twin crosses a lossy path into the main down-converter (gain ``gain``),
whose outputs cross further lossy paths into two number-resolving detectors.
A shot is recorded as ``(trigger_a, trigger_b, out_a, out_b)``.

Every random step is an inverse-CDF lookup into precomputed tables:

* losses are beam splitters onto a vacuum ancilla that is traced out, giving
  binomial thinning built from :func:`ptrdual.gaussian.bs_element`;
* detectors thin each photon with ``detector_efficiency``, then clamp at
  ``pnr_max``;
* the main amplifier draws its output from ``|<n,m|U_PDC|p_a,p_b>|^2``.

Randomness is organised in fixed blocks of ``BLOCK_SHOTS`` shots.  Block ``b``
draws from ``PCG64(SeedSequence(seed, spawn_key=(b,)))``, so any shot range
can be simulated on its own and tallies of disjoint ranges merge into the
tally of their union.
"""

from __future__ import annotations

import configparser
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.stats import beta

from . import _accel, _kernels
from .errors import ConfigError, EmptySliceError, ParameterError
from .gaussian import PDC, bs_element, pdc_element
from .interference import PathAmplitudes, partial_coincidence

PATHS = ("input_a", "input_b", "output_a", "output_b")
BLOCK_SHOTS = 1 << 16
TABLE_TAIL = 1e-10
MAX_OUTPUT_PAIRS = 1000
CLASSICAL_BOUND = 0.25
DEFAULT_CONFIDENCE = 0.99
SEED_LIMIT = 1 << 64


def squeezing_db(gain: float) -> float:
    """``10 log10(e^{2r})`` for ``g = cosh^2 r``."""
    return 20.0 * PDC(gain).r / math.log(10.0)


def _unit(value, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ParameterError(f"{name}={value} outside [0, 1]")
    return value


def _integer(value, name: str, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < lo or (hi is not None and value >= hi):
        raise ParameterError(f"{name}={value} out of range")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    gain: float
    shots: int
    seed: int
    herald_pdc_gain: float = 1.05
    loss_transmissivity: float | Mapping[str, float] = 1.0
    detector_efficiency: float = 1.0
    pnr_max: int = 10
    indistinguishability: float = 1.0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("gain", PDC(self.gain).gain)
        herald = PDC(self.herald_pdc_gain).gain
        if herald >= 2.0:
            raise ParameterError("herald_pdc_gain must stay below 2 for a usable herald")
        set_("herald_pdc_gain", herald)
        set_("shots", _integer(self.shots, "shots", 1))
        set_("seed", _integer(self.seed, "seed", 0, SEED_LIMIT))
        set_("pnr_max", _integer(self.pnr_max, "pnr_max", 1))
        set_("detector_efficiency", _unit(self.detector_efficiency, "detector_efficiency"))
        set_("indistinguishability", _unit(self.indistinguishability, "indistinguishability"))
        loss = self.loss_transmissivity
        if isinstance(loss, Mapping):
            unknown = set(loss) - set(PATHS)
            if unknown:
                raise ParameterError(f"unknown optical paths {sorted(unknown)}")
            loss = {p: _unit(loss.get(p, 1.0), f"loss_transmissivity[{p}]") for p in PATHS}
        else:
            t = _unit(loss, "loss_transmissivity")
            loss = {p: t for p in PATHS}
        set_("loss_transmissivity", loss)

    def transmissivity(self, path: str) -> float:
        return self.loss_transmissivity[path]

    def as_dict(self) -> dict:
        return {
            "gain": self.gain,
            "herald_pdc_gain": self.herald_pdc_gain,
            "loss_transmissivity": dict(self.loss_transmissivity),
            "detector_efficiency": self.detector_efficiency,
            "pnr_max": self.pnr_max,
            "shots": self.shots,
            "seed": self.seed,
            "indistinguishability": self.indistinguishability,
        }


def _thinning_cdf(t: float, levels: int) -> np.ndarray:
    """Row ``n`` is the CDF of the number of photons surviving transmission
    ``t`` when ``n`` enter."""
    cdf = np.ones((levels, levels))
    for n in range(levels):
        probs = np.array([bs_element(k, n - k, n, 0, t) ** 2 for k in range(n + 1)])
        row = np.minimum(np.cumsum(probs), 1.0)
        row[-1] = 1.0
        cdf[n, :n + 1] = row
    return cdf


def _herald_levels(herald: PDC) -> int:
    lam = herald.pair_ratio
    if lam == 0.0:
        return 0
    return max(1, math.ceil(math.log(TABLE_TAIL) / math.log(lam)) - 1)


def _output_pairs(pdc: PDC, inputs: int) -> int:
    """Smallest ``W`` such that output index ``w <= W`` holds all but
    ``TABLE_TAIL`` of the probability for every input ``(p_a, p_b) <= inputs``."""
    if pdc.gain == 1.0:
        return inputs
    need = 0
    for pa in range(inputs + 1):
        for pb in range(inputs + 1):
            mass, w, prev = 0.0, -1, math.inf
            while 1.0 - mass > TABLE_TAIL:
                w += 1
                if w > MAX_OUTPUT_PAIRS:
                    raise ParameterError(
                        f"gain {pdc.gain} needs more than {MAX_OUTPUT_PAIRS} output pairs")
                term = pdc_element(w + max(pa - pb, 0), w + max(pb - pa, 0), pa, pb, pdc.gain) ** 2
                mass += term
                # Past the peak the terms fall off with a shrinking ratio, so the
                # geometric bound holds even when roundoff stalls 1 - mass.
                ratio = term / prev if 0.0 < prev < math.inf else math.inf
                prev = term
                if ratio < 1.0 and term * ratio / (1.0 - ratio) <= TABLE_TAIL:
                    break
            need = max(need, w)
    return need


@dataclass(frozen=True)
class SamplerTables:
    herald_cdf: np.ndarray
    thin_cdf: np.ndarray
    pdc_cdf: np.ndarray
    herald_levels: int
    output_pairs: int

    @property
    def photon_levels(self) -> int:
        return self.thin_cdf.shape[1]


def _pdc_probabilities(pdc: PDC, pa: int, pb: int, w_max: int) -> np.ndarray:
    return np.array([pdc_element(w + max(pa - pb, 0), w + max(pb - pa, 0), pa, pb, pdc.gain) ** 2
                     for w in range(w_max + 1)])


def _with_overlap(probs: np.ndarray, pdc: PDC, s: float) -> np.ndarray:
    # Only the (1,1) -> (1,1) probability depends on path distinguishability;
    # the rest keep their shape and absorb the change.
    if s == 1.0 or len(probs) < 2:
        return probs
    target = partial_coincidence(pdc, s)
    rest = probs.sum() - probs[1]
    out = probs.copy()
    if rest > 0.0:
        out *= (1.0 - target) / rest
    out[1] = target
    return out


def build_tables(config: ExperimentConfig) -> SamplerTables:
    herald = PDC(config.herald_pdc_gain)
    main = PDC(config.gain)
    k_max = _herald_levels(herald)
    lam = herald.pair_ratio
    herald_cdf = np.minimum(np.cumsum([(1.0 - lam) * lam ** k for k in range(k_max + 1)]), 1.0)
    herald_cdf[-1] = 1.0
    w_max = _output_pairs(main, k_max)
    levels = w_max + k_max + 1
    eff = config.detector_efficiency
    thin = np.empty((_kernels.N_PATHS, levels, levels))
    thin[_kernels.TRIGGER_A] = thin[_kernels.TRIGGER_B] = _thinning_cdf(eff, levels)
    thin[_kernels.DETECT] = thin[_kernels.TRIGGER_A]
    thin[_kernels.INPUT_A] = _thinning_cdf(config.transmissivity("input_a"), levels)
    thin[_kernels.INPUT_B] = _thinning_cdf(config.transmissivity("input_b"), levels)
    thin[_kernels.OUTPUT_A] = _thinning_cdf(config.transmissivity("output_a"), levels)
    thin[_kernels.OUTPUT_B] = _thinning_cdf(config.transmissivity("output_b"), levels)
    pdc_cdf = np.empty((k_max + 1, k_max + 1, w_max + 1))
    for pa in range(k_max + 1):
        for pb in range(k_max + 1):
            probs = _pdc_probabilities(main, pa, pb, w_max)
            if pa == pb == 1:
                probs = _with_overlap(probs, main, config.indistinguishability)
            row = np.minimum(np.cumsum(probs), 1.0)
            row[-1] = 1.0
            pdc_cdf[pa, pb] = row
    return SamplerTables(herald_cdf, thin, pdc_cdf, k_max, w_max)


def _block_uniforms(seed: int, block: int, count: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    return rng.random((count, _kernels.UNIFORMS_PER_SHOT))


def simulate_shots(config: ExperimentConfig, start: int = 0, stop: int | None = None,
                   tables: SamplerTables | None = None,
                   use_numba: bool | None = None) -> np.ndarray:
    """Click tuples of shots ``start .. stop-1`` as an ``(n, 4)`` int array."""
    stop = config.shots if stop is None else stop
    if not 0 <= start <= stop:
        raise ParameterError(f"invalid shot range [{start}, {stop})")
    tables = build_tables(config) if tables is None else tables
    use_numba = _accel.USE_NUMBA if use_numba is None else use_numba
    sampler = _kernels.sample_shots if use_numba else _kernels.sample_shots_numpy
    parts = []
    for block in range(start // BLOCK_SHOTS, -(-stop // BLOCK_SHOTS)):
        lo = max(start, block * BLOCK_SHOTS) - block * BLOCK_SHOTS
        hi = min(stop, (block + 1) * BLOCK_SHOTS) - block * BLOCK_SHOTS
        u = _block_uniforms(config.seed, block, hi)[lo:]
        parts.append(sampler(u, tables.herald_cdf, tables.thin_cdf, tables.pdc_cdf, config.pnr_max))
    if not parts:
        return np.empty((0, 4), dtype=np.int64)
    return np.concatenate(parts)


@dataclass
class ExperimentTally:
    counts: Counter = field(default_factory=Counter)
    shots_run: int = 0

    @classmethod
    def from_shots(cls, shots: np.ndarray) -> "ExperimentTally":
        tally = cls()
        if len(shots):
            rows, freq = np.unique(shots, axis=0, return_counts=True)
            tally.counts = Counter({tuple(int(v) for v in r): int(c) for r, c in zip(rows, freq)})
        tally.shots_run = int(len(shots))
        return tally

    def merge(self, other: "ExperimentTally") -> "ExperimentTally":
        return ExperimentTally(self.counts + other.counts, self.shots_run + other.shots_run)

    def heralded(self, trigger=(1, 1)) -> dict[tuple[int, int], int]:
        """Output-click counts among shots whose triggers read ``trigger``."""
        return {k[2:]: v for k, v in sorted(self.counts.items()) if k[:2] == tuple(trigger)}


def run_experiment(config: ExperimentConfig, use_numba: bool | None = None,
                   chunk_shots: int = 16 * BLOCK_SHOTS) -> ExperimentTally:
    tables = build_tables(config)
    tally = ExperimentTally()
    for start in range(0, config.shots, chunk_shots):
        stop = min(config.shots, start + chunk_shots)
        shots = simulate_shots(config, start, stop, tables=tables, use_numba=use_numba)
        tally = tally.merge(ExperimentTally.from_shots(shots))
    return tally


@dataclass(frozen=True)
class Report:
    heralded_shots: int
    coincidences: int
    estimate: float
    lower: float
    upper: float
    confidence: float
    verdict: str
    quantum_prediction: float
    classical_prediction: float
    classical_bound: float = CLASSICAL_BOUND

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def clopper_pearson(k: int, n: int, confidence: float) -> tuple[float, float]:
    alpha = 1.0 - confidence
    lo = 0.0 if k == 0 else float(beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


def analyze(tally: ExperimentTally, config: ExperimentConfig,
            confidence: float = DEFAULT_CONFIDENCE) -> Report:
    """Coincidence probability on the heralded ``(1, 1)`` slice, with a
    Clopper-Pearson interval.  ``QUANTUM`` means the whole interval lies
    below the classical bound of 1/4."""
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence must lie in (0, 1)")
    slice_ = tally.heralded()
    n = sum(slice_.values())
    if n == 0:
        raise EmptySliceError("no shot was heralded with both triggers reading 1")
    k = slice_.get((1, 1), 0)
    lo, hi = clopper_pearson(k, n, confidence)
    pdc = PDC(config.gain)
    paths = PathAmplitudes.of(pdc)
    return Report(
        heralded_shots=n,
        coincidences=k,
        estimate=k / n,
        lower=lo,
        upper=hi,
        confidence=confidence,
        verdict="QUANTUM" if hi < CLASSICAL_BOUND else "INCONCLUSIVE",
        quantum_prediction=partial_coincidence(pdc, config.indistinguishability),
        classical_prediction=paths.classical,
    )


_CONFIG_SECTION = "experiment"
_LOSS_KEYS = {f"loss_{p}": p for p in PATHS}
_FLOAT_KEYS = ("herald_pdc_gain", "detector_efficiency", "indistinguishability", "loss_transmissivity")
_INT_KEYS = ("pnr_max", "shots", "seed")
_GAIN_KEYS = ("gain", "squeezing_r", "squeezing_db")
CONFIG_KEYS = _GAIN_KEYS + _FLOAT_KEYS + _INT_KEYS + tuple(_LOSS_KEYS)


def _key_lines(text: str) -> dict[str, int]:
    lines, section = {}, None
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
        elif section == _CONFIG_SECTION and stripped and stripped[0] not in "#;":
            key = stripped.split("=", 1)[0].split(":", 1)[0].strip().lower()
            lines.setdefault(key, number)
    return lines


def parse_config(text: str) -> ExperimentConfig:
    """Experiment configuration from INI text with a single ``[experiment]``
    section.  Exactly one of ``gain``, ``squeezing_r``, ``squeezing_db`` sets
    the main gain; ``loss_transmissivity`` sets every path at once and
    ``loss_<path>`` overrides one path."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("expected a section header such as [experiment]", exc.lineno) from None
    except configparser.ParsingError as exc:
        raise ConfigError("expected 'key = value'", exc.errors[0][0]) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    if parser.sections() != [_CONFIG_SECTION]:
        raise ConfigError(f"expected exactly one [{_CONFIG_SECTION}] section, found {parser.sections()}")
    where = _key_lines(text)
    items = dict(parser.items(_CONFIG_SECTION))
    for key in items:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", where.get(key))

    def number(key, kind):
        try:
            return kind(items[key])
        except ValueError:
            raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, "
                              f"got {items[key]!r}", where.get(key)) from None

    gain_keys = [k for k in _GAIN_KEYS if k in items]
    if len(gain_keys) != 1:
        raise ConfigError("give exactly one of gain, squeezing_r, squeezing_db",
                          where.get(gain_keys[1]) if len(gain_keys) > 1 else None)
    for key in ("shots", "seed"):
        if key not in items:
            raise ConfigError(f"missing required key {key!r}")
    kwargs: dict = {}
    gkey = gain_keys[0]
    try:
        value = number(gkey, float)
        kwargs["gain"] = {"gain": lambda v: PDC(v), "squeezing_r": PDC.from_r,
                          "squeezing_db": PDC.from_db}[gkey](value).gain
    except ParameterError as exc:
        raise ConfigError(str(exc), where.get(gkey)) from None
    for key in _FLOAT_KEYS:
        if key in items:
            kwargs[key] = number(key, float)
    for key in _INT_KEYS:
        if key in items:
            kwargs[key] = number(key, int)
    overrides = {path: number(key, float) for key, path in _LOSS_KEYS.items() if key in items}
    if overrides:
        base = kwargs.get("loss_transmissivity", 1.0)
        kwargs["loss_transmissivity"] = {p: overrides.get(p, base) for p in PATHS}
    try:
        return ExperimentConfig(**kwargs)
    except ParameterError as exc:
        culprit = next((k for k in items if k in str(exc)), None)
        raise ConfigError(str(exc), where.get(culprit)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
