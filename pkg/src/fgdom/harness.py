"""Randomized verification of the domination theorem and the module invariants.

Every sample is generated from its own generator seeded by (seed, n, index),
so results do not depend on how samples are spread over worker threads; the
pool's results are merged by sample index before anything is written.
"""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import itertools
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

from . import factory, flags, network, spectral, surface
from .coords import (
    EDGE_REVERSAL_MODES,
    BuildingBlockSpec,
    EdgeInvariants,
    MonodromyWord,
    TriangleInvariants,
    bend_word,
    coordinate_count,
    triangle_indices,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "fgdom.report/1"
CONFIG_SCHEMA_VERSION = "fgdom.config/1"

OK, FAIL, SKIPPED = "ok", "fail", "skipped"

CSV_COLUMNS = (
    "seed", "n", "index", "word_length", "mixed", "status",
    "hilbert_rho", "hilbert_rho0", "translation_rho", "translation_rho0",
    "lk_rho", "lk_rho0", "hilbert_ok", "translation_ok", "lk_ok",
    "majorization_ok", "equality_ok", "digest",
)

SUITE_NAMES = ("coords", "factory", "flags", "network", "spectral", "surface")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    length: float = 1e-7
    majorization: float = 1e-7
    equality: float = 1e-7


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    word_length: tuple[int, int] = (1, 30)
    samples: int = 1000
    seed: int = 0
    modulus_range: tuple[float, float] = (0.2, 5.0)
    phase: str = "uniform"
    tolerances: Tolerances = field(default_factory=Tolerances)
    cutoff: float = spectral.CROSS_CHECK_RTOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_length", tuple(self.word_length))
        object.__setattr__(self, "modulus_range", tuple(float(v) for v in self.modulus_range))
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.samples < 0:
            raise ConfigError(f"sample count must be >= 0, got {self.samples}")
        lo, hi = self.word_length
        if not 1 <= lo <= hi:
            raise ConfigError(f"word length range must satisfy 1 <= lo <= hi, got {self.word_length}")
        mlo, mhi = self.modulus_range
        if not 0 < mlo <= mhi or not math.isfinite(mhi):
            raise ConfigError(f"modulus range must be positive and ordered, got {self.modulus_range}")
        if self.phase != "uniform":
            raise ConfigError(f"unsupported phase distribution {self.phase!r}")
        if self.cutoff <= 0:
            raise ConfigError("conditioning cutoff must be positive")

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.n, index])


@dataclass(frozen=True)
class SuiteConfig:
    experiments: tuple[ExperimentConfig, ...]
    suites: tuple[str, ...] = SUITE_NAMES
    edge_reversal: str = "zr-to-znr"
    mutation: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "experiments", tuple(self.experiments))
        object.__setattr__(self, "suites", tuple(self.suites))
        unknown = [s for s in self.suites if s not in SUITE_NAMES]
        if unknown:
            raise ConfigError(f"unknown invariant suites {unknown}")
        if self.edge_reversal not in EDGE_REVERSAL_MODES:
            raise ConfigError(f"unknown edge-reversal mode {self.edge_reversal!r}")
        if self.mutation is not None and self.mutation not in MUTATIONS:
            raise ConfigError(f"unknown mutation {self.mutation!r}")

    def to_json(self) -> dict[str, Any]:
        first = self.experiments[0] if self.experiments else ExperimentConfig(2)
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "seed": first.seed,
            "n": [e.n for e in self.experiments],
            "samples": first.samples,
            "word_length": list(first.word_length),
            "modulus_range": list(first.modulus_range),
            "phase": first.phase,
            "tolerances": {"length": first.tolerances.length,
                           "majorization": first.tolerances.majorization,
                           "equality": first.tolerances.equality},
            "cutoff": first.cutoff,
            "suites": list(self.suites),
            "edge_reversal": self.edge_reversal,
            "mutation": self.mutation,
        }


def config_from_json(doc: Mapping[str, Any], **overrides: Any) -> SuiteConfig:
    """Build a suite config from a JSON document; non-None overrides win."""
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a JSON object")
    d = dict(doc)
    d.update({k: v for k, v in overrides.items() if v is not None})
    known = {"schema_version", "seed", "n", "samples", "word_length", "modulus_range", "phase",
             "tolerances", "tol", "cutoff", "suites", "edge_reversal", "mutation"}
    extra = sorted(set(d) - known)
    if extra:
        raise ConfigError(f"unknown config keys {extra}")
    try:
        ns = d.get("n", [2, 3, 4, 5])
        ns = [int(ns)] if isinstance(ns, (int, str)) else [int(v) for v in ns]
        wl = d.get("word_length", [1, 30])
        wl = (int(wl), int(wl)) if isinstance(wl, (int, str)) else tuple(int(v) for v in wl)
        if len(wl) != 2:
            raise ConfigError("word_length must be an integer or a [lo, hi] pair")
        tol_doc = dict(d.get("tolerances", {}))
        if d.get("tol") is not None:
            tol_doc = {k: float(d["tol"]) for k in ("length", "majorization", "equality")}
        tols = Tolerances(**{k: float(v) for k, v in tol_doc.items()})
        experiments = tuple(
            ExperimentConfig(
                n=n, word_length=wl, samples=int(d.get("samples", 1000)),
                seed=int(d.get("seed", 0)),
                modulus_range=tuple(d.get("modulus_range", (0.2, 5.0))),
                phase=str(d.get("phase", "uniform")), tolerances=tols,
                cutoff=float(d.get("cutoff", spectral.CROSS_CHECK_RTOL)),
            )
            for n in ns
        )
        suites = d.get("suites", list(SUITE_NAMES))
        suites = list(SUITE_NAMES) if suites == "all" else list(suites)
        return SuiteConfig(experiments, tuple(suites), str(d.get("edge_reversal", "zr-to-znr")),
                           d.get("mutation"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def default_config_document() -> dict[str, Any]:
    text = resources.files("fgdom").joinpath("data/default_config.json").read_text()
    return json.loads(text)


def load_config(path: str | Path | None = None, **overrides: Any) -> SuiteConfig:
    if path is None:
        return config_from_json(default_config_document(), **overrides)
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_json(doc, **overrides)


# ---------------------------------------------------------------- sampling

def sample_word(cfg: ExperimentConfig, rng: np.random.Generator) -> MonodromyWord:
    """Random word: uniform signs, log-uniform moduli, uniform phases."""
    lo, hi = cfg.word_length
    length = int(rng.integers(lo, hi + 1))
    n = cfg.n

    def draw() -> complex:
        return surface.sample_value(rng, cfg.modulus_range)

    blocks = []
    for _ in range(length):
        delta = 1 if rng.random() < 0.5 else -1
        t = TriangleInvariants(n, {ijk: draw() for ijk in triangle_indices(n)})
        e = EdgeInvariants(n, tuple(draw() for _ in range(n - 1)))
        blocks.append(BuildingBlockSpec(delta, t, e))
    return MonodromyWord(tuple(blocks))


def word_digest(word: MonodromyWord) -> str:
    text = json.dumps(word.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def factored(word: MonodromyWord) -> spectral.FactoredMatrix:
    return spectral.FactoredMatrix(tuple(factory.build_block(b, exact=False) for b in word))


# ---------------------------------------------------------------- domination

@dataclass(frozen=True)
class DominationRecord:
    digest: str
    n: int
    length: int
    mixed: bool
    status: str
    rho: spectral.LengthReport | None = None
    rho0: spectral.LengthReport | None = None
    verdicts: Mapping[str, bool | None] = field(default_factory=dict)
    excess: Mapping[str, float] = field(default_factory=dict)
    equal: bool = False
    reason: str = ""
    seed: int | None = None
    index: int | None = None

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_json(self) -> dict[str, Any]:
        return {
            "seed": self.seed, "n": self.n, "index": self.index, "digest": self.digest,
            "word_length": self.length, "mixed": self.mixed, "status": self.status,
            "reason": self.reason, "equal": self.equal,
            "verdicts": dict(self.verdicts), "excess": dict(self.excess),
            "rho": self.rho.to_json() if self.rho else None,
            "rho0": self.rho0.to_json() if self.rho0 else None,
        }


def _centered(em: spectral.EigenModuli) -> list[float]:
    c = math.fsum(em.logs) / em.n
    return [v - c for v in em.logs]


def check_domination(word: MonodromyWord, tol: Tolerances = Tolerances(),
                     cutoff: float = spectral.CROSS_CHECK_RTOL) -> DominationRecord:
    """Compare rho(gamma) with its bent representative rho_0(gamma).

    Checks Hilbert length, translation length, every l_k, weak majorization
    of the (det-normalized) log-moduli and, for single-sign words, equality.
    Clustered spectra are skipped and logged.
    """
    digest = word_digest(word)
    mixed = len(set(word.deltas)) > 1
    base = dict(digest=digest, n=word.n, length=len(word), mixed=mixed)
    try:
        em = spectral.eigen_moduli(factored(word), cutoff)
        em0 = spectral.eigen_moduli(factored(bend_word(word)), cutoff)
        if spectral.CLUSTERED in (em.condition, em0.condition):
            raise spectral.IllConditioned("eigenvalue moduli disagree between the two solvers")
        a, b = spectral.length_report(em), spectral.length_report(em0)
    except (spectral.IllConditioned, spectral.SingularMatrix, FloatingPointError) as exc:
        log.info("skipped word %s (n=%d, length=%d): %s", digest, word.n, len(word), exc)
        return DominationRecord(status=SKIPPED, reason=f"{type(exc).__name__}: {exc}", **base)

    excess = {
        "hilbert": a.hilbert - b.hilbert,
        "translation": a.translation - b.translation,
        "lk": max((x - y for x, y in zip(a.lks, b.lks)), default=0.0),
        "majorization": spectral.majorization_excess(_centered(em), _centered(em0)),
    }
    verdicts: dict[str, bool | None] = {
        "hilbert": excess["hilbert"] <= tol.length,
        "translation": excess["translation"] <= tol.length,
        "lk": excess["lk"] <= tol.length,
        "majorization": excess["majorization"] <= tol.majorization,
    }
    diffs = [abs(x - y) for x, y in zip((a.hilbert, a.translation, *a.lks),
                                        (b.hilbert, b.translation, *b.lks))]
    equal = max(diffs) <= tol.equality
    verdicts["equality"] = None if mixed else equal
    status = OK if all(v is not False for v in verdicts.values()) else FAIL
    return DominationRecord(status=status, rho=a, rho0=b, verdicts=verdicts, excess=excess,
                            equal=equal, **base)


def evaluate_sample(cfg: ExperimentConfig, index: int) -> DominationRecord:
    word = sample_word(cfg, cfg.rng(index))
    rec = check_domination(word, cfg.tolerances, cfg.cutoff)
    return replace(rec, seed=cfg.seed, index=index)


@dataclass(frozen=True)
class GapWitness:
    seed: int
    n: int
    index: int
    gap: int
    excess: float
    record: DominationRecord
    word: MonodromyWord

    def to_json(self) -> dict[str, Any]:
        return {"seed": self.seed, "n": self.n, "index": self.index, "gap": self.gap,
                "excess": self.excess, "record": self.record.to_json(),
                "word": self.word.to_json()}


def gap_excess(rec: DominationRecord) -> tuple[int, float]:
    """Largest l^i(rho) - l^i(rho_0) and its 1-based gap index."""
    assert rec.rho is not None and rec.rho0 is not None
    diffs = [x - y for x, y in zip(rec.rho.gaps, rec.rho0.gaps)]
    i = int(np.argmax(diffs))
    return i + 1, diffs[i]


def search_gap_violation(cfg: ExperimentConfig, budget: int | None = None) -> GapWitness | None:
    """First sample whose individual gap length l^i exceeds that of the bent word."""
    if cfg.n < 3:
        return None
    budget = cfg.samples if budget is None else budget
    for index in range(budget):
        word = sample_word(cfg, cfg.rng(index))
        rec = replace(check_domination(word, cfg.tolerances, cfg.cutoff),
                      seed=cfg.seed, index=index)
        if rec.status == SKIPPED:
            continue
        gap, excess = gap_excess(rec)
        if excess > cfg.tolerances.length:
            return GapWitness(cfg.seed, cfg.n, index, gap, excess, rec, word)
    return None


def positivity_verdict(word: MonodromyWord) -> network.PositivityVerdict:
    """Sign pattern of all minors of the monodromy (exact for rational words)."""
    return network.total_nonnegativity_check(factory.monodromy(word))


# ---------------------------------------------------------------- invariant suites

@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    def check(self, ok: bool, label: str) -> None:
        self.checks += 1
        label = f"{self.name}.{label}"
        if not ok and label not in self.failures:
            self.failures.append(label)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "checks": self.checks, "failures": list(self.failures),
                "passed": self.passed}


def _rng(name: str) -> np.random.Generator:
    return np.random.default_rng(int(hashlib.sha256(name.encode()).hexdigest()[:8], 16))


def _rationals(rng: np.random.Generator, k: int) -> list[Fraction]:
    return [Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 13))) for _ in range(k)]


def _rational_weight(rng: np.random.Generator) -> Fraction:
    return _rationals(rng, 1)[0]


def _complex_values(rng: np.random.Generator, k: int) -> list[complex]:
    return [surface.sample_value(rng) for _ in range(k)]


def _suite_coords() -> SuiteResult:
    res = SuiteResult("coords")
    for g, k in itertools.product(range(3), range(1, 5)):
        if 2 - 2 * g - k < 0:
            for n in range(2, 7):
                chi = 2 * g + k - 2
                direct = 2 * chi * (n - 1) * (n - 2) // 2 + 3 * chi * (n - 1)
                res.check(direct == coordinate_count(g, k, n), f"count[g={g},k={k},n={n}]")
    rng = _rng("coords")
    for n in range(2, 6):
        w = sample_word(ExperimentConfig(n, (3, 3)), rng)
        bent = bend_word(w)
        res.check(bend_word(bent) == bent, f"bend_idempotent[n={n}]")
        res.check(bent.deltas == w.deltas, f"bend_keeps_signs[n={n}]")
    return res


def _suite_factory() -> SuiteResult:
    res = SuiteResult("factory")
    rng = _rng("factory")
    for n in range(2, 7):
        S = factory.elem_S(n, exact=True)
        res.check(factory.exact_equal(S @ S, (-1) ** (n + 1) * factory.identity(n, True)),
                  f"S_squared[n={n}]")
    X = Fraction(3, 7)
    t3 = TriangleInvariants(3, {(0, 0, 0): X})
    golden_T = [[0, 0, 1], [0, -1, 1], [X, -1 - X, 1]]
    res.check(factory.exact_equal(factory.build_T(t3, exact=True),
                                  np.array(golden_T, dtype=object)), "T_n3_golden")
    for n in range(2, 6):
        for _ in range(3):
            t = TriangleInvariants.from_sequence(n, _rationals(rng, (n - 1) * (n - 2) // 2))
            I = factory.identity(n, True)
            for k in range(1, n):
                res.check(factory.exact_equal(factory.build_Step(t, n - k, True)
                                              @ factory.build_St(t, k, True), I),
                          f"Step_St_inverse[n={n},k={k}]")
            prod = factory.identity(n, True)
            for k in range(n - 1, 0, -1):
                prod = prod @ factory.build_St(t, k, True)
            res.check(factory.exact_equal(prod, factory.build_M(t, True)), f"St_product[n={n}]")
            S = factory.elem_S(n, True)
            for k in range(1, n):
                sss = S @ factory.build_Step(t, k, True) @ S
                res.check(factory.exact_equal(sss * (-1) ** (n + 1),
                                              factory.build_S_Step_S(t, k, True)),
                          f"S_Step_S[n={n},k={k}]")
    for n in range(2, 7):
        t = TriangleInvariants.from_sequence(n, _complex_values(rng, (n - 1) * (n - 2) // 2))
        e = EdgeInvariants(n, tuple(_complex_values(rng, n - 1)))
        plus = factory.build_block(BuildingBlockSpec(1, t, e))
        minus = factory.build_block(BuildingBlockSpec(-1, t, e))
        T, E = factory.build_T(t), factory.build_E(e)
        res.check(factory.projective_equal(plus, T @ E), f"block_plus[n={n}]")
        res.check(factory.projective_equal(minus, np.linalg.inv(factory.to_complex(T)) @ E),
                  f"block_minus[n={n}]")
    return res


def _suite_flags() -> SuiteResult:
    res = SuiteResult("flags")
    for x in (2, -1 + 1j, 0.1):
        res.check(abs(flags.triple_ratio(flags.example_triple(x), 1, 1, 1) - x) <= 1e-10,
                  f"example_triple[X={x}]")
    rng = _rng("flags")
    for n in range(3, 6):
        t = flags.random_tuple(n, 3, rng)
        for p in range(1, n - 1):
            for q in range(1, n - p):
                r = n - p - q
                v = flags.triple_ratio(t, p, q, r)
                w = flags.triple_ratio(t.rotated(), q, r, p)
                res.check(abs(v - w) <= 1e-8 * abs(v), f"cyclic[n={n},pqr={p}{q}{r}]")
    for i in range(10):
        zs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        d = flags.double_ratio([flags.projective_line_flag(z) for z in zs], 1)
        c = flags.cross_ratio(*zs)
        res.check(abs(d - c) <= 1e-9 * abs(c), f"cross_ratio[{i}]")
    return res


def _suite_network() -> SuiteResult:
    res = SuiteResult("network")
    rng = _rng("network")
    for n in range(2, 6):
        for delta in (1, -1):
            t = TriangleInvariants.from_sequence(n, _rationals(rng, (n - 1) * (n - 2) // 2))
            e = EdgeInvariants(n, tuple(_rationals(rng, n - 1)))
            spec = BuildingBlockSpec(delta, t, e)
            res.check(factory.exact_equal(network.weight_matrix(network.net_block(spec)),
                                          factory.build_block(spec)),
                      f"block_network[n={n},delta={delta}]")
        w = sample_word(ExperimentConfig(n, (2, 6)), rng)
        res.check(factory.projective_equal(network.weight_matrix(network.net_word(w)),
                                           factory.monodromy(w)), f"word_network[n={n}]")
    for i in range(5):
        net = network.random_network(3, 4, rng, weight=_rational_weight)
        m = network.weight_matrix(net)
        for I in itertools.combinations(range(1, 4), 2):
            for J in itertools.combinations(range(1, 4), 2):
                res.check(network.lindstrom_minor(net, I, J) == network.minor(m, I, J),
                          f"lindstrom[{i},I={I},J={J}]")
    return res


def _suite_spectral() -> SuiteResult:
    res = SuiteResult("spectral")
    rng = _rng("spectral")
    for n in range(2, 7):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        em = spectral.eigen_moduli(a)
        ref = np.sort(np.log(np.abs(np.linalg.eigvals(a))))
        res.check(bool(np.allclose(em.logs, ref, atol=1e-9)), f"moduli_vs_eig[n={n}]")
        sv = spectral.singular_values(a)
        res.check(spectral.weak_majorization(em.logs, np.log(sv), 1e-8), f"weyl[n={n}]")
        net = network.random_network(n, 3, rng, weight=surface.sample_value, p_horizontal=1.0)
        w = spectral.spectral_radius(network.weight_matrix(net))
        w0 = spectral.spectral_radius(network.weight_matrix(network.modulus_map(net)))
        res.check(w <= w0 * (1 + 1e-8), f"modulus_network_radius[n={n}]")
    return res


def _suite_surface() -> SuiteResult:
    res = SuiteResult("surface")
    rng = _rng("surface")
    for name in surface.BUILTIN_NAMES:
        tri = surface.builtin_triangulation(name)
        chi = 2 * tri.genus + tri.punctures - 2
        res.check(len(tri.triangles) == 2 * chi and len(tri.gluing) == 3 * chi, f"counts[{name}]")
        walks = surface.peripheral_walks(tri)
        res.check(len(walks) == tri.punctures, f"peripheral_count[{name}]")
        for n in (2, 3, 4):
            coords = surface.random_coordinates(tri, n, rng)
            for i, wk in enumerate(walks):
                word = surface.compile(wk, coords, tri)
                rec = check_domination(word)
                res.check(rec.status == OK and rec.equal, f"peripheral_equal[{name},n={n},{i}]")
                m = factory.to_complex(factory.monodromy(word))
                tri_ok = (np.allclose(np.triu(m, 1), 0) or np.allclose(np.tril(m, -1), 0))
                res.check(tri_ok, f"peripheral_triangular[{name},n={n},{i}]")
    return res


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "coords": _suite_coords,
    "factory": _suite_factory,
    "flags": _suite_flags,
    "network": _suite_network,
    "spectral": _suite_spectral,
    "surface": _suite_surface,
}


def run_invariant_suites(names: Sequence[str] = SUITE_NAMES) -> list[SuiteResult]:
    out = []
    for name in names:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r}")
        try:
            out.append(SUITES[name]())
        except Exception as exc:  # a crash is a localized failure, not an abort
            out.append(SuiteResult(name, 1, [f"{name}: {type(exc).__name__}: {exc}"]))
    return out


# ---------------------------------------------------------------- mutations

@contextlib.contextmanager
def _flip_s() -> Iterator[None]:
    original = factory.elem_S

    def flipped(n: int, exact: bool = False) -> np.ndarray:
        m = original(n, exact)
        m[0, n - 1] = -m[0, n - 1]
        return m

    factory.elem_S = flipped
    try:
        yield
    finally:
        factory.elem_S = original


MUTATIONS: dict[str, Callable[[], contextlib.AbstractContextManager[None]]] = {"flip-S": _flip_s}


def mutation(name: str | None) -> contextlib.AbstractContextManager[None]:
    """Test hook that deliberately corrupts the factory."""
    if name is None:
        return contextlib.nullcontext()
    return MUTATIONS[name]()


# ---------------------------------------------------------------- suite runner

@dataclass
class ExperimentSummary:
    n: int
    samples: int = 0
    ok: int = 0
    failed: int = 0
    skipped: int = 0
    equal: int = 0
    mixed: int = 0
    max_excess: dict[str, float] = field(default_factory=dict)

    def add(self, rec: DominationRecord) -> None:
        self.samples += 1
        self.mixed += rec.mixed
        if rec.status == SKIPPED:
            self.skipped += 1
            return
        self.ok += rec.status == OK
        self.failed += rec.status == FAIL
        self.equal += rec.equal
        for k, v in rec.excess.items():
            self.max_excess[k] = max(self.max_excess.get(k, -math.inf), v)

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "samples": self.samples, "ok": self.ok, "failed": self.failed,
                "skipped": self.skipped, "equal": self.equal, "mixed": self.mixed,
                "max_excess": dict(sorted(self.max_excess.items()))}


@dataclass
class SuiteReport:
    config: SuiteConfig
    experiments: list[ExperimentSummary]
    records: list[DominationRecord]
    suites: list[SuiteResult]
    wall_time: float = 0.0

    @property
    def failures(self) -> list[DominationRecord]:
        return [r for r in self.records if r.failed]

    @property
    def skipped(self) -> list[DominationRecord]:
        return [r for r in self.records if r.status == SKIPPED]

    @property
    def passed(self) -> bool:
        return not self.failures and all(s.passed for s in self.suites)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_json(),
            "passed": self.passed,
            "experiments": [e.to_json() for e in self.experiments],
            "suites": [s.to_json() for s in self.suites],
            "failures": [{"n": r.n, "index": r.index, "digest": r.digest,
                          "excess": dict(r.excess)} for r in self.failures],
            "skipped": [{"n": r.n, "index": r.index, "digest": r.digest, "reason": r.reason}
                        for r in self.skipped],
            "records": [r.to_json() for r in self.records],
        }

    def json_text(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow(csv_row(r))
        return buf.getvalue()

    def write(self, out_dir: str | Path, stem: str = "report") -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"json": out / f"{stem}.json", "csv": out / f"{stem}.csv",
                 "timing": out / f"{stem}.timing.json"}
        paths["json"].write_text(self.json_text())
        paths["csv"].write_text(self.csv_text())
        paths["timing"].write_text(json.dumps({"wall_time_seconds": self.wall_time}) + "\n")
        return paths


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _flag(v: bool | None) -> str:
    return "" if v is None else str(int(bool(v)))


def csv_row(r: DominationRecord) -> list[str]:
    a, b = r.rho, r.rho0
    return [
        str(r.seed), str(r.n), str(r.index), str(r.length), str(int(r.mixed)), r.status,
        _fmt(a.hilbert if a else None), _fmt(b.hilbert if b else None),
        _fmt(a.translation if a else None), _fmt(b.translation if b else None),
        ";".join(map(repr, a.lks)) if a else "", ";".join(map(repr, b.lks)) if b else "",
        _flag(r.verdicts.get("hilbert")), _flag(r.verdicts.get("translation")),
        _flag(r.verdicts.get("lk")), _flag(r.verdicts.get("majorization")),
        _flag(r.verdicts.get("equality")), r.digest,
    ]


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[DominationRecord]:
    if threads <= 1:
        return [evaluate_sample(cfg, i) for i in range(cfg.samples)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order, so the merge is by sample index
        return list(pool.map(lambda i: evaluate_sample(cfg, i), range(cfg.samples)))


def run_suite(cfg: SuiteConfig, threads: int = 1) -> SuiteReport:
    """Invariant suites plus every configured domination experiment."""
    start = time.perf_counter()
    with mutation(cfg.mutation):
        suites = run_invariant_suites(cfg.suites)
        records: list[DominationRecord] = []
        summaries = []
        for exp in cfg.experiments:
            recs = run_experiment(exp, threads)
            summary = ExperimentSummary(exp.n)
            for r in recs:
                summary.add(r)
            summaries.append(summary)
            records.extend(recs)
    for s in suites:
        for f in s.failures:
            log.error("invariant failure: %s", f)
    for r in records:
        if r.failed:
            log.error("domination failure: n=%d index=%s digest=%s excess=%s",
                      r.n, r.index, r.digest, dict(r.excess))
    return SuiteReport(cfg, summaries, records, suites, time.perf_counter() - start)
