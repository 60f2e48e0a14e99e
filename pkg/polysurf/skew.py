"""Z-periodic skew products: displacement cocycle, centering and recurrence experiments."""

from __future__ import annotations

import itertools
import logging
import math
import multiprocessing
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Union

import numpy as np

from .angles import Angle
from .config import get_settings
from .errors import (
    NonTransversal,
    NoReturn,
    NotPeriodic,
    PolysurfError,
    SingularHitError,
)
from .flow import (
    CrossSectionPoint,
    InwardPair,
    Section,
    Tracer,
    directional_orbit,
    inward_pairs,
    sample_section,
    section_partition,
    section_return,
)
from .geometry import EdgeRef, Surface
from .holonomy import RotationalGroup, rotational_holonomy

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    RECURRENT = "RecurrentEvidence"
    TRANSIENT = "TransientEvidence"
    INCONCLUSIVE = "Inconclusive"


def compact_quotient(surface: Surface) -> Surface:
    """The shift-labeled compact quotient behind a Z-periodic surface."""
    if surface.is_lazy:
        quotient = surface.metadata.get("quotient")
        if quotient is None:
            raise NotPeriodic(f"{surface.name or 'surface'} has no compact quotient")
        return quotient
    if not surface.is_periodic:
        raise NotPeriodic(f"{surface.name or 'surface'} has no shift-labeled gluings")
    return surface


def check_cocycle(surface: Surface) -> None:
    """Every shift label is read back negated from the partner side."""
    for gluing in surface.gluings():
        back = surface.partner(gluing.side_b)
        if back is None or back.shift != -gluing.shift:
            raise NotPeriodic(f"shift label on {gluing.side_a} is not matched by its partner")


class SkewSystem:
    """The skew product of a section return map by the integer shift cocycle.

    Args:
        quotient: Compact surface with shift-labeled gluings (or a lazy
            periodic surface carrying its quotient)
        section: "boundary", "period", an edge collection, or None for the
            boundary when the quotient has one
        direction: Fixes the directional mode; None samples all directions
    """

    def __init__(
        self,
        quotient: Surface,
        section: Union[str, Section, Iterable[EdgeRef], None] = None,
        direction: Optional[Angle] = None,
    ):
        self.quotient = compact_quotient(quotient)
        check_cocycle(self.quotient)
        self.section = Section.of(self.quotient, section)
        self.direction = direction
        self._tracer: Optional[Tracer] = None
        self._group: Optional[RotationalGroup] = None

    def __getstate__(self) -> dict[str, Any]:
        state = self.__dict__.copy()
        state["_tracer"] = None
        return state

    @property
    def tracer(self) -> Tracer:
        if self._tracer is None:
            self._tracer = Tracer(self.quotient)
        return self._tracer

    @property
    def group(self) -> RotationalGroup:
        if self._group is None:
            self._group = rotational_holonomy(self.quotient)
        return self._group

    def pairs(self, direction: Angle) -> list[InwardPair]:
        """Section edges paired with the orbit directions entering through them.

        Raises:
            NonTransversal: No orbit direction enters the surface through the section
        """
        orbit = directional_orbit(direction, self.group)
        pairs = inward_pairs(self.quotient, orbit, self.section)
        if not pairs:
            raise NonTransversal(f"direction {direction} is parallel to every section edge")
        return pairs


@dataclass(frozen=True)
class ReturnRecord:
    start: CrossSectionPoint
    end: CrossSectionPoint
    phi: int
    flight_time: float


def displacement_return(
    system: SkewSystem,
    start: CrossSectionPoint,
    max_events: Optional[int] = None,
    max_length: Optional[float] = None,
) -> ReturnRecord:
    """One step of the skew Poincare map.

    Raises:
        NoReturn: The budget ran out (directions parallel to the section never return)
        SingularHitError: The trajectory hit a singular vertex
    """
    hit = section_return(system.tracer, start, system.section, max_events, max_length)
    phi = hit.point.displacement - start.displacement
    return ReturnRecord(start, hit.point, phi, hit.flight_time)


def iterate_returns(
    system: SkewSystem,
    start: CrossSectionPoint,
    count: int,
    max_events: Optional[int] = None,
) -> list[ReturnRecord]:
    records = []
    point = start
    for _ in range(count):
        record = displacement_return(system, point, max_events)
        records.append(record)
        point = record.end
    return records


# Centering


@dataclass(frozen=True)
class CenteringEstimate:
    mean: float
    stderr: float
    method: str
    samples: int = 0
    pieces: int = 0
    skipped: int = 0


def centering_integral(
    system: SkewSystem,
    direction: Angle,
    method: str = "quad",
    samples: int = 10_000,
    seed: Optional[int] = None,
    max_events: Optional[int] = None,
) -> CenteringEstimate:
    """The mean of phi against the normalized sine-weighted section measure.

    ``quad`` splits every (edge, direction) pair of the section into intervals
    of constant return and sums width * sine * phi; ``mc`` averages phi over
    sampled section points.

    Raises:
        NonTransversal: No orbit direction crosses the section
    """
    pairs = system.pairs(direction)
    if method in ("quad", "exact", "exact-quadrature"):
        return _quadrature(system, pairs)
    if method in ("mc", "monte-carlo"):
        return _monte_carlo(system, pairs, samples, seed, max_events)
    raise ValueError(f"unknown method {method!r}")


def _quadrature(system: SkewSystem, pairs: list[InwardPair]) -> CenteringEstimate:
    terms = []
    weights = []
    count = 0
    for pair in pairs:
        pieces = section_partition(system.tracer, pair.edge, pair.direction, system.section)
        count += len(pieces)
        terms.extend(piece.width * pair.sine * piece.phi for piece in pieces)
        weights.append(pair.weight)
    mean = math.fsum(terms) / math.fsum(weights)
    logger.debug("quadrature over %d pieces: %.3g", count, mean)
    return CenteringEstimate(mean, 0.0, "quad", pieces=count)


def _monte_carlo(
    system: SkewSystem,
    pairs: list[InwardPair],
    samples: int,
    seed: Optional[int],
    max_events: Optional[int],
) -> CenteringEstimate:
    rng = np.random.default_rng(seed if seed is not None else get_settings().seed)
    phis = []
    skipped = 0
    for point in sample_section(rng, pairs, samples):
        try:
            phis.append(displacement_return(system, point, max_events).phi)
        except (NoReturn, SingularHitError):
            skipped += 1
    if skipped:
        logger.warning("skipped %d of %d samples (no return or singular hit)", skipped, samples)
    if not phis:
        raise NoReturn("no sampled point returned to the section")
    values = np.asarray(phis, dtype=float)
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.inf
    return CenteringEstimate(float(values.mean()), stderr, "mc", len(values), skipped=skipped)


# Recurrence experiments


@dataclass(frozen=True)
class OrbitRecord:
    """Summary of one sampled orbit of the skew map."""

    index: int
    direction: str
    returns: int  # completed returns
    final: int  # S_n
    max_excursion: int
    returned_to_zero: bool
    first_return: Optional[int]  # return index of the first revisit of fiber 0
    escaped: bool  # linear escape
    aborted: Optional[str] = None  # NoReturn / SingularHit

    @property
    def birkhoff_mean(self) -> float:
        return self.final / self.returns if self.returns else 0.0


@dataclass(frozen=True)
class Thresholds:
    escape_window: int = 100
    escape_factor: float = 0.5
    recurrent_fraction: float = 0.99


@dataclass
class RecurrenceReport:
    """Per-orbit records with the aggregate verdict.

    Reports merge by concatenation, so partial reports from workers combine
    in any order.
    """

    orbits: list[OrbitRecord] = field(default_factory=list)
    thresholds: Thresholds = field(default_factory=Thresholds)

    def merge(self, other: RecurrenceReport) -> RecurrenceReport:
        orbits = sorted([*self.orbits, *other.orbits], key=lambda o: o.index)
        return RecurrenceReport(orbits, self.thresholds)

    @property
    def completed(self) -> list[OrbitRecord]:
        return [o for o in self.orbits if o.aborted is None]

    @property
    def n_orbits(self) -> int:
        return len(self.orbits)

    @property
    def n_returned_to_zero(self) -> int:
        return sum(o.returned_to_zero for o in self.completed)

    @property
    def n_escaped(self) -> int:
        return sum(o.escaped for o in self.completed)

    @property
    def aborted(self) -> dict[str, int]:
        return dict(Counter(o.aborted for o in self.orbits if o.aborted is not None))

    @property
    def birkhoff_means(self) -> list[float]:
        return [o.birkhoff_mean for o in self.completed]

    @property
    def max_excursions(self) -> list[int]:
        return [o.max_excursion for o in self.completed]

    @property
    def verdict(self) -> Verdict:
        done = self.completed
        if not done:
            return Verdict.INCONCLUSIVE
        if all(o.escaped for o in done):
            return Verdict.TRANSIENT
        if self.n_returned_to_zero >= self.thresholds.recurrent_fraction * len(done):
            return Verdict.RECURRENT
        return Verdict.INCONCLUSIVE

    def summary(self) -> dict[str, Any]:
        means = np.asarray(self.birkhoff_means, dtype=float)
        excursions = np.asarray(self.max_excursions, dtype=float)
        return {
            "verdict": self.verdict.value,
            "n_orbits": self.n_orbits,
            "n_completed": len(self.completed),
            "n_returned_to_zero": self.n_returned_to_zero,
            "n_escaped": self.n_escaped,
            "aborted": self.aborted,
            "birkhoff_mean_avg": float(means.mean()) if means.size else None,
            "birkhoff_mean_std": float(means.std()) if means.size else None,
            "max_excursion_median": float(np.median(excursions)) if excursions.size else None,
            "max_excursion_max": float(excursions.max()) if excursions.size else None,
            "thresholds": vars(self.thresholds),
        }


def escape_test(series: Sequence[int], thresholds: Thresholds) -> bool:
    """Linear growth: |S_n| >= factor * |c| * n, c the mean phi over the first window returns."""
    n = len(series)
    window = thresholds.escape_window
    if n < window:
        return False
    c = series[window - 1] / window
    return c != 0 and abs(series[-1]) >= thresholds.escape_factor * abs(c) * n


def summarize_orbit(
    index: int,
    direction: str,
    phis: Sequence[int],
    thresholds: Thresholds,
    aborted: Optional[str] = None,
) -> OrbitRecord:
    series = list(itertools.accumulate(phis))
    departed = False
    first_return = None
    for k, value in enumerate(series, start=1):
        if value != 0:
            departed = True
        elif departed:
            first_return = k
            break
    returned = first_return is not None
    return OrbitRecord(
        index=index,
        direction=direction,
        returns=len(series),
        final=series[-1] if series else 0,
        max_excursion=max((abs(v) for v in series), default=0),
        returned_to_zero=returned,
        first_return=first_return,
        escaped=not returned and escape_test(series, thresholds),
        aborted=aborted,
    )


def _orbit_start(
    system: SkewSystem,
    directions: Optional[Sequence[Angle]],
    seed: int,
    index: int,
) -> tuple[Angle, CrossSectionPoint]:
    rng = np.random.default_rng([seed, index])
    if directions:
        direction = directions[index % len(directions)]
    else:
        direction = Angle.radians(float(rng.uniform(0.0, 2 * math.pi)))
    return direction, sample_section(rng, system.pairs(direction), 1)[0]


def _run_orbits(
    system: SkewSystem,
    directions: Optional[Sequence[Angle]],
    indices: Sequence[int],
    n_returns: int,
    seed: int,
    thresholds: Thresholds,
    max_events: Optional[int],
) -> RecurrenceReport:
    report = RecurrenceReport([], thresholds)
    for index in indices:
        phis: list[int] = []
        aborted = None
        direction_label = "?"
        try:
            direction, point = _orbit_start(system, directions, seed, index)
            direction_label = str(direction)
            for _ in range(n_returns):
                record = displacement_return(system, point, max_events)
                phis.append(record.phi)
                point = record.end
        except NoReturn:
            aborted = "NoReturn"
        except SingularHitError:
            aborted = "SingularHit"
        except NonTransversal:
            aborted = "NonTransversal"
        if aborted is not None:
            logger.warning("orbit %d aborted after %d returns: %s", index, len(phis), aborted)
        report.orbits.append(summarize_orbit(index, direction_label, phis, thresholds, aborted))
    return report


def _run_chunk(args: tuple[Any, ...]) -> RecurrenceReport:
    return _run_orbits(*args)


def recurrence_experiment(
    system: SkewSystem,
    directions: Union[Angle, Sequence[Angle], None] = None,
    n_orbits: int = 100,
    n_returns: int = 1000,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    max_events: Optional[int] = None,
    thresholds: Optional[Thresholds] = None,
) -> RecurrenceReport:
    """Sample orbits from the section measure and iterate the skew map.

    Orbit i draws its start from ``default_rng([seed, i])``, so the report
    does not depend on the number of workers. Orbits that hit a singular
    vertex or fail to return are kept as aborted records and excluded from
    the verdict.

    Args:
        system: The skew system
        directions: One direction, several (assigned round robin), or None for
            uniformly random directions
        n_orbits: Number of sampled orbits
        n_returns: Returns per orbit
        seed: Base seed; defaults to settings
        workers: Worker processes; defaults to settings

    Returns:
        The merged RecurrenceReport
    """
    settings = get_settings()
    seed = seed if seed is not None else settings.seed
    workers = workers if workers is not None else settings.workers
    if thresholds is None:
        thresholds = Thresholds(
            settings.escape_window, settings.escape_factor, settings.recurrent_fraction
        )
    if isinstance(directions, Angle):
        directions = [directions]
    elif directions is None and system.direction is not None:
        directions = [system.direction]
    directions = list(directions) if directions is not None else None
    indices = list(range(n_orbits))
    logger.info("recurrence experiment: %d orbits x %d returns", n_orbits, n_returns)

    if workers <= 1 or n_orbits < 2:
        return _run_orbits(system, directions, indices, n_returns, seed, thresholds, max_events)

    chunks = [indices[k::workers] for k in range(workers) if indices[k::workers]]
    tasks = [
        (system, directions, chunk, n_returns, seed, thresholds, max_events) for chunk in chunks
    ]
    pool = multiprocessing.Pool(len(chunks))
    try:
        parts = pool.map(_run_chunk, tasks)
    finally:
        pool.close()
        pool.join()
    report = RecurrenceReport([], thresholds)
    for part in parts:
        report = report.merge(part)
    return report


# Amenability


@dataclass(frozen=True)
class GridPoint:
    params: dict[str, str]
    rational: bool
    n: Optional[int]
    error: Optional[str] = None

    @property
    def even(self) -> bool:
        return self.n is not None and self.n % 2 == 0


@dataclass
class AmenabilityReport:
    family: str
    points: list[GridPoint]
    axis: Optional[str] = None  # first grid parameter, used for the gap statistic

    @property
    def even_fraction(self) -> float:
        valid = [p for p in self.points if p.error is None]
        return sum(p.even for p in valid) / len(valid) if valid else 0.0

    def _axis_values(self, points: Iterable[GridPoint]) -> list[float]:
        if self.axis is None:
            return []
        values = []
        for p in points:
            text = p.params[self.axis]
            try:
                values.append(float(Angle.parse(text).to_radians() / math.pi))
            except ValueError:
                continue
        return sorted(set(values))

    @staticmethod
    def _max_gap(values: list[float]) -> float:
        if len(values) < 2:
            return math.inf
        return max(b - a for a, b in zip(values, values[1:]))

    @property
    def even_gap(self) -> float:
        """Largest gap between consecutive even-N values of the first grid parameter."""
        return self._max_gap(self._axis_values(p for p in self.points if p.even))

    @property
    def grid_gap(self) -> float:
        return self._max_gap(self._axis_values(p for p in self.points if p.error is None))

    @property
    def amenable(self) -> bool:
        """Finite proxy: even-N points exist and are at most twice as sparse as the grid."""
        if not any(p.even for p in self.points):
            return False
        if self.axis is None or math.isinf(self.grid_gap):
            return True
        return self.even_gap <= 2 * self.grid_gap + 1e-12


def rational_grid(max_denominator: int, low: int = 0, high: int = 1) -> list[str]:
    """Reduced fractions m/n in (low, high) with n <= max_denominator, as strings."""
    values = set()
    for n in range(1, max_denominator + 1):
        for m in range(low * n + 1, high * n):
            if math.gcd(m, n) == 1:
                values.add((m / n, f"{m}/{n}"))
    return [text for _, text in sorted(values)]


def amenability_check(
    family: str,
    grid: Mapping[str, Sequence[Any]],
    fixed: Optional[Mapping[str, Any]] = None,
) -> AmenabilityReport:
    """Rationality and N over a parameter grid of a catalog family.

    Args:
        family: Catalog family id
        grid: Values per parameter; the product is evaluated
        fixed: Parameters held constant

    Returns:
        AmenabilityReport, one GridPoint per grid combination
    """
    from .catalog import get_family, make_family

    get_family(family)
    keys = list(grid)
    points = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        params = {**(fixed or {}), **dict(zip(keys, combo))}
        labels = {k: str(v) for k, v in params.items()}
        try:
            surface = make_family(family, **params)
            group = rotational_holonomy(surface)
        except PolysurfError as exc:
            logger.debug("grid point %s failed: %s", labels, exc)
            points.append(GridPoint(labels, False, None, str(exc)))
            continue
        if group.is_finite and group.n is not None:
            points.append(GridPoint(labels, True, group.n))
        else:
            points.append(GridPoint(labels, False, None))
    return AmenabilityReport(family, points, keys[0] if keys else None)
