"""Season CSV ingestion.

Parses per-season rows, keeps players whose careers are complete enough to
learn from, fills input-side gaps, and assembles the normalized train/test
dataset of career sequences. Targets (BPM at ages 29-31) are never imputed
and never normalized; eligibility requires them to be observed.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, ImputationError, IngestError, SchemaError, SplitError
from .rng import substream
from .schema import COUNTING, RATIO_LIKE, FeatureSchema

logger = logging.getLogger(__name__)

INPUT_AGES = tuple(range(22, 29))  # rows of a career matrix, in order
TARGET_AGES = (29, 30, 31)
MIN_SEASONS = 5  # observed seasons required inside ages 22-31
CATEGORIES = ("star", "regular")
MANDATORY_COLUMNS = ("player_id", "player_name", "season", "age")

DEFAULT_AGE_BOUNDS = (18, 45)
DEFAULT_SEASON_BOUNDS = (1995, 2023)
DEFAULT_TEST_FRACTION = 36.0 / 177.0


@dataclass
class SeasonRecord:
    """One player-season row. ``imputed`` tracks which features were filled."""

    player_id: str
    player_name: str
    season_end_year: int
    age: int
    features: dict[str, float]
    category: str | None = None
    imputed: set[str] = field(default_factory=set)

    def observed(self, name: str) -> bool:
        return name in self.features and name not in self.imputed


@dataclass
class CareerSequence:
    """A 7-row development matrix (ages 22-28) with its 3-season BPM target.

    ``input`` is what models consume; after ``split_and_normalize`` it is
    z-scored (and may have constant columns dropped). ``raw_input`` always
    keeps every schema column in original units, which is what the
    last-value baseline and report exports read.
    """

    player_id: str
    input: np.ndarray
    raw_input: np.ndarray
    target: np.ndarray
    category: str | None = None

    def __post_init__(self):
        self.input = np.asarray(self.input, dtype=float)
        self.raw_input = np.asarray(self.raw_input, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        if self.input.ndim != 2 or self.input.shape[0] != len(INPUT_AGES):
            raise IngestError(
                f"{self.player_id}: career matrix must have {len(INPUT_AGES)} rows, "
                f"got shape {self.input.shape}"
            )
        if self.target.shape != (len(TARGET_AGES),):
            raise IngestError(
                f"{self.player_id}: target must have {len(TARGET_AGES)} entries, "
                f"got shape {self.target.shape}"
            )


@dataclass
class NormStats:
    """Per-feature z-score statistics, fit on train inputs only."""

    names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    dropped: tuple[str, ...] = ()

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return (matrix - self.mean) / self.std

    def to_doc(self) -> dict:
        return {
            "names": list(self.names),
            "mean": [float(v) for v in self.mean],
            "std": [float(v) for v in self.std],
            "dropped": list(self.dropped),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "NormStats":
        return cls(
            names=tuple(doc["names"]),
            mean=np.array(doc["mean"], dtype=float),
            std=np.array(doc["std"], dtype=float),
            dropped=tuple(doc["dropped"]),
        )


@dataclass
class Dataset:
    """Normalized train/test split plus the statistics that produced it."""

    train: list[CareerSequence]
    test: list[CareerSequence]
    norm_stats: NormStats
    seed: int
    schema: FeatureSchema


def parse_season_csv(
    path: str,
    schema: FeatureSchema,
    *,
    age_bounds: tuple[int, int] = DEFAULT_AGE_BOUNDS,
    season_bounds: tuple[int, int] = DEFAULT_SEASON_BOUNDS,
) -> list[SeasonRecord]:
    """Read season rows from a CSV file.

    The header must name player_id, player_name, season, age and every
    schema feature; a ``category`` column (star/regular) is optional.
    Unparseable or non-finite numeric cells become missing values rather
    than errors; identity columns must parse.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyInputError(f"{path}: file is empty (no header row)")
        missing = [c for c in (*MANDATORY_COLUMNS, *schema.names) if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: header lacks required column(s): {', '.join(missing)}")
        has_category = "category" in reader.fieldnames

        records = []
        for line_no, row in enumerate(reader, start=2):
            pid = (row.get("player_id") or "").strip()
            if not pid:
                raise IngestError(f"{path}:{line_no}: empty player_id")
            try:
                season = int(row["season"])
                age = int(row["age"])
            except (TypeError, ValueError):
                raise IngestError(
                    f"{path}:{line_no}: season/age must be integers "
                    f"(got {row.get('season')!r}, {row.get('age')!r})"
                ) from None
            if not age_bounds[0] <= age <= age_bounds[1]:
                raise IngestError(
                    f"{path}:{line_no}: age {age} outside bounds {age_bounds}"
                )
            if not season_bounds[0] <= season <= season_bounds[1]:
                raise IngestError(
                    f"{path}:{line_no}: season {season} outside bounds {season_bounds}"
                )

            features = {}
            for name in schema.names:
                cell = row.get(name)
                if cell is None:
                    continue
                cell = cell.strip()
                if not cell:
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    continue
                if math.isfinite(value):
                    features[name] = value

            category = None
            if has_category:
                raw = (row.get("category") or "").strip().lower()
                if raw:
                    if raw not in CATEGORIES:
                        raise IngestError(
                            f"{path}:{line_no}: unknown category {raw!r} "
                            f"(expected one of {CATEGORIES})"
                        )
                    category = raw

            records.append(
                SeasonRecord(
                    player_id=pid,
                    player_name=(row.get("player_name") or "").strip(),
                    season_end_year=season,
                    age=age,
                    features=features,
                    category=category,
                )
            )
    return records


def select_eligible_players(
    records: list[SeasonRecord],
    target_name: str = "BPM",
) -> dict[str, list[SeasonRecord]]:
    """Keep players with enough observed career to train and evaluate on.

    A player is eligible when they have at least MIN_SEASONS observed
    seasons at ages 22-31 and an observed target value at every target
    age. Retained lists are age-sorted. Duplicate (player, age) rows keep
    the first occurrence.
    """
    grouped: dict[str, dict[int, SeasonRecord]] = {}
    for rec in records:
        by_age = grouped.setdefault(rec.player_id, {})
        if rec.age in by_age:
            logger.warning(
                "duplicate season for player %s age %d; keeping first row",
                rec.player_id,
                rec.age,
            )
            continue
        by_age[rec.age] = rec

    eligible: dict[str, list[SeasonRecord]] = {}
    for pid, by_age in grouped.items():
        window = [a for a in by_age if INPUT_AGES[0] <= a <= TARGET_AGES[-1]]
        if len(window) < MIN_SEASONS:
            continue
        if not all(a in by_age and by_age[a].observed(target_name) for a in TARGET_AGES):
            continue
        eligible[pid] = sorted(by_age.values(), key=lambda r: r.age)
    return eligible


def impute_missing(
    seasons: list[SeasonRecord],
    schema: FeatureSchema,
    peers: list[SeasonRecord],
) -> list[SeasonRecord]:
    """Produce complete rows for every input age, leaving targets untouched.

    Ratio-like gaps are filled with the peer median for that feature at the
    same age. Counting gaps copy the nearest observed earlier season, else
    the nearest later one; a wholly absent input-age row is first copied
    from the nearest observed season the same way. Rows at target ages pass
    through unchanged. Applying this to its own output is the identity.
    """
    by_age = {r.age: r for r in seasons}
    own_ages = sorted(by_age)
    out = []
    for age in INPUT_AGES:
        if age in by_age:
            rec = _copy_record(by_age[age])
        else:
            source_age = _nearest_age(own_ages, age)
            if source_age is None:
                raise ImputationError(
                    f"player {seasons[0].player_id if seasons else '?'} has no seasons to fill age {age}"
                )
            src = by_age[source_age]
            rec = SeasonRecord(
                player_id=src.player_id,
                player_name=src.player_name,
                season_end_year=src.season_end_year + (age - src.age),
                age=age,
                features=dict(src.features),
                category=src.category,
                imputed=set(src.features),
            )
        _fill_cells(rec, schema, by_age, peers)
        out.append(rec)
    out.extend(
        _copy_record(by_age[a]) for a in TARGET_AGES if a in by_age
    )
    return out


def _copy_record(rec: SeasonRecord) -> SeasonRecord:
    return SeasonRecord(
        player_id=rec.player_id,
        player_name=rec.player_name,
        season_end_year=rec.season_end_year,
        age=rec.age,
        features=dict(rec.features),
        category=rec.category,
        imputed=set(rec.imputed),
    )


def _nearest_age(ages: list[int], age: int) -> int | None:
    """Nearest age in the list, preferring earlier seasons on a tie."""
    earlier = [a for a in ages if a < age]
    later = [a for a in ages if a > age]
    if earlier:
        return max(earlier)
    if later:
        return min(later)
    return None


def _fill_cells(
    rec: SeasonRecord,
    schema: FeatureSchema,
    own_by_age: dict[int, SeasonRecord],
    peers: list[SeasonRecord],
) -> None:
    for name in schema.names:
        if name in rec.features:
            continue
        kind = schema.imputation_class[name]
        if kind == RATIO_LIKE:
            value = _peer_median(peers, name, rec.age)
            if value is None:
                raise ImputationError(
                    f"feature {name!r} has no observed peer values at age {rec.age}"
                )
        else:
            assert kind == COUNTING
            value = _own_nearest_value(own_by_age, name, rec.age)
            if value is None:
                # Never observed anywhere in this career; fall back to peers.
                value = _peer_median(peers, name, rec.age)
            if value is None:
                raise ImputationError(
                    f"feature {name!r} unobserved for the player and the peer pool at age {rec.age}"
                )
        rec.features[name] = value
        rec.imputed.add(name)


def _peer_median(peers: list[SeasonRecord], name: str, age: int) -> float | None:
    values = [r.features[name] for r in peers if r.age == age and r.observed(name)]
    if not values:
        return None
    return float(np.median(values))


def _own_nearest_value(
    own_by_age: dict[int, SeasonRecord], name: str, age: int
) -> float | None:
    observed_ages = sorted(a for a, r in own_by_age.items() if r.observed(name))
    nearest = _nearest_age(observed_ages, age)
    if nearest is None:
        return None
    return own_by_age[nearest].features[name]


def build_sequences(
    complete: dict[str, list[SeasonRecord]],
    schema: FeatureSchema,
) -> list[CareerSequence]:
    """Assemble one career sequence per player from complete season rows."""
    sequences = []
    for pid, rows in complete.items():
        by_age = {r.age: r for r in rows}
        matrix = np.empty((len(INPUT_AGES), schema.n_features), dtype=float)
        for i, age in enumerate(INPUT_AGES):
            rec = by_age.get(age)
            if rec is None:
                raise IngestError(f"internal invariant violated: {pid} lacks an age-{age} row")
            for j, name in enumerate(schema.names):
                if name not in rec.features:
                    raise IngestError(
                        f"internal invariant violated: {pid} age {age} missing {name!r}"
                    )
                matrix[i, j] = rec.features[name]

        target = np.empty(len(TARGET_AGES), dtype=float)
        for i, age in enumerate(TARGET_AGES):
            rec = by_age.get(age)
            if rec is None or not rec.observed(schema.target_name):
                raise IngestError(
                    f"internal invariant violated: {pid} has no observed "
                    f"{schema.target_name} at age {age}"
                )
            target[i] = rec.features[schema.target_name]

        category = next(
            (r.category for r in sorted(rows, key=lambda r: r.age) if r.category),
            None,
        )
        sequences.append(
            CareerSequence(
                player_id=pid,
                input=matrix,
                raw_input=matrix.copy(),
                target=target,
                category=category,
            )
        )
    return sequences


def split_and_normalize(
    sequences: list[CareerSequence],
    schema: FeatureSchema,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
) -> Dataset:
    """Seeded player-level split, then z-score inputs with train-only stats.

    Targets stay in raw BPM units. Constant train features are dropped from
    the normalized inputs with a warning (they carry no signal and would
    divide by zero); ``raw_input`` keeps every column.
    """
    if len(sequences) < 2:
        raise SplitError(f"need at least 2 sequences to split, got {len(sequences)}")
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must be in (0, 1), got {test_fraction}")
    ids = [s.player_id for s in sequences]
    if len(set(ids)) != len(ids):
        raise SplitError("duplicate player_id in sequences; cannot guarantee a leak-free split")

    order = substream(seed, "ingest.split").permutation(len(sequences))
    n_test = min(max(int(round(len(sequences) * test_fraction)), 1), len(sequences) - 1)
    test_raw = [sequences[i] for i in order[:n_test]]
    train_raw = [sequences[i] for i in order[n_test:]]

    stacked = np.vstack([s.raw_input for s in train_raw])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    keep = std > 0.0
    dropped = tuple(n for n, k in zip(schema.names, keep) if not k)
    if dropped:
        logger.warning(
            "dropping constant train feature(s) before normalization: %s",
            ", ".join(dropped),
        )
    stats = NormStats(
        names=tuple(n for n, k in zip(schema.names, keep) if k),
        mean=mean[keep],
        std=std[keep],
        dropped=dropped,
    )

    def normalized(seq: CareerSequence) -> CareerSequence:
        return CareerSequence(
            player_id=seq.player_id,
            input=stats.apply(seq.raw_input[:, keep]),
            raw_input=seq.raw_input.copy(),
            target=seq.target.copy(),
            category=seq.category,
        )

    train = [normalized(s) for s in train_raw]
    test = [normalized(s) for s in test_raw]
    overlap = {s.player_id for s in train} & {s.player_id for s in test}
    if overlap:
        raise SplitError(f"players leaked into both splits: {sorted(overlap)}")
    return Dataset(train=train, test=test, norm_stats=stats, seed=seed, schema=schema)


def ingest_csv(
    path: str,
    schema: FeatureSchema,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
    *,
    age_bounds: tuple[int, int] = DEFAULT_AGE_BOUNDS,
    season_bounds: tuple[int, int] = DEFAULT_SEASON_BOUNDS,
) -> tuple[Dataset, dict]:
    """Run the whole ingestion chain and return the dataset plus a summary.

    The summary counts players kept and dropped by reason, which the CLI
    prints and persists next to the dataset artifact.
    """
    records = parse_season_csv(
        path, schema, age_bounds=age_bounds, season_bounds=season_bounds
    )
    grouped: dict[str, list[SeasonRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.player_id, []).append(rec)

    eligible = select_eligible_players(records, schema.target_name)
    dropped_few = 0
    dropped_targets = 0
    for pid, rows in grouped.items():
        if pid in eligible:
            continue
        ages = {r.age for r in rows if INPUT_AGES[0] <= r.age <= TARGET_AGES[-1]}
        if len(ages) < MIN_SEASONS:
            dropped_few += 1
        else:
            dropped_targets += 1

    peers = [r for rows in eligible.values() for r in rows]
    complete = {
        pid: impute_missing(rows, schema, peers) for pid, rows in eligible.items()
    }
    sequences = build_sequences(complete, schema)
    if not sequences:
        raise IngestError("no eligible players")
    dataset = split_and_normalize(sequences, schema, test_fraction, seed)
    summary = {
        "rows_parsed": len(records),
        "players_total": len(grouped),
        "players_kept": len(eligible),
        "dropped_too_few_seasons": dropped_few,
        "dropped_unobserved_targets": dropped_targets,
        "train_players": len(dataset.train),
        "test_players": len(dataset.test),
        "dropped_constant_features": list(dataset.norm_stats.dropped),
    }
    return dataset, summary
