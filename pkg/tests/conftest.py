"""Shared fixtures: a small feature schema and a season-CSV writer."""

import csv

import pytest

from careercast.schema import FeatureSchema

SMALL_NAMES = ("BPM", "PTS", "TS%", "G")
SMALL_CLASSES = {
    "BPM": "ratio_like",
    "PTS": "counting",
    "TS%": "ratio_like",
    "G": "counting",
}


@pytest.fixture
def small_schema():
    return FeatureSchema(
        names=SMALL_NAMES, target_name="BPM", imputation_class=dict(SMALL_CLASSES)
    )


@pytest.fixture
def write_season_csv(tmp_path):
    """Writer for ingest-format CSVs: rows are dicts keyed by column name."""

    def _write(rows, filename="seasons.csv", schema_names=SMALL_NAMES):
        path = tmp_path / filename
        columns = ["player_id", "player_name", "season", "age", "category", *schema_names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        return str(path)

    return _write


def career_rows(pid, bpm_by_age, season0=2000, category=None, missing=()):
    """Rows for one player: BPM given per age, other small-schema features filled.

    ``missing`` lists (age, feature) cells to leave blank.
    """
    rows = []
    for i, (age, bpm) in enumerate(sorted(bpm_by_age.items())):
        row = {
            "player_id": pid,
            "player_name": pid.upper(),
            "season": season0 + i,
            "age": age,
            "BPM": bpm,
            "PTS": 10.0 + age / 10.0,
            "TS%": 0.5,
            "G": 70,
        }
        if category:
            row["category"] = category
        for miss_age, name in missing:
            if miss_age == age:
                row[name] = ""
        rows.append(row)
    return rows
