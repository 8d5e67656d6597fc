"""
Run directory persistence.

    <run>/manifest.json            config echo, seed, versions, timestamps
    <run>/stats.csv                one row per generation
    <run>/checkpoints/gen_NNNNN.json
    <run>/champions/<metric>.json  best-ever genome per metric
    <run>/nagi_lab.log

The layout and column meanings are documented in RUN_FORMAT.md.
"""

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from nagi_lab import __version__
from nagi_lab.config.loader import config_from_dict, config_to_dict
from nagi_lab.exceptions import RunDirectoryError
from nagi_lab.harness.serialization import ChampionRecord, as_json, save_champion
from nagi_lab.hooks import app_name, champion_schema_version, report_schema_version, stats_schema_version

MANIFEST_FILE = "manifest.json"
STATS_FILE = "stats.csv"
CHECKPOINT_DIR = "checkpoints"
CHAMPION_DIR = "champions"

STATS_COLUMNS = (
    "generation",
    "fitness_min",
    "fitness_mean",
    "fitness_max",
    "acc_min",
    "acc_mean",
    "acc_max",
    "eos_min",
    "eos_mean",
    "eos_max",
    "species_count",
    "best_genome_id",
)


def format_value(value):
    """CSV cell: floats with 6 decimals, None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def now_iso():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class RunDirectory:
    def __init__(self, path):
        self.path = Path(path)

    @property
    def manifest_path(self):
        return self.path / MANIFEST_FILE

    @property
    def stats_path(self):
        return self.path / STATS_FILE

    @property
    def checkpoint_dir(self):
        return self.path / CHECKPOINT_DIR

    @property
    def champion_dir(self):
        return self.path / CHAMPION_DIR

    # ============================================
    # Manifest
    # ============================================

    @classmethod
    def create(cls, path, config):
        """
        Start a fresh run: write the manifest and an empty stats.csv.

        Raises:
            RunDirectoryError: If `path` already holds a run.
        """
        run = cls(path)
        if run.manifest_path.exists():
            raise RunDirectoryError(f"{run.path} already contains a run; use --resume to continue it")
        run.path.mkdir(parents=True, exist_ok=True)
        run.write_manifest(
            {
                "app": app_name,
                "app_version": __version__,
                "schema_versions": {
                    "stats": stats_schema_version,
                    "champion": champion_schema_version,
                    "report": report_schema_version,
                },
                "task": config.task,
                "profile": config.profile,
                "master_seed": config.master_seed,
                "config": config_to_dict(config),
                "created_at": now_iso(),
                "finished_at": None,
            }
        )
        run.truncate_stats(0)
        return run

    @classmethod
    def open(cls, path):
        run = cls(path)
        if not run.manifest_path.exists():
            raise RunDirectoryError(f"No run manifest in {run.path}")
        return run

    def write_manifest(self, manifest):
        self.manifest_path.write_text(as_json(manifest) + "\n", encoding="utf-8")

    def read_manifest(self):
        try:
            return json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise RunDirectoryError(f"No run manifest in {self.path}")
        except json.JSONDecodeError as e:
            raise RunDirectoryError(f"Corrupt manifest {self.manifest_path} at offset {e.pos}: {e.msg}")

    def read_config(self):
        return config_from_dict(self.read_manifest()["config"])

    def mark_finished(self):
        manifest = self.read_manifest()
        manifest["finished_at"] = now_iso()
        self.write_manifest(manifest)

    # ============================================
    # Stats
    # ============================================

    def append_stats(self, stats):
        with self.stats_path.open("a", newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerow(
                [format_value(getattr(stats, column)) for column in STATS_COLUMNS]
            )

    def read_stats(self):
        """
        Raises:
            RunDirectoryError: If stats.csv is missing or has the wrong columns.
        """
        try:
            with self.stats_path.open(newline="", encoding="utf-8") as f:
                reader = csv.DictReader(f)
                if tuple(reader.fieldnames or ()) != STATS_COLUMNS:
                    raise RunDirectoryError(f"Unexpected columns in {self.stats_path}: {reader.fieldnames}")
                return list(reader)
        except FileNotFoundError:
            raise RunDirectoryError(f"No {STATS_FILE} in {self.path}")

    def truncate_stats(self, generation):
        """Keep only the rows of generations before `generation`."""
        rows = self.read_stats() if self.stats_path.exists() else []
        with self.stats_path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(STATS_COLUMNS)
            for row in rows:
                if int(row["generation"]) < generation:
                    writer.writerow([row[column] for column in STATS_COLUMNS])

    # ============================================
    # Checkpoints
    # ============================================

    def write_checkpoint(self, state):
        self.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        path = self.checkpoint_dir / f"gen_{state.generation:05d}.json"
        path.write_text(as_json(state.to_dict()) + "\n", encoding="utf-8")
        return path

    def latest_checkpoint(self):
        """Parsed document of the newest checkpoint, or None."""
        paths = sorted(self.checkpoint_dir.glob("gen_*.json")) if self.checkpoint_dir.exists() else []
        if not paths:
            return None
        try:
            return json.loads(paths[-1].read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise RunDirectoryError(f"Corrupt checkpoint {paths[-1]} at offset {e.pos}: {e.msg}")

    # ============================================
    # Champions
    # ============================================

    def write_champions(self, archive, config):
        paths = []
        for metric, entry in sorted(archive.best.items()):
            record = ChampionRecord(
                genome=entry.genome,
                task=config.task,
                profile=config.profile,
                metric=metric,
                generation=entry.generation,
                fitness=entry.fitness,
                accuracy=entry.accuracy,
                eos_accuracy=entry.eos_accuracy,
                config=config_to_dict(config),
            )
            paths.append(save_champion(self.champion_dir / f"{metric}.json", record))
        return paths

    def champion_path(self, metric):
        return self.champion_dir / f"{metric}.json"
