"""
SQLite state management for eigenvalue sweeps.

Stores sweep runs and every solved grid point in a local database so a
rerun of the same grid reuses points that were already solved.
"""

import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional


class SweepStore:
    """
    Manages persistent sweep state in SQLite database.

    Points are keyed by the fingerprint of (p, B, N, tol, bracket); runs record
    which grid file was swept and how it ended.
    """

    def __init__(self, db_path: Path):
        """
        Initialize the store with database path.

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = db_path
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.conn: Optional[sqlite3.Connection] = None
        self._init_database()

    def _init_database(self) -> None:
        """Create database schema if it doesn't exist."""
        self.conn = sqlite3.connect(str(self.db_path))
        self.conn.row_factory = sqlite3.Row

        cursor = self.conn.cursor()

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                run_id TEXT PRIMARY KEY,
                grid_file TEXT NOT NULL,
                grid_file_hash TEXT NOT NULL,
                point_count INTEGER NOT NULL,
                started_at TEXT NOT NULL,
                completed_at TEXT,
                status TEXT NOT NULL CHECK(status IN ('in_progress', 'completed', 'failed'))
            )
        """)

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS points (
                fingerprint TEXT PRIMARY KEY,
                run_id TEXT NOT NULL,
                p INTEGER NOT NULL,
                B TEXT NOT NULL,
                N INTEGER NOT NULL,
                tol TEXT NOT NULL,
                E TEXT NOT NULL,
                bracket_lo TEXT NOT NULL,
                bracket_hi TEXT NOT NULL,
                initial_lo TEXT NOT NULL,
                initial_hi TEXT NOT NULL,
                residual TEXT NOT NULL,
                iterations INTEGER NOT NULL,
                solved_at TEXT NOT NULL,
                FOREIGN KEY (run_id) REFERENCES runs(run_id)
            )
        """)

        cursor.execute("""
            CREATE INDEX IF NOT EXISTS idx_points_run
            ON points(run_id)
        """)

        cursor.execute("""
            CREATE INDEX IF NOT EXISTS idx_run_status
            ON runs(status)
        """)

        self.conn.commit()

    def create_run(
        self, run_id: str, grid_file: str, grid_file_hash: str, point_count: int
    ) -> None:
        """
        Create a new run record.

        Args:
            run_id: Unique run identifier
            grid_file: Path to grid file
            grid_file_hash: SHA256 hash of grid file
            point_count: Number of grid points in the run
        """
        cursor = self.conn.cursor()
        cursor.execute(
            """
            INSERT INTO runs (run_id, grid_file, grid_file_hash, point_count, started_at, status)
            VALUES (?, ?, ?, ?, ?, 'in_progress')
            """,
            (run_id, grid_file, grid_file_hash, point_count, datetime.utcnow().isoformat()),
        )
        self.conn.commit()

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        """
        Get run by ID.

        Args:
            run_id: Run identifier

        Returns:
            Run record as dictionary, or None if not found
        """
        cursor = self.conn.cursor()
        cursor.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,))
        row = cursor.fetchone()
        return dict(row) if row else None

    def find_point(self, fingerprint: str) -> Optional[Dict[str, Any]]:
        """
        Find a solved point by fingerprint across all runs.

        Args:
            fingerprint: Point fingerprint hash

        Returns:
            Point record as dictionary, or None if not found
        """
        cursor = self.conn.cursor()
        cursor.execute("SELECT * FROM points WHERE fingerprint = ?", (fingerprint,))
        row = cursor.fetchone()
        return dict(row) if row else None

    def record_point(self, fingerprint: str, run_id: str, record: Dict[str, Any]) -> None:
        """
        Save a solved point, replacing any earlier solution with the same fingerprint.

        Args:
            fingerprint: Point fingerprint hash
            run_id: Run that solved the point
            record: Column values (p, B, N, tol, E, bracket_lo, bracket_hi,
                initial_lo, initial_hi, residual, iterations)
        """
        cursor = self.conn.cursor()
        cursor.execute(
            """
            INSERT OR REPLACE INTO points
            (fingerprint, run_id, p, B, N, tol, E, bracket_lo, bracket_hi,
             initial_lo, initial_hi, residual, iterations, solved_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                fingerprint,
                run_id,
                record["p"],
                record["B"],
                record["N"],
                record["tol"],
                record["E"],
                record["bracket_lo"],
                record["bracket_hi"],
                record["initial_lo"],
                record["initial_hi"],
                record["residual"],
                record["iterations"],
                datetime.utcnow().isoformat(),
            ),
        )
        self.conn.commit()

    def mark_run_complete(self, run_id: str, status: str = "completed") -> None:
        """
        Mark run as complete or failed.

        Args:
            run_id: Run identifier
            status: Final status ('completed' or 'failed')
        """
        cursor = self.conn.cursor()
        cursor.execute(
            """
            UPDATE runs
            SET status = ?, completed_at = ?
            WHERE run_id = ?
            """,
            (status, datetime.utcnow().isoformat(), run_id),
        )
        self.conn.commit()

    def count_points_for_run(self, run_id: str) -> int:
        """Number of points solved (not reused) by a run."""
        cursor = self.conn.cursor()
        cursor.execute("SELECT COUNT(*) as count FROM points WHERE run_id = ?", (run_id,))
        return cursor.fetchone()["count"]

    def list_all_runs(self) -> List[Dict[str, Any]]:
        """
        List all runs in the database.

        Returns:
            List of run records, newest first
        """
        cursor = self.conn.cursor()
        cursor.execute("SELECT * FROM runs ORDER BY started_at DESC")
        return [dict(row) for row in cursor.fetchall()]

    def close(self) -> None:
        """Close database connection."""
        if self.conn:
            self.conn.close()
            self.conn = None

    def __enter__(self) -> "SweepStore":
        """Context manager entry."""
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Context manager exit."""
        self.close()
