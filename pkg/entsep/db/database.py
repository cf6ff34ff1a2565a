"""
SQLite ledger of command runs.

Every CLI invocation that finishes (successfully or not) can be recorded
with its seed, a digest of the effective configuration, headline metrics
and the files it wrote, so earlier runs can be listed and compared.
"""

import hashlib
import json
import sqlite3
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence


def config_digest(config: Dict[str, Any]) -> str:
    """Stable SHA-256 of a JSON-ready config mapping."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class Database:
    """
    Small wrapper around sqlite3 holding the run ledger.

    Args:
        path: Path to the SQLite database file.
              Use ':memory:' for temporary in-memory databases in tests.
    """

    def __init__(self, path: str = ":memory:") -> None:
        self.path = path
        self.conn: Optional[sqlite3.Connection] = None

    # Schema setup

    def initialize(self) -> None:
        """
        Create the tables if they do not already exist.

        Must be called once before any other operation.
        """
        self.conn = sqlite3.connect(self.path, check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        cur = self.conn.cursor()

        cur.executescript(
            """
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                seed INTEGER NOT NULL,
                config_digest TEXT NOT NULL,
                config TEXT NOT NULL,
                exit_code INTEGER NOT NULL DEFAULT 0,
                metrics TEXT NOT NULL DEFAULT '{}',
                created_at TEXT NOT NULL
            );

            -- One row per file a run wrote
            CREATE TABLE IF NOT EXISTS run_outputs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id INTEGER NOT NULL,
                path TEXT NOT NULL,
                FOREIGN KEY(run_id) REFERENCES runs(id)
            );
            """
        )
        self.conn.commit()

    def close(self) -> None:
        if self.conn is not None:
            self.conn.close()
            self.conn = None

    # ------------------------------------------------------------------ #
    # Runs
    # ------------------------------------------------------------------ #
    def save_run(
        self,
        command: str,
        seed: int,
        config: Dict[str, Any],
        metrics: Optional[Dict[str, Any]] = None,
        outputs: Sequence[str] = (),
        exit_code: int = 0,
    ) -> int:
        """
        Insert a run and its output paths.

        Returns:
            The newly created run ID.
        """
        cur = self.conn.cursor()
        cur.execute(
            "INSERT INTO runs(command, seed, config_digest, config, exit_code, metrics, created_at) "
            "VALUES (?, ?, ?, ?, ?, ?, ?)",
            (
                command,
                int(seed),
                config_digest(config),
                json.dumps(config, sort_keys=True),
                int(exit_code),
                json.dumps(metrics or {}, sort_keys=True),
                datetime.now(timezone.utc).isoformat(timespec="seconds"),
            ),
        )
        run_id = int(cur.lastrowid)
        cur.executemany(
            "INSERT INTO run_outputs(run_id, path) VALUES (?, ?)",
            [(run_id, str(p)) for p in outputs],
        )
        self.conn.commit()
        return run_id

    def fetch_runs(
        self, limit: Optional[int] = None, command: Optional[str] = None, digest: Optional[str] = None
    ) -> List[Dict[str, Any]]:
        """
        Most recent runs first, metrics decoded and outputs attached.

        ``digest`` keeps only runs whose effective configuration hashed to it.
        """
        query = "SELECT * FROM runs"
        clauses: List[str] = []
        params: List[Any] = []
        if command is not None:
            clauses.append("command = ?")
            params.append(command)
        if digest is not None:
            clauses.append("config_digest = ?")
            params.append(digest)
        if clauses:
            query += " WHERE " + " AND ".join(clauses)
        query += " ORDER BY id DESC"
        if limit is not None:
            query += " LIMIT ?"
            params.append(int(limit))
        rows = [dict(r) for r in self.conn.execute(query, params).fetchall()]
        for row in rows:
            row["metrics"] = json.loads(row["metrics"])
            row["outputs"] = self.fetch_outputs(row["id"])
        return rows

    def fetch_outputs(self, run_id: int) -> List[str]:
        cur = self.conn.execute("SELECT path FROM run_outputs WHERE run_id = ? ORDER BY id", (run_id,))
        return [r["path"] for r in cur.fetchall()]
