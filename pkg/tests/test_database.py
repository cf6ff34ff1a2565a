# tests/test_database.py
import os
import tempfile

from entsep.db.database import Database, config_digest


def test_run_ledger_cycle():
    """
    A complete ledger test.

    Runs are stored with their outputs, listed newest first and found
    again by the digest of their configuration.
    """
    with tempfile.TemporaryDirectory() as tmp:
        # Use a temporary database file so tests do not affect real data
        path = os.path.join(tmp, "runs.sqlite3")
        db = Database(path)
        db.initialize()

        config = {"seed": 0, "mode": "k-sep"}
        first = db.save_run("decompose", 0, config, {"B": 0.25}, outputs=["rho.bsa.json"])
        second = db.save_run("benchmark", 1, {"seed": 1}, exit_code=1)
        assert second > first > 0

        runs = db.fetch_runs()
        assert [r["id"] for r in runs] == [second, first]
        assert runs[1]["metrics"] == {"B": 0.25}
        assert runs[1]["outputs"] == ["rho.bsa.json"]
        assert runs[0]["exit_code"] == 1

        # Filtering and limits
        assert [r["id"] for r in db.fetch_runs(command="decompose")] == [first]
        assert len(db.fetch_runs(limit=1)) == 1

        # The digest ignores key order
        matches = db.fetch_runs(digest=config_digest({"mode": "k-sep", "seed": 0}))
        assert [m["id"] for m in matches] == [first]
        assert matches[0]["metrics"] == {"B": 0.25}
        assert db.fetch_runs(command="benchmark", digest=config_digest(config)) == []
        db.close()

        # Reopening keeps the data
        db = Database(path)
        db.initialize()
        assert len(db.fetch_runs()) == 2
        db.close()


def test_in_memory_database_starts_empty():
    db = Database()
    db.initialize()

    assert db.fetch_runs() == []
    assert db.fetch_outputs(1) == []
    db.close()
