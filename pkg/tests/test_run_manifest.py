from __future__ import annotations

import json
from pathlib import Path

from antonov.core.observability import run_manifest


def test_register_run_writes_manifest_and_index(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(run_manifest, "get_app_state_dir", lambda: tmp_path)

    run_dir = run_manifest.register_run(
        run_id="steady-123",
        run_type="steady",
        spec={"depth": 1.0, "profile": {"kind": "polytrope", "k": 1.0}},
        artifacts={"steady": "/tmp/out/steady.json"},
    )

    manifest = run_dir / run_manifest.MANIFEST_NAME
    assert manifest.exists()
    assert run_manifest.get_run_folder("steady-123") == run_dir

    data = json.loads(manifest.read_text(encoding="utf-8"))
    assert data["run_type"] == "steady"
    assert data["config_hash"] == run_manifest.config_digest(data["spec"])
    assert "numpy" in data["env"]


def test_explicit_run_dir_is_indexed(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(run_manifest, "get_app_state_dir", lambda: tmp_path / "state")
    out = tmp_path / "out" / "bands"

    run_dir = run_manifest.register_run("bands-1", "bands", {"lmax": 6}, {}, run_dir=out)

    assert run_dir == out
    assert (out / run_manifest.MANIFEST_NAME).exists()
    assert run_manifest.get_run_folder("bands-1") == out


def test_unknown_run_is_none(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(run_manifest, "get_app_state_dir", lambda: tmp_path)
    assert run_manifest.get_run_folder("missing") is None
    assert run_manifest.get_run_folder(None) is None


def test_digest_ignores_key_order() -> None:
    a = run_manifest.config_digest({"lmax": 6, "depth": 1.0})
    b = run_manifest.config_digest({"depth": 1.0, "lmax": 6})
    assert a == b
    assert a != run_manifest.config_digest({"depth": 2.0, "lmax": 6})
