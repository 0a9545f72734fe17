"""
Run orchestrator - manages log lines and output artifacts.

CLI jobs write only the files they are asked for; study runs additionally
get a run directory holding status.json, logs.txt and their result files.
"""
import json
import os
import sys
from datetime import datetime
from typing import Any, Dict, List, Optional


def write_atomic(path: str, text: str) -> None:
    """Write to a temp file first, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    temp_path = path + ".tmp"
    with open(temp_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(temp_path, path)


class RunOrchestrator:
    """Manages run state, logs and artifacts."""

    def __init__(self, run_id: Optional[str] = None, base_dir: str = "runs", quiet: bool = False):
        self.run_id = run_id
        self.quiet = quiet
        self.run_dir = os.path.join(base_dir, run_id) if run_id else None
        if self.run_dir:
            os.makedirs(self.run_dir, exist_ok=True)

    def path(self, name: str) -> str:
        if not self.run_dir:
            raise ValueError("run has no directory")
        return os.path.join(self.run_dir, name)

    def write_status(self, stage: str, progress: Dict[str, Any] = None, errors: List[str] = None):
        """Write status.json with the current stage"""
        status = {
            "runId": self.run_id,
            "stage": stage,
            "progress": progress or {"done": 0, "total": 0, "current": None, "message": ""},
            "updatedAt": datetime.utcnow().isoformat() + "Z",
            "errors": errors or [],
        }
        write_atomic(self.path("status.json"), json.dumps(status, indent=2))

    def write_json(self, name: str, data: Any) -> str:
        path = self.path(name)
        write_atomic(path, json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
        return path

    def write_artifact(self, path: str, text: str) -> None:
        """Write a requested output file (certificate, block) and log it."""
        write_atomic(path, text)
        self.append_log(f"[OK] wrote {path}")

    def append_log(self, message: str):
        """Log to stderr and, for study runs, to logs.txt"""
        timestamp = datetime.utcnow().strftime("%Y-%m-%d %H:%M:%S")
        log_line = f"[{timestamp}] {message}"
        if self.run_dir:
            with open(self.path("logs.txt"), "a", encoding="utf-8") as f:
                f.write(log_line + "\n")
                f.flush()
        if not self.quiet:
            print(log_line, file=sys.stderr, flush=True)
