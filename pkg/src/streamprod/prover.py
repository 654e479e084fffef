"""Running an external outermost-termination prover on an exported problem."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

from .strategy import ProverAnswer

PLACEHOLDER = "{}"


def invoke_external_prover(command: str, problem: str, timeout: float = 60.0) -> ProverAnswer:
    """Run command (with {} standing for the problem file) and read YES, NO or
    MAYBE from the first non-empty line of its output."""
    argv = shlex.split(command)
    if not any(PLACEHOLDER in a for a in argv):
        raise ValueError(f"prover command {command!r} has no {PLACEHOLDER} placeholder")
    fd, path = tempfile.mkstemp(suffix=".trs", prefix="streamprod-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(problem)
        argv = [a.replace(PLACEHOLDER, path) for a in argv]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return ProverAnswer("error", f"timeout after {timeout:g}s")
        except OSError as e:
            return ProverAnswer("error", f"could not start prover: {e}")
    finally:
        os.unlink(path)
    first = next((ln.strip() for ln in proc.stdout.splitlines() if ln.strip()), "")
    token = first.split()[0].upper() if first else ""
    if token in ("YES", "NO", "MAYBE"):
        return ProverAnswer(token.lower(), proc.stdout.strip())
    detail = f"unrecognised output {first!r}" if first else "no output"
    if proc.returncode:
        detail += f" (exit status {proc.returncode})"
    return ProverAnswer("error", detail)
