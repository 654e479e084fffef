"""Stand-in prover scripts for the subprocess protocol."""
import shlex
import sys

SCRIPTS = {
    "yes": "print('YES')\nprint('proof: by stub')",
    "no": "print('NO')",
    "maybe": "print()\nprint('MAYBE')",
    "timeout": "import time\ntime.sleep(30)",
    "garbage": "print('I think so')",
    "crash": "import sys\nsys.exit(4)",
    "echo": "import sys\nprint('YES' if 'STRATEGY OUTERMOST' in open(sys.argv[1]).read() else 'NO')",
}


def prover_command(tmp_path, kind):
    script = tmp_path / f"prover_{kind}.py"
    script.write_text(SCRIPTS[kind], encoding="utf-8")
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script))} {{}}"
