"""Minimal external generator for the stdio protocol.

Reads {"context": ...} lines and answers {"output": "none"}; a starting
point for wrapping a real model:

    tabledst track --corpus corpus.jsonl --generator "exec:python scripts/echo_generator.py" --out run.jsonl
"""

import json
import sys


def respond(context: str) -> str:
    return "none"


for line in sys.stdin:
    request = json.loads(line)
    print(json.dumps({"output": respond(request["context"])}), flush=True)
